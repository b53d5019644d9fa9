#include "qiup/analysis.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace qiup {

double EsfFit::fraction_at(double x) const {
  return 0.5 * (1.0 - std::erf((x - edge_position) / sigma));
}

double EsfFit::model(double x) const { return baseline + (plateau - baseline) * fraction_at(x); }

namespace {

// Linear interpolation of the first crossing of `level` by f, scanning outward
// from index `from` in direction `dir`.
std::optional<double> crossing(const std::vector<double> &x, const std::vector<double> &f, double level,
                               std::size_t from, int dir) {
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(from);
       i + dir >= 0 && i + dir < static_cast<std::ptrdiff_t>(x.size()); i += dir) {
    const double a = f[i] - level, b = f[i + dir] - level;
    if (a == 0.0)
      return x[i];
    if (a * b < 0.0)
      return x[i] + (x[i + dir] - x[i]) * a / (a - b);
  }
  return std::nullopt;
}

struct Eval {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  double sse{0.0};
};

// Parameters (a, b, c, s) in coordinates t = (x - centre)/scale.
Eval evaluate(const Eigen::VectorXd &t, const Eigen::VectorXd &v, const Eigen::Vector4d &p) {
  const Eigen::Index n = t.size();
  Eval e{Eigen::VectorXd(n), Eigen::MatrixXd(n, 4), 0.0};
  const double a = p(0), b = p(1), c = p(2), s = p(3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (t(i) - c) / s;
    const double frac = 0.5 * (1.0 - std::erf(u));
    const double g = std::exp(-u * u) / std::sqrt(std::numbers::pi);
    e.residual(i) = v(i) - (a + b * frac);
    e.jacobian(i, 0) = 1.0;
    e.jacobian(i, 1) = frac;
    e.jacobian(i, 2) = b * g / s;
    e.jacobian(i, 3) = b * g * u / s;
  }
  e.sse = e.residual.squaredNorm();
  return e;
}

} // namespace

EsfFit fit_esf(const Profile &profile, const EsfFitOptions &options) {
  if (profile.x.size() != profile.v.size())
    throw InputError("fit_esf: coordinate and value arrays differ in length");
  const std::size_t n = profile.x.size();
  if (n < 8)
    throw InputError(fmt::format("fit_esf: need at least 8 samples, got {}", n));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return profile.x[i] < profile.x[j]; });
  std::vector<double> x(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = profile.x[order[i]];
    v[i] = profile.v[order[i]];
    if (!std::isfinite(x[i]) || !std::isfinite(v[i]))
      throw InputError("fit_esf: profile contains non-finite samples");
  }

  const std::size_t tail = std::max<std::size_t>(3, n / 10);
  const double left = std::accumulate(v.begin(), v.begin() + tail, 0.0) / tail;
  const double right = std::accumulate(v.end() - tail, v.end(), 0.0) / tail;
  const double level = std::max(std::abs(left), std::abs(right));
  if (!(std::abs(left - right) >= options.min_swing_fraction * level) || level == 0.0)
    throw NumericError(fmt::format("fit_esf: no edge in profile (levels {:.6g} -> {:.6g})", left, right));

  // Normalised so the left plateau is 1 and the right 0.
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i)
    f[i] = (v[i] - right) / (left - right);
  const auto mid = crossing(x, f, 0.5, 0, 1);
  if (!mid)
    throw NumericError("fit_esf: profile never crosses its half level");
  const auto mid_index = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), *mid) - x.begin());
  const auto hi_cross = crossing(x, f, 0.76, std::min(mid_index, n - 1), -1);
  const auto lo_cross = crossing(x, f, 0.24, mid_index > 0 ? mid_index - 1 : 0, 1);
  double scale = (x.back() - x.front()) / 10.0;
  if (hi_cross && lo_cross && *lo_cross > *hi_cross)
    scale = *lo_cross - *hi_cross;
  const double centre = *mid;

  Eigen::VectorXd t(n), vv(n);
  for (std::size_t i = 0; i < n; ++i) {
    t(i) = (x[i] - centre) / scale;
    vv(i) = v[i];
  }
  Eigen::Vector4d p(right, left - right, 0.0, 1.0);
  Eval cur = evaluate(t, vv, p);
  double lambda = 1e-3;
  bool converged = cur.sse == 0.0;
  int iter = 0;
  while (!converged && iter < options.max_iterations) {
    ++iter;
    const Eigen::Matrix4d jtj = cur.jacobian.transpose() * cur.jacobian;
    const Eigen::Vector4d g = cur.jacobian.transpose() * cur.residual;
    bool accepted = false;
    while (!accepted && lambda < 1e16) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const Eigen::Vector4d step = damped.ldlt().solve(g);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      if (step.norm() <= options.relative_step_tolerance * (p.norm() + options.relative_step_tolerance)) {
        converged = true;
        break;
      }
      const Eigen::Vector4d trial = p + step;
      if (trial(3) <= 0.0) {
        lambda *= 10.0;
        continue;
      }
      Eval next = evaluate(t, vv, trial);
      if (next.sse <= cur.sse) {
        p = trial;
        cur = std::move(next);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted && !converged)
      converged = true; // no descent direction left: stationary point
  }
  if (!converged)
    throw NumericError(fmt::format(
        "fit_esf: no convergence after {} iterations (last iterate: baseline {:.6g}, swing {:.6g}, "
        "edge {:.6g} um, sigma {:.6g} um)",
        iter, p(0), p(1), (centre + p(2) * scale) * 1e6, p(3) * scale * 1e6));

  EsfFit fit;
  fit.baseline = p(0);
  fit.plateau = p(0) + p(1);
  fit.edge_position = centre + p(2) * scale;
  fit.sigma = p(3) * scale;
  fit.residual_rms = std::sqrt(cur.sse / static_cast<double>(n));
  fit.iterations = iter;
  fit.converged = true;
  const Eigen::Matrix4d jtj = cur.jacobian.transpose() * cur.jacobian;
  const Eigen::Matrix4d cov = jtj.inverse() * (cur.sse / static_cast<double>(n - 4));
  fit.sigma_stderr = std::sqrt(std::max(0.0, cov(3, 3))) * scale;
  fit.edge_stderr = std::sqrt(std::max(0.0, cov(2, 2))) * scale;
  return fit;
}

} // namespace qiup
