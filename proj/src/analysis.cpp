#include "qiup/analysis.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace qiup {

std::vector<EsfSweepRow> esf_sigma_sweep(const SetupConfig &setup, const std::vector<double> &w_p_list,
                                         const PipelineOptions &options) {
  std::vector<EsfSweepRow> rows;
  for (double w_p : w_p_list) {
    const SetupConfig s = setup.with_pump_waist(w_p);
    const EsfFit fit = fit_esf(knife_edge_run(s, options).profile);
    const double m = magnification(s);
    rows.push_back({w_p, fit.sigma, fit.sigma_stderr, fit.sigma / m, sigma_camera(s), sigma_object(s)});
  }
  return rows;
}

TwoSlitMetrics metrics_from_levels(double v_peak, double v_dip, double threshold) {
  TwoSlitMetrics m;
  m.v_peak = v_peak;
  m.v_dip = v_dip;
  m.ratio = v_peak > 0.0 ? v_dip / v_peak : 1.0;
  m.contrast = v_peak + v_dip > 0.0 ? (v_peak - v_dip) / (v_peak + v_dip) : 0.0;
  m.resolved = m.ratio <= threshold;
  return m;
}

namespace {

std::vector<double> moving_average(const std::vector<double> &v, std::size_t half) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t a = i >= half ? i - half : 0;
    const std::size_t b = std::min(v.size() - 1, i + half);
    double s = 0.0;
    for (std::size_t k = a; k <= b; ++k)
      s += v[k];
    out[i] = s / static_cast<double>(b - a + 1);
  }
  return out;
}

// Interior local maxima; a flat run counts once, at its middle.
std::vector<std::size_t> local_maxima(const std::vector<double> &v) {
  std::vector<std::size_t> peaks;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i])
      ++j;
    if (i > 0 && j + 1 < v.size() && v[i - 1] < v[i] && v[j + 1] < v[i])
      peaks.push_back((i + j) / 2);
    i = j + 1;
  }
  return peaks;
}

} // namespace

TwoSlitMetrics two_slit_metrics(const Profile &profile, std::size_t smoothing_half_width, double threshold) {
  if (profile.v.size() < 3)
    throw InputError("two_slit_metrics: profile too short");
  const std::vector<double> s = moving_average(profile.v, smoothing_half_width);
  const std::vector<std::size_t> peaks = local_maxima(s);
  if (peaks.size() < 2) {
    const double top = *std::max_element(s.begin(), s.end());
    TwoSlitMetrics m = metrics_from_levels(top, top, threshold);
    m.ratio = 1.0;
    m.contrast = 0.0;
    m.resolved = false;
    m.no_dip = true;
    return m;
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k + 1 < peaks.size(); ++k)
    if (s[peaks[k]] + s[peaks[k + 1]] > s[peaks[best]] + s[peaks[best + 1]])
      best = k;
  const std::size_t a = peaks[best], b = peaks[best + 1];
  const auto dip = std::min_element(s.begin() + static_cast<std::ptrdiff_t>(a),
                                    s.begin() + static_cast<std::ptrdiff_t>(b) + 1);
  TwoSlitMetrics m = metrics_from_levels(0.5 * (s[a] + s[b]), *dip, threshold);
  m.dip_index = static_cast<std::size_t>(dip - s.begin());
  return m;
}

double triplet_ratio(const SetupConfig &setup, double line_width, const PipelineOptions &options) {
  return two_slit_metrics(bar_triplet_profile(setup, line_width, options)).ratio;
}

LinewidthResult min_resolvable_linewidth(const SetupConfig &setup, double threshold,
                                         const PipelineOptions &options, bool pick_chart_element) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw InputError(fmt::format("resolution threshold must lie in (0, 1), got {}", threshold));
  const double so = object_kernel_width(setup);
  const auto ratio = [&](double w) { return triplet_ratio(setup, w, options); };

  double lo = 0.5 * so, hi = 3.0 * so;
  for (int k = 0; ratio(lo) <= threshold; ++k) {
    if (k == 10)
      throw NumericError("min_resolvable_linewidth: cannot bracket the threshold from below");
    lo *= 0.5;
  }
  for (int k = 0; ratio(hi) > threshold; ++k) {
    if (k == 10)
      throw NumericError("min_resolvable_linewidth: cannot bracket the threshold from above");
    hi *= 2.0;
  }

  LinewidthResult result;
  while (hi - lo > 1e-4 * so) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) > threshold)
      lo = mid;
    else
      hi = mid;
    ++result.bisection_steps;
  }
  result.line_width = 0.5 * (lo + hi);

  if (pick_chart_element) {
    // Finest chart element at or above the crossing that measures below threshold.
    std::vector<UsafPick> chart;
    for (int g = -2; g <= 9; ++g)
      for (int e = 1; e <= 6; ++e)
        chart.push_back({g, e, UsafTriplet{g, e, BarOrientation::vertical}.line_width(), 1.0});
    std::sort(chart.begin(), chart.end(),
              [](const UsafPick &a, const UsafPick &b) { return a.line_width < b.line_width; });
    for (UsafPick &pick : chart) {
      if (pick.line_width < result.line_width)
        continue;
      pick.ratio = ratio(pick.line_width);
      if (pick.ratio < threshold) {
        result.nearest_element = pick;
        break;
      }
    }
  }
  return result;
}

MagnificationEstimate measure_magnification(const ReconstructedImage &image, double known_feature_size,
                                            std::optional<std::size_t> row) {
  if (!(known_feature_size > 0.0))
    throw InputError("measure_magnification: feature size must be positive");
  const std::size_t iy = row.value_or(image.grid.ny / 2);
  const Profile p = row_profile(image.visibility, image.grid, iy);
  const double top = *std::max_element(p.v.begin(), p.v.end());
  const auto above = [&](std::size_t i) { return p.v[i] >= 0.5 * top; };
  std::size_t first = p.v.size(), last = 0;
  for (std::size_t i = 0; i < p.v.size(); ++i)
    if (above(i)) {
      first = std::min(first, i);
      last = i;
    }
  if (!(top > 0.0) || first >= last || first == 0 || last + 1 == p.v.size())
    throw NumericError("measure_magnification: feature edges not detected in the cross-section");

  const std::size_t split = (first + last) / 2;
  Profile left, right;
  left.x.assign(p.x.begin(), p.x.begin() + static_cast<std::ptrdiff_t>(split) + 1);
  left.v.assign(p.v.begin(), p.v.begin() + static_cast<std::ptrdiff_t>(split) + 1);
  right.x.assign(p.x.begin() + static_cast<std::ptrdiff_t>(split), p.x.end());
  right.v.assign(p.v.begin() + static_cast<std::ptrdiff_t>(split), p.v.end());
  const EsfFit fl = fit_esf(left);
  const EsfFit fr = fit_esf(right);

  MagnificationEstimate est;
  est.left_edge = fl.edge_position;
  est.right_edge = fr.edge_position;
  est.magnification = std::abs(fr.edge_position - fl.edge_position) / known_feature_size;
  est.uncertainty = std::hypot(fl.edge_stderr, fr.edge_stderr) / known_feature_size;
  return est;
}

EsfFit phase_edge_sigma(const SetupConfig &setup, const PipelineOptions &options, double delta) {
  return fit_esf(phase_edge_run(setup, delta, options).profile);
}

} // namespace qiup
