#include "qiup/optics.hpp"
#include "qiup/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace qiup {

namespace {

void require_positive(double v, const char *name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InputError(fmt::format("setup: {} must be a positive length, got {}", name, v));
}

} // namespace

SetupConfig::SetupConfig(const SetupParams &params) : p_(params) {
  require_positive(p_.lambda_d, "lambda_d");
  require_positive(p_.lambda_u, "lambda_u");
  require_positive(p_.f_c, "f_c");
  require_positive(p_.f_u, "f_u");
  require_positive(p_.w_p, "w_p");
  if (p_.crystal_half_extent) {
    require_positive(p_.crystal_half_extent->x, "crystal_half_x");
    require_positive(p_.crystal_half_extent->y, "crystal_half_y");
    const double smaller = std::min(p_.crystal_half_extent->x, p_.crystal_half_extent->y);
    if (p_.w_p > smaller)
      warnings_.push_back(fmt::format(
          "pump waist {:.4g} um exceeds the smaller crystal half-extent {:.4g} um", p_.w_p * 1e6,
          smaller * 1e6));
  }
}

SetupConfig SetupConfig::with_pump_waist(double w_p) const {
  SetupParams p = p_;
  p.w_p = w_p;
  return SetupConfig(p);
}

SetupConfig SetupConfig::with_wavelengths(double lambda_d, double lambda_u) const {
  SetupParams p = p_;
  p.lambda_d = lambda_d;
  p.lambda_u = lambda_u;
  return SetupConfig(p);
}

SetupConfig setup_one(double w_p) {
  return SetupConfig(SetupParams{810e-9, 1550e-9, 150e-3, 75e-3, w_p, std::nullopt});
}

SetupConfig setup_two(double w_p) {
  return SetupConfig(SetupParams{842e-9, 780e-9, 150e-3, 75e-3, w_p, std::nullopt});
}

double magnification(const SetupConfig &s) {
  return (s.f_c() * s.lambda_d()) / (s.f_u() * s.lambda_u());
}

double sigma_camera(const SetupConfig &s) {
  return s.f_c() * s.lambda_d() / (std::numbers::sqrt2 * std::numbers::pi * s.w_p());
}

double sigma_object(const SetupConfig &s) {
  return s.f_u() * s.lambda_u() / (std::numbers::sqrt2 * std::numbers::pi * s.w_p());
}

double object_kernel_width(const SetupConfig &s) { return sigma_object(s); }

namespace {

double lens_scale(Plane plane, const SetupConfig &s) {
  return plane == Plane::camera ? s.f_c() * s.lambda_d() / (2.0 * std::numbers::pi)
                                : s.f_u() * s.lambda_u() / (2.0 * std::numbers::pi);
}

} // namespace

PlanePoint position_from_momentum(MomentumVector q, Plane plane, const SetupConfig &setup) {
  const double k = lens_scale(plane, setup);
  return {plane, k * q.qx, k * q.qy};
}

MomentumVector momentum_from_position(PlanePoint r, const SetupConfig &setup) {
  const double k = lens_scale(r.plane, setup);
  return {r.x / k, r.y / k};
}

double conditional_momentum_pdf(MomentumVector q_d, MomentumVector q_u, const SetupConfig &setup) {
  const MomentumVector q_p = q_d + q_u;
  const double w = setup.w_p();
  return std::exp(-(q_p.qx * q_p.qx + q_p.qy * q_p.qy) * w * w / 2.0);
}

} // namespace qiup
