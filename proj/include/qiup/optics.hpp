#pragma once
#include <optional>
#include <string>
#include <vector>

namespace qiup {

/// Physical parameters of the two-crystal imaging setup. All lengths in metres.
struct SetupParams {
  double lambda_d{810e-9}; ///< detected-photon wavelength
  double lambda_u{1550e-9}; ///< undetected (object-probing) wavelength
  double f_c{150e-3};       ///< camera lens focal length
  double f_u{75e-3};        ///< undetected-arm lens focal length
  double w_p{300e-6};       ///< pump waist at the crystals
  struct HalfExtent {
    double x;
    double y;
  };
  std::optional<HalfExtent> crystal_half_extent; ///< transverse half-size of the crystal
};

/// Validated, immutable setup. Construction throws InputError on non-positive
/// lengths and records a warning when the pump waist exceeds the crystal.
class SetupConfig {
public:
  explicit SetupConfig(const SetupParams &params);

  double lambda_d() const { return p_.lambda_d; }
  double lambda_u() const { return p_.lambda_u; }
  double f_c() const { return p_.f_c; }
  double f_u() const { return p_.f_u; }
  double w_p() const { return p_.w_p; }
  const std::optional<SetupParams::HalfExtent> &crystal_half_extent() const {
    return p_.crystal_half_extent;
  }
  const SetupParams &params() const { return p_; }
  const std::vector<std::string> &warnings() const { return warnings_; }

  SetupConfig with_pump_waist(double w_p) const;
  SetupConfig with_wavelengths(double lambda_d, double lambda_u) const;

private:
  SetupParams p_;
  std::vector<std::string> warnings_;
};

/// Transverse wave vector [rad/m].
struct MomentumVector {
  double qx{0.0};
  double qy{0.0};

  friend MomentumVector operator+(MomentumVector a, MomentumVector b) {
    return {a.qx + b.qx, a.qy + b.qy};
  }
  friend MomentumVector operator*(double s, MomentumVector a) { return {s * a.qx, s * a.qy}; }
};

enum class Plane { object, camera };

/// Transverse position in a named plane [m].
struct PlanePoint {
  Plane plane{Plane::camera};
  double x{0.0};
  double y{0.0};
};

/// Setups used throughout: (810 nm detected, 1550 nm probe) and (842 nm, 780 nm),
/// f_c = 150 mm, f_u = 75 mm.
SetupConfig setup_one(double w_p);
SetupConfig setup_two(double w_p);

/// M = f_c*lambda_d / (f_u*lambda_u).
double magnification(const SetupConfig &setup);

/// Camera-plane ESF width f_c*lambda_d / (sqrt(2)*pi*w_p).
double sigma_camera(const SetupConfig &setup);

/// Object-plane resolution f_u*lambda_u / (sqrt(2)*pi*w_p).
double sigma_object(const SetupConfig &setup);

/// 1/e half-width of the object-plane kernel exp(-dx^2/sigma_o^2).
double object_kernel_width(const SetupConfig &setup);

/// Far-field lens mapping r = f*lambda*q/(2*pi); camera uses (f_c, lambda_d),
/// object uses (f_u, lambda_u).
PlanePoint position_from_momentum(MomentumVector q, Plane plane, const SetupConfig &setup);

/// Inverse of position_from_momentum for the point's own plane.
MomentumVector momentum_from_position(PlanePoint r, const SetupConfig &setup);

/// Unnormalised conditional density exp(-|q_d + q_u|^2 w_p^2 / 2); peak value 1.
double conditional_momentum_pdf(MomentumVector q_d, MomentumVector q_u, const SetupConfig &setup);

} // namespace qiup
