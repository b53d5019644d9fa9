#pragma once
#include "qiup/acquisition.hpp"
#include "qiup/optics.hpp"
#include "qiup/pipeline.hpp"
#include "qiup/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qiup {

/// Two adjacent features count as resolved when dip/peak <= 0.81.
inline constexpr double kRayleighThreshold = 0.81;

/// Fit of v(x) = baseline + swing * (1 - erf((x - edge_position)/sigma)) / 2.
struct EsfFit {
  double sigma{0.0};
  double edge_position{0.0};
  double baseline{0.0}; ///< level for x -> +inf
  double plateau{0.0};  ///< level for x -> -inf
  double residual_rms{0.0};
  double sigma_stderr{0.0};
  double edge_stderr{0.0};
  int iterations{0};
  bool converged{false};

  double model(double x) const;
  /// Position of the fitted curve between baseline (0) and plateau (1).
  double fraction_at(double x) const;
};

struct EsfFitOptions {
  int max_iterations{100};
  double relative_step_tolerance{1e-9};
  double min_swing_fraction{0.05};
};

/// Bounded Gauss-Newton (Levenberg-Marquardt damped) erf fit started from the
/// profile's 24 %/76 % crossings. Works for rising and falling edges.
/// Throws NumericError when no edge is present or the fit does not converge.
EsfFit fit_esf(const Profile &profile, const EsfFitOptions &options = {});

struct EsfSweepRow {
  double w_p{0.0};
  double sigma{0.0};
  double sigma_stderr{0.0};
  double sigma_over_m{0.0};
  double sigma_theory{0.0};
  double sigma_over_m_theory{0.0};
};

/// Knife-edge pipeline and ESF fit for each pump waist.
std::vector<EsfSweepRow> esf_sigma_sweep(const SetupConfig &setup, const std::vector<double> &w_p_list,
                                         const PipelineOptions &options = {});

struct TwoSlitMetrics {
  double v_peak{0.0};
  double v_dip{0.0};
  double ratio{1.0};    ///< R = v_dip / v_peak
  double contrast{0.0}; ///< C = (v_peak - v_dip) / (v_peak + v_dip)
  bool resolved{false};
  bool no_dip{false};
  std::size_t dip_index{0};
};

/// R and C of a double-humped cross-section after a moving average of the
/// given half-width. A profile without two maxima yields R = 1, no_dip.
TwoSlitMetrics two_slit_metrics(const Profile &profile, std::size_t smoothing_half_width = 1,
                                double threshold = kRayleighThreshold);

/// Metrics from already extracted peak and dip values.
TwoSlitMetrics metrics_from_levels(double v_peak, double v_dip, double threshold = kRayleighThreshold);

/// R(w) of a bar triplet of line width w through the full pipeline.
double triplet_ratio(const SetupConfig &setup, double line_width, const PipelineOptions &options = {});

struct UsafPick {
  int group{0};
  int element{1};
  double line_width{0.0};
  double ratio{1.0};
};

struct LinewidthResult {
  double line_width{0.0}; ///< continuous crossing of R(w) = threshold [m]
  int bisection_steps{0};
  std::optional<UsafPick> nearest_element; ///< finest chart element with R < threshold
};

/// Bisection on R(w) for the linewidth where two adjacent bars are just resolved.
/// Uses the pump waist of `setup`. Throws InputError if threshold is outside (0, 1).
LinewidthResult min_resolvable_linewidth(const SetupConfig &setup, double threshold = kRayleighThreshold,
                                         const PipelineOptions &options = {},
                                         bool pick_chart_element = true);

struct MagnificationEstimate {
  double magnification{0.0};
  double uncertainty{0.0};
  double left_edge{0.0};
  double right_edge{0.0};
};

/// Edge-to-edge distance of a feature of known object size divided by that
/// size, from erf fits of both edges on the given row (default: middle row).
/// Throws NumericError when two edges are not found.
MagnificationEstimate measure_magnification(const ReconstructedImage &image, double known_feature_size,
                                            std::optional<std::size_t> row = std::nullopt);

/// pi phase edge through the pipeline; erf fit of the interference-term
/// cross-section. `delta` other than pi is accepted for diagnostics.
EsfFit phase_edge_sigma(const SetupConfig &setup, const PipelineOptions &options = {},
                        double delta = 3.141592653589793);

} // namespace qiup
