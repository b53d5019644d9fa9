#pragma once
#include "qiup/acquisition.hpp"
#include "qiup/optics.hpp"
#include "qiup/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qiup {

enum class ObjectType { knife_edge, point_pair, usaf, phase_edge, raster, rectangle };

/// Object description from the config file; unset fields take scenario defaults.
struct ObjectSpec {
  std::optional<ObjectType> type;
  std::optional<double> edge_position;
  std::optional<double> separation;
  std::optional<int> usaf_group;
  std::optional<int> usaf_element;
  BarOrientation usaf_orientation{BarOrientation::vertical};
  std::optional<double> phase_step;
  std::optional<std::filesystem::path> raster_path;
  std::optional<double> raster_width;
  RasterMode raster_mode{RasterMode::amplitude};
  std::optional<double> feature_width;
  std::optional<double> feature_height;
};

/// Validated run description. Optional setup fields fall back to the
/// scenario's default setup.
struct RunConfig {
  std::string scenario;
  std::optional<double> lambda_d, lambda_u, f_c, f_u, w_p;
  std::optional<double> crystal_half_x, crystal_half_y;
  std::vector<double> w_p_list;
  ObjectSpec object;
  std::optional<double> camera_pitch;
  std::optional<std::size_t> camera_nx, camera_ny;
  std::size_t n_phases{kDefaultPhaseSteps};
  NoiseModel noise{};
  std::uint64_t seed{0};
  std::filesystem::path output_dir{"qiup-out"};
  unsigned threads{1};
  bool emit_frames{false};
  bool upright{true};
  double threshold{0.81};

  /// Defaults overridden by every setup field present in the config.
  SetupConfig setup(const SetupParams &defaults) const;

  /// Canonical text of every setting that affects results (not the output
  /// directory, thread count, seed or frame emission).
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Parses a length with a mandatory unit suffix (nm, um, µm, mm, m) into metres.
std::optional<double> parse_length(std::string_view text);

/// Reads flat `key = value` lines ('#' starts a comment). Throws InputError
/// naming the line for unknown keys, unit-less lengths and bad values.
RunConfig parse_config(const std::filesystem::path &path);

/// parse_config without the cross-field checks, for callers that still
/// override fields (relative raster paths resolve against the file's directory).
RunConfig read_config(const std::filesystem::path &path);

/// Same, from text; `source` names the origin in error messages.
RunConfig parse_config_text(std::string_view text, std::string_view source = "<config>");

/// Checks cross-field constraints (scenario registered, raster exists, ...).
void validate(const RunConfig &config);

} // namespace qiup
