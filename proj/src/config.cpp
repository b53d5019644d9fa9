#include "qiup/config.hpp"
#include "qiup/error.hpp"
#include "qiup/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace qiup {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
  s = trim(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

struct LineError {
  std::size_t line;
  std::string key;
  std::string message;
};

} // namespace

std::optional<double> parse_length(std::string_view text) {
  text = trim(text);
  static const std::pair<std::string_view, double> units[] = {
      {"nm", 1e-9}, {"um", 1e-6}, {"\xC2\xB5m", 1e-6}, {"mm", 1e-3}, {"m", 1.0}};
  for (const auto &[suffix, scale] : units) {
    if (text.size() > suffix.size() && text.substr(text.size() - suffix.size()) == suffix) {
      const auto number = parse_double(text.substr(0, text.size() - suffix.size()));
      if (!number)
        return std::nullopt;
      return *number * scale;
    }
  }
  return std::nullopt;
}

SetupConfig RunConfig::setup(const SetupParams &defaults) const {
  SetupParams p = defaults;
  if (lambda_d)
    p.lambda_d = *lambda_d;
  if (lambda_u)
    p.lambda_u = *lambda_u;
  if (f_c)
    p.f_c = *f_c;
  if (f_u)
    p.f_u = *f_u;
  if (w_p)
    p.w_p = *w_p;
  if (crystal_half_x || crystal_half_y) {
    const double x = crystal_half_x.value_or(crystal_half_y.value_or(0.0));
    const double y = crystal_half_y.value_or(x);
    p.crystal_half_extent = SetupParams::HalfExtent{x, y};
  }
  return SetupConfig(p);
}

std::string RunConfig::canonical() const {
  std::string out;
  const auto put = [&out](std::string_view key, const std::string &value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  const auto num = [](double v) { return fmt::format("{:.17g}", v); };
  const auto opt = [&](std::string_view key, const std::optional<double> &v) {
    if (v)
      put(key, num(*v));
  };
  put("scenario", scenario);
  opt("lambda_d", lambda_d);
  opt("lambda_u", lambda_u);
  opt("f_c", f_c);
  opt("f_u", f_u);
  opt("w_p", w_p);
  opt("crystal_half_x", crystal_half_x);
  opt("crystal_half_y", crystal_half_y);
  if (!w_p_list.empty()) {
    std::string list;
    for (double w : w_p_list)
      list += (list.empty() ? "" : ",") + num(w);
    put("w_p_list", list);
  }
  static const char *type_names[] = {"knife_edge", "point_pair", "usaf", "phase_edge", "raster", "rectangle"};
  if (object.type)
    put("object", type_names[static_cast<int>(*object.type)]);
  opt("edge_position", object.edge_position);
  opt("separation", object.separation);
  if (object.usaf_group)
    put("usaf_group", std::to_string(*object.usaf_group));
  if (object.usaf_element)
    put("usaf_element", std::to_string(*object.usaf_element));
  put("usaf_orientation", object.usaf_orientation == BarOrientation::vertical ? "vertical" : "horizontal");
  opt("phase_step", object.phase_step);
  if (object.raster_path)
    put("raster_path", object.raster_path->generic_string());
  opt("raster_width", object.raster_width);
  put("raster_mode", object.raster_mode == RasterMode::amplitude ? "amplitude" : "phase");
  opt("feature_width", object.feature_width);
  opt("feature_height", object.feature_height);
  opt("camera_pitch", camera_pitch);
  if (camera_nx)
    put("camera_nx", std::to_string(*camera_nx));
  if (camera_ny)
    put("camera_ny", std::to_string(*camera_ny));
  put("n_phases", std::to_string(n_phases));
  put("noise", noise.kind == NoiseModel::Kind::none ? "none" : "poisson");
  if (noise.kind == NoiseModel::Kind::poisson)
    put("mean_counts", num(noise.mean_counts));
  put("display_orientation", upright ? "upright" : "physical");
  put("threshold", num(threshold));
  return out;
}

std::uint64_t RunConfig::hash() const {
  // FNV-1a over the canonical text; stable across platforms and builds.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunConfig parse_config_text(std::string_view text, std::string_view source) {
  RunConfig cfg;
  std::vector<LineError> errors;
  std::vector<std::pair<std::size_t, std::string>> unknown;
  std::set<std::string> seen;
  bool have_mean_counts = false;

  using Handler = std::function<std::optional<std::string>(std::string_view)>;
  const auto length_into = [](std::optional<double> &dst) -> Handler {
    return [&dst](std::string_view v) -> std::optional<std::string> {
      const auto len = parse_length(v);
      if (!len)
        return fmt::format("expected a length with unit nm|um|mm|m, got '{}'", v);
      dst = *len;
      return std::nullopt;
    };
  };
  const auto count_into = [](auto &dst, long long min) -> Handler {
    return [&dst, min](std::string_view v) -> std::optional<std::string> {
      const auto n = parse_int<long long>(v);
      if (!n || *n < min)
        return fmt::format("expected an integer >= {}, got '{}'", min, v);
      dst = static_cast<std::remove_reference_t<decltype(*&dst)>>(*n);
      return std::nullopt;
    };
  };

  std::optional<std::size_t> n_phases, camera_nx, camera_ny;
  std::optional<int> group, element;
  std::optional<unsigned> threads;

  const std::map<std::string, Handler, std::less<>> handlers = {
      {"scenario", [&](std::string_view v) -> std::optional<std::string> {
         cfg.scenario = std::string(v);
         return std::nullopt;
       }},
      {"lambda_d", length_into(cfg.lambda_d)},
      {"lambda_u", length_into(cfg.lambda_u)},
      {"f_c", length_into(cfg.f_c)},
      {"f_u", length_into(cfg.f_u)},
      {"w_p", length_into(cfg.w_p)},
      {"crystal_half_x", length_into(cfg.crystal_half_x)},
      {"crystal_half_y", length_into(cfg.crystal_half_y)},
      {"w_p_list", [&](std::string_view v) -> std::optional<std::string> {
         cfg.w_p_list.clear();
         std::size_t pos = 0;
         while (pos <= v.size()) {
           const auto comma = v.find(',', pos);
           const auto item = trim(v.substr(pos, comma == std::string_view::npos ? v.npos : comma - pos));
           const auto len = parse_length(item);
           if (!len)
             return fmt::format("list item '{}' is not a length with unit nm|um|mm|m", item);
           cfg.w_p_list.push_back(*len);
           if (comma == std::string_view::npos)
             break;
           pos = comma + 1;
         }
         return std::nullopt;
       }},
      {"object", [&](std::string_view v) -> std::optional<std::string> {
         static const std::map<std::string, ObjectType, std::less<>> types = {
             {"knife_edge", ObjectType::knife_edge}, {"point_pair", ObjectType::point_pair},
             {"usaf", ObjectType::usaf},             {"phase_edge", ObjectType::phase_edge},
             {"raster", ObjectType::raster},         {"rectangle", ObjectType::rectangle}};
         const auto it = types.find(v);
         if (it == types.end())
           return fmt::format("unknown object type '{}'", v);
         cfg.object.type = it->second;
         return std::nullopt;
       }},
      {"edge_position", length_into(cfg.object.edge_position)},
      {"separation", length_into(cfg.object.separation)},
      {"usaf_group", count_into(group, -10)},
      {"usaf_element", count_into(element, 1)},
      {"usaf_orientation", [&](std::string_view v) -> std::optional<std::string> {
         if (v == "vertical")
           cfg.object.usaf_orientation = BarOrientation::vertical;
         else if (v == "horizontal")
           cfg.object.usaf_orientation = BarOrientation::horizontal;
         else
           return fmt::format("expected vertical|horizontal, got '{}'", v);
         return std::nullopt;
       }},
      {"phase_step", [&](std::string_view v) -> std::optional<std::string> {
         const auto d = parse_double(v);
         if (!d)
           return fmt::format("expected an angle in radians, got '{}'", v);
         cfg.object.phase_step = *d;
         return std::nullopt;
       }},
      {"raster_path", [&](std::string_view v) -> std::optional<std::string> {
         cfg.object.raster_path = std::filesystem::path(std::string(v));
         return std::nullopt;
       }},
      {"raster_width", length_into(cfg.object.raster_width)},
      {"raster_mode", [&](std::string_view v) -> std::optional<std::string> {
         if (v == "amplitude")
           cfg.object.raster_mode = RasterMode::amplitude;
         else if (v == "phase")
           cfg.object.raster_mode = RasterMode::phase;
         else
           return fmt::format("expected amplitude|phase, got '{}'", v);
         return std::nullopt;
       }},
      {"feature_width", length_into(cfg.object.feature_width)},
      {"feature_height", length_into(cfg.object.feature_height)},
      {"camera_pitch", length_into(cfg.camera_pitch)},
      {"camera_nx", count_into(camera_nx, 1)},
      {"camera_ny", count_into(camera_ny, 1)},
      {"n_phases", count_into(n_phases, 3)},
      {"noise", [&](std::string_view v) -> std::optional<std::string> {
         if (v == "none")
           cfg.noise.kind = NoiseModel::Kind::none;
         else if (v == "poisson")
           cfg.noise.kind = NoiseModel::Kind::poisson;
         else
           return fmt::format("expected none|poisson, got '{}'", v);
         return std::nullopt;
       }},
      {"mean_counts", [&](std::string_view v) -> std::optional<std::string> {
         const auto d = parse_double(v);
         if (!d || !(*d > 0.0))
           return fmt::format("expected a positive count, got '{}'", v);
         cfg.noise.mean_counts = *d;
         have_mean_counts = true;
         return std::nullopt;
       }},
      {"seed", [&](std::string_view v) -> std::optional<std::string> {
         const auto s = parse_int<std::uint64_t>(v);
         if (!s)
           return fmt::format("expected an unsigned integer, got '{}'", v);
         cfg.seed = *s;
         return std::nullopt;
       }},
      {"output_dir", [&](std::string_view v) -> std::optional<std::string> {
         cfg.output_dir = std::filesystem::path(std::string(v));
         return std::nullopt;
       }},
      {"threads", count_into(threads, 0)},
      {"emit_frames", [&](std::string_view v) -> std::optional<std::string> {
         if (v == "true" || v == "1")
           cfg.emit_frames = true;
         else if (v == "false" || v == "0")
           cfg.emit_frames = false;
         else
           return fmt::format("expected true|false, got '{}'", v);
         return std::nullopt;
       }},
      {"display_orientation", [&](std::string_view v) -> std::optional<std::string> {
         if (v == "upright")
           cfg.upright = true;
         else if (v == "physical")
           cfg.upright = false;
         else
           return fmt::format("expected upright|physical, got '{}'", v);
         return std::nullopt;
       }},
      {"threshold", [&](std::string_view v) -> std::optional<std::string> {
         const auto d = parse_double(v);
         if (!d || !(*d > 0.0 && *d < 1.0))
           return fmt::format("expected a ratio in (0, 1), got '{}'", v);
         cfg.threshold = *d;
         return std::nullopt;
       }},
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back({line_no, std::string(line), "expected 'key = value'"});
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
      unknown.emplace_back(line_no, key);
      continue;
    }
    if (!seen.insert(key).second) {
      errors.push_back({line_no, key, "duplicate key"});
      continue;
    }
    if (value.empty()) {
      errors.push_back({line_no, key, "missing value"});
      continue;
    }
    if (auto err = it->second(value))
      errors.push_back({line_no, key, *err});
  }

  if (!unknown.empty()) {
    std::string list;
    for (const auto &[ln, key] : unknown)
      list += fmt::format("{}'{}' (line {})", list.empty() ? "" : ", ", key, ln);
    throw InputError(fmt::format("{}: unknown keys: {}", source, list));
  }
  if (!errors.empty()) {
    std::string msg;
    for (const auto &e : errors)
      msg += fmt::format("\n  line {}: {}: {}", e.line, e.key, e.message);
    throw InputError(fmt::format("{}: invalid configuration{}", source, msg));
  }

  if (n_phases)
    cfg.n_phases = *n_phases;
  if (camera_nx)
    cfg.camera_nx = *camera_nx;
  if (camera_ny)
    cfg.camera_ny = *camera_ny;
  if (group)
    cfg.object.usaf_group = *group;
  if (element)
    cfg.object.usaf_element = *element;
  if (threads)
    cfg.threads = *threads;
  if (cfg.noise.kind == NoiseModel::Kind::none && have_mean_counts)
    throw InputError(fmt::format("{}: mean_counts given but noise = none", source));
  return cfg;
}

RunConfig read_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError(fmt::format("{}: cannot read configuration", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config_text(ss.str(), path.string());
  if (cfg.object.raster_path && cfg.object.raster_path->is_relative())
    cfg.object.raster_path = path.parent_path() / *cfg.object.raster_path;
  return cfg;
}

RunConfig parse_config(const std::filesystem::path &path) {
  RunConfig cfg = read_config(path);
  validate(cfg);
  return cfg;
}

void validate(const RunConfig &cfg) {
  if (cfg.scenario.empty())
    throw InputError("configuration: no scenario given");
  if (!is_registered_scenario(cfg.scenario)) {
    std::string names;
    for (const auto &s : scenario_registry())
      names += (names.empty() ? "" : ", ") + s.name;
    throw InputError(fmt::format("unknown scenario '{}' (known: {})", cfg.scenario, names));
  }
  if (cfg.object.usaf_element && (*cfg.object.usaf_element < 1 || *cfg.object.usaf_element > 6))
    throw InputError("usaf_element must be 1..6");
  if (cfg.object.type == ObjectType::raster) {
    if (!cfg.object.raster_path || !cfg.object.raster_width)
      throw InputError("object = raster needs raster_path and raster_width");
    if (!std::filesystem::exists(*cfg.object.raster_path))
      throw InputError(fmt::format("raster_path '{}' does not exist", cfg.object.raster_path->string()));
  }
  if (cfg.n_phases < 3)
    throw InputError("n_phases must be at least 3");
}

} // namespace qiup
