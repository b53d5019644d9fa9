#include "qiup/scenario.hpp"
#include "qiup/analysis.hpp"
#include "qiup/artifacts.hpp"
#include "qiup/error.hpp"
#include "qiup/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>

#include <fmt/format.h>

namespace qiup {

namespace {

constexpr double kMicron = 1e-6;
constexpr double kPi = std::numbers::pi;

std::string um(double metres) { return format_number(metres / kMicron); }
std::string num(double v) { return format_number(v); }
std::string nm(double metres) { return format_number(metres / 1e-9); }
std::string wp_tag(double w_p) { return fmt::format("wp{}", static_cast<long>(std::lround(w_p / kMicron))); }

/// Decorrelates per-job noise streams while staying a pure function of the seed.
std::uint64_t job_seed(std::uint64_t seed, std::uint64_t job) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (job + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Context {
  const RunConfig &cfg;
  ArtifactWriter &out;
  RunSummary &summary;

  PipelineOptions options(std::uint64_t job) const {
    PipelineOptions o;
    o.n_phases = cfg.n_phases;
    o.noise = cfg.noise;
    o.seed = job_seed(cfg.seed, job);
    o.threads = cfg.threads;
    return o;
  }

  void derived(std::string name, double value, std::string unit) {
    summary.derived.push_back({std::move(name), value, std::nullopt, std::nullopt, std::move(unit)});
  }
  void measured(std::string name, double value, std::optional<double> uncertainty, std::optional<double> theory,
                std::string unit) {
    summary.measured.push_back({std::move(name), value, uncertainty, theory, std::move(unit)});
  }
  void note_warnings(const SetupConfig &setup) {
    for (const auto &w : setup.warnings())
      if (std::find(summary.warnings.begin(), summary.warnings.end(), w) == summary.warnings.end())
        summary.warnings.push_back(w);
  }
};

struct NamedSetup {
  std::string label;
  SetupConfig setup;
};

bool overrides_optics(const RunConfig &cfg) { return cfg.lambda_d || cfg.lambda_u || cfg.f_c || cfg.f_u; }

/// The configured setup when any optical parameter is given, otherwise the
/// scenario's default setups. Pump waist and crystal size apply to all.
std::vector<NamedSetup> setups_for(Context &ctx, std::vector<int> defaults, double default_w_p) {
  std::vector<NamedSetup> out;
  const double w_p = ctx.cfg.w_p.value_or(default_w_p);
  if (overrides_optics(ctx.cfg)) {
    const SetupParams base = (defaults.front() == 2 ? setup_two(w_p) : setup_one(w_p)).params();
    out.push_back({"configured", ctx.cfg.setup(base)});
  } else {
    for (int id : defaults) {
      const SetupParams base = (id == 2 ? setup_two(w_p) : setup_one(w_p)).params();
      out.push_back({fmt::format("setup{}", id), ctx.cfg.setup(base)});
    }
  }
  for (const auto &s : out)
    ctx.note_warnings(s.setup);
  return out;
}

std::vector<double> waist_list(const RunConfig &cfg, std::vector<double> defaults) {
  if (!cfg.w_p_list.empty())
    return cfg.w_p_list;
  if (cfg.w_p)
    return {*cfg.w_p};
  return defaults;
}

SetupConfig at_waist(Context &ctx, const SetupConfig &setup, double w_p) {
  SetupConfig s = setup.with_pump_waist(w_p);
  ctx.note_warnings(s);
  return s;
}

void add_derived_optics(Context &ctx, const std::string &label, const SetupConfig &s) {
  ctx.derived(fmt::format("M_{}", label), magnification(s), "");
  ctx.derived(fmt::format("sigma_{}_{}", label, wp_tag(s.w_p())), sigma_camera(s) / kMicron, "um");
  ctx.derived(fmt::format("sigma_over_M_{}_{}", label, wp_tag(s.w_p())), sigma_object(s) / kMicron, "um");
}

Table profile_table(const Profile &p, const std::string &column) {
  Table t{{"x_um", column}, {}};
  for (std::size_t i = 0; i < p.x.size(); ++i)
    t.add_row({um(p.x[i]), num(p.v[i])});
  return t;
}

// Object scene shared by the generic imaging run and the stack demo.

struct Scene {
  ObjectMask mask;
  CameraGrid camera;
};

ObjectMask pad_raster(const ObjectMask &raster, double half_x, double half_y, RasterMode mode) {
  const ObjectGrid &g = raster.grid();
  const auto pad = [&](double need, double have) {
    return static_cast<std::size_t>(std::max(0.0, std::ceil((need - have) / g.pitch - 1e-9)));
  };
  const std::size_t px = pad(half_x, 0.5 * static_cast<double>(g.nx) * g.pitch);
  const std::size_t py = pad(half_y, 0.5 * static_cast<double>(g.ny) * g.pitch);
  ObjectGrid big = g;
  big.nx = g.nx + 2 * px;
  big.ny = g.ny + 2 * py;
  big.origin_x = g.origin_x - static_cast<double>(px) * g.pitch;
  big.origin_y = g.origin_y - static_cast<double>(py) * g.pitch;
  const double background = mode == RasterMode::phase ? 1.0 : 0.0;
  Raster<double> amp(big.nx, big.ny, background), ph(big.nx, big.ny, 0.0);
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      amp(ix + px, iy + py) = raster.amplitude()(ix, iy);
      ph(ix + px, iy + py) = raster.phase()(ix, iy);
    }
  return ObjectMask(big, std::move(amp), std::move(ph));
}

std::size_t odd_count(double extent, double pitch) {
  auto n = static_cast<std::size_t>(std::ceil(extent / pitch - 1e-9)) + 1;
  return n % 2 ? n : n + 1;
}

Scene build_scene(const RunConfig &cfg, const SetupConfig &setup, ObjectType fallback) {
  const ObjectSpec &spec = cfg.object;
  const ObjectType type = spec.type.value_or(fallback);
  const double so = object_kernel_width(setup);
  const double m = magnification(setup);
  double pitch = so / 8.0;
  double half_x = 5.0 * so, half_y = 5.0 * so, boundary = 0.0;
  std::optional<ObjectMask> raster;

  switch (type) {
  case ObjectType::knife_edge:
  case ObjectType::phase_edge:
    boundary = spec.edge_position.value_or(0.0);
    half_x = std::abs(boundary) + 5.0 * so;
    break;
  case ObjectType::point_pair: {
    const double d = spec.separation.value_or(180e-6);
    if (!(d > 0.0))
      throw InputError("point pair separation must be positive");
    pitch = d / (2.0 * std::ceil(d / (2.0 * pitch) - 1e-9));
    boundary = 0.5 * d - 0.5 * pitch;
    half_x = 0.5 * d + 4.0 * so;
    half_y = 4.0 * so;
    break;
  }
  case ObjectType::usaf: {
    const UsafTriplet t{spec.usaf_group.value_or(1), spec.usaf_element.value_or(1), spec.usaf_orientation};
    const double w = t.line_width();
    pitch = w / std::ceil(w / pitch - 1e-9);
    boundary = t.orientation == BarOrientation::vertical ? 0.5 * w : 0.0;
    half_x = half_y = 2.5 * w + 3.0 * so;
    break;
  }
  case ObjectType::rectangle: {
    const double w = spec.feature_width.value_or(2.417e-3);
    const double h = spec.feature_height.value_or(2.3e-3);
    if (!(w > 0.0 && h > 0.0))
      throw InputError("rectangle width and height must be positive");
    pitch = w / std::ceil(w / pitch - 1e-9);
    boundary = 0.5 * w;
    half_x = 0.5 * w + 5.0 * so;
    half_y = 0.5 * h + 5.0 * so;
    break;
  }
  case ObjectType::raster: {
    raster = load_raster(*spec.raster_path, *spec.raster_width, spec.raster_mode);
    const ObjectGrid &g = raster->grid();
    half_x = 0.5 * static_cast<double>(g.nx) * g.pitch + 2.0 * so;
    half_y = 0.5 * static_cast<double>(g.ny) * g.pitch + 2.0 * so;
    break;
  }
  }

  const double cam_pitch = cfg.camera_pitch.value_or(sigma_camera(setup) / 4.0);
  const std::size_t nx = cfg.camera_nx.value_or(odd_count(2.0 * m * half_x, cam_pitch));
  const std::size_t ny = cfg.camera_ny.value_or(odd_count(2.0 * m * half_y, cam_pitch));
  const CameraGrid cam = centered_grid<CameraGrid>(cam_pitch, nx, ny);

  if (raster) {
    const double reach_x = std::max(std::abs(cam.x_min()), std::abs(cam.x_max())) / m;
    const double reach_y = std::max(std::abs(cam.y_min()), std::abs(cam.y_max())) / m;
    const double margin = kKernelTruncation * so + 2.0 * raster->grid().pitch;
    return {pad_raster(*raster, reach_x + margin, reach_y + margin, spec.raster_mode), cam};
  }

  const ObjectGrid og = object_grid_for(cam, setup, pitch, half_x, half_y, boundary);
  switch (type) {
  case ObjectType::knife_edge:
    return {make_knife_edge(boundary, og), cam};
  case ObjectType::phase_edge:
    return {make_phase_edge(boundary, spec.phase_step.value_or(kPi), og), cam};
  case ObjectType::point_pair:
    return {make_point_pair(spec.separation.value_or(180e-6), og), cam};
  case ObjectType::usaf:
    return {make_usaf_triplet({spec.usaf_group.value_or(1), spec.usaf_element.value_or(1), spec.usaf_orientation},
                              og),
            cam};
  case ObjectType::rectangle:
    return {make_rectangle(spec.feature_width.value_or(2.417e-3), spec.feature_height.value_or(2.3e-3), og), cam};
  case ObjectType::raster:
    break;
  }
  throw InputError("unsupported object type");
}

void write_reconstruction(Context &ctx, const std::string &stem, const ReconstructedImage &img) {
  ctx.out.map(stem + "_visibility.pgm", img.visibility, Normalization::fixed(0.0, 1.0));
  ctx.out.map(stem + "_phase.pgm", img.phase, Normalization::fixed(-kPi, kPi));
}

// Scenarios.

void run_fig2(Context &ctx) {
  const double width = ctx.cfg.object.feature_width.value_or(2.417e-3);
  const double height = ctx.cfg.object.feature_height.value_or(2.3e-3);
  Table table{{"setup", "lambda_d_nm", "lambda_u_nm", "w_p_um", "M_theory", "M_measured", "M_uncertainty"}, {}};
  std::uint64_t job = 0;
  for (const auto &[label, setup] : setups_for(ctx, {1, 2}, 148e-6)) {
    PipelineOptions strip = ctx.options(job++);
    const ReconstructedImage row = rectangle_image(setup, width, height, strip, false);
    const MagnificationEstimate est = measure_magnification(row, width);
    PipelineOptions frame = ctx.options(job++);
    frame.camera_pitch_fraction = 0.25;
    write_reconstruction(ctx, "fig2_" + label, rectangle_image(setup, width, height, frame, true));
    ctx.out.table(fmt::format("fig2_{}_profile.csv", label),
                  profile_table(row_profile(row.visibility, row.grid, 0), "visibility"));

    add_derived_optics(ctx, label, setup);
    ctx.measured("M_hat_" + label, est.magnification, est.uncertainty, magnification(setup), "");
    table.add_row({label, nm(setup.lambda_d()), nm(setup.lambda_u()), um(setup.w_p()), num(magnification(setup)),
                   num(est.magnification), num(est.uncertainty)});
  }
  ctx.out.table("fig2_magnification.csv", table);
}

void run_fig3(Context &ctx) {
  const UsafTriplet t{ctx.cfg.object.usaf_group.value_or(1), ctx.cfg.object.usaf_element.value_or(1),
                      ctx.cfg.object.usaf_orientation};
  const double w = t.line_width();
  Table table{{"setup", "w_p_um", "line_width_um", "sigma_over_M_um", "R", "C", "resolved"}, {}};
  std::uint64_t job = 0;
  for (const auto &[label, base] : setups_for(ctx, {1}, 148e-6)) {
    for (double w_p : waist_list(ctx.cfg, {148e-6, 201e-6, 300e-6})) {
      const SetupConfig s = at_waist(ctx, base, w_p);
      const std::string stem = fmt::format("fig3_{}_{}", label, wp_tag(w_p));

      const Profile p = bar_triplet_profile(s, w, ctx.options(job++));
      const TwoSlitMetrics mt = two_slit_metrics(p, 1, ctx.cfg.threshold);

      RunConfig image_cfg = ctx.cfg;
      image_cfg.object.type = ObjectType::usaf;
      image_cfg.object.usaf_group = t.group;
      image_cfg.object.usaf_element = t.element;
      const Scene scene = build_scene(image_cfg, s, ObjectType::usaf);
      write_reconstruction(ctx, stem, image_object(scene.mask, s, scene.camera, ctx.options(job++)));
      ctx.out.table(stem + "_profile.csv", profile_table(p, "visibility"));

      add_derived_optics(ctx, label, s);
      ctx.measured(fmt::format("R_{}_{}", label, wp_tag(w_p)), mt.ratio, std::nullopt, std::nullopt, "");
      ctx.measured(fmt::format("C_{}_{}", label, wp_tag(w_p)), mt.contrast, std::nullopt, (1 - mt.ratio) / (1 + mt.ratio),
                   "");
      table.add_row({label, um(w_p), um(w), um(sigma_object(s)), num(mt.ratio), num(mt.contrast),
                     mt.resolved ? "1" : "0"});
    }
  }
  ctx.out.table("fig3_pump_sweep.csv", table);
}

void run_fig4(Context &ctx) {
  Table table{{"setup", "lambda_d_nm", "lambda_u_nm", "w_p_um", "sigma_um", "sigma_stderr_um", "sigma_theory_um",
               "sigma_over_M_um", "sigma_over_M_theory_um"},
              {}};
  std::uint64_t job = 0;
  for (const auto &[label, base] : setups_for(ctx, {1, 2}, 148e-6)) {
    for (double w_p : waist_list(ctx.cfg, {148e-6, 201e-6, 300e-6})) {
      const SetupConfig s = at_waist(ctx, base, w_p);
      const EdgeRun run = knife_edge_run(s, ctx.options(job++));
      const EsfFit fit = fit_esf(run.profile);
      const double m = magnification(s);

      Table prof{{"x_um", "visibility", "fit"}, {}};
      for (std::size_t i = 0; i < run.profile.x.size(); ++i)
        prof.add_row({um(run.profile.x[i]), num(run.profile.v[i]), num(fit.model(run.profile.x[i]))});
      ctx.out.table(fmt::format("fig4_{}_{}_esf.csv", label, wp_tag(w_p)), prof);

      add_derived_optics(ctx, label, s);
      const std::string tag = fmt::format("{}_{}", label, wp_tag(w_p));
      ctx.measured("sigma_" + tag, fit.sigma / kMicron, fit.sigma_stderr / kMicron, sigma_camera(s) / kMicron, "um");
      ctx.measured("sigma_over_M_" + tag, fit.sigma / m / kMicron, fit.sigma_stderr / m / kMicron,
                   sigma_object(s) / kMicron, "um");
      table.add_row({label, nm(s.lambda_d()), nm(s.lambda_u()), um(w_p), um(fit.sigma), um(fit.sigma_stderr),
                     um(sigma_camera(s)), um(fit.sigma / m), um(sigma_object(s))});
    }
  }
  ctx.out.table("fig4_esf_sweep.csv", table);
}

/// Least-squares fit of y = a / w_p; returns a and the largest relative residual.
std::pair<double, double> inverse_fit(const std::vector<double> &w_p, const std::vector<double> &y) {
  double num_ = 0.0, den = 0.0;
  for (std::size_t i = 0; i < w_p.size(); ++i) {
    num_ += y[i] / w_p[i];
    den += 1.0 / (w_p[i] * w_p[i]);
  }
  const double a = num_ / den;
  double worst = 0.0;
  for (std::size_t i = 0; i < w_p.size(); ++i)
    worst = std::max(worst, std::abs(y[i] - a / w_p[i]) / y[i]);
  return {a, worst};
}

void run_fig5(Context &ctx) {
  const std::vector<double> waists = waist_list(ctx.cfg, {148e-6, 201e-6, 250e-6, 300e-6});
  const double probe = ctx.cfg.object.feature_width.value_or(250e-6);
  Table table{{"setup", "w_p_um", "sigma_over_M_um", "min_linewidth_um", "band_lo_um", "band_mid_um", "band_hi_um",
               "usaf_group", "usaf_element", "usaf_linewidth_um", "usaf_R"},
              {}};
  Table probe_table{{"setup", "w_p_um", "line_width_um", "R", "C", "resolved"}, {}};
  Table curve{{"setup", "w_p_um", "line_width_um", "R"}, {}};
  std::uint64_t job = 0;
  for (const auto &[label, base] : setups_for(ctx, {1, 2}, 148e-6)) {
    // Band of measured dip ratios the theory curves are shaded with.
    const double band_mid = label == "setup2" ? 0.74 : 0.70;
    const double band_dev = label == "setup2" ? 0.03 : 0.04;
    std::vector<double> mins;
    for (double w_p : waists) {
      const SetupConfig s = at_waist(ctx, base, w_p);
      const PipelineOptions o = ctx.options(job++);
      const LinewidthResult r = min_resolvable_linewidth(s, ctx.cfg.threshold, o, true);
      const double lo = min_resolvable_linewidth(s, band_mid + band_dev, o, false).line_width;
      const double mid = min_resolvable_linewidth(s, band_mid, o, false).line_width;
      const double hi = min_resolvable_linewidth(s, band_mid - band_dev, o, false).line_width;
      mins.push_back(r.line_width);
      const auto &pick = r.nearest_element;
      table.add_row({label, um(w_p), um(sigma_object(s)), um(r.line_width), um(lo), um(mid), um(hi),
                     pick ? std::to_string(pick->group) : "", pick ? std::to_string(pick->element) : "",
                     pick ? um(pick->line_width) : "", pick ? num(pick->ratio) : ""});
      ctx.measured(fmt::format("min_linewidth_{}_{}", label, wp_tag(w_p)), r.line_width / kMicron, std::nullopt,
                   std::nullopt, "um");

      const Profile p = bar_triplet_profile(s, probe, o);
      const TwoSlitMetrics mt = two_slit_metrics(p, 1, ctx.cfg.threshold);
      probe_table.add_row({label, um(w_p), um(probe), num(mt.ratio), num(mt.contrast), mt.resolved ? "1" : "0"});
      if (w_p == waists.front()) {
        ctx.out.table(fmt::format("fig5_{}_{}_probe_profile.csv", label, wp_tag(w_p)), profile_table(p, "visibility"));
        ctx.measured(fmt::format("R_probe_{}_{}", label, wp_tag(w_p)), mt.ratio, std::nullopt, std::nullopt, "");
        const double so = object_kernel_width(s);
        for (int k = 0; k <= 20; ++k) {
          const double w = so * (0.5 + 0.125 * k);
          curve.add_row({label, um(w_p), um(w), num(triplet_ratio(s, w, o))});
        }
      }
    }
    if (waists.size() >= 2) {
      const auto [a, worst] = inverse_fit(waists, mins);
      ctx.measured("linewidth_inverse_waist_coefficient_" + label, a / (kMicron * kMicron), std::nullopt, std::nullopt,
                   "um^2");
      ctx.measured("linewidth_inverse_waist_residual_" + label, worst, std::nullopt, std::nullopt, "");
    }
  }
  ctx.out.table("fig5_min_linewidth.csv", table);
  ctx.out.table("fig5_probe.csv", probe_table);
  ctx.out.table("fig5_ratio_curve.csv", curve);
}

void run_fig6(Context &ctx) {
  const RunConfig &cfg = ctx.cfg;
  const double d = cfg.object.separation.value_or(180e-6);
  const double w_p = cfg.w_p.value_or(300e-6);
  struct Case {
    std::string name;
    double lambda_d, lambda_u;
  };
  std::vector<Case> cases;
  if (cfg.lambda_d || cfg.lambda_u)
    cases.push_back({"configured", cfg.lambda_d.value_or(810e-9), cfg.lambda_u.value_or(1550e-9)});
  else
    cases = {{"a", 810e-9, 810e-9}, {"b", 1550e-9, 1550e-9}, {"c", 1550e-9, 810e-9}, {"d", 810e-9, 1550e-9}};

  Table table{{"case", "lambda_d_nm", "lambda_u_nm", "separation_um", "w_p_um", "M", "sigma_um", "sigma_over_M_um",
               "R", "C", "resolved"},
              {}};
  std::uint64_t job = 0;
  for (const Case &c : cases) {
    SetupParams p = setup_one(w_p).params();
    p.lambda_d = c.lambda_d;
    p.lambda_u = c.lambda_u;
    p.f_c = cfg.f_c.value_or(p.f_c);
    p.f_u = cfg.f_u.value_or(p.f_u);
    RunConfig local = cfg;
    local.lambda_d = c.lambda_d;
    local.lambda_u = c.lambda_u;
    local.w_p = w_p;
    const SetupConfig s = local.setup(p);
    ctx.note_warnings(s);

    const double m = magnification(s);
    const double sc = sigma_camera(s);
    const double reach = m * (0.5 * d + 3.0 * object_kernel_width(s));
    const PipelineOptions o = ctx.options(job++);
    const CameraGrid strip = camera_strip(-reach, reach, o.camera_pitch_fraction * sc, 1);
    const ReconstructedImage row =
        reconstruct(synthesize_stack(response_point_pair(d, s, strip), o.n_phases, o.noise, o.seed, o.threads), o.threads);
    const Profile prof = row_profile(row.visibility, strip, 0);
    const TwoSlitMetrics mt = two_slit_metrics(prof, 1, cfg.threshold);

    const CameraGrid frame = centered_grid<CameraGrid>(sc / 8.0, odd_count(2.0 * reach, sc / 8.0),
                                                       odd_count(2.0 * m * 3.0 * object_kernel_width(s), sc / 8.0));
    const PipelineOptions fo = ctx.options(job++);
    write_reconstruction(
        ctx, "fig6_" + c.name,
        reconstruct(synthesize_stack(response_point_pair(d, s, frame), fo.n_phases, fo.noise, fo.seed, fo.threads),
                    fo.threads));
    ctx.out.table(fmt::format("fig6_{}_profile.csv", c.name), profile_table(prof, "visibility"));

    add_derived_optics(ctx, "case_" + c.name, s);
    ctx.measured("R_case_" + c.name, mt.ratio, std::nullopt, std::nullopt, "");
    ctx.measured("C_case_" + c.name, mt.contrast, std::nullopt, (1 - mt.ratio) / (1 + mt.ratio), "");
    table.add_row({c.name, nm(c.lambda_d), nm(c.lambda_u), um(d), um(w_p), num(m), um(sc), um(sigma_object(s)),
                   num(mt.ratio), num(mt.contrast), mt.resolved ? "1" : "0"});
  }
  ctx.out.table("fig6_twopoint.csv", table);
}

void run_stack(Context &ctx, const std::string &prefix, ObjectType fallback, bool trace) {
  const auto setups = setups_for(ctx, {1}, 300e-6);
  const SetupConfig &s = setups.front().setup;
  const Scene scene = build_scene(ctx.cfg, s, fallback);
  const PipelineOptions o = ctx.options(0);
  const ComplexResponseMap response = compute_response(scene.mask, s, scene.camera, o.threads);
  const FrameStack stack = synthesize_stack(response, o.n_phases, o.noise, o.seed, o.threads);
  const ReconstructedImage img = reconstruct(stack, o.threads);

  add_derived_optics(ctx, setups.front().label, s);
  write_reconstruction(ctx, prefix, img);
  ctx.out.map(prefix + "_interference.pgm", img.interference_term(), Normalization::fixed(-1.0, 1.0));
  const std::size_t mid = img.grid.ny / 2;
  Table prof{{"x_um", "visibility", "phase_rad", "interference"}, {}};
  const Raster<double> re = img.interference_term();
  for (std::size_t ix = 0; ix < img.grid.nx; ++ix)
    prof.add_row({um(img.grid.x(ix)), num(img.visibility(ix, mid)), num(img.phase(ix, mid)), num(re(ix, mid))});
  ctx.out.table(prefix + "_profile.csv", prof);

  if (ctx.cfg.emit_frames)
    for (std::size_t k = 0; k < stack.frames.size(); ++k)
      ctx.out.map(fmt::format("{}_frame_{:03}.pgm", prefix, k), stack.frames[k], Normalization::fixed(0.0, 2.0));

  if (trace) {
    const std::size_t cx = img.grid.nx / 2;
    std::vector<double> samples;
    for (const auto &f : stack.frames)
      samples.push_back(f(cx, mid));
    const SinusoidFit fit = fit_pixel_sinusoid(samples, stack.phases);
    Table t{{"k", "phi_rad", "intensity", "fit"}, {}};
    for (std::size_t k = 0; k < samples.size(); ++k)
      t.add_row({std::to_string(k), num(stack.phases[k]), num(samples[k]),
                 num(fit.offset + fit.amplitude * std::cos(stack.phases[k] + fit.phase))});
    ctx.out.table(prefix + "_center_trace.csv", t);
    const std::complex<double> f = response.values(cx, mid);
    ctx.measured("center_visibility", fit.amplitude / fit.offset, std::nullopt, std::abs(f), "");
    ctx.measured("center_phase", fit.phase, std::nullopt, std::arg(f), "rad");
    ctx.measured("center_residual_rms", fit.residual_rms, std::nullopt, std::nullopt, "");
  }
}

void run_fig7(Context &ctx) { run_stack(ctx, "fig7", ObjectType::phase_edge, true); }

void run_image(Context &ctx) {
  if (!ctx.cfg.object.type)
    throw InputError("scenario 'image' needs an object");
  run_stack(ctx, "image", *ctx.cfg.object.type, false);
}

/// Mean phase over the outer fraction of a row on each side of an edge.
std::pair<double, double> side_phases(const ReconstructedImage &img, double fraction) {
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * static_cast<double>(img.grid.nx)));
  std::complex<double> left{}, right{};
  for (std::size_t iy = 0; iy < img.grid.ny; ++iy)
    for (std::size_t k = 0; k < n; ++k) {
      left += std::polar(1.0, img.phase(k, iy));
      right += std::polar(1.0, img.phase(img.grid.nx - 1 - k, iy));
    }
  return {std::arg(left), std::arg(right)};
}

void run_fig8(Context &ctx) {
  const double delta = ctx.cfg.object.phase_step.value_or(kPi);
  Table table{{"setup", "w_p_um", "sigma_phase_um", "sigma_amplitude_um", "sigma_theory_um", "relative_difference",
               "phase_step_rad"},
              {}};
  std::uint64_t job = 0;
  for (const auto &[label, base] : setups_for(ctx, {1}, 300e-6)) {
    for (double w_p : waist_list(ctx.cfg, {148e-6, 201e-6, 300e-6})) {
      const SetupConfig s = at_waist(ctx, base, w_p);
      PipelineOptions o = ctx.options(job++);
      o.camera_rows = 9;
      const EdgeRun phase = phase_edge_run(s, delta, o);
      const EsfFit fp = fit_esf(phase.profile);
      const EsfFit fa = fit_esf(knife_edge_run(s, ctx.options(job++)).profile);
      const auto [left, right] = side_phases(phase.image, 0.1);
      const double step = std::abs(wrap_phase(right - left));

      const std::string stem = fmt::format("fig8_{}_{}", label, wp_tag(w_p));
      ctx.out.map(stem + "_phase.pgm", phase.image.phase, Normalization::fixed(-kPi, kPi));
      ctx.out.map(stem + "_interference.pgm", phase.image.interference_term(), Normalization::fixed(-1.0, 1.0));
      Table prof{{"x_um", "interference", "fit"}, {}};
      for (std::size_t i = 0; i < phase.profile.x.size(); ++i)
        prof.add_row({um(phase.profile.x[i]), num(phase.profile.v[i]), num(fp.model(phase.profile.x[i]))});
      ctx.out.table(stem + "_profile.csv", prof);

      add_derived_optics(ctx, label, s);
      const std::string tag = fmt::format("{}_{}", label, wp_tag(w_p));
      ctx.measured("sigma_phase_" + tag, fp.sigma / kMicron, fp.sigma_stderr / kMicron, sigma_camera(s) / kMicron, "um");
      ctx.measured("sigma_amplitude_" + tag, fa.sigma / kMicron, fa.sigma_stderr / kMicron, sigma_camera(s) / kMicron,
                   "um");
      ctx.measured("phase_step_" + tag, step, std::nullopt, std::abs(wrap_phase(delta)), "rad");
      table.add_row({label, um(w_p), um(fp.sigma), um(fa.sigma), um(sigma_camera(s)), num(fp.sigma / fa.sigma - 1.0),
                     num(step)});
    }
  }
  ctx.out.table("fig8_phase_edge.csv", table);
}

void run_fig9(Context &ctx) {
  const int group = ctx.cfg.object.usaf_group.value_or(1);
  Table table{{"setup", "w_p_um", "group", "element", "line_width_um", "R", "C", "resolved"}, {}};
  std::uint64_t job = 0;
  for (const auto &[label, s] : setups_for(ctx, {2}, 201e-6)) {
    add_derived_optics(ctx, label, s);
    for (int e = 1; e <= 6; ++e) {
      const double w = UsafTriplet{group, e, BarOrientation::vertical}.line_width();
      const Profile p = bar_triplet_profile(s, w, ctx.options(job++));
      const TwoSlitMetrics mt = two_slit_metrics(p, 1, ctx.cfg.threshold);
      ctx.out.table(fmt::format("fig9_{}_g{}e{}_profile.csv", label, group, e), profile_table(p, "visibility"));
      const std::string tag = fmt::format("{}_g{}e{}", label, group, e);
      ctx.measured("R_" + tag, mt.ratio, std::nullopt, std::nullopt, "");
      ctx.measured("C_" + tag, mt.contrast, std::nullopt, (1 - mt.ratio) / (1 + mt.ratio), "");
      table.add_row({label, um(s.w_p()), std::to_string(group), std::to_string(e), um(w), num(mt.ratio),
                     num(mt.contrast), mt.resolved ? "1" : "0"});
    }
  }
  ctx.out.table("fig9_testchart.csv", table);
}

struct Entry {
  ScenarioInfo info;
  std::function<void(Context &)> run;
};

const std::vector<Entry> &entries() {
  static const std::vector<Entry> list = {
      {{"fig2-magnification", 2, "magnification of a rectangular object in both setups"}, run_fig2},
      {{"fig3-pump-sweep", 3, "bar triplet imaged at several pump waists"}, run_fig3},
      {{"fig4-esf-sweep", 4, "knife-edge width sigma and sigma/M against pump waist"}, run_fig4},
      {{"fig5-usaf", 5, "minimum resolvable linewidth against pump waist"}, run_fig5},
      {{"fig6-twopoint", 6, "two-point images for swapped detected/probe wavelengths"}, run_fig6},
      {{"fig7-stack", 7, "phase-stepped frame stack and per-pixel reconstruction"}, run_fig7},
      {{"fig8-phase-edge", 8, "phase edge against amplitude edge width"}, run_fig8},
      {{"fig9-testchart", 9, "dip ratio and contrast over one chart group"}, run_fig9},
      {{"image", 0, "image the configured object"}, run_image},
  };
  return list;
}

std::string measurement_lines(const std::vector<Measurement> &list) {
  std::string out;
  for (const Measurement &m : list) {
    out += fmt::format("{} = {}\n", m.name, format_number(m.value));
    if (m.uncertainty)
      out += fmt::format("{}.uncertainty = {}\n", m.name, format_number(*m.uncertainty));
    if (m.theory)
      out += fmt::format("{}.theory = {}\n", m.name, format_number(*m.theory));
    if (!m.unit.empty())
      out += fmt::format("{}.unit = {}\n", m.name, m.unit);
  }
  return out;
}

} // namespace

const std::vector<ScenarioInfo> &scenario_registry() {
  static const std::vector<ScenarioInfo> infos = [] {
    std::vector<ScenarioInfo> v;
    for (const auto &e : entries())
      v.push_back(e.info);
    return v;
  }();
  return infos;
}

bool is_registered_scenario(std::string_view name) {
  const auto &r = scenario_registry();
  return std::any_of(r.begin(), r.end(), [&](const ScenarioInfo &s) { return s.name == name; });
}

const Measurement *RunSummary::find(std::string_view name) const {
  for (const auto *list : {&measured, &derived})
    for (const Measurement &m : *list)
      if (m.name == name)
        return &m;
  return nullptr;
}

std::string RunSummary::to_text() const {
  std::string out = "[run]\n";
  out += fmt::format("scenario = {}\nconfig_hash = {:016x}\nseed = {}\n", scenario, config_hash, seed);
  out += "\n[config]\n" + config_echo;
  out += "\n[derived]\n" + measurement_lines(derived);
  out += "\n[measured]\n" + measurement_lines(measured);
  out += "\n[warnings]\n";
  for (std::size_t i = 0; i < warnings.size(); ++i)
    out += fmt::format("warning.{} = {}\n", i, warnings[i]);
  out += "\n[artifacts]\n";
  for (std::size_t i = 0; i < artifacts.size(); ++i)
    out += fmt::format("artifact.{} = {}\n", i, artifacts[i]);
  return out;
}

RunSummary run_scenario(const RunConfig &config) {
  validate(config);
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.scenario = config.scenario;
  summary.config_hash = config.hash();
  summary.seed = config.seed;
  summary.config_echo = config.canonical();

  ArtifactWriter out(config.output_dir, {summary.config_hash, summary.seed}, config.upright);
  Context ctx{config, out, summary};
  for (const Entry &e : entries())
    if (e.info.name == config.scenario)
      e.run(ctx);

  summary.artifacts = out.written();
  summary.artifacts.push_back("summary.txt");
  out.text("summary.txt", summary.to_text());
  out.commit();
  summary.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

} // namespace qiup
