// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "qiup/analysis.hpp"
#include "qiup/config.hpp"
#include "qiup/error.hpp"
#include "qiup/imaging.hpp"
#include "qiup/pipeline.hpp"
#include "qiup/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

using namespace qiup;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double um = 1e-6;

struct Verdict {
  bool pass{true};
  std::vector<std::string> notes;

  void check(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "ok: " : "NOT MET: ") + std::move(note));
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Closed-form camera width from raw setup numbers.
double sigma_oracle(const SetupConfig &s) { return s.f_c() * s.lambda_d() / (std::sqrt(2.0) * pi * s.w_p()); }

Verdict magnification_formula() {
  Verdict v;
  const double m1 = magnification(setup_one(148e-6)), m2 = magnification(setup_two(148e-6));
  v.check(std::abs(m1 - 1.0452) < 5e-5, fmt::format("M(setup 1) = {:.6f}, expected 1.0452", m1));
  v.check(std::abs(m2 - 2.1590) < 5e-5, fmt::format("M(setup 2) = {:.6f}, expected 2.1590", m2));
  v.check(std::abs(m1 - 1.01) <= 0.1, "setup 1 inside measured 1.01 +- 0.1");
  v.check(std::abs(m2 - 2.16) <= 0.1, "setup 2 inside measured 2.16 +- 0.1");
  for (const SetupConfig &s : {setup_one(148e-6), setup_two(148e-6)}) {
    const MagnificationEstimate e = measure_magnification(rectangle_image(s, 2.417e-3, 2.3e-3, {}), 2.417e-3);
    v.check(rel(e.magnification, magnification(s)) < 0.02,
            fmt::format("pipeline M = {:.5f} +- {:.1e} vs {:.5f}", e.magnification, e.uncertainty, magnification(s)));
  }
  return v;
}

Verdict esf_width() {
  Verdict v;
  const std::vector<double> waists{148e-6, 201e-6, 300e-6};
  std::map<double, double> sigma1, sigma2;
  std::uint64_t seed = 100;
  for (int id : {1, 2})
    for (double w_p : waists) {
      const SetupConfig s = id == 1 ? setup_one(w_p) : setup_two(w_p);
      const double clean = fit_esf(knife_edge_run(s, {}).profile).sigma;
      PipelineOptions noisy;
      noisy.noise = NoiseModel::poisson(1e4);
      noisy.seed = seed++;
      const double shot = fit_esf(knife_edge_run(s, noisy).profile).sigma;
      const double oracle = sigma_oracle(s);
      v.check(rel(clean, oracle) < 0.01, fmt::format("setup {} w_p {:.0f} um: noiseless sigma {:.4f} um vs {:.4f} um",
                                                     id, w_p / um, clean / um, oracle / um));
      v.check(rel(shot, oracle) < 0.05,
              fmt::format("setup {} w_p {:.0f} um: Poisson sigma {:.4f} um", id, w_p / um, shot / um));
      (id == 1 ? sigma1 : sigma2)[w_p] = clean;
    }
  for (double w_p : waists) {
    const double ratio = sigma1[w_p] / sigma2[w_p];
    v.check(rel(ratio, 810.0 / 842.0) < 0.01,
            fmt::format("w_p {:.0f} um: sigma1/sigma2 = {:.5f} vs 810/842 = {:.5f}", w_p / um, ratio, 810.0 / 842.0));
  }
  return v;
}

Verdict resolution_scaling() {
  Verdict v;
  const std::pair<SetupConfig, double> cases[] = {{setup_one(148e-6), 176.8e-6}, {setup_two(148e-6), 88.97e-6}};
  for (const auto &[s, expected] : cases) {
    const double so = fit_esf(knife_edge_run(s, {}).profile).sigma / magnification(s);
    v.check(rel(so, expected) < 0.02, fmt::format("lambda_u {:.0f} nm: sigma/M = {:.3f} um vs {:.2f} um",
                                                  s.lambda_u() / 1e-9, so / um, expected / um));
  }
  // Only (f_u, lambda_u, w_p) matter: vary lambda_d and f_c at fixed probe arm.
  const SetupConfig base = setup_one(148e-6);
  const double ref = fit_esf(knife_edge_run(base, {}).profile).sigma / magnification(base);
  SetupParams p = base.params();
  p.lambda_d = 842e-9;
  p.f_c = 200e-3;
  const SetupConfig other(p);
  const double alt = fit_esf(knife_edge_run(other, {}).profile).sigma / magnification(other);
  v.check(rel(alt, ref) < 0.01, fmt::format("detected arm changed: sigma/M {:.3f} um vs {:.3f} um", alt / um, ref / um));
  const double factor = ref / (fit_esf(knife_edge_run(setup_two(148e-6), {}).profile).sigma /
                               magnification(setup_two(148e-6)));
  v.check(std::abs(factor - 2.0) < 0.05, fmt::format("setup 1 / setup 2 resolution factor {:.4f}", factor));
  return v;
}

double two_point_ratio(double lambda_d, double lambda_u) {
  SetupParams p;
  p.lambda_d = lambda_d;
  p.lambda_u = lambda_u;
  p.w_p = 300e-6;
  const SetupConfig s(p);
  const double d = 180e-6;
  const double reach = magnification(s) * (0.5 * d + 3.0 * object_kernel_width(s));
  const CameraGrid strip = camera_strip(-reach, reach, sigma_camera(s) / 20.0, 1);
  const ReconstructedImage r = reconstruct(synthesize_stack(response_point_pair(d, s, strip), kDefaultPhaseSteps));
  return two_slit_metrics(row_profile(r.visibility, strip, 0)).ratio;
}

Verdict two_point_cases() {
  Verdict v;
  const double a = two_point_ratio(810e-9, 810e-9), b = two_point_ratio(1550e-9, 1550e-9);
  const double c = two_point_ratio(1550e-9, 810e-9), d = two_point_ratio(810e-9, 1550e-9);
  v.check(std::abs(a - 0.04) <= 0.01, fmt::format("(a) 810/810 nm: R = {:.4f}, expected 0.04 +- 0.01", a));
  v.check(std::abs(b - 0.70) <= 0.03, fmt::format("(b) 1550/1550 nm: R = {:.4f}, expected 0.70 +- 0.03", b));
  v.check(std::abs(c - 0.04) <= 0.01, fmt::format("(c) 1550/810 nm: R = {:.4f}, expected 0.04 +- 0.01", c));
  v.check(std::abs(d - 0.70) <= 0.03, fmt::format("(d) 810/1550 nm: R = {:.4f}, expected 0.70 +- 0.03", d));
  v.check(std::abs(a - c) <= 0.01, fmt::format("|R(a) - R(c)| = {:.2e}", std::abs(a - c)));
  v.check(std::abs(b - d) <= 0.01, fmt::format("|R(b) - R(d)| = {:.2e}", std::abs(b - d)));
  return v;
}

double max_abs_diff(const ComplexResponseMap &x, const ComplexResponseMap &y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i)
    worst = std::max(worst, std::abs(x.values.data[i] - y.values.data[i]));
  return worst;
}

Verdict oracle_equivalence() {
  Verdict v;
  const SetupConfig s = setup_one(201e-6);
  const double m = magnification(s), so = object_kernel_width(s), sc = sigma_camera(s);

  {
    const CameraGrid cam = centered_grid<CameraGrid>(8.0 * sc / 31.0, 32, 32);
    const ObjectGrid og = object_grid_for(cam, s, so / 8);
    const ObjectMask knife = make_knife_edge(0.0, og);
    const double diff = max_abs_diff(compute_response(knife, s, cam), brute_force_response(knife, s, cam));
    v.check(diff < 1e-3, fmt::format("knife edge 32x32: max |dF| = {:.2e}", diff));
  }
  {
    const double w = so;
    const double reach = m * (2.5 * w + so);
    const CameraGrid cam = centered_grid<CameraGrid>(2.0 * reach / 31.0, 32, 32);
    const ObjectGrid og = object_grid_for(cam, s, w / 8, 2.5 * w + w / 8, 2.5 * w + w / 8, 0.5 * w);
    const ObjectMask bars = make_bar_triplet(w, BarOrientation::vertical, og);
    const double diff = max_abs_diff(compute_response(bars, s, cam), brute_force_response(bars, s, cam));
    v.check(diff < 1e-3, fmt::format("bar triplet 32x32: max |dF| = {:.2e}", diff));
  }
  {
    // One open cell at the origin; width from the second moment of the row through the peak.
    const CameraGrid cam = centered_grid<CameraGrid>(sc / 4.0, 32, 32);
    const double p = so / 8;
    const ObjectGrid og = object_grid_for(cam, s, p, 0.0, 0.0, 0.5 * p);
    Raster<double> amp(og.nx, og.ny), ph(og.nx, og.ny);
    const auto ix0 = static_cast<std::size_t>(std::lround(-og.origin_x / p));
    const auto iy0 = static_cast<std::size_t>(std::lround(-og.origin_y / p));
    amp(ix0, iy0) = 1.0;
    const ComplexResponseMap f = brute_force_response(ObjectMask(og, amp, ph), s, cam);
    std::size_t best = 0;
    double best_sum = -1.0;
    for (std::size_t iy = 0; iy < cam.ny; ++iy) {
      double sum = 0.0;
      for (std::size_t ix = 0; ix < cam.nx; ++ix)
        sum += f.values(ix, iy).real();
      if (sum > best_sum) {
        best_sum = sum;
        best = iy;
      }
    }
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t ix = 0; ix < cam.nx; ++ix) {
      const double w = f.values(ix, best).real(), x = cam.x(ix);
      s0 += w;
      s1 += w * x;
      s2 += w * x * x;
    }
    const double mean = s1 / s0;
    const double width = std::sqrt(2.0 * (s2 / s0 - mean * mean));
    v.check(rel(width, sigma_oracle(s)) < 0.01,
            fmt::format("oracle impulse width {:.4f} um vs {:.4f} um", width / um, sigma_oracle(s) / um));
    v.check(std::abs(mean + m * og.x(ix0)) < 0.05 * sc, "impulse image sits at -M x_o");
  }
  return v;
}

Verdict phase_object() {
  Verdict v;
  for (int id : {1, 2})
    for (double w_p : {148e-6, 201e-6, 300e-6}) {
      const SetupConfig s = id == 1 ? setup_one(w_p) : setup_two(w_p);
      PipelineOptions o;
      o.camera_rows = 5;
      const EdgeRun run = phase_edge_run(s, pi, o);
      const double sp = fit_esf(run.profile).sigma;
      const double sa = fit_esf(knife_edge_run(s, {}).profile).sigma;
      v.check(rel(sp, sa) < 0.02,
              fmt::format("setup {} w_p {:.0f} um: phase sigma {:.4f} um, amplitude sigma {:.4f} um", id, w_p / um,
                          sp / um, sa / um));
      double worst = 0.0;
      const double sc = sigma_camera(s);
      for (std::size_t iy = 0; iy < run.image.grid.ny; ++iy)
        for (std::size_t ix = 0; ix < run.image.grid.nx; ++ix) {
          const double x = run.image.grid.x(ix);
          if (std::abs(x) < 3.0 * sc)
            continue;
          // x_c < 0 images the shifted half of the object.
          const double target = x < 0 ? pi : 0.0;
          worst = std::max(worst, std::abs(std::remainder(run.image.phase(ix, iy) - target, 2 * pi)));
        }
      v.check(worst < 0.02, fmt::format("setup {} w_p {:.0f} um: phase plateaus within {:.1e} rad of 0 and pi", id,
                                        w_p / um, worst));
    }
  return v;
}

Verdict reconstruction_exactness() {
  Verdict v;
  const SetupConfig s = setup_two(201e-6);
  const double sc = sigma_camera(s), so = object_kernel_width(s);
  const CameraGrid cam = centered_grid<CameraGrid>(sc / 3, 41, 31);
  const ObjectGrid og = object_grid_for(cam, s, so / 8);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(0.0, 1.0), t(-pi, pi);
  Raster<std::complex<double>> mask(og.nx, og.ny);
  for (auto &z : mask.data)
    z = std::polar(a(rng), t(rng));
  const ComplexResponseMap f = compute_response(ObjectMask::from_complex(og, mask), s, cam);

  const ReconstructedImage r49 = reconstruct(synthesize_stack(f, 49));
  const ReconstructedImage r3 = reconstruct(synthesize_stack(f, 3));
  double mag = 0.0, arg = 0.0, v3 = 0.0, p3 = 0.0;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    mag = std::max(mag, std::abs(r49.visibility.data[i] - std::abs(f.values.data[i])));
    v3 = std::max(v3, std::abs(r49.visibility.data[i] - r3.visibility.data[i]));
    if (std::abs(f.values.data[i]) > 1e-6) {
      arg = std::max(arg, std::abs(std::remainder(r49.phase.data[i] - std::arg(f.values.data[i]), 2 * pi)));
      p3 = std::max(p3, std::abs(std::remainder(r49.phase.data[i] - r3.phase.data[i], 2 * pi)));
    }
  }
  v.check(mag < 1e-8, fmt::format("max ||F| error| = {:.2e}", mag));
  v.check(arg < 1e-8, fmt::format("max arg F error = {:.2e} rad", arg));
  v.check(v3 < 1e-8, fmt::format("3 vs 49 phases: visibility {:.2e}", v3));
  v.check(p3 < 1e-8, fmt::format("3 vs 49 phases: phase {:.2e} rad", p3));
  return v;
}

Verdict rayleigh_sweep() {
  Verdict v;
  for (int id : {1, 2}) {
    const SetupConfig s = id == 1 ? setup_one(148e-6) : setup_two(148e-6);
    const double so = object_kernel_width(s);
    double last = 2.0;
    bool monotone = true;
    for (int k = 0; k <= 25; ++k) {
      const double r = triplet_ratio(s, so * (0.5 + 0.1 * k));
      // Below the first dip R stays at 1; from there on it must fall strictly.
      if (r > last || (r < 1.0 && r >= last))
        monotone = false;
      last = r;
    }
    v.check(monotone, fmt::format("setup {}: R(w) monotone decreasing over 0.5..3 sigma_o", id));
  }

  const double r1 = triplet_ratio(setup_one(148e-6), 250e-6);
  const double r2 = triplet_ratio(setup_two(148e-6), 250e-6);
  v.check(r2 <= kRayleighThreshold, fmt::format("setup 2, 250 um lines at w_p 148 um: R = {:.4f} (resolved)", r2));
  v.check(r1 > kRayleighThreshold,
          fmt::format("setup 1, 250 um lines at w_p 148 um: R = {:.4f}, expected unresolved (R > 0.81)", r1));

  const std::vector<double> waists{148e-6, 201e-6, 250e-6, 300e-6};
  for (int id : {1, 2}) {
    std::vector<double> w;
    for (double w_p : waists)
      w.push_back(min_resolvable_linewidth(id == 1 ? setup_one(w_p) : setup_two(w_p), kRayleighThreshold, {}, false)
                      .line_width);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      num += w[i] / waists[i];
      den += 1.0 / (waists[i] * waists[i]);
    }
    const double a = num / den;
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      worst = std::max(worst, rel(w[i], a / waists[i]));
    v.check(worst < 0.03, fmt::format("setup {}: min linewidth {:.1f}..{:.1f} um, 1/w_p fit residual {:.2e}", id,
                                      w.back() / um, w.front() / um, worst));
  }
  return v;
}

Verdict metric_identity() {
  Verdict v;
  double worst = 0.0;
  std::size_t n = 0;
  const auto take = [&](const TwoSlitMetrics &m) {
    worst = std::max(worst, std::abs(m.contrast - (1.0 - m.ratio) / (1.0 + m.ratio)));
    ++n;
  };
  for (int e = 1; e <= 6; ++e)
    take(two_slit_metrics(bar_triplet_profile(setup_two(201e-6), UsafTriplet{1, e}.line_width(), {})));
  for (double w_p : {148e-6, 300e-6})
    take(two_slit_metrics(bar_triplet_profile(setup_one(w_p), 250e-6, {})));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double peak = 1e-3 + u(rng);
    take(metrics_from_levels(peak, peak * u(rng)));
  }
  v.check(worst <= 4 * std::numeric_limits<double>::epsilon(),
          fmt::format("{} metric pairs, max |C - (1-R)/(1+R)| = {:.1e}", n, worst));
  return v;
}

std::map<std::string, std::string> directory_bytes(const fs::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &e : fs::directory_iterator(dir)) {
    std::ifstream in(e.path(), std::ios::binary);
    out[e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
  }
  return out;
}

Verdict determinism() {
  Verdict v;
  const std::pair<std::string, std::string> runs[] = {
      {"fig7-stack", "noise = poisson\nmean_counts = 1000\nseed = 9\nemit_frames = true\nw_p = 201um\n"},
      {"fig4-esf-sweep", "noise = poisson\nmean_counts = 10000\nseed = 9\n"},
      {"fig6-twopoint", "noise = poisson\nmean_counts = 10000\nseed = 9\n"},
  };
  const fs::path root = fs::temp_directory_path() / "qiup_acceptance_determinism";
  for (const auto &[scenario, extra] : runs) {
    std::vector<std::map<std::string, std::string>> outputs;
    for (unsigned threads : {1u, 1u, 3u, 0u}) {
      RunConfig c = parse_config_text("scenario = " + scenario + "\n" + extra);
      c.threads = threads;
      c.output_dir = root / fmt::format("{}_{}_{}", scenario, threads, outputs.size());
      fs::remove_all(c.output_dir);
      run_scenario(c);
      outputs.push_back(directory_bytes(c.output_dir));
    }
    bool same = true;
    for (const auto &o : outputs)
      same = same && o == outputs.front();
    v.check(same, fmt::format("{}: {} files byte-identical over runs with 1, 1, 3 and all threads", scenario,
                              outputs.front().size()));
  }
  fs::remove_all(root);
  return v;
}

} // namespace

int main() {
  const std::pair<const char *, std::function<Verdict()>> criteria[] = {
      {"magnification formula and pipeline estimate", magnification_formula},
      {"ESF width against the closed form", esf_width},
      {"object-plane resolution depends on the probe arm only", resolution_scaling},
      {"two-point dip ratios for swapped wavelengths", two_point_cases},
      {"convolution agrees with the direct momentum sum", oracle_equivalence},
      {"phase edge matches amplitude edge", phase_object},
      {"noiseless reconstruction is exact", reconstruction_exactness},
      {"dip-ratio sweep, threshold and 1/w_p scaling", rayleigh_sweep},
      {"contrast and dip-ratio identity", metric_identity},
      {"byte-identical outputs at any thread count", determinism},
  };
  int failed = 0, index = 0;
  for (const auto &[title, run] : criteria) {
    ++index;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception &e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failed += v.pass ? 0 : 1;
    fmt::print("{} {:>2} {}\n", v.pass ? "PASS" : "FAIL", index, title);
    for (const auto &n : v.notes)
      fmt::print("        {}\n", n);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
