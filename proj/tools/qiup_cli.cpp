#include "qiup/config.hpp"
#include "qiup/error.hpp"
#include "qiup/scenario.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <optional>

int main(int argc, char **argv) {
  CLI::App app{"Simulates imaging with undetected photons and reproduces the reference figures."};
  std::string config_path, scenario, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool emit_frames = false, list = false;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--scenario", scenario, "scenario name (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "noise seed (overrides the config)");
  app.add_option("--threads", threads, "worker threads, 0 for one per core");
  app.add_flag("--emit-frames", emit_frames, "also write every phase-stepped frame");
  app.add_flag("--list-scenarios", list, "print the scenario names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list) {
    for (const auto &s : qiup::scenario_registry())
      fmt::print("{:<20} {}\n", s.name, s.description);
    return 0;
  }

  try {
    qiup::RunConfig config;
    if (!config_path.empty())
      config = qiup::read_config(config_path);
    if (!scenario.empty())
      config.scenario = scenario;
    if (!out_dir.empty())
      config.output_dir = out_dir;
    if (seed)
      config.seed = *seed;
    if (threads)
      config.threads = *threads;
    if (emit_frames)
      config.emit_frames = true;
    qiup::validate(config);

    const qiup::RunSummary summary = qiup::run_scenario(config);
    for (const auto &w : summary.warnings)
      fmt::print(stderr, "warning: {}\n", w);
    fmt::print("{}: {} artifacts in {} ({:.2f} s)\n", summary.scenario, summary.artifacts.size(),
               config.output_dir.string(), summary.seconds);
    return 0;
  } catch (const qiup::InputError &e) {
    fmt::print(stderr, "input error: {}\n", e.what());
    return 1;
  } catch (const qiup::NumericError &e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return 2;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
}
