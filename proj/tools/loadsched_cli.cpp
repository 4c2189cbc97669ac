// loadsched: receding-horizon load scheduling against a power forecast.
//
//   loadsched demo-loads   --config loads.json --out out/demo
//   loadsched enumerate    --config run.json
//   loadsched run          --config run.json [--out dir] [--workers k] [--seed s]
//   loadsched gen-forecast --config run.json --out dir [--seed s]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "loadsched/demo.hpp"
#include "loadsched/forecast.hpp"
#include "loadsched/io.hpp"
#include "loadsched/scheduler.hpp"
#include "loadsched/switchset.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// A loads document is a JSON array; anything else is treated as a run config.
std::vector<loadsched::LoadSpec> loads_from(const fs::path& path,
                                            std::optional<loadsched::RunConfig>& run) {
  std::ifstream in(path);
  if (!in) {
    throw loadsched::ConfigError("cannot open " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw loadsched::ConfigError(path.string() + ": " + e.what());
  }
  if (doc.is_array()) {
    return loadsched::parse_loads(doc);
  }
  run = loadsched::parse_run_config(doc, path.parent_path());
  return loadsched::load_loads_json(run->loads_path);
}

int cmd_demo(const fs::path& config, const fs::path& out_dir, double on_s, double off_s) {
  std::optional<loadsched::RunConfig> run;
  const auto loads = loads_from(config, run);
  const double dt = run ? run->horizon.fine_dt_s : 1.0;
  const auto demo = loadsched::demo_step_responses(loads, dt, on_s, off_s);
  fs::create_directories(out_dir);
  loadsched::write_demo_csv(demo, out_dir / "demo_loads.csv");
  std::cout << loadsched::to_json(demo).dump(2) << '\n';
  return 0;
}

int cmd_enumerate(const fs::path& config) {
  std::optional<loadsched::RunConfig> run;
  const auto loads = loads_from(config, run);
  const loadsched::HorizonConfig horizon = run ? run->horizon : loadsched::HorizonConfig{};
  try {
    loadsched::validate(horizon, loads);
  } catch (const std::invalid_argument& e) {
    throw loadsched::ConfigError(e.what());
  }
  std::vector<std::vector<loadsched::Trajectory>> per_load;
  json counts = json::array();
  for (const auto& spec : loads) {
    per_load.push_back(loadsched::admissible_trajectories(
        loadsched::LoadSwitchState::initial(spec, horizon), horizon));
    counts.push_back({{"id", spec.id}, {"count", per_load.back().size()}});
  }
  const auto space = loadsched::enumerate_combinations(std::move(per_load));
  const auto n = static_cast<int>(loads.size());
  const long long exponent = static_cast<long long>(n) * (horizon.n_steps - 1);
  json report = {{"n_loads", n},
                 {"n_steps", horizon.n_steps},
                 {"per_load", counts},
                 {"total", space.size()},
                 {"bound_log2", exponent},
                 {"bound_check", loadsched::cardinality_bound_check(space.size(), n, horizon.n_steps)}};
  if (exponent < 64) {
    report["bound"] = std::uint64_t{1} << exponent;
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_run(const fs::path& config, const std::optional<fs::path>& out,
            const std::optional<int>& workers, const std::optional<std::uint64_t>& seed) {
  auto cfg = loadsched::load_run_config(config);
  if (out) {
    cfg.output_dir = *out;
  }
  if (workers) {
    cfg.workers = *workers;
  }
  if (seed && cfg.synthetic) {
    cfg.synthetic->seed = *seed;
  }
  const auto loads = loadsched::load_loads_json(cfg.loads_path);
  try {
    loadsched::validate(cfg.horizon, loads);
  } catch (const std::invalid_argument& e) {
    throw loadsched::ConfigError(e.what());
  }
  const auto forecast = loadsched::resolve_forecast(cfg);
  const auto sched = cfg.scheduler();
  const auto solution = loadsched::receding_horizon_run(forecast, loads, sched, cfg.soc_init);
  loadsched::write_trace(solution, cfg.battery, cfg.horizon, cfg.output_dir);
  std::cout << loadsched::to_json(loadsched::summarize(solution, cfg.battery, cfg.horizon)).dump(2)
            << '\n';
  return 0;
}

int cmd_gen_forecast(const std::optional<fs::path>& config, const fs::path& out_dir,
                     const std::optional<std::uint64_t>& seed, const std::optional<double>& duration,
                     const std::optional<double>& peak, const std::optional<double>& noise) {
  loadsched::SolarCurveParams params;
  if (config) {
    const auto cfg = loadsched::load_run_config(*config);
    if (!cfg.synthetic) {
      throw loadsched::ConfigError(config->string() + ": forecast has no 'synthetic' block");
    }
    params = *cfg.synthetic;
  }
  if (seed) params.seed = *seed;
  if (duration) params.duration_s = *duration;
  if (peak) params.peak_pu = *peak;
  if (noise) params.noise_level = *noise;
  const auto forecast = loadsched::gen_solar_curve(params);
  fs::create_directories(out_dir);
  const fs::path path = out_dir / "forecast.csv";
  loadsched::write_forecast_csv(forecast, path);
  std::cout << json{{"path", path.string()}, {"samples", forecast.values.size()}}.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Receding-horizon scheduling of dynamic loads against a power forecast"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<fs::path> out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;

  auto* demo = app.add_subcommand("demo-loads", "Step responses of every load under one switch signal");
  fs::path demo_out = "out/demo";
  double on_s = 900.0;
  double off_s = 900.0;
  demo->add_option("--config", config, "Loads JSON or run config")->required();
  demo->add_option("--out", demo_out, "Output directory");
  demo->add_option("--on-s", on_s, "Seconds switched on");
  demo->add_option("--off-s", off_s, "Seconds switched off afterwards");

  auto* enumerate = app.add_subcommand("enumerate", "Count admissible switching combinations");
  enumerate->add_option("--config", config, "Run config or loads JSON")->required();

  auto* run = app.add_subcommand("run", "Closed-loop receding-horizon simulation");
  run->add_option("--config", config, "Run config JSON")->required();
  run->add_option("--out", out, "Output directory (overrides config)");
  run->add_option("--workers", workers, "Worker threads, 0 = all cores");
  run->add_option("--seed", seed, "Synthetic forecast seed (overrides config)");

  auto* gen = app.add_subcommand("gen-forecast", "Write a synthetic solar forecast CSV");
  std::optional<fs::path> gen_config;
  fs::path gen_out = "out";
  std::optional<double> duration;
  std::optional<double> peak;
  std::optional<double> noise;
  gen->add_option("--config", gen_config, "Run config with a synthetic forecast block");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--seed", seed, "Seed");
  gen->add_option("--duration", duration, "Duration in seconds");
  gen->add_option("--peak", peak, "Peak power in PU");
  gen->add_option("--noise", noise, "Noise level in [0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*demo) return cmd_demo(config, demo_out, on_s, off_s);
    if (*enumerate) return cmd_enumerate(config);
    if (*run) return cmd_run(config, out, workers, seed);
    if (*gen) return cmd_gen_forecast(gen_config, gen_out, seed, duration, peak, noise);
  } catch (const loadsched::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const loadsched::ForecastCsvError& e) {
    std::cerr << "forecast error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
