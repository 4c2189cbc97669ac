#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadsched/forecast.hpp"
#include "loadsched/scheduler.hpp"

namespace loadsched {

/// Bad or inconsistent configuration input (distinct CLI exit code).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the loads document: an array of {id, size_pu, poles_on, poles_off,
/// t_on_min_s, t_off_min_s} with poles as [re, im] pairs.
std::vector<LoadSpec> parse_loads(const nlohmann::json& doc);
std::vector<LoadSpec> load_loads_json(const std::filesystem::path& path);
nlohmann::json loads_to_json(const std::vector<LoadSpec>& loads);

struct RunConfig {
  std::filesystem::path loads_path;
  std::optional<std::filesystem::path> forecast_csv;
  std::optional<SolarCurveParams> synthetic;
  HorizonConfig horizon;
  BatterySpec battery;
  double soc_init = 0.5;
  std::filesystem::path output_dir = "out";
  int workers = 0;
  bool pad_forecast = true;

  [[nodiscard]] SchedulerConfig scheduler() const;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Synthesizes or reads the forecast named by the config.
ForecastSeries resolve_forecast(const RunConfig& config);

struct ViolationCounts {
  std::uint64_t power = 0;         ///< fine samples with p_norm |e| >= 1
  std::uint64_t soc_negative = 0;  ///< soc < 0
  std::uint64_t soc_high = 0;      ///< soc > soc_hi
  std::uint64_t soc_low = 0;       ///< soc < soc_lo
};

struct RunSummary {
  std::uint64_t n_steps = 0;
  std::uint64_t n_samples = 0;
  double soc_init = 0.0;
  double min_soc = 0.0;
  double max_soc = 0.0;
  double final_soc = 0.0;
  double max_abs_e = 0.0;
  double max_normalized_power = 0.0;
  ViolationCounts violations;
  std::array<std::uint64_t, 4> steps_with_active_barrier{};
  std::uint64_t padded_steps = 0;
  double total_wall_time_s = 0.0;
  double median_step_wall_time_s = 0.0;
  double max_step_wall_time_s = 0.0;
  std::uint64_t min_candidates = 0;
  std::uint64_t max_candidates = 0;
  std::uint64_t total_candidates = 0;
  bool cardinality_bound_ok = true;
};

RunSummary summarize(const ScheduleSolution& solution, const BatterySpec& battery,
                     const HorizonConfig& horizon);
nlohmann::json to_json(const RunSummary& summary);

/// Writes trace.csv, steps.csv and summary.json into `output_dir`, creating it
/// if needed. The wall-time column is last in steps.csv.
void write_trace(const ScheduleSolution& solution, const BatterySpec& battery,
                 const HorizonConfig& horizon, const std::filesystem::path& output_dir);

/// Reads trace.csv and steps.csv written by write_trace.
SimTrace read_trace(const std::filesystem::path& output_dir);

}  // namespace loadsched
