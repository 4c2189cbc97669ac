#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "loadsched/battery.hpp"
#include "loadsched/loadmodel.hpp"
#include "loadsched/switchset.hpp"

namespace loadsched {

/// Predicted power production on the fine grid.
struct ForecastSeries {
  double dt_s = 1.0;
  std::vector<double> values;
};

struct SchedulerConfig {
  HorizonConfig horizon;
  BatterySpec battery;
  int workers = 1;              ///< 0 selects std::thread::hardware_concurrency()
  bool pad_forecast = true;     ///< hold the last value when the window runs past the end
  double step_budget_s = 0.3;   ///< soft per-step latency target; overruns only warn
  double tie_rel_tol = 1e-12;
};

/// Thrown when the forecast cannot cover a horizon window and padding is off.
class ForecastExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CandidateEvaluation {
  SwitchSchedule schedule;
  double cost = 0.0;
  double tracking_term = 0.0;
  std::array<double, 4> barrier_terms{};
  double predicted_soc_end = 0.0;
  int num_transitions = 0;
};

/// e(t_k) = P(t_k) - sum_i p_i(t_k).
std::vector<double> tracking_error(std::span<const double> forecast_window,
                                   std::span<const std::vector<double>> demands);

/// Sum of squared errors plus the four barrier terms. Both sequences are
/// already restricted to the scored samples (the first horizon sample is
/// excluded by the caller).
double cost(std::span<const double> e, std::span<const double> soc_traj, const BatterySpec& spec);

/// Fills `out` with the window [start, start + out.size()) of the forecast,
/// holding the last value past the end. Returns true if padding was used.
bool forecast_window(const ForecastSeries& forecast, std::size_t start, std::span<double> out);

/// Repeats each control-step bit steps_per_ctrl times.
std::vector<std::uint8_t> expand_to_fine(std::span<const std::uint8_t> control_bits,
                                         int steps_per_ctrl);

/// Simulates every load under `schedule` on private copies of `models` and
/// scores the horizon. `forecast_window` must cover the full fine horizon.
CandidateEvaluation evaluate_candidate(const SwitchSchedule& schedule,
                                       std::span<const DiscreteLoadModel> models,
                                       std::span<const double> forecast_window,
                                       const BatteryState& battery, const SchedulerConfig& config);

struct StepOutcome {
  CandidateEvaluation best;
  std::uint64_t candidate_count = 0;
};

/// Enumerates the admissible set from `switch_states` at `current_step` and
/// returns the minimum-cost schedule. Costs within tie_rel_tol of the minimum
/// are tied; ties go to the fewest transitions, then the smallest bit matrix.
/// The result does not depend on config.workers.
StepOutcome optimize_step(std::span<const DiscreteLoadModel> models,
                          std::span<const LoadSwitchState> switch_states,
                          const BatteryState& battery, std::span<const double> forecast_window,
                          const SchedulerConfig& config, std::int64_t current_step);

struct StepRecord {
  std::int64_t step = 0;
  double t_s = 0.0;
  std::vector<std::uint8_t> applied;
  std::uint64_t candidate_count = 0;
  double wall_time_s = 0.0;
  double cost = 0.0;
  unsigned active_barriers = 0;  ///< bit j: predicted B_{j+1} > 0 for the chosen schedule
  bool padded = false;
};

/// Fine-grid record of a closed-loop run plus per-control-step diagnostics.
struct SimTrace {
  int n_loads = 0;
  std::vector<double> t_s;
  std::vector<double> forecast_pu;
  std::vector<std::vector<double>> load_pu;  ///< [load][sample]
  std::vector<double> total_pu;
  std::vector<double> e_pu;  ///< also the battery power, positive = charging
  std::vector<double> soc;
  std::vector<StepRecord> steps;

  [[nodiscard]] std::size_t size() const { return t_s.size(); }
};

struct ScheduleSolution {
  SimTrace trace;
  double soc_init = 0.0;
  double total_wall_time_s = 0.0;
};

/// Moving-horizon loop: optimize, apply the first column for one control
/// interval, update dwell history and SOC, slide the window. Runs
/// floor(forecast length / steps_per_ctrl) control steps.
ScheduleSolution receding_horizon_run(const ForecastSeries& forecast,
                                      std::span<const LoadSpec> loads,
                                      const SchedulerConfig& config, double soc_init);

}  // namespace loadsched
