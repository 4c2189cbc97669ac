#include "loadsched/scheduler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <thread>

namespace loadsched {

namespace {

int resolve_workers(int requested) {
  if (requested > 0) {
    return requested;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Score {
  double tracking = 0.0;
  BarrierTerms barriers;
  double soc_end = 0.0;
  double cost = 0.0;
};

// Scores one candidate from its summed demand. The first horizon sample is
// fixed by the current state, so it feeds the SOC prediction but not the cost.
Score score_demand(std::span<const double> forecast, std::span<const double> demand, double soc0,
                   const BatterySpec& battery, double dt_s, std::vector<double>& e,
                   std::vector<double>& soc) {
  const std::size_t h = forecast.size();
  e.resize(h);
  soc.resize(h);
  const double gain = battery.s_norm * dt_s;
  double acc = soc0;
  for (std::size_t m = 0; m < h; ++m) {
    e[m] = forecast[m] - demand[m];
    acc += gain * e[m];
    soc[m] = acc;
  }
  Score s;
  const std::span<const double> e_scored = std::span<const double>(e).subspan(h > 0 ? 1 : 0);
  const std::span<const double> soc_scored = std::span<const double>(soc).subspan(h > 0 ? 1 : 0);
  for (double v : e_scored) {
    s.tracking += v * v;
  }
  s.barriers = barrier_terms(e_scored, soc_scored, battery);
  s.cost = s.tracking + s.barriers.total();
  s.soc_end = h > 0 ? soc[h - 1] : soc0;
  return s;
}

std::vector<double> simulate_profile(const DiscreteLoadModel& model,
                                     std::span<const std::uint8_t> control_bits,
                                     int steps_per_ctrl) {
  DiscreteLoadModel copy = model;
  return simulate_switched(copy, expand_to_fine(control_bits, steps_per_ctrl));
}

void sum_demand(std::span<const std::vector<double>> profiles, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& p : profiles) {
    for (std::size_t m = 0; m < out.size(); ++m) {
      out[m] += p[m];
    }
  }
}

CandidateEvaluation make_evaluation(SwitchSchedule schedule, const Score& s,
                                    std::span<const DiscreteLoadModel> models) {
  CandidateEvaluation ev;
  std::vector<std::uint8_t> current(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    current[i] = models[i].active() ? 1 : 0;
  }
  ev.num_transitions = schedule.num_transitions(current);
  ev.schedule = std::move(schedule);
  ev.cost = s.cost;
  ev.tracking_term = s.tracking;
  ev.barrier_terms = s.barriers.b;
  ev.predicted_soc_end = s.soc_end;
  return ev;
}

}  // namespace

std::vector<double> tracking_error(std::span<const double> forecast_window,
                                   std::span<const std::vector<double>> demands) {
  for (const auto& d : demands) {
    if (d.size() != forecast_window.size()) {
      throw std::invalid_argument("tracking_error: demand has " + std::to_string(d.size()) +
                                  " samples, forecast window has " +
                                  std::to_string(forecast_window.size()));
    }
  }
  std::vector<double> total(forecast_window.size(), 0.0);
  sum_demand(demands, total);
  std::vector<double> e(forecast_window.size());
  for (std::size_t m = 0; m < e.size(); ++m) {
    e[m] = forecast_window[m] - total[m];
  }
  return e;
}

double cost(std::span<const double> e, std::span<const double> soc_traj, const BatterySpec& spec) {
  double tracking = 0.0;
  for (double v : e) {
    tracking += v * v;
  }
  return tracking + barrier_terms(e, soc_traj, spec).total();
}

bool forecast_window(const ForecastSeries& forecast, std::size_t start, std::span<double> out) {
  const auto& v = forecast.values;
  if (v.empty()) {
    throw ForecastExhausted("forecast is empty");
  }
  bool padded = false;
  for (std::size_t m = 0; m < out.size(); ++m) {
    const std::size_t idx = start + m;
    if (idx < v.size()) {
      out[m] = v[idx];
    } else {
      out[m] = v.back();
      padded = true;
    }
  }
  return padded;
}

std::vector<std::uint8_t> expand_to_fine(std::span<const std::uint8_t> control_bits,
                                         int steps_per_ctrl) {
  std::vector<std::uint8_t> fine;
  fine.reserve(control_bits.size() * static_cast<std::size_t>(steps_per_ctrl));
  for (auto b : control_bits) {
    fine.insert(fine.end(), static_cast<std::size_t>(steps_per_ctrl), b);
  }
  return fine;
}

CandidateEvaluation evaluate_candidate(const SwitchSchedule& schedule,
                                       std::span<const DiscreteLoadModel> models,
                                       std::span<const double> forecast_window,
                                       const BatteryState& battery, const SchedulerConfig& config) {
  const int spc = config.horizon.steps_per_ctrl();
  const auto h = static_cast<std::size_t>(schedule.n_steps()) * static_cast<std::size_t>(spc);
  if (forecast_window.size() != h) {
    throw std::invalid_argument("evaluate_candidate: forecast window has " +
                                std::to_string(forecast_window.size()) + " samples, horizon has " +
                                std::to_string(h));
  }
  if (static_cast<std::size_t>(schedule.n_loads()) != models.size()) {
    throw std::invalid_argument("evaluate_candidate: schedule and model counts differ");
  }
  std::vector<std::vector<double>> profiles;
  profiles.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    profiles.push_back(simulate_profile(models[i], schedule.row(static_cast<int>(i)), spc));
  }
  std::vector<double> demand(h);
  sum_demand(profiles, demand);
  std::vector<double> e;
  std::vector<double> soc;
  const Score s = score_demand(forecast_window, demand, battery.soc, config.battery,
                               config.horizon.fine_dt_s, e, soc);
  return make_evaluation(schedule, s, models);
}

StepOutcome optimize_step(std::span<const DiscreteLoadModel> models,
                          std::span<const LoadSwitchState> switch_states,
                          const BatteryState& battery, std::span<const double> forecast_window,
                          const SchedulerConfig& config, std::int64_t current_step) {
  if (models.size() != switch_states.size()) {
    throw std::invalid_argument("optimize_step: model and switch-state counts differ");
  }
  const int spc = config.horizon.steps_per_ctrl();
  const auto h = static_cast<std::size_t>(config.horizon.fine_length());
  if (forecast_window.size() != h) {
    throw std::invalid_argument("optimize_step: forecast window has " +
                                std::to_string(forecast_window.size()) + " samples, horizon has " +
                                std::to_string(h));
  }
  const std::size_t n = models.size();

  std::vector<std::vector<Trajectory>> per_load;
  per_load.reserve(n);
  for (const auto& st : switch_states) {
    per_load.push_back(admissible_trajectories(st, config.horizon, current_step));
  }

  // Loads are decoupled, so each trajectory's power profile is simulated
  // once and candidates only sum profiles.
  std::vector<std::vector<std::vector<double>>> profiles(n);
  std::vector<std::vector<int>> transitions(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t current = models[i].active() ? 1 : 0;
    for (const auto& t : per_load[i]) {
      profiles[i].push_back(simulate_profile(models[i], t, spc));
      int count = 0;
      std::uint8_t prev = current;
      for (auto b : t) {
        count += b != prev ? 1 : 0;
        prev = b;
      }
      transitions[i].push_back(count);
    }
  }

  const CombinationSpace space(std::move(per_load));
  const std::uint64_t count = space.size();
  std::vector<double> costs(count);
  std::vector<int> n_trans(count);

  auto evaluate_range = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::size_t> choice(n);
    std::vector<double> demand(h);
    std::vector<double> e;
    std::vector<double> soc;
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      space.decode(idx, choice);
      std::fill(demand.begin(), demand.end(), 0.0);
      int trans = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& p = profiles[i][choice[i]];
        for (std::size_t m = 0; m < h; ++m) {
          demand[m] += p[m];
        }
        trans += transitions[i][choice[i]];
      }
      costs[idx] = score_demand(forecast_window, demand, battery.soc, config.battery,
                                config.horizon.fine_dt_s, e, soc)
                       .cost;
      n_trans[idx] = trans;
    }
  };

  const auto workers =
      static_cast<std::uint64_t>(std::min<std::uint64_t>(resolve_workers(config.workers), count));
  if (workers <= 1) {
    evaluate_range(0, count);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (count + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min(count, begin + chunk);
      if (begin < end) {
        pool.emplace_back(evaluate_range, begin, end);
      }
    }
  }

  // Candidate index order is lexicographic in the bit matrix because each
  // per-load list is lexicographic and load 0 varies slowest.
  double min_cost = std::numeric_limits<double>::infinity();
  for (double c : costs) {
    min_cost = std::min(min_cost, c);
  }
  const double threshold = min_cost + config.tie_rel_tol * std::abs(min_cost);
  std::uint64_t best = 0;
  int best_trans = std::numeric_limits<int>::max();
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    if (costs[idx] <= threshold && n_trans[idx] < best_trans) {
      best = idx;
      best_trans = n_trans[idx];
    }
  }

  StepOutcome out;
  out.candidate_count = count;
  out.best = evaluate_candidate(space.at(best), models, forecast_window, battery, config);
  return out;
}

ScheduleSolution receding_horizon_run(const ForecastSeries& forecast,
                                      std::span<const LoadSpec> loads,
                                      const SchedulerConfig& config, double soc_init) {
  validate(config.horizon, loads);
  validate(config.battery);
  if (std::abs(forecast.dt_s - config.horizon.fine_dt_s) > 1e-9) {
    throw std::invalid_argument("forecast sampling time differs from the fine time step");
  }
  const int spc = config.horizon.steps_per_ctrl();
  const auto h = static_cast<std::size_t>(config.horizon.fine_length());
  const double dt = config.horizon.fine_dt_s;
  const std::size_t n = loads.size();

  std::vector<DiscreteLoadModel> models;
  std::vector<LoadSwitchState> states;
  for (const auto& spec : loads) {
    models.emplace_back(spec, dt);
    states.push_back(LoadSwitchState::initial(spec, config.horizon));
  }

  ScheduleSolution sol;
  sol.soc_init = soc_init;
  SimTrace& tr = sol.trace;
  tr.n_loads = static_cast<int>(n);
  tr.load_pu.assign(n, {});

  const std::size_t n_steps = forecast.values.size() / static_cast<std::size_t>(spc);
  const double gain = config.battery.s_norm * dt;
  BatteryState battery{soc_init};
  std::vector<double> window(h);
  const auto run_start = std::chrono::steady_clock::now();

  for (std::size_t k = 0; k < n_steps; ++k) {
    const std::size_t f0 = k * static_cast<std::size_t>(spc);
    const bool padded = forecast_window(forecast, f0, window);
    if (padded && !config.pad_forecast) {
      throw ForecastExhausted("forecast ends before the horizon at control step " +
                              std::to_string(k));
    }

    const auto t0 = std::chrono::steady_clock::now();
    const StepOutcome outcome =
        optimize_step(models, states, battery, window, config, static_cast<std::int64_t>(k));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (wall > config.step_budget_s) {
      std::cerr << "warning: control step " << k << " took " << wall << " s (budget "
                << config.step_budget_s << " s)\n";
    }

    StepRecord rec;
    rec.step = static_cast<std::int64_t>(k);
    rec.t_s = static_cast<double>(f0) * dt;
    rec.applied = outcome.best.schedule.column(0);
    rec.candidate_count = outcome.candidate_count;
    rec.wall_time_s = wall;
    rec.cost = outcome.best.cost;
    for (unsigned j = 0; j < 4; ++j) {
      if (outcome.best.barrier_terms[j] > 0.0) {
        rec.active_barriers |= 1u << j;
      }
    }
    rec.padded = padded;

    for (int s = 0; s < spc; ++s) {
      const std::size_t f = f0 + static_cast<std::size_t>(s);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double p = models[i].advance(rec.applied[i] != 0);
        tr.load_pu[i].push_back(p);
        total += p;
      }
      const double e = forecast.values[f] - total;
      battery.soc += gain * e;
      tr.t_s.push_back(static_cast<double>(f) * dt);
      tr.forecast_pu.push_back(forecast.values[f]);
      tr.total_pu.push_back(total);
      tr.e_pu.push_back(e);
      tr.soc.push_back(battery.soc);
    }
    for (std::size_t i = 0; i < n; ++i) {
      states[i].apply(rec.applied[i] != 0, static_cast<std::int64_t>(k));
    }
    tr.steps.push_back(std::move(rec));
  }
  sol.total_wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
  return sol;
}

}  // namespace loadsched
