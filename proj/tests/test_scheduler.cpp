#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <doctest.h>

#include "loadsched/checks.hpp"
#include "loadsched/scheduler.hpp"
#include "support.hpp"

using namespace loadsched;

namespace {

// Cost recomputed from scratch: simulate each load on its own copy, form e and
// SOC sample by sample, score samples 1..H-1.
double oracle_cost(const SwitchSchedule& sched, const std::vector<DiscreteLoadModel>& models,
                   const std::vector<double>& window, double soc0, const SchedulerConfig& cfg) {
  const int spc = cfg.horizon.steps_per_ctrl();
  const std::size_t h = window.size();
  std::vector<double> total(h, 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    DiscreteLoadModel m = models[i];
    for (std::size_t k = 0; k < h; ++k) {
      const bool w = sched.at(static_cast<int>(i), static_cast<int>(k) / spc) != 0;
      total[k] += m.advance(w);
    }
  }
  const auto& b = cfg.battery;
  double soc = soc0;
  double sq = 0.0;
  double emax = 0.0;
  double smin = std::numeric_limits<double>::infinity();
  double smax = -smin;
  for (std::size_t k = 0; k < h; ++k) {
    const double e = window[k] - total[k];
    soc += b.s_norm * cfg.horizon.fine_dt_s * e;
    if (k == 0) continue;
    sq += e * e;
    emax = std::max(emax, std::abs(e));
    smin = std::min(smin, soc);
    smax = std::max(smax, soc);
  }
  double barriers = 0.0;
  if (b.p_norm * emax >= 1.0) barriers += b.c[0] * (b.p_norm * emax - 1.0);
  barriers += b.c[1] * std::max(0.0, -smin);
  barriers += b.c[2] * std::max(0.0, smax - b.soc_hi);
  barriers += b.c[3] * std::max(0.0, b.soc_lo - smin);
  return sq + barriers;
}

std::vector<DiscreteLoadModel> models_for(const std::vector<LoadSpec>& loads, double dt) {
  std::vector<DiscreteLoadModel> out;
  for (const auto& s : loads) out.emplace_back(s, dt);
  return out;
}

std::vector<LoadSwitchState> states_for(const std::vector<LoadSpec>& loads, const HorizonConfig& h) {
  std::vector<LoadSwitchState> out;
  for (const auto& s : loads) out.push_back(LoadSwitchState::initial(s, h));
  return out;
}

// Sequential reference argmin with the documented tie rule.
SwitchSchedule naive_argmin(const std::vector<DiscreteLoadModel>& models,
                            const std::vector<LoadSwitchState>& states, double soc0,
                            const std::vector<double>& window, const SchedulerConfig& cfg,
                            std::int64_t step) {
  std::vector<std::vector<Trajectory>> per_load;
  for (const auto& s : states) per_load.push_back(admissible_trajectories(s, cfg.horizon, step));
  const auto space = enumerate_combinations(per_load);
  std::vector<CandidateEvaluation> evals;
  for (const auto& sched : space) {
    evals.push_back(evaluate_candidate(sched, models, window, BatteryState{soc0}, cfg));
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ev : evals) best = std::min(best, ev.cost);
  const CandidateEvaluation* pick = nullptr;
  for (const auto& ev : evals) {
    if (ev.cost > best + cfg.tie_rel_tol * std::abs(best)) continue;
    if (!pick || ev.num_transitions < pick->num_transitions ||
        (ev.num_transitions == pick->num_transitions && ev.schedule < pick->schedule)) {
      pick = &ev;
    }
  }
  return pick->schedule;
}

SchedulerConfig small_config(int n_steps, double ctrl, double dt) {
  SchedulerConfig cfg;
  cfg.horizon.n_steps = n_steps;
  cfg.horizon.ctrl_interval_s = ctrl;
  cfg.horizon.fine_dt_s = dt;
  return cfg;
}

}  // namespace

TEST_CASE("tracking error examples") {
  const std::vector<double> forecast(5, 1.0);
  const std::vector<std::vector<double>> one{std::vector<double>(5, 0.60)};
  for (double e : tracking_error(forecast, one)) {
    CHECK(e == doctest::Approx(0.40).epsilon(1e-15));
  }
  const std::vector<std::vector<double>> match{std::vector<double>(5, 0.25),
                                               std::vector<double>(5, 0.75)};
  for (double e : tracking_error(forecast, match)) CHECK(e == 0.0);
  const std::vector<double> zero(5, 0.0);
  const std::vector<std::vector<double>> off{std::vector<double>(5, 0.0)};
  for (double e : tracking_error(zero, off)) CHECK(e == 0.0);
  const std::vector<std::vector<double>> bad{std::vector<double>(4, 0.0)};
  CHECK_THROWS_AS(tracking_error(forecast, bad), std::invalid_argument);
}

TEST_CASE("cost examples") {
  const BatterySpec spec;
  const std::vector<double> zero(100, 0.0);
  const std::vector<double> mid(100, 0.5);
  CHECK(cost(zero, mid, spec) == 0.0);
  const std::vector<double> e(100, 0.05);
  CHECK(cost(e, mid, spec) == doctest::Approx(0.25).epsilon(1e-12));

  // e = 0.1 is at the power limit; use p_norm = 5 so only the tracking term is
  // active, as in the 100-sample example.
  BatterySpec loose = spec;
  loose.p_norm = 5.0;
  const std::vector<double> tenth(100, 0.1);
  CHECK(cost(tenth, mid, loose) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> peak(mid);
  peak[40] = 0.95;
  CHECK(cost(tenth, peak, loose) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("window and expansion helpers") {
  ForecastSeries f{1.0, {1, 2, 3, 4}};
  std::vector<double> w(3);
  CHECK_FALSE(forecast_window(f, 1, w));
  CHECK(w == std::vector<double>{2, 3, 4});
  CHECK(forecast_window(f, 2, w));
  CHECK(w == std::vector<double>{3, 4, 4});
  const std::vector<std::uint8_t> bits{1, 0};
  CHECK(expand_to_fine(bits, 3) == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0});
  ForecastSeries empty{1.0, {}};
  CHECK_THROWS_AS(forecast_window(empty, 0, w), ForecastExhausted);
}

TEST_CASE("one-load N=2 toy matches a hand-simulated oracle") {
  // Pole -0.5 on, -0.25 off, size 1, control every 2 s, fine step 1 s.
  const LoadSpec spec = testing::first_order(1, 1.0, -0.5, -0.25, 2, 2);
  auto cfg = small_config(2, 2.0, 1.0);
  cfg.battery.p_norm = 1.0;
  cfg.battery.s_norm = 0.01;
  const std::vector<DiscreteLoadModel> models{DiscreteLoadModel(spec, 1.0)};
  const std::vector<double> window{0.5, 0.5, 0.5, 0.5};

  const double a = std::exp(-0.5);
  const double b = std::exp(-0.25);
  // Power at samples 0..3 for each schedule, by hand.
  const std::vector<std::vector<double>> p{
      {0, 0, 0, 0},
      {0, 0, 0, 1 - a},
      {0, 1 - a, 1 - a * a, (1 - a * a) * b},
      {0, 1 - a, 1 - a * a, 1 - a * a * a}};
  const std::vector<Trajectory> traj{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<double> hand_cost;
  for (std::size_t c = 0; c < 4; ++c) {
    SwitchSchedule s(1, 2);
    s.set(0, 0, traj[c][0]);
    s.set(0, 1, traj[c][1]);
    const auto ev = evaluate_candidate(s, models, window, BatteryState{0.5}, cfg);
    double soc = 0.5;
    double sq = 0.0;
    double smax = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const double e = 0.5 - p[c][k];
      soc += 0.01 * e;
      if (k > 0) {
        sq += e * e;
        smax = std::max(smax, soc);
      }
    }
    CHECK(ev.tracking_term == doctest::Approx(sq).epsilon(1e-12));
    CHECK(ev.cost == doctest::Approx(sq).epsilon(1e-12));
    CHECK(smax < 0.9);
    CHECK(ev.predicted_soc_end == doctest::Approx(soc).epsilon(1e-12));
    hand_cost.push_back(sq);
  }
  const auto best = std::min_element(hand_cost.begin(), hand_cost.end()) - hand_cost.begin();
  const std::vector<LoadSwitchState> states{LoadSwitchState::initial(spec, cfg.horizon)};
  const auto out = optimize_step(models, states, BatteryState{0.5}, window, cfg, 0);
  CHECK(out.candidate_count == 4);
  CHECK(out.best.schedule.row(0)[0] == traj[static_cast<std::size_t>(best)][0]);
  CHECK(out.best.schedule.row(0)[1] == traj[static_cast<std::size_t>(best)][1]);
}

TEST_CASE("candidate costs equal an independent recomputation") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  cfg.battery.s_norm = 1.0 / 120.0;
  const auto models = models_for(loads, 1.0);
  const auto states = states_for(loads, cfg.horizon);
  std::vector<double> window(360);
  for (std::size_t k = 0; k < window.size(); ++k) window[k] = 0.3 + 0.5 * std::sin(k / 90.0);
  std::vector<std::vector<Trajectory>> per_load;
  for (const auto& s : states) per_load.push_back(admissible_trajectories(s, cfg.horizon));
  for (double soc0 : {0.5, 0.88, 0.12, 1.0}) {
    for (const auto& sched : enumerate_combinations(per_load)) {
      const auto ev = evaluate_candidate(sched, models, window, BatteryState{soc0}, cfg);
      REQUIRE(ev.cost == doctest::Approx(oracle_cost(sched, models, window, soc0, cfg))
                             .epsilon(1e-12));
      double sum = ev.tracking_term;
      for (double b : ev.barrier_terms) sum += b;
      REQUIRE(std::abs(ev.cost - sum) <= 1e-9);
    }
  }
}

TEST_CASE("property: argmin equals a naive scan on small instances") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n_loads = 1 + static_cast<int>(rng() % 2);
    const int n_steps = 2 + static_cast<int>(rng() % 2);
    auto cfg = small_config(n_steps, 5.0, 1.0);
    cfg.battery.s_norm = 0.05;
    std::vector<LoadSpec> loads;
    for (int i = 0; i < n_loads; ++i) {
      loads.push_back(testing::first_order(i + 1, 0.1 + 0.5 * u(rng), -0.05 - u(rng),
                                           -0.05 - u(rng), 5.0, 5.0));
    }
    const auto models = models_for(loads, 1.0);
    auto states = states_for(loads, cfg.horizon);
    std::vector<double> window(static_cast<std::size_t>(cfg.horizon.fine_length()));
    const double level = u(rng);
    for (auto& v : window) v = level + 0.05 * u(rng);
    const double soc0 = u(rng);
    const auto out = optimize_step(models, states, BatteryState{soc0}, window, cfg, 0);
    REQUIRE(out.best.schedule == naive_argmin(models, states, soc0, window, cfg, 0));
  }
}

TEST_CASE("worker count does not change the result") {
  const auto loads = testing::table1();
  std::vector<double> values(1800);
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = 0.9 * std::sin(k / 600.0);
  const ForecastSeries f{1.0, values};
  SchedulerConfig cfg;
  cfg.workers = 1;
  const auto ref = receding_horizon_run(f, loads, cfg, 0.5);
  for (int w : {2, 3, 4, 0}) {
    cfg.workers = w;
    const auto got = receding_horizon_run(f, loads, cfg, 0.5);
    REQUIRE(got.trace.soc == ref.trace.soc);
    REQUIRE(got.trace.e_pu == ref.trace.e_pu);
    for (std::size_t k = 0; k < ref.trace.steps.size(); ++k) {
      REQUIRE(got.trace.steps[k].applied == ref.trace.steps[k].applied);
      REQUIRE(got.trace.steps[k].cost == ref.trace.steps[k].cost);
    }
  }
}

TEST_CASE("zero forecast keeps every load off and the soc flat") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  const ForecastSeries f{1.0, std::vector<double>(600, 0.0)};
  const auto sol = receding_horizon_run(f, loads, cfg, 0.5);
  REQUIRE(sol.trace.steps.size() == 10);
  for (const auto& st : sol.trace.steps) {
    CHECK(st.applied == std::vector<std::uint8_t>{0, 0, 0});
    CHECK(st.cost == 0.0);
    CHECK(st.candidate_count > 0);
  }
  for (double s : sol.trace.soc) CHECK(s == 0.5);

  const auto models = models_for(loads, 1.0);
  const auto states = states_for(loads, cfg.horizon);
  const std::vector<double> window(360, 0.0);
  const auto out = optimize_step(models, states, BatteryState{0.5}, window, cfg, 0);
  CHECK(out.best.cost == 0.0);
  CHECK(out.best.tracking_term == 0.0);
  CHECK(out.best.num_transitions == 0);
}

TEST_CASE("a long 0.60 plateau settles on load 1 alone") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  const ForecastSeries f{1.0, std::vector<double>(3600, 0.60)};
  const auto sol = receding_horizon_run(f, loads, cfg, 0.5);
  CHECK(sol.trace.steps.back().applied == std::vector<std::uint8_t>{1, 0, 0});
  CHECK(std::abs(sol.trace.e_pu.back()) < 0.01);
}

TEST_CASE("closed-loop trace passes the independent checkers") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  cfg.battery.s_norm = 1.0 / 300.0;
  std::vector<double> values(3600);
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = 0.95 * std::sin(3.14159 * k / 3600.0) + 0.05 * std::sin(k / 37.0);
  }
  const ForecastSeries f{1.0, values};
  const auto sol = receding_horizon_run(f, loads, cfg, 0.5);
  CHECK(sol.trace.size() == 3600);
  CHECK(check_trace_columns(sol.trace, cfg.battery, 1.0, 0.5).empty());
  CHECK(check_replay(sol.trace, f, loads, cfg, 0.5).empty());
  CHECK(check_dwell_times(sol.trace, loads, cfg.horizon).empty());
}

TEST_CASE("the checkers catch corrupted traces") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  std::vector<double> values(1200, 0.6);
  const ForecastSeries f{1.0, values};
  auto sol = receding_horizon_run(f, loads, cfg, 0.5);
  auto bad = sol.trace;
  bad.e_pu[100] += 1e-6;
  CHECK_FALSE(check_trace_columns(bad, cfg.battery, 1.0, 0.5).empty());
  CHECK_FALSE(check_replay(bad, f, loads, cfg, 0.5).empty());

  auto flicker = sol.trace;
  for (std::size_t k = 0; k < flicker.steps.size(); ++k) {
    flicker.steps[k].applied = {static_cast<std::uint8_t>(k % 2), 0, 0};
  }
  CHECK_FALSE(check_dwell_times(flicker, loads, cfg.horizon).empty());
}

TEST_CASE("padding and run length") {
  const auto loads = testing::table1();
  SchedulerConfig cfg;
  const ForecastSeries f{1.0, std::vector<double>(630, 0.2)};
  const auto sol = receding_horizon_run(f, loads, cfg, 0.5);
  REQUIRE(sol.trace.steps.size() == 10);
  CHECK(sol.trace.size() == 600);
  CHECK_FALSE(sol.trace.steps[4].padded);
  CHECK(sol.trace.steps[5].padded);
  cfg.pad_forecast = false;
  CHECK_THROWS_AS(receding_horizon_run(f, loads, cfg, 0.5), ForecastExhausted);
  const ForecastSeries wrong_dt{2.0, std::vector<double>(600, 0.2)};
  CHECK_THROWS_AS(receding_horizon_run(wrong_dt, loads, SchedulerConfig{}, 0.5),
                  std::invalid_argument);
}
