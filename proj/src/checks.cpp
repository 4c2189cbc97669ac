#include "loadsched/checks.hpp"

#include <cmath>
#include <sstream>

namespace loadsched {

namespace {

std::string at_sample(const char* what, std::size_t m, double got, double want) {
  std::ostringstream s;
  s.precision(17);
  s << what << " mismatch at sample " << m << ": " << got << " vs " << want;
  return s.str();
}

}  // namespace

std::vector<std::string> check_trace_columns(const SimTrace& trace, const BatterySpec& battery,
                                             double dt_s, double soc_init, double tol) {
  std::vector<std::string> problems;
  const std::size_t len = trace.size();
  if (trace.forecast_pu.size() != len || trace.total_pu.size() != len ||
      trace.e_pu.size() != len || trace.soc.size() != len ||
      trace.load_pu.size() != static_cast<std::size_t>(trace.n_loads)) {
    problems.emplace_back("column lengths differ");
    return problems;
  }
  double prev_soc = soc_init;
  for (std::size_t m = 0; m < len; ++m) {
    double total = 0.0;
    for (const auto& p : trace.load_pu) {
      total += p[m];
    }
    if (std::abs(total - trace.total_pu[m]) > tol) {
      problems.push_back(at_sample("total", m, trace.total_pu[m], total));
    }
    const double e = trace.forecast_pu[m] - trace.total_pu[m];
    if (std::abs(e - trace.e_pu[m]) > tol) {
      problems.push_back(at_sample("error", m, trace.e_pu[m], e));
    }
    const double soc = prev_soc + battery.s_norm * dt_s * trace.e_pu[m];
    if (std::abs(soc - trace.soc[m]) > tol) {
      problems.push_back(at_sample("soc", m, trace.soc[m], soc));
    }
    prev_soc = trace.soc[m];
  }
  return problems;
}

std::vector<std::string> check_dwell_times(const SimTrace& trace, std::span<const LoadSpec> loads,
                                           const HorizonConfig& horizon) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const double on_steps = loads[i].t_on_min_s / horizon.ctrl_interval_s;
    const double off_steps = loads[i].t_off_min_s / horizon.ctrl_interval_s;
    std::size_t run_start = 0;
    int value = 0;
    bool leading = true;  // the initial off run has no dwell requirement
    for (std::size_t k = 0; k <= trace.steps.size(); ++k) {
      const bool at_end = k == trace.steps.size();
      const int w = at_end ? -1 : trace.steps[k].applied[i];
      if (!at_end && w == value) {
        continue;
      }
      if (!at_end) {
        const auto len = static_cast<double>(k - run_start);
        const double need = value == 1 ? on_steps : off_steps;
        if (!(leading && value == 0) && len < need - 1e-9) {
          std::ostringstream s;
          s << "load " << loads[i].id << ": " << (value ? "on" : "off") << " run of " << len
            << " steps starting at step " << run_start << " is shorter than " << need;
          problems.push_back(s.str());
        }
      }
      leading = false;
      run_start = k;
      value = w;
    }
  }
  return problems;
}

std::vector<std::string> check_replay(const SimTrace& trace, const ForecastSeries& forecast,
                                      std::span<const LoadSpec> loads,
                                      const SchedulerConfig& config, double soc_init) {
  std::vector<std::string> problems;
  const int spc = config.horizon.steps_per_ctrl();
  std::vector<DiscreteLoadModel> models;
  for (const auto& spec : loads) {
    models.emplace_back(spec, config.horizon.fine_dt_s);
  }
  std::vector<std::vector<std::uint8_t>> w(loads.size());
  for (const auto& st : trace.steps) {
    for (std::size_t i = 0; i < loads.size(); ++i) {
      w[i].insert(w[i].end(), static_cast<std::size_t>(spc), st.applied[i]);
    }
  }
  std::vector<std::vector<double>> p(loads.size());
  for (std::size_t i = 0; i < loads.size(); ++i) {
    p[i] = simulate_switched(models[i], w[i]);
  }
  const std::size_t len = w.empty() ? 0 : w[0].size();
  if (len != trace.size()) {
    problems.emplace_back("replay length differs from trace length");
    return problems;
  }
  double soc = soc_init;
  const double gain = config.battery.s_norm * config.horizon.fine_dt_s;
  for (std::size_t m = 0; m < len; ++m) {
    double total = 0.0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
      if (p[i][m] != trace.load_pu[i][m]) {
        problems.push_back(at_sample("load power", m, trace.load_pu[i][m], p[i][m]));
      }
      total += p[i][m];
    }
    const double e = forecast.values[m] - total;
    soc += gain * e;
    if (total != trace.total_pu[m]) {
      problems.push_back(at_sample("total", m, trace.total_pu[m], total));
    }
    if (e != trace.e_pu[m]) {
      problems.push_back(at_sample("error", m, trace.e_pu[m], e));
    }
    if (soc != trace.soc[m]) {
      problems.push_back(at_sample("soc", m, trace.soc[m], soc));
    }
  }
  return problems;
}

}  // namespace loadsched
