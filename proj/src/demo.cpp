#include "loadsched/demo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "numfmt.hpp"

namespace loadsched {

StepResponseDemo demo_step_responses(std::span<const LoadSpec> loads, double dt_s, double on_s,
                                     double off_s) {
  if (!(dt_s > 0.0) || !(on_s > 0.0) || !(off_s >= 0.0)) {
    throw std::invalid_argument("demo: dt, on and off durations must be positive");
  }
  const auto n_on = static_cast<std::size_t>(std::llround(on_s / dt_s));
  const auto n_off = static_cast<std::size_t>(std::llround(off_s / dt_s));

  StepResponseDemo demo;
  demo.dt_s = dt_s;
  demo.w.assign(n_on, 1);
  demo.w.insert(demo.w.end(), n_off, 0);
  for (std::size_t k = 0; k < demo.w.size(); ++k) {
    demo.t_s.push_back(static_cast<double>(k) * dt_s);
  }

  for (const auto& spec : loads) {
    DiscreteLoadModel model(spec, dt_s);
    auto p = simulate_switched(model, demo.w);

    StepResponseMetrics m;
    m.id = spec.id;
    m.size_pu = spec.size_pu;
    const auto on_phase = std::span<const double>(p).first(n_on);
    m.peak_pu = *std::max_element(on_phase.begin(), on_phase.end());
    m.overshoot_pu = std::max(0.0, m.peak_pu - spec.size_pu);
    m.final_on_pu = on_phase.back();
    m.monotone_rise = std::is_sorted(on_phase.begin(), on_phase.end());
    const double band = 0.01 * spec.size_pu;
    for (std::size_t k = n_on; k-- > 0;) {
      if (std::abs(on_phase[k] - spec.size_pu) > band) {
        if (k + 1 < n_on) {
          m.settle_time_s = static_cast<double>(k + 1) * dt_s;
        }
        break;
      }
      if (k == 0) {
        m.settle_time_s = 0.0;
      }
    }
    m.final_off_pu = n_off > 0 ? p.back() : m.final_on_pu;
    demo.metrics.push_back(m);
    demo.load_pu.push_back(std::move(p));
  }
  return demo;
}

void write_demo_csv(const StepResponseDemo& demo, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "t_s,w";
  for (const auto& m : demo.metrics) {
    out << ",p_" << m.id << "_pu";
  }
  out << '\n';
  for (std::size_t k = 0; k < demo.t_s.size(); ++k) {
    out << detail::format_double(demo.t_s[k]) << ',' << static_cast<int>(demo.w[k]);
    for (const auto& p : demo.load_pu) {
      out << ',' << detail::format_double(p[k]);
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write failed: " + path.string());
  }
}

nlohmann::json to_json(const StepResponseDemo& demo) {
  nlohmann::json loads = nlohmann::json::array();
  for (const auto& m : demo.metrics) {
    loads.push_back({{"id", m.id},
                     {"size_pu", m.size_pu},
                     {"peak_pu", m.peak_pu},
                     {"overshoot_pu", m.overshoot_pu},
                     {"final_on_pu", m.final_on_pu},
                     {"settle_time_s", m.settle_time_s},
                     {"monotone_rise", m.monotone_rise},
                     {"final_off_pu", m.final_off_pu}});
  }
  return {{"dt_s", demo.dt_s}, {"samples", demo.t_s.size()}, {"loads", loads}};
}

}  // namespace loadsched
