#include "loadsched/battery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace loadsched {

void validate(const BatterySpec& spec) {
  if (!(spec.p_norm > 0.0) || !(spec.s_norm > 0.0)) {
    throw std::invalid_argument("battery: p_norm and s_norm must be positive");
  }
  if (!(0.0 <= spec.soc_lo && spec.soc_lo < spec.soc_hi && spec.soc_hi <= 1.0)) {
    throw std::invalid_argument("battery: need 0 <= soc_lo < soc_hi <= 1");
  }
  for (double c : spec.c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw std::invalid_argument("battery: barrier weights must be finite and nonnegative");
    }
  }
}

std::vector<double> soc_trajectory(double soc0, std::span<const double> e,
                                   const BatterySpec& spec, double dt_s) {
  const double gain = spec.s_norm * dt_s;
  std::vector<double> soc(e.size());
  double acc = soc0;
  for (std::size_t m = 0; m < e.size(); ++m) {
    acc += gain * e[m];
    soc[m] = acc;
  }
  return soc;
}

unsigned BarrierTerms::active_mask() const {
  unsigned mask = 0;
  for (unsigned j = 0; j < 4; ++j) {
    if (b[j] > 0.0) {
      mask |= 1u << j;
    }
  }
  return mask;
}

BarrierTerms barrier_terms(std::span<const double> e, std::span<const double> soc_traj,
                           const BatterySpec& spec) {
  if (e.size() != soc_traj.size()) {
    throw std::invalid_argument("barrier_penalty: e has " + std::to_string(e.size()) +
                                " samples, soc trajectory has " + std::to_string(soc_traj.size()));
  }
  BarrierTerms t;
  if (e.empty()) {
    return t;
  }
  const double peak = check_power_constraint(e, spec).max_normalized;
  if (peak >= 1.0) {
    t.b[0] = spec.c[0] * (peak - 1.0);
  }
  const auto [lo_it, hi_it] = std::minmax_element(soc_traj.begin(), soc_traj.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  t.b[1] = spec.c[1] * std::max(0.0, -lo);
  t.b[2] = spec.c[2] * std::max(0.0, hi - spec.soc_hi);
  t.b[3] = spec.c[3] * std::max(0.0, spec.soc_lo - lo);
  return t;
}

PowerCheck check_power_constraint(std::span<const double> e, const BatterySpec& spec) {
  double peak = 0.0;
  for (double v : e) {
    peak = std::max(peak, std::abs(v));
  }
  PowerCheck r;
  r.max_normalized = spec.p_norm * peak;
  r.ok = r.max_normalized < 1.0;
  return r;
}

}  // namespace loadsched
