#pragma once

#include <array>
#include <span>
#include <vector>

namespace loadsched {

/// Battery normalizations and barrier weights.
struct BatterySpec {
  double p_norm = 10.0;          ///< 1/PU; |e| * p_norm < 1 is the power limit
  double s_norm = 1.0 / 1800.0;  ///< 1/(PU s); energy in PU s to SOC fraction
  double soc_lo = 0.1;
  double soc_hi = 0.9;
  std::array<double, 4> c{10.0, 1000.0, 10.0, 10.0};
};

void validate(const BatterySpec& spec);

struct BatteryState {
  double soc = 0.5;
};

/// soc(m) = soc0 + s_norm * dt * sum_{j<=m} e(j). Positive e charges.
/// Values are not clamped.
std::vector<double> soc_trajectory(double soc0, std::span<const double> e,
                                   const BatterySpec& spec, double dt_s);

/// The four barrier terms:
///   B1  power overrun   c1 (p_norm max|e| - 1)     when p_norm max|e| >= 1
///   B2  negative SOC    c2 max(0, -min soc)
///   B3  overcharge      c3 max(0, max soc - soc_hi)
///   B4  undercharge     c4 max(0, soc_lo - min soc)
struct BarrierTerms {
  std::array<double, 4> b{};

  [[nodiscard]] double total() const { return b[0] + b[1] + b[2] + b[3]; }
  /// Bit j set when term j is nonzero.
  [[nodiscard]] unsigned active_mask() const;
};

BarrierTerms barrier_terms(std::span<const double> e, std::span<const double> soc_traj,
                           const BatterySpec& spec);

inline double barrier_penalty(std::span<const double> e, std::span<const double> soc_traj,
                              const BatterySpec& spec) {
  return barrier_terms(e, soc_traj, spec).total();
}

struct PowerCheck {
  bool ok = true;
  double max_normalized = 0.0;  ///< p_norm * max|e|
};

PowerCheck check_power_constraint(std::span<const double> e, const BatterySpec& spec);

}  // namespace loadsched
