#pragma once

#include <span>
#include <string>
#include <vector>

#include "loadsched/scheduler.hpp"

// Post-hoc checks on finished runs. They work from the recorded trace only
// and share no code path with the optimizer.

namespace loadsched {

/// e = forecast - total, total = sum of loads, soc steps by s_norm dt e.
/// Returns one message per inconsistent sample (empty when consistent).
std::vector<std::string> check_trace_columns(const SimTrace& trace, const BatterySpec& battery,
                                             double dt_s, double soc_init, double tol = 1e-12);

/// Scans the applied switch sequence of every load as runs of equal values.
/// Every run that ends inside the record must last its minimum dwell; the
/// initial off run of a load that starts off is exempt.
std::vector<std::string> check_dwell_times(const SimTrace& trace, std::span<const LoadSpec> loads,
                                           const HorizonConfig& horizon);

/// Replays the recorded switch decisions open loop and compares loads,
/// total, error and SOC with the stored trace bit for bit.
std::vector<std::string> check_replay(const SimTrace& trace, const ForecastSeries& forecast,
                                      std::span<const LoadSpec> loads,
                                      const SchedulerConfig& config, double soc_init);

}  // namespace loadsched
