#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "loadsched/loadmodel.hpp"

namespace loadsched {

struct StepResponseMetrics {
  int id = 0;
  double size_pu = 0.0;
  double peak_pu = 0.0;          ///< max power while on
  double overshoot_pu = 0.0;     ///< peak - size_pu, clipped at 0
  double final_on_pu = 0.0;      ///< power at the last on sample
  double settle_time_s = -1.0;   ///< first time after which |p - size| <= 1% size while on; -1 if never
  bool monotone_rise = false;    ///< nondecreasing over the on phase
  double final_off_pu = 0.0;
};

/// Every load sees the same switch signal: on for on_s seconds from zero
/// state, then off for off_s seconds.
struct StepResponseDemo {
  double dt_s = 1.0;
  std::vector<double> t_s;
  std::vector<std::uint8_t> w;
  std::vector<std::vector<double>> load_pu;  ///< [load][sample]
  std::vector<StepResponseMetrics> metrics;
};

StepResponseDemo demo_step_responses(std::span<const LoadSpec> loads, double dt_s, double on_s,
                                     double off_s);

void write_demo_csv(const StepResponseDemo& demo, const std::filesystem::path& path);
nlohmann::json to_json(const StepResponseDemo& demo);

}  // namespace loadsched
