#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "loadsched/io.hpp"
#include "loadsched/loadmodel.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return LOADSCHED_DATA_DIR; }

inline std::vector<loadsched::LoadSpec> table1() {
  return loadsched::load_loads_json(data_dir() / "table1_loads.json");
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("loadsched_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline loadsched::LoadSpec first_order(int id, double size, double p_on, double p_off,
                                       double on_s = 60, double off_s = 60) {
  return {id, size, {{p_on, 0.0}}, {{p_off, 0.0}}, on_s, off_s};
}

}  // namespace testing
