#pragma once

#include <cstdint>
#include <iterator>
#include <optional>
#include <span>
#include <vector>

#include "loadsched/loadmodel.hpp"

namespace loadsched {

/// Control horizon: n_steps switching opportunities spaced ctrl_interval_s
/// apart, with dynamics evaluated every fine_dt_s.
struct HorizonConfig {
  int n_steps = 6;
  double ctrl_interval_s = 60.0;
  double fine_dt_s = 1.0;

  [[nodiscard]] int steps_per_ctrl() const;
  [[nodiscard]] int fine_length() const { return n_steps * steps_per_ctrl(); }
  [[nodiscard]] double length_s() const { return n_steps * ctrl_interval_s; }
};

/// Throws std::invalid_argument unless ctrl_interval_s is an integer
/// multiple of fine_dt_s and every load's dwell times fit strictly inside
/// the horizon and are whole multiples of the control interval.
void validate(const HorizonConfig& horizon, std::span<const LoadSpec> loads);

/// Converts a dwell time in seconds to control steps. Throws if it is not an
/// integer multiple of the control interval.
int dwell_steps(double dwell_s, const HorizonConfig& horizon);

/// Switching history of one load on the control grid. Indices are absolute
/// control steps; nullopt means the load never made that transition.
struct LoadSwitchState {
  int load_id = 0;
  bool active = false;
  std::optional<std::int64_t> last_on_idx;
  std::optional<std::int64_t> last_off_idx;
  int n_on_min = 1;
  int n_off_min = 1;

  /// Fresh state: off, never switched.
  static LoadSwitchState initial(const LoadSpec& spec, const HorizonConfig& horizon);

  /// Records the switch value applied at control step `step`.
  void apply(bool w, std::int64_t step);
};

/// One load's switch values over the horizon, step 0 first.
using Trajectory = std::vector<std::uint8_t>;

/// Every admissible length-N switch sequence for one load starting at
/// absolute control step `current_step`, in lexicographic order (000...
/// first). A switch at horizon position j is admissible when the run it
/// ends has lasted its minimum dwell (counting pre-horizon history) and the
/// run it starts fits inside the horizon, i.e. j <= N - dwell.
std::vector<Trajectory> admissible_trajectories(const LoadSwitchState& state,
                                                const HorizonConfig& horizon,
                                                std::int64_t current_step = 0);

/// n x N binary matrix, row-major by load.
class SwitchSchedule {
 public:
  SwitchSchedule() = default;
  SwitchSchedule(int n_loads, int n_steps)
      : n_loads_(n_loads), n_steps_(n_steps),
        bits_(static_cast<std::size_t>(n_loads) * static_cast<std::size_t>(n_steps), 0) {}

  [[nodiscard]] int n_loads() const { return n_loads_; }
  [[nodiscard]] int n_steps() const { return n_steps_; }
  [[nodiscard]] std::uint8_t at(int load, int step) const { return bits_[index(load, step)]; }
  void set(int load, int step, bool v) { bits_[index(load, step)] = v ? 1 : 0; }

  [[nodiscard]] std::span<const std::uint8_t> row(int load) const {
    return {bits_.data() + index(load, 0), static_cast<std::size_t>(n_steps_)};
  }
  [[nodiscard]] std::vector<std::uint8_t> column(int step) const;
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// Number of value changes along each row, counting a change from
  /// `current` (the value in force before the horizon) into column 0.
  [[nodiscard]] int num_transitions(std::span<const std::uint8_t> current) const;

  friend bool operator==(const SwitchSchedule&, const SwitchSchedule&) = default;
  friend auto operator<=>(const SwitchSchedule& a, const SwitchSchedule& b) {
    return a.bits_ <=> b.bits_;
  }

 private:
  [[nodiscard]] std::size_t index(int load, int step) const {
    return static_cast<std::size_t>(load) * static_cast<std::size_t>(n_steps_) +
           static_cast<std::size_t>(step);
  }

  int n_loads_ = 0;
  int n_steps_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Cartesian product of per-load trajectory lists, indexed in mixed radix
/// with load 0 varying slowest. Random access by index lets callers split
/// the space into contiguous chunks.
class CombinationSpace {
 public:
  explicit CombinationSpace(std::vector<std::vector<Trajectory>> per_load);

  [[nodiscard]] std::uint64_t size() const { return size_; }
  [[nodiscard]] int n_loads() const { return static_cast<int>(per_load_.size()); }
  [[nodiscard]] int n_steps() const { return n_steps_; }
  [[nodiscard]] const std::vector<Trajectory>& options(int load) const {
    return per_load_[static_cast<std::size_t>(load)];
  }

  /// Per-load trajectory indices for combination `index`.
  void decode(std::uint64_t index, std::span<std::size_t> choice) const;
  [[nodiscard]] SwitchSchedule at(std::uint64_t index) const;

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = SwitchSchedule;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const CombinationSpace* space, std::uint64_t index) : space_(space), index_(index) {}

    value_type operator*() const { return space_->at(index_); }
    iterator& operator++() {
      ++index_;
      return *this;
    }
    iterator operator++(int) {
      auto tmp = *this;
      ++index_;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.index_ == b.index_; }

   private:
    const CombinationSpace* space_ = nullptr;
    std::uint64_t index_ = 0;
  };

  [[nodiscard]] iterator begin() const { return {this, 0}; }
  [[nodiscard]] iterator end() const { return {this, size_}; }

 private:
  std::vector<std::vector<Trajectory>> per_load_;
  std::uint64_t size_ = 0;
  int n_steps_ = 0;
};

CombinationSpace enumerate_combinations(std::vector<std::vector<Trajectory>> per_load);

/// count < (2^n)^(N-1).
bool cardinality_bound_check(std::uint64_t count, int n_loads, int n_steps);

}  // namespace loadsched
