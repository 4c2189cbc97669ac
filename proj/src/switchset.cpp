#include "loadsched/switchset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace loadsched {

namespace {

// Integer ratio a / b, or nullopt if a is not a whole multiple of b.
std::optional<long long> exact_ratio(double a, double b) {
  const double r = a / b;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * std::max(1.0, rounded)) {
    return std::nullopt;
  }
  return static_cast<long long>(rounded);
}

struct DfsFrame {
  const HorizonConfig* horizon;
  int n_on_min;
  int n_off_min;
  std::int64_t current_step;
  std::vector<Trajectory>* out;
};

bool may_switch(const DfsFrame& f, bool to_on, int pos, std::optional<std::int64_t> last_on,
                std::optional<std::int64_t> last_off) {
  const std::int64_t abs_step = f.current_step + pos;
  if (to_on) {
    const bool rested = !last_off || abs_step - *last_off >= f.n_off_min;
    return rested && pos <= f.horizon->n_steps - f.n_on_min;
  }
  const bool ran = !last_on || abs_step - *last_on >= f.n_on_min;
  return ran && pos <= f.horizon->n_steps - f.n_off_min;
}

void extend(const DfsFrame& f, Trajectory& prefix, bool value,
            std::optional<std::int64_t> last_on, std::optional<std::int64_t> last_off) {
  const int pos = static_cast<int>(prefix.size());
  if (pos == f.horizon->n_steps) {
    f.out->push_back(prefix);
    return;
  }
  // Candidate values in ascending order keep the output lexicographic.
  for (int next = 0; next <= 1; ++next) {
    const bool v = next != 0;
    auto on = last_on;
    auto off = last_off;
    if (v != value) {
      if (!may_switch(f, v, pos, last_on, last_off)) {
        continue;
      }
      (v ? on : off) = f.current_step + pos;
    }
    prefix.push_back(static_cast<std::uint8_t>(next));
    extend(f, prefix, v, on, off);
    prefix.pop_back();
  }
}

}  // namespace

int HorizonConfig::steps_per_ctrl() const {
  const auto r = exact_ratio(ctrl_interval_s, fine_dt_s);
  if (!r) {
    throw std::invalid_argument("horizon: ctrl_interval_s must be an integer multiple of fine_dt_s");
  }
  return static_cast<int>(*r);
}

int dwell_steps(double dwell_s, const HorizonConfig& horizon) {
  const auto r = exact_ratio(dwell_s, horizon.ctrl_interval_s);
  if (!r) {
    throw std::invalid_argument("dwell time " + std::to_string(dwell_s) +
                                " s is not a positive multiple of the control interval");
  }
  return static_cast<int>(*r);
}

void validate(const HorizonConfig& horizon, std::span<const LoadSpec> loads) {
  if (horizon.n_steps < 1) {
    throw std::invalid_argument("horizon: n_steps must be positive");
  }
  if (!(horizon.fine_dt_s > 0.0) || !(horizon.ctrl_interval_s > 0.0)) {
    throw std::invalid_argument("horizon: time steps must be positive");
  }
  (void)horizon.steps_per_ctrl();
  const double length = horizon.length_s();
  for (const auto& load : loads) {
    const std::string tag = "load " + std::to_string(load.id);
    (void)dwell_steps(load.t_on_min_s, horizon);
    (void)dwell_steps(load.t_off_min_s, horizon);
    if (!(std::max(load.t_on_min_s, load.t_off_min_s) < length)) {
      throw std::invalid_argument(tag + ": minimum on/off time must be shorter than the horizon (" +
                                  std::to_string(length) + " s)");
    }
  }
}

LoadSwitchState LoadSwitchState::initial(const LoadSpec& spec, const HorizonConfig& horizon) {
  LoadSwitchState s;
  s.load_id = spec.id;
  s.n_on_min = dwell_steps(spec.t_on_min_s, horizon);
  s.n_off_min = dwell_steps(spec.t_off_min_s, horizon);
  return s;
}

void LoadSwitchState::apply(bool w, std::int64_t step) {
  if (w == active) {
    return;
  }
  active = w;
  (w ? last_on_idx : last_off_idx) = step;
}

std::vector<Trajectory> admissible_trajectories(const LoadSwitchState& state,
                                                const HorizonConfig& horizon,
                                                std::int64_t current_step) {
  if (horizon.n_steps < 1) {
    throw std::invalid_argument("admissible_trajectories: n_steps must be positive");
  }
  std::vector<Trajectory> out;
  DfsFrame frame{&horizon, state.n_on_min, state.n_off_min, current_step, &out};
  Trajectory prefix;
  prefix.reserve(static_cast<std::size_t>(horizon.n_steps));
  extend(frame, prefix, state.active, state.last_on_idx, state.last_off_idx);
  return out;
}

std::vector<std::uint8_t> SwitchSchedule::column(int step) const {
  std::vector<std::uint8_t> col(static_cast<std::size_t>(n_loads_));
  for (int i = 0; i < n_loads_; ++i) {
    col[static_cast<std::size_t>(i)] = at(i, step);
  }
  return col;
}

int SwitchSchedule::num_transitions(std::span<const std::uint8_t> current) const {
  int count = 0;
  for (int i = 0; i < n_loads_; ++i) {
    std::uint8_t prev = current[static_cast<std::size_t>(i)];
    for (int k = 0; k < n_steps_; ++k) {
      count += at(i, k) != prev ? 1 : 0;
      prev = at(i, k);
    }
  }
  return count;
}

CombinationSpace::CombinationSpace(std::vector<std::vector<Trajectory>> per_load)
    : per_load_(std::move(per_load)) {
  if (per_load_.empty()) {
    return;
  }
  size_ = 1;
  n_steps_ = -1;
  for (const auto& list : per_load_) {
    if (list.empty()) {
      throw std::invalid_argument("enumerate_combinations: a load has no admissible trajectory");
    }
    for (const auto& t : list) {
      if (n_steps_ < 0) {
        n_steps_ = static_cast<int>(t.size());
      } else if (static_cast<int>(t.size()) != n_steps_) {
        throw std::invalid_argument("enumerate_combinations: trajectories differ in length");
      }
    }
    size_ *= list.size();
  }
}

void CombinationSpace::decode(std::uint64_t index, std::span<std::size_t> choice) const {
  for (std::size_t i = per_load_.size(); i-- > 0;) {
    const std::uint64_t radix = per_load_[i].size();
    choice[i] = static_cast<std::size_t>(index % radix);
    index /= radix;
  }
}

SwitchSchedule CombinationSpace::at(std::uint64_t index) const {
  std::vector<std::size_t> choice(per_load_.size());
  decode(index, choice);
  SwitchSchedule s(n_loads(), n_steps_);
  for (std::size_t i = 0; i < per_load_.size(); ++i) {
    const auto& t = per_load_[i][choice[i]];
    for (int k = 0; k < n_steps_; ++k) {
      s.set(static_cast<int>(i), k, t[static_cast<std::size_t>(k)] != 0);
    }
  }
  return s;
}

CombinationSpace enumerate_combinations(std::vector<std::vector<Trajectory>> per_load) {
  return CombinationSpace(std::move(per_load));
}

bool cardinality_bound_check(std::uint64_t count, int n_loads, int n_steps) {
  const long long exponent = static_cast<long long>(n_loads) * (n_steps - 1);
  if (exponent < 0) {
    return count == 0;
  }
  if (exponent >= 64) {
    return true;
  }
  return count < (std::uint64_t{1} << exponent);
}

}  // namespace loadsched
