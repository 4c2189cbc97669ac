#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace loadsched {

/// Static description of one schedulable load.
struct LoadSpec {
  int id = 0;
  double size_pu = 0.0;                        ///< steady-state demand when on
  std::vector<std::complex<double>> poles_on;  ///< rad/s
  std::vector<std::complex<double>> poles_off; ///< rad/s
  double t_on_min_s = 0.0;
  double t_off_min_s = 0.0;
};

/// Throws std::invalid_argument if the spec breaks an invariant (size, pole
/// stability/pairing, positive dwell times).
void validate(const LoadSpec& spec);

/// Single-input single-output continuous state-space model.
struct ContinuousSS {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;

  [[nodiscard]] Eigen::Index order() const { return A.rows(); }
  [[nodiscard]] double dc_gain() const;
};

/// Single-input single-output discrete state-space model sampled at dt_s.
struct DiscreteSS {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double D = 0.0;
  double dt_s = 0.0;

  [[nodiscard]] Eigen::Index order() const { return A.rows(); }
  /// C (I - A)^-1 B + D, the transfer function evaluated at z = 1.
  [[nodiscard]] double dc_gain() const;
};

/// All-pole model K / prod(s - p_j) with K = prod(-p_j), so G(0) = 1.
///
/// The realization is the phase-variable form x_1 = y, x_{j+1} = dx_j/dt with
/// C = [1 0 ... 0] and B = K e_n. A state [y 0 ... 0] is the point with
/// output y and all output derivatives zero.
ContinuousSS build_continuous(std::span<const std::complex<double>> poles);

/// Exact zero-order-hold equivalent via exp([A B; 0 0] dt).
DiscreteSS zoh_discretize(const ContinuousSS& cont, double dt_s);

/// Power demand of one load under a binary switching signal.
///
/// Internal state lives in unit-gain coordinates; power is size_pu * C x.
/// On a 0->1 or 1->0 transition the incoming model's state is set so that its
/// output matches the outgoing model's output with zero output derivatives.
class DiscreteLoadModel {
 public:
  DiscreteLoadModel() = default;
  DiscreteLoadModel(LoadSpec spec, double dt_s);

  [[nodiscard]] const LoadSpec& spec() const { return spec_; }
  [[nodiscard]] const DiscreteSS& ss_on() const { return ss_on_; }
  [[nodiscard]] const DiscreteSS& ss_off() const { return ss_off_; }
  [[nodiscard]] const Eigen::VectorXd& state() const { return state_; }
  [[nodiscard]] bool active() const { return active_; }
  [[nodiscard]] std::int64_t fine_index() const { return fine_idx_; }
  [[nodiscard]] std::optional<std::int64_t> last_on_idx() const { return last_on_idx_; }
  [[nodiscard]] std::optional<std::int64_t> last_off_idx() const { return last_off_idx_; }
  [[nodiscard]] double dt_s() const { return ss_on_.dt_s; }

  /// Current power output in PU.
  [[nodiscard]] double power() const;

  /// Applies switch value `w` over the next fine step. Returns the power at
  /// the start of the step (after any handoff), then advances the state.
  double advance(bool w);

  /// Switches the active model without advancing time.
  void set_active(bool w);

 private:
  [[nodiscard]] const DiscreteSS& active_ss() const { return active_ ? ss_on_ : ss_off_; }

  LoadSpec spec_;
  DiscreteSS ss_on_;
  DiscreteSS ss_off_;
  Eigen::VectorXd state_;
  bool active_ = false;
  std::int64_t fine_idx_ = 0;
  std::optional<std::int64_t> last_on_idx_;
  std::optional<std::int64_t> last_off_idx_;
};

/// Runs `model` forward over `w` (values must be 0 or 1), writing the power
/// at each fine step into `out`. Throws on length mismatch or non-binary w.
void simulate_switched(DiscreteLoadModel& model, std::span<const std::uint8_t> w,
                       std::span<double> out);

std::vector<double> simulate_switched(DiscreteLoadModel& model,
                                      std::span<const std::uint8_t> w);

inline double steady_state_power(const LoadSpec& spec) { return spec.size_pu; }

}  // namespace loadsched
