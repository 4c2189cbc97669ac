#include "loadsched/loadmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace loadsched {

namespace {

constexpr double kPairTolerance = 1e-9;

void check_poles(std::span<const std::complex<double>> poles, const std::string& what) {
  if (poles.empty()) {
    throw std::invalid_argument(what + ": pole list is empty");
  }
  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    const auto p = poles[i];
    if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
      throw std::invalid_argument(what + ": non-finite pole");
    }
    if (p.real() >= 0.0) {
      throw std::invalid_argument(what + ": pole " + std::to_string(p.real()) + "+j" +
                                  std::to_string(p.imag()) + " is not strictly stable");
    }
    const double tol = kPairTolerance * std::max(1.0, std::abs(p));
    if (std::abs(p.imag()) <= tol || used[i]) {
      continue;
    }
    bool paired = false;
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (!used[j] && std::abs(poles[j] - std::conj(p)) <= tol) {
        used[i] = used[j] = true;
        paired = true;
        break;
      }
    }
    if (!paired) {
      throw std::invalid_argument(what + ": complex pole without conjugate partner");
    }
  }
}

// Monic polynomial coefficients of prod(s - p_j), lowest order first.
std::vector<double> monic_from_roots(std::span<const std::complex<double>> poles) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& p : poles) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      next[k + 1] += c[k];
      next[k] -= p * c[k];
    }
    c = std::move(next);
  }
  std::vector<double> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    out[k] = c[k].real();
  }
  return out;
}

}  // namespace

void validate(const LoadSpec& spec) {
  const std::string tag = "load " + std::to_string(spec.id);
  if (!(spec.size_pu > 0.0) || !std::isfinite(spec.size_pu)) {
    throw std::invalid_argument(tag + ": size_pu must be positive");
  }
  if (!(spec.t_on_min_s > 0.0) || !(spec.t_off_min_s > 0.0)) {
    throw std::invalid_argument(tag + ": minimum on/off times must be positive");
  }
  check_poles(spec.poles_on, tag + " poles_on");
  check_poles(spec.poles_off, tag + " poles_off");
}

double ContinuousSS::dc_gain() const {
  return (C * (-A).partialPivLu().solve(B)).value() + D;
}

double DiscreteSS::dc_gain() const {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  return (C * (I - A).partialPivLu().solve(B)).value() + D;
}

ContinuousSS build_continuous(std::span<const std::complex<double>> poles) {
  check_poles(poles, "build_continuous");
  const auto a = monic_from_roots(poles);
  const auto n = static_cast<Eigen::Index>(poles.size());

  ContinuousSS ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    ss.A(i, i + 1) = 1.0;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    ss.A(n - 1, j) = -a[static_cast<std::size_t>(j)];
  }
  ss.B = Eigen::VectorXd::Zero(n);
  ss.B(n - 1) = a[0];
  ss.C = Eigen::RowVectorXd::Zero(n);
  ss.C(0) = 1.0;
  return ss;
}

DiscreteSS zoh_discretize(const ContinuousSS& cont, double dt_s) {
  if (!(dt_s > 0.0) || !std::isfinite(dt_s)) {
    throw std::invalid_argument("zoh_discretize: dt_s must be positive");
  }
  const Eigen::Index n = cont.order();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = cont.A * dt_s;
  aug.topRightCorner(n, 1) = cont.B * dt_s;
  const Eigen::MatrixXd phi = aug.exp();

  DiscreteSS ss;
  ss.A = phi.topLeftCorner(n, n);
  ss.B = phi.topRightCorner(n, 1);
  ss.C = cont.C;
  ss.D = cont.D;
  ss.dt_s = dt_s;
  return ss;
}

DiscreteLoadModel::DiscreteLoadModel(LoadSpec spec, double dt_s) : spec_(std::move(spec)) {
  validate(spec_);
  ss_on_ = zoh_discretize(build_continuous(spec_.poles_on), dt_s);
  ss_off_ = zoh_discretize(build_continuous(spec_.poles_off), dt_s);
  state_ = Eigen::VectorXd::Zero(ss_off_.order());
}

double DiscreteLoadModel::power() const {
  return spec_.size_pu * active_ss().C.dot(state_);
}

void DiscreteLoadModel::set_active(bool w) {
  if (w == active_) {
    return;
  }
  const double y = active_ss().C.dot(state_);
  active_ = w;
  const auto& incoming = active_ss();
  state_ = Eigen::VectorXd::Zero(incoming.order());
  state_(0) = y;
  if (w) {
    last_on_idx_ = fine_idx_;
  } else {
    last_off_idx_ = fine_idx_;
  }
}

double DiscreteLoadModel::advance(bool w) {
  set_active(w);
  const auto& ss = active_ss();
  const double p = power();
  Eigen::VectorXd next = ss.A * state_;
  if (w) {
    next += ss.B;
  }
  state_ = std::move(next);
  ++fine_idx_;
  return p;
}

void simulate_switched(DiscreteLoadModel& model, std::span<const std::uint8_t> w,
                       std::span<double> out) {
  if (w.size() != out.size()) {
    throw std::invalid_argument("simulate_switched: switch signal has " +
                                std::to_string(w.size()) + " samples but output has " +
                                std::to_string(out.size()));
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 1) {
      throw std::invalid_argument("simulate_switched: non-binary switch value at sample " +
                                  std::to_string(k));
    }
  }
  for (std::size_t k = 0; k < w.size(); ++k) {
    out[k] = model.advance(w[k] != 0);
  }
}

std::vector<double> simulate_switched(DiscreteLoadModel& model,
                                      std::span<const std::uint8_t> w) {
  std::vector<double> out(w.size());
  simulate_switched(model, w, out);
  return out;
}

}  // namespace loadsched
