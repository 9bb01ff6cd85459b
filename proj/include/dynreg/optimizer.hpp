#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "dynreg/error.hpp"
#include "dynreg/numerics.hpp"
#include "dynreg/tasks.hpp"

namespace dynreg {

enum class StepSchedule { Constant, AdamTheorem };

inline const char* to_string(StepSchedule s) { return s == StepSchedule::Constant ? "constant" : "adam_theorem"; }

inline constexpr double kDefaultEpsilon = 1e-8;

/// Sum_{r<w} alpha^r. Closed form (1 - alpha^w)/(1 - alpha) for alpha < 1 (evaluated
/// through expm1 so it stays accurate as alpha -> 1), exactly w for alpha == 1.
inline double weight_sum_W(double alpha, std::uint64_t w) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must satisfy 0 < alpha <= 1");
  if (w < 1) throw ConfigError("window w must be >= 1");
  if (alpha == 1.0) return static_cast<double>(w);
  const double log_alpha = std::log(alpha);
  return std::expm1(static_cast<double>(w) * log_alpha) / std::expm1(log_alpha);
}

/// Sum_{r<w} alpha^(2r).
inline double weight_sum_sq(double alpha, std::uint64_t w) { return weight_sum_W(alpha * alpha, w); }

struct OptimizerConfig {
  double beta1 = 0.0;
  double beta2 = 1.0;
  double epsilon = kDefaultEpsilon;
  double eta = 0.1;
  StepSchedule schedule = StepSchedule::Constant;
  double alpha = 1.0;
  std::uint64_t window = 1;

  double W() const { return weight_sum_W(alpha, window); }

  void validate() const {
    if (!(beta2 > 0.0 && beta2 <= 1.0)) throw ConfigError("optimizer.beta2: requires 0 < beta2 <= 1");
    if (!(beta1 >= 0.0)) throw ConfigError("optimizer.beta1: requires beta1 >= 0");
    if (!(beta1 < beta2)) throw ConfigError("optimizer.beta1: requires beta1 < beta2");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("optimizer.epsilon: requires epsilon > 0");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("optimizer.eta: requires eta > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("smoothing.alpha: requires 0 < alpha <= 1");
    if (window < 1) throw ConfigError("smoothing.window: requires w >= 1");
    if (schedule == StepSchedule::AdamTheorem && !(beta2 < 1.0)) {
      throw ConfigError("optimizer.beta2: adam schedule requires beta2 < 1");
    }
  }
};

inline OptimizerConfig make_config_adagrad(double eta, double epsilon, double alpha, std::uint64_t w) {
  OptimizerConfig cfg{0.0, 1.0, epsilon, eta, StepSchedule::Constant, alpha, w};
  cfg.validate();
  return cfg;
}

inline OptimizerConfig make_config_adam(double eta, double beta1, double beta2, double epsilon, double alpha,
                                        std::uint64_t w) {
  if (!(beta1 > 0.0)) throw ConfigError("optimizer.beta1: adam requires 0 < beta1");
  if (!(beta1 < beta2)) throw ConfigError("optimizer.beta1: adam requires beta1 < beta2");
  if (!(beta2 < 1.0)) throw ConfigError("optimizer.beta2: adam requires beta2 < 1");
  OptimizerConfig cfg{beta1, beta2, epsilon, eta, StepSchedule::AdamTheorem, alpha, w};
  cfg.validate();
  return cfg;
}

/// eta_{t+1}, the step used by the update performed in round t (t = 0 gives eta_1).
///
/// AdamTheorem: eta (1 - beta1) sqrt((1 - beta2^(t+1)) / (1 - beta2)).
inline double step_size_at(const OptimizerConfig& cfg, std::uint64_t t) {
  if (cfg.schedule == StepSchedule::Constant) return cfg.eta;
  if (!(cfg.beta2 < 1.0)) throw ConfigError("optimizer.beta2: adam schedule requires beta2 < 1");
  const double log_b2 = std::log(cfg.beta2);
  const double ratio = std::expm1(static_cast<double>(t + 1) * log_b2) / std::expm1(log_b2);
  return cfg.eta * (1.0 - cfg.beta1) * std::sqrt(ratio);
}

/// First/second moment accumulators and the round counter t (starts at 1).
struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 1;

  explicit OptimizerState(std::size_t dim) : m(dim, 0.0), v(dim, 0.0) {
    if (dim == 0) throw InvalidInputError("OptimizerState: dimension must be >= 1");
  }
  std::size_t dim() const noexcept { return m.size(); }
};

/// x - eta * m / sqrt(eps + v), elementwise.
inline RealVector apply_adaptive_update(const RealVector& x, std::span<const double> m, std::span<const double> v,
                                        double eta, double epsilon) {
  if (m.size() != x.dim() || v.size() != x.dim()) throw ShapeError("apply_adaptive_update: dimension mismatch");
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    out[i] = x[i] - eta * m[i] / std::sqrt(epsilon + v[i]);
    if (!std::isfinite(out[i])) {
      throw NumericError("dts_ag_step: non-finite iterate at coordinate " + std::to_string(i));
    }
  }
  return RealVector(std::move(out));
}

struct StepOutcome {
  RealVector x;
  double eta;  // eta_{t+1} actually applied
};

/// One DTS-AG update: m <- beta1 m + g; v <- beta2 v + g^2; x <- x - eta_{t+1} m / sqrt(eps + v).
inline StepOutcome dts_ag_step(OptimizerState& state, const OptimizerConfig& cfg, const RealVector& x,
                               const RealVector& g_tilde) {
  if (x.dim() != state.dim() || g_tilde.dim() != state.dim()) throw ShapeError("dts_ag_step: dimension mismatch");
  const double eta = step_size_at(cfg, state.t);
  std::vector<double> m = state.m;
  std::vector<double> v = state.v;
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + g_tilde[i];
    v[i] = cfg.beta2 * v[i] + g_tilde[i] * g_tilde[i];
    if (!std::isfinite(m[i]) || !std::isfinite(v[i])) {
      throw NumericError("dts_ag_step: non-finite moment at coordinate " + std::to_string(i));
    }
  }
  RealVector next = apply_adaptive_update(x, m, v, eta, cfg.epsilon);
  state.m = std::move(m);
  state.v = std::move(v);
  ++state.t;
  return {std::move(next), eta};
}

/// The last w (iterate, loss) pairs, newest first. Slots that would refer to rounds
/// t - r <= 0 are simply absent; they stand for the zero loss and contribute nothing,
/// while W stays Sum_{r<w} alpha^r.
class SmoothingWindow {
 public:
  struct Slot {
    RealVector iterate;
    LossHandle loss;
  };

  SmoothingWindow(double alpha, std::uint64_t w) : alpha_(alpha), w_(w), W_(weight_sum_W(alpha, w)) {}

  void push(RealVector iterate, LossHandle loss) {
    if (!loss) throw CapabilityError("SmoothingWindow: null loss handle");
    if (!slots_.empty() && iterate.dim() != slots_.front().iterate.dim()) {
      throw ShapeError("SmoothingWindow: iterate dimension differs from window contents");
    }
    slots_.push_front(Slot{std::move(iterate), std::move(loss)});
    if (slots_.size() > w_) slots_.pop_back();
  }

  std::size_t size() const noexcept { return slots_.size(); }
  bool empty() const noexcept { return slots_.empty(); }
  const Slot& slot(std::size_t r) const {
    if (r >= slots_.size()) throw IndexError("SmoothingWindow: slot " + std::to_string(r) + " is empty");
    return slots_[r];
  }
  double alpha() const noexcept { return alpha_; }
  std::uint64_t w() const noexcept { return w_; }
  double W() const noexcept { return W_; }

 private:
  double alpha_;
  std::uint64_t w_;
  double W_;
  std::deque<Slot> slots_;
};

namespace detail {

template <typename SlotGradient>
RealVector weighted_window_sum(const SmoothingWindow& window, SlotGradient&& slot_gradient) {
  if (window.empty()) throw InvalidInputError("smoothed gradient: window is empty");
  const std::size_t d = window.slot(0).iterate.dim();
  std::vector<double> acc(d, 0.0);
  double weight = 1.0;
  for (std::size_t r = 0; r < window.size(); ++r) {
    const auto& slot = window.slot(r);
    if (slot.iterate.dim() != d) throw ShapeError("smoothed gradient: slot dimension mismatch");
    const RealVector g = slot_gradient(r, slot);
    if (g.dim() != d) throw ShapeError("smoothed gradient: gradient dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) acc[i] += weight * g[i];
    weight *= window.alpha();
  }
  const double inv_W = 1.0 / window.W();
  for (double& a : acc) a *= inv_W;
  require_finite(acc, "smoothed gradient");
  return RealVector(std::move(acc));
}

}  // namespace detail

/// (1/W) Sum_r alpha^r g_{t-r}(x_{t-r}, xi_{t,t-r}); slot r draws from rng.substream(r).
inline RealVector smoothed_stochastic_gradient(const SmoothingWindow& window, const NoiseModel& noise,
                                               const RngStream& rng) {
  return detail::weighted_window_sum(window, [&](std::size_t r, const SmoothingWindow::Slot& slot) {
    RngStream slot_rng = rng.substream(r);
    return sample_stochastic_gradient(*slot.loss, noise, slot.iterate, slot_rng);
  });
}

/// Noise-free counterpart: (1/W) Sum_r alpha^r grad l_{t-r}(x_{t-r}).
inline RealVector exact_window_gradient(const SmoothingWindow& window) {
  return detail::weighted_window_sum(
      window, [](std::size_t, const SmoothingWindow::Slot& slot) { return slot.loss->gradient(slot.iterate); });
}

}  // namespace dynreg
