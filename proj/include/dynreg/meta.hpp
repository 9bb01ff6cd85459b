#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynreg/error.hpp"
#include "dynreg/numerics.hpp"
#include "dynreg/optimizer.hpp"
#include "dynreg/tasks.hpp"

namespace dynreg {

struct InnerAdaptConfig {
  double theta = 0.1;  // inner step size; 0 disables adaptation
  std::size_t train_batch = 32;
  std::size_t test_batch = 32;

  void validate() const {
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("meta.theta: requires theta >= 0");
    if (train_batch < 1) throw ConfigError("meta.train_batch: requires train_batch >= 1");
    if (test_batch < 1) throw ConfigError("meta.test_batch: requires test_batch >= 1");
  }
};

/// Round loss of the meta-learner: l_t(x) = f(U(x)) with U(x) = x - theta grad f(x),
/// where f is the task's population loss.
///
/// grad l_t(x) = (I - theta Hess f(x)) grad f(U(x)), using the task's closed-form
/// Hessian-vector product.
class CompositeRoundLoss final : public DifferentiableLoss {
 public:
  CompositeRoundLoss(TaskRound task, double theta) : task_(std::move(task)), theta_(theta) {}

  std::size_t dim() const override { return task_.dim(); }
  const TaskRound& task() const noexcept { return task_; }
  double theta() const noexcept { return theta_; }

  RealVector adapt(const RealVector& x) const {
    if (theta_ == 0.0) return x;
    return axpy(x, -theta_, task_.gradient(x));
  }

  double value(const RealVector& x) const override { return task_.value(adapt(x)); }

  RealVector gradient(const RealVector& x) const override {
    const RealVector outer = task_.gradient(adapt(x));
    if (theta_ == 0.0) return outer;
    return axpy(outer, -theta_, task_.hessian_vector(x, outer));
  }

 private:
  TaskRound task_;
  double theta_;
};

/// One inner step on a train-batch mean gradient: x - theta * g_hat.
inline RealVector inner_adapt(const RealVector& x, const TaskRound& task, const InnerAdaptConfig& cfg,
                              RngStream& rng) {
  cfg.validate();
  if (x.dim() != task.dim()) throw ShapeError("inner_adapt: dimension mismatch");
  const RealVector g_hat = sample_stochastic_gradient(task, task.noise().averaged_over(cfg.train_batch), x, rng);
  if (cfg.theta == 0.0) return x;
  return axpy(x, -cfg.theta, g_hat);
}

struct RoundRecord {
  std::uint64_t t = 0;
  RealVector x;                // x_t, before the update
  RealVector x_adapted;        // x_hat_t
  double loss = 0.0;           // l_t(x_t)
  RealVector exact_gradient;   // grad l_t(x_t)
  RealVector smoothed_sample;  // the stochastic smoothed gradient fed to the optimizer
  double eta = 0.0;            // eta_{t+1}
};

struct RunTrace {
  std::uint64_t seed = 0;
  OptimizerConfig optimizer{};
  InnerAdaptConfig inner{};
  std::optional<StreamSpec> stream;
  std::vector<RoundRecord> records;  // records[t-1] is round t
  std::vector<LossHandle> losses;    // losses[t-1] is l_t

  std::size_t size() const noexcept { return records.size(); }
  const RoundRecord& round(std::uint64_t t) const {
    if (t < 1 || t > records.size()) throw IndexError("RunTrace: round " + std::to_string(t) + " out of range");
    return records[t - 1];
  }
  const LossHandle& loss(std::uint64_t t) const {
    if (t < 1 || t > losses.size() || !losses[t - 1]) {
      throw CapabilityError("RunTrace: no loss handle retained for round " + std::to_string(t));
    }
    return losses[t - 1];
  }
};

/// Thrown by run_stream when a round fails; carries the rounds completed so far.
class RunAborted : public Error {
 public:
  RunAborted(ErrorKind kind, const std::string& what, std::uint64_t round, std::shared_ptr<const RunTrace> partial)
      : Error(kind, what), round_(round), partial_(std::move(partial)) {}
  std::uint64_t round() const noexcept { return round_; }
  const RunTrace& partial_trace() const noexcept { return *partial_; }

 private:
  std::uint64_t round_;
  std::shared_ptr<const RunTrace> partial_;
};

struct MetaLearnerState {
  RealVector x;
  OptimizerState optimizer;
  SmoothingWindow window;
  std::uint64_t round = 1;

  MetaLearnerState(RealVector x1, const OptimizerConfig& cfg)
      : x(std::move(x1)), optimizer(x.dim()), window(cfg.alpha, cfg.window) {}
};

namespace detail {

[[noreturn]] inline void rethrow_annotated(const Error& e, std::uint64_t t) {
  const std::string msg = "round " + std::to_string(t) + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::InvalidInput: throw InvalidInputError(msg);
    case ErrorKind::Shape: throw ShapeError(msg);
    case ErrorKind::Numeric: throw NumericError(msg);
    case ErrorKind::InvalidConfig: throw ConfigError(msg);
    case ErrorKind::Index: throw IndexError(msg);
    case ErrorKind::Capability: throw CapabilityError(msg);
  }
  throw Error(e.kind(), msg);
}

}  // namespace detail

/// One round of the meta-learning loop with DTS-AG as the outer learner.
///
/// rng.substream(0) drives the inner adaptation; rng.substream(1).substream(r) drives
/// the fresh draw for window slot r.
inline RoundRecord run_round(MetaLearnerState& state, const TaskRound& task, const InnerAdaptConfig& inner,
                             const OptimizerConfig& opt, const RngStream& rng) {
  const std::uint64_t t = state.round;
  try {
    if (task.dim() != state.x.dim()) throw ShapeError("task and meta-learner dimensions differ");
    RngStream inner_rng = rng.substream(0);
    RealVector x_hat = inner_adapt(state.x, task, inner, inner_rng);

    auto loss = std::make_shared<const CompositeRoundLoss>(task, inner.theta);
    const double loss_value = loss->value(state.x);
    RealVector exact_grad = loss->gradient(state.x);

    state.window.push(state.x, loss);
    const NoiseModel oracle_noise = task.noise().averaged_over(inner.test_batch);
    RealVector g_tilde = smoothed_stochastic_gradient(state.window, oracle_noise, rng.substream(1));

    StepOutcome step = dts_ag_step(state.optimizer, opt, state.x, g_tilde);
    RoundRecord rec{t, state.x, std::move(x_hat), loss_value, std::move(exact_grad), std::move(g_tilde), step.eta};
    state.x = std::move(step.x);
    ++state.round;
    return rec;
  } catch (const Error& e) {
    detail::rethrow_annotated(e, t);
  }
}

/// Runs rounds 1..T on `stream`, starting from x1 (zero vector by default).
inline RunTrace run_stream(const TaskStream& stream, std::uint64_t T, const InnerAdaptConfig& inner,
                           const OptimizerConfig& opt, std::uint64_t seed,
                           std::optional<RealVector> x1 = std::nullopt) {
  if (T < 1) throw ConfigError("horizon T must be >= 1");
  inner.validate();
  opt.validate();
  RunTrace trace;
  trace.seed = seed;
  trace.optimizer = opt;
  trace.inner = inner;
  trace.stream = stream.spec();
  trace.records.reserve(T);
  trace.losses.reserve(T);

  MetaLearnerState state(x1 ? *x1 : RealVector::zeros(stream.dim()), opt);
  for (std::uint64_t t = 1; t <= T; ++t) {
    try {
      RoundRecord rec = run_round(state, stream.round(t), inner, opt, spawn_rng_stream(seed, t));
      trace.losses.push_back(state.window.slot(0).loss);
      trace.records.push_back(std::move(rec));
    } catch (const Error& e) {
      const std::string msg = std::string(e.what()) + " (" + std::to_string(trace.size()) + " rounds completed)";
      throw RunAborted(e.kind(), msg, t, std::make_shared<const RunTrace>(std::move(trace)));
    }
  }
  return trace;
}

}  // namespace dynreg
