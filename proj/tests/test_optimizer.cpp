#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "dynreg/optimizer.hpp"
#include "oracles.hpp"

using namespace dynreg;

namespace {

/// l(x) = <g, x>: constant gradient g.
class LinearLoss final : public DifferentiableLoss {
 public:
  explicit LinearLoss(RealVector g) : g_(std::move(g)) {}
  std::size_t dim() const override { return g_.dim(); }
  double value(const RealVector& x) const override { return dot(g_, x); }
  RealVector gradient(const RealVector&) const override { return g_; }

 private:
  RealVector g_;
};

LossHandle linear(std::initializer_list<double> g) { return std::make_shared<const LinearLoss>(RealVector(g)); }

}  // namespace

TEST(WeightSum, Examples) {
  EXPECT_EQ(weight_sum_W(1.0, 5), 5.0);
  EXPECT_DOUBLE_EQ(weight_sum_W(0.5, 3), 1.75);
  const double closed = (1.0 - std::pow(0.9, 10)) / 0.1;
  EXPECT_NEAR(weight_sum_W(0.9, 10), closed, 1e-12);
  EXPECT_NEAR(weight_sum_W(0.9, 10), double(oracle::weight_sum(0.9L, 10)), 1e-12);
}

TEST(WeightSum, AgreesWithDirectSumNearOne) {
  for (double alpha : {0.1, 0.5, 0.99, 0.999999, 1.0 - 1e-12}) {
    for (std::uint64_t w : {1u, 2u, 17u, 500u}) {
      const double direct = double(oracle::weight_sum(alpha, w));
      EXPECT_NEAR(weight_sum_W(alpha, w), direct, 1e-10 * direct) << alpha << " " << w;
    }
  }
}

TEST(WeightSum, Domain) {
  EXPECT_THROW(weight_sum_W(0.0, 3), ConfigError);
  EXPECT_THROW(weight_sum_W(1.1, 3), ConfigError);
  EXPECT_THROW(weight_sum_W(0.5, 0), ConfigError);
}

TEST(StepSize, Constant) {
  const OptimizerConfig cfg = make_config_adagrad(0.1, 1e-8, 1.0, 16);
  for (std::uint64_t t : {0u, 1u, 7u, 100000u}) EXPECT_EQ(step_size_at(cfg, t), 0.1);
}

TEST(StepSize, AdamSchedule) {
  const OptimizerConfig cfg = make_config_adam(1.0, 0.9, 0.99, 1e-8, 1.0, 1);
  EXPECT_EQ(step_size_at(cfg, 0), 1.0 * (1.0 - 0.9));
  EXPECT_NEAR(step_size_at(cfg, 1), 0.1 * std::sqrt(1.99), 1e-15);
  EXPECT_NEAR(step_size_at(cfg, 1), 0.141067, 1e-6);
  for (std::uint64_t t1 : {1u, 2u, 10u, 1000u}) {
    const double expect = 0.1 * std::sqrt((1.0 - std::pow(0.99, double(t1))) / (1.0 - 0.99));
    EXPECT_NEAR(step_size_at(cfg, t1 - 1), expect, 1e-12 * expect);
  }
}

TEST(StepSize, AdamScheduleRequiresBeta2BelowOne) {
  OptimizerConfig cfg;
  cfg.schedule = StepSchedule::AdamTheorem;
  cfg.beta1 = 0.5;
  cfg.beta2 = 1.0;
  EXPECT_THROW(step_size_at(cfg, 0), ConfigError);
}

TEST(Presets, Validation) {
  const OptimizerConfig a = make_config_adagrad(0.1, 1e-8, 1.0, 16);
  EXPECT_EQ(a.beta1, 0.0);
  EXPECT_EQ(a.beta2, 1.0);
  EXPECT_EQ(a.schedule, StepSchedule::Constant);
  EXPECT_THROW(make_config_adagrad(0.1, 0.0, 1.0, 16), ConfigError);
  EXPECT_THROW(make_config_adagrad(-0.1, 1e-8, 1.0, 16), ConfigError);

  const OptimizerConfig b = make_config_adam(1e-3, 0.9, 0.999, 1e-8, 1.0, 16);
  EXPECT_EQ(b.schedule, StepSchedule::AdamTheorem);
  EXPECT_THROW(make_config_adam(1e-3, 0.9, 0.9, 1e-8, 1.0, 16), ConfigError);
  EXPECT_THROW(make_config_adam(1e-3, 0.9, 1.0, 1e-8, 1.0, 16), ConfigError);
  EXPECT_THROW(make_config_adam(1e-3, 0.0, 0.99, 1e-8, 1.0, 16), ConfigError);
}

TEST(DtsAgStep, HandTrace) {
  OptimizerConfig cfg = make_config_adagrad(1.0, 7.0, 1.0, 1);
  OptimizerState state(1);
  const StepOutcome out = dts_ag_step(state, cfg, RealVector{0.0}, RealVector{3.0});
  EXPECT_EQ(state.m[0], 3.0);
  EXPECT_EQ(state.v[0], 9.0);
  EXPECT_DOUBLE_EQ(out.x[0], -0.75);
  EXPECT_EQ(state.t, 2u);
}

TEST(DtsAgStep, ZeroGradientKeepsIterate) {
  OptimizerConfig cfg = make_config_adam(0.1, 0.9, 0.99, 1e-8, 1.0, 1);
  OptimizerState state(2);
  state.v = {4.0, 0.5};
  const RealVector x{1.5, -2.0};
  EXPECT_EQ(dts_ag_step(state, cfg, x, RealVector{0.0, 0.0}).x, x);
}

TEST(DtsAgStep, PinnedSecondMomentIsSgd) {
  const RealVector x{1.0, -1.0}, g{0.3, -0.7};
  const std::vector<double> m{0.3, -0.7}, v{1.0, 1.0};
  const RealVector next = apply_adaptive_update(x, m, v, 0.5, 1e-300);
  EXPECT_NEAR(next[0], 1.0 - 0.5 * 0.3, 1e-15);
  EXPECT_NEAR(next[1], -1.0 + 0.5 * 0.7, 1e-15);
}

TEST(DtsAgStep, FirstStepIsScaleInvariant) {
  const OptimizerConfig cfg = make_config_adagrad(0.1, 1e-300, 1.0, 1);
  const RealVector x{0.0, 0.0}, g{0.4, -2.5};
  for (double c : {1e-3, 1.0, 1e4}) {
    OptimizerState state(2);
    const RealVector next = dts_ag_step(state, cfg, x, c * g).x;
    EXPECT_NEAR(next[0], -0.1, 1e-12);
    EXPECT_NEAR(next[1], 0.1, 1e-12);
  }
}

TEST(DtsAgStep, MomentsRecurrence) {
  const OptimizerConfig cfg = make_config_adam(0.05, 0.8, 0.95, 1e-8, 1.0, 1);
  OptimizerState state(1);
  RealVector x{0.0};
  double m = 0.0, v = 0.0, xr = 0.0;
  RngStream rng(4, 4);
  for (std::uint64_t t = 1; t <= 30; ++t) {
    const double g = rng.normal();
    m = 0.8 * m + g;
    v = 0.95 * v + g * g;
    const double eta = 0.05 * 0.2 * std::sqrt((1.0 - std::pow(0.95, double(t + 1))) / 0.05);
    xr -= eta * m / std::sqrt(1e-8 + v);
    x = dts_ag_step(state, cfg, x, RealVector{g}).x;
    EXPECT_NEAR(x[0], xr, 1e-12 * (1.0 + std::abs(xr)));
  }
}

TEST(DtsAgStep, Errors) {
  const OptimizerConfig cfg = make_config_adagrad(1e308, 1e-300, 1.0, 1);
  OptimizerState state(2);
  EXPECT_THROW(dts_ag_step(state, cfg, RealVector{0.0}, RealVector{1.0}), ShapeError);
  try {
    dts_ag_step(state, cfg, RealVector{0.0, -1e308}, RealVector{0.0, 1.0});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 1"), std::string::npos);
  }
}

TEST(SmoothingWindow, WeightedAverage) {
  SmoothingWindow window(0.5, 2);
  window.push(RealVector{0.0}, linear({3.0}));
  window.push(RealVector{0.0}, linear({1.0}));
  const RealVector g = smoothed_stochastic_gradient(window, NoiseModel::exact(), RngStream(1, 1));
  EXPECT_NEAR(g[0], 5.0 / 3.0, 1e-15);
  EXPECT_EQ(g, exact_window_gradient(window));
}

TEST(SmoothingWindow, PreHistoryContributesZero) {
  SmoothingWindow window(1.0, 4);
  window.push(RealVector{0.0, 0.0}, linear({4.0, -8.0}));
  const RealVector g = exact_window_gradient(window);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], -2.0);

  SmoothingWindow zero(0.7, 3);
  zero.push(RealVector{1.0}, linear({0.0}));
  zero.push(RealVector{2.0}, linear({0.0}));
  EXPECT_EQ(smoothed_stochastic_gradient(zero, NoiseModel::exact(), RngStream(2, 2)), RealVector{0.0});
}

TEST(SmoothingWindow, EvictsOldest) {
  SmoothingWindow window(1.0, 2);
  window.push(RealVector{0.0}, linear({100.0}));
  window.push(RealVector{0.0}, linear({2.0}));
  window.push(RealVector{0.0}, linear({4.0}));
  EXPECT_EQ(window.size(), 2u);
  EXPECT_DOUBLE_EQ(exact_window_gradient(window)[0], 3.0);
  EXPECT_THROW(window.slot(2), IndexError);
}

TEST(SmoothingWindow, Errors) {
  SmoothingWindow window(1.0, 3);
  EXPECT_THROW(exact_window_gradient(window), InvalidInputError);
  EXPECT_THROW(window.push(RealVector{0.0}, nullptr), CapabilityError);
  window.push(RealVector{0.0}, linear({1.0}));
  EXPECT_THROW(window.push(RealVector{0.0, 0.0}, linear({1.0, 1.0})), ShapeError);
}

TEST(SmoothingWindow, FreshDrawPerSlot) {
  SmoothingWindow window(1.0, 2);
  window.push(RealVector{0.0}, linear({0.0}));
  window.push(RealVector{0.0}, linear({0.0}));
  const NoiseModel noise = NoiseModel::gaussian(1.0, 1);
  const RngStream rng(7, 3);
  // Two slots averaging independent draws differ from twice one draw over two.
  RngStream slot0 = rng.substream(0), slot1 = rng.substream(1);
  const double n0 = slot0.normal(), n1 = slot1.normal();
  const RealVector g = smoothed_stochastic_gradient(window, noise, rng);
  EXPECT_NEAR(g[0], (n0 + n1) / 2.0, 1e-15);
  EXPECT_NE(n0, n1);
}
