#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "dynreg/meta.hpp"
#include "dynreg/regret.hpp"
#include "dynreg/tasks.hpp"

using namespace dynreg;

namespace {

double rel_err(const RealVector& a, const RealVector& b) {
  return std::sqrt(l2_norm_sq(a - b)) / std::max(1e-8, std::sqrt(l2_norm_sq(b)));
}

}  // namespace

TEST(LossConstants, SineFamily) {
  const TaskRound task(1.0, RealVector{2.0, 0.0}, 0.3, NoiseModel::exact());
  const LossConstants c = task.constants();
  EXPECT_DOUBLE_EQ(c.D, 1.0);
  EXPECT_DOUBLE_EQ(c.L, 2.0);
  EXPECT_DOUBLE_EQ(c.gamma, 4.0);
  EXPECT_DOUBLE_EQ(c.H, 8.0);

  const TaskRound scaled(3.0, RealVector{2.0, 0.0}, 0.3, NoiseModel::exact());
  const LossConstants s = scaled.constants();
  EXPECT_DOUBLE_EQ(s.D, 3.0 * c.D);
  EXPECT_DOUBLE_EQ(s.L, 3.0 * c.L);
  EXPECT_DOUBLE_EQ(s.gamma, 3.0 * c.gamma);
  EXPECT_DOUBLE_EQ(s.H, 3.0 * c.H);
}

TEST(LossConstants, EmpiricalLipschitzBelowRecorded) {
  const TaskStream stream = make_drifting_sine_stream(4, 1.5, 2.0, 0.01, NoiseModel::exact(), 5);
  const LossConstants c = stream.constants();
  RngStream rng(5, 1);
  double worst_L = 0.0, worst_g = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const TaskRound task = stream.round(1 + k % 50);
    const RealVector u = rng.normal_vector(4, 2.0), v = rng.normal_vector(4, 2.0);
    const double dist = std::sqrt(l2_norm_sq(u - v));
    worst_L = std::max(worst_L, std::abs(task.value(u) - task.value(v)) / dist);
    worst_g = std::max(worst_g, std::sqrt(l2_norm_sq(task.gradient(u) - task.gradient(v))) / dist);
  }
  EXPECT_LE(worst_L, c.L);
  EXPECT_LE(worst_g, c.gamma);
}

TEST(TaskRound, GradientAndHessianMatchFiniteDifferences) {
  RngStream rng(8, 0);
  for (int k = 0; k < 50; ++k) {
    const TaskRound task(1.3, rng.normal_vector(3), rng.uniform(0.0, 6.0), NoiseModel::exact());
    const RealVector x = rng.normal_vector(3);
    const RealVector fd = finite_difference_gradient([&](const RealVector& y) { return task.value(y); }, x);
    EXPECT_LT(rel_err(task.gradient(x), fd), 1e-6);
    const RealVector v = rng.normal_vector(3);
    const double h = 1e-5;
    const RealVector hv_fd = (1.0 / (2.0 * h)) * (task.gradient(axpy(x, h, v)) - task.gradient(axpy(x, -h, v)));
    EXPECT_LT(rel_err(task.hessian_vector(x, v), hv_fd), 1e-5);
  }
}

TEST(EffectiveConstants, Composition) {
  const LossConstants c{1.0, 5.0, 2.0, 3.0};
  const EffectiveConstants e = effective_constants(c, 0.1);
  EXPECT_NEAR(e.L_prime, 6.0, 1e-12);
  EXPECT_NEAR(e.gamma_prime, 0.1 * 5.0 * 3.0 + 1.2 * 1.2 * 2.0, 1e-12);
  EXPECT_NEAR(e.gamma_prime, 4.38, 1e-12);
  const EffectiveConstants id = effective_constants(c, 0.0);
  EXPECT_EQ(id.L_prime, c.L);
  EXPECT_EQ(id.gamma_prime, c.gamma);
}

TEST(TaskStream, Deterministic) {
  const TaskStream a = make_drifting_sine_stream(6, 1.0, 1.0, 0.02, NoiseModel::gaussian(0.3, 6), 11);
  const TaskStream b = make_drifting_sine_stream(6, 1.0, 1.0, 0.02, NoiseModel::gaussian(0.3, 6), 11);
  const RealVector x = RealVector::zeros(6);
  for (std::uint64_t t = 1; t <= 20; ++t) {
    EXPECT_EQ(a.round(t).gradient(x), b.round(t).gradient(x));
    EXPECT_EQ(a.round(t).value(x), b.round(t).value(x));
  }
}

TEST(TaskStream, ZeroDriftIsStationary) {
  const TaskStream s = make_drifting_sine_stream(5, 1.0, 1.0, 0.0, NoiseModel::exact(), 2);
  RngStream rng(2, 9);
  const RealVector x = rng.normal_vector(5);
  for (std::uint64_t t = 2; t <= 30; ++t) {
    EXPECT_EQ(s.round(t).value(x), s.round(1).value(x));
    EXPECT_EQ(s.round(t).gradient(x), s.round(1).gradient(x));
  }
}

TEST(TaskStream, PiecewiseStationaryCases) {
  const std::uint64_t T = 40;
  const TaskStream long_segment = make_piecewise_drift_stream(4, T, 1.0, NoiseModel::exact(), 3);
  const TaskStream no_jump = make_piecewise_drift_stream(4, 5, 0.0, NoiseModel::exact(), 3);
  const RealVector x{0.3, -0.1, 0.7, 0.2};
  for (std::uint64_t t = 1; t <= T; ++t) {
    EXPECT_EQ(long_segment.round(t).value(x), long_segment.round(1).value(x));
    EXPECT_EQ(no_jump.round(t).value(x), no_jump.round(1).value(x));
  }
  const TaskStream jumping = make_piecewise_drift_stream(4, 5, 1.0, NoiseModel::exact(), 3);
  EXPECT_EQ(jumping.round(5).value(x), jumping.round(1).value(x));
  EXPECT_NE(jumping.round(6).value(x), jumping.round(1).value(x));
}

TEST(TaskStream, InvalidSpec) {
  EXPECT_THROW(make_drifting_sine_stream(0, 1.0, 1.0, 0.01, NoiseModel::exact(), 1), ConfigError);
  EXPECT_THROW(make_drifting_sine_stream(3, -1.0, 1.0, 0.01, NoiseModel::exact(), 1), ConfigError);
  EXPECT_THROW(make_drifting_sine_stream(3, 1.0, 0.0, 0.01, NoiseModel::exact(), 1), ConfigError);
  EXPECT_THROW(make_drifting_sine_stream(3, 1.0, 1.0, -0.5, NoiseModel::exact(), 1), ConfigError);
  EXPECT_THROW(make_piecewise_drift_stream(3, 0, 1.0, NoiseModel::exact(), 1), ConfigError);
}

TEST(StochasticGradient, ExactNoiseReturnsGradient) {
  const TaskRound task(1.0, RealVector{1.0, -2.0}, 0.4, NoiseModel::exact());
  RngStream rng(1, 1);
  const RealVector x{0.2, 0.1};
  EXPECT_EQ(sample_stochastic_gradient(task, x, rng), task.gradient(x));
}

TEST(StochasticGradient, GaussianMeanAndVariance) {
  const std::size_t d = 3;
  const RealVector x{0.1, 0.2, -0.3};
  for (double sigma : {0.5, 2.0}) {
    const TaskRound task(1.0, RealVector{1.0, 0.5, -1.0}, 0.2, NoiseModel::gaussian(sigma, d));
    const RealVector g = task.gradient(x);
    RngStream rng(17, 0);
    const int n = 100000;
    std::vector<double> mean(d, 0.0);
    double sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const RealVector s = sample_stochastic_gradient(task, x, rng);
      for (std::size_t i = 0; i < d; ++i) {
        mean[i] += (s[i] - g[i]) / n;
        sq += (s[i] - g[i]) * (s[i] - g[i]) / n;
      }
    }
    const double se = sigma / std::sqrt(double(n));
    EXPECT_LE(std::sqrt(l2_norm_sq(std::span<const double>(mean))), 5.0 * se);
    EXPECT_NEAR(sq, sigma * sigma, 0.03 * sigma * sigma);
  }
}

TEST(NoiseModel, SubGaussianMapping) {
  for (std::size_t d : {1u, 5u, 100u}) {
    const double k = kappa_for_gaussian(1.0, d);
    // E exp(||n||^2 / kappa^2) for n ~ N(0, I/d) must stay below e.
    const double mgf = std::pow(1.0 - 2.0 / (d * k * k), -0.5 * d);
    EXPECT_LT(mgf, std::exp(1.0));
    EXPECT_GE(k * k, 1.0);
  }
  EXPECT_NEAR(kappa_for_gaussian(1.0, 100000) * kappa_for_gaussian(1.0, 100000), 2.0, 1e-4);
  EXPECT_THROW(NoiseModel::sub_gaussian(1.0, 4, 0.1), ConfigError);
  EXPECT_TRUE(NoiseModel::gaussian(0.0, 3).is_exact());
  const NoiseModel avg = NoiseModel::gaussian(2.0, 3).averaged_over(4);
  EXPECT_DOUBLE_EQ(avg.sigma, 1.0);
}
