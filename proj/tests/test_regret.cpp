#include <cmath>
#include <memory>

#include <gtest/gtest.h>

#include "dynreg/regret.hpp"
#include "oracles.hpp"

using namespace dynreg;

namespace {

class LinearLoss final : public DifferentiableLoss {
 public:
  explicit LinearLoss(RealVector g) : g_(std::move(g)) {}
  std::size_t dim() const override { return g_.dim(); }
  double value(const RealVector& x) const override { return dot(g_, x); }
  RealVector gradient(const RealVector&) const override { return g_; }

 private:
  RealVector g_;
};

/// A trace whose round t has iterate 0 and constant gradient grads[t-1].
RunTrace scripted(const std::vector<double>& grads) {
  RunTrace trace;
  std::uint64_t t = 1;
  for (double g : grads) {
    trace.records.push_back(RoundRecord{t++, RealVector{0.0}, RealVector{0.0}, 0.0, RealVector{g}, RealVector{g}, 0.1});
    trace.losses.push_back(std::make_shared<const LinearLoss>(RealVector{g}));
  }
  return trace;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

BoundInputs desk_point() {
  BoundInputs in;
  in.T = 1000;
  in.d = 10;
  in.delta = 0.1;
  in.eta = 0.1;
  in.epsilon = 1e-8;
  in.alpha = 1.0;
  in.w = 500;
  in.sigma = 0.5;
  in.kappa = 0.8;
  in.theta = 0.1;
  in.constants = {1.0, 1.0, 1.0, 1.0};
  return in;
}

oracle::BoundPoint to_point(const BoundInputs& in) {
  return {in.T,       in.d,        in.w,     in.delta, in.eta,   in.beta1, in.beta2,
          in.epsilon, in.alpha,    in.sigma, in.kappa, in.theta,
          {in.constants.D, in.constants.L, in.constants.gamma, in.constants.H}};
}

void expect_matches(const BoundReport& rep, const oracle::BoundValues& v) {
  EXPECT_LE(rel(rep.W, double(v.W)), 1e-12);
  EXPECT_LE(rel(rep.L_prime, double(v.Lp)), 1e-12);
  EXPECT_LE(rel(rep.gamma_prime, double(v.gp)), 1e-12);
  EXPECT_LE(rel(rep.zeta, double(v.zeta)), 1e-9);
  EXPECT_LE(rel(rep.varpi1, double(v.varpi1)), 1e-9);
  EXPECT_LE(rel(rep.varpi2, double(v.varpi2)), 1e-9);
  if (v.varpi3 != 0) {
    EXPECT_LE(rel(rep.varpi3, double(v.varpi3)), 1e-9);
  }
  EXPECT_LE(rel(rep.C, double(v.C)), 1e-9);
  EXPECT_LE(rel(rep.rhs, double(v.rhs)), 1e-9);
}

}  // namespace

TEST(ExactSmoothedGradient, Examples) {
  const RunTrace trace = scripted({2.0, 4.0, 6.0});
  EXPECT_DOUBLE_EQ(exact_smoothed_gradient(trace, 1, 5, 1.0)[0], 2.0 / 5.0);
  EXPECT_DOUBLE_EQ(exact_smoothed_gradient(trace, 3, 1, 1.0)[0], 6.0);
  EXPECT_DOUBLE_EQ(exact_smoothed_gradient(trace, 2, 2, 1.0)[0], 3.0);
  EXPECT_NEAR(exact_smoothed_gradient(trace, 3, 3, 0.5)[0], (6.0 + 0.5 * 4.0 + 0.25 * 2.0) / 1.75, 1e-15);
  EXPECT_THROW(exact_smoothed_gradient(trace, 4, 1, 1.0), IndexError);
  EXPECT_THROW(exact_smoothed_gradient(trace, 0, 1, 1.0), IndexError);
}

TEST(ExactSmoothedGradient, AlphaOneIsUnweightedMean) {
  RngStream rng(5, 5);
  std::vector<double> g(40);
  for (double& x : g) x = rng.normal();
  const RunTrace trace = scripted(g);
  for (std::uint64_t t = 8; t <= 40; ++t) {
    double mean = 0.0;
    for (std::uint64_t r = 0; r < 8; ++r) mean += g[t - 1 - r] / 8.0;
    EXPECT_NEAR(exact_smoothed_gradient(trace, t, 8, 1.0)[0], mean, 1e-14);
  }
}

TEST(Dlr, ScriptedExample) {
  const RunTrace trace = scripted({1.0, 1.0, 1.0});
  const RegretLedger dlr = dlr_cumulative(trace, 2, 1.0);
  ASSERT_EQ(dlr.per_round.size(), 3u);
  EXPECT_DOUBLE_EQ(dlr.per_round[0], 0.25);
  EXPECT_DOUBLE_EQ(dlr.per_round[1], 1.0);
  EXPECT_DOUBLE_EQ(dlr.per_round[2], 1.0);
  EXPECT_DOUBLE_EQ(dlr.total(), 2.25);
}

TEST(Dlr, TrivialCases) {
  EXPECT_DOUBLE_EQ(dlr_cumulative(scripted({3.0}), 1, 1.0).total(), 9.0);
  EXPECT_EQ(dlr_cumulative(scripted({0.0, 0.0, 0.0, 0.0}), 3, 0.7).total(), 0.0);
}

TEST(Dlr, CumulativeNonDecreasingOnRuns) {
  const TaskStream s = make_drifting_sine_stream(4, 1.0, 1.0, 0.05, NoiseModel::gaussian(0.5, 4), 2);
  const RunTrace trace = run_stream(s, 200, {}, make_config_adagrad(0.1, 1e-8, 0.9, 10), 2);
  const RegretLedger dlr = dlr_cumulative(trace, 10, 0.9);
  for (std::size_t k = 1; k < dlr.cumulative.size(); ++k) {
    EXPECT_GE(dlr.cumulative[k], dlr.cumulative[k - 1]);
    EXPECT_TRUE(std::isfinite(dlr.per_round[k]));
  }
}

TEST(Slr, EqualsDlrWhenWindowIsOne) {
  const TaskStream s = make_drifting_sine_stream(3, 1.0, 1.0, 0.05, NoiseModel::gaussian(0.5, 3), 6);
  const RunTrace trace = run_stream(s, 100, {}, make_config_adagrad(0.1, 1e-8, 1.0, 1), 6);
  const RegretLedger dlr = dlr_cumulative(trace, 1, 1.0);
  const RegretLedger slr = slr_cumulative(trace, 1);
  for (std::size_t k = 0; k < trace.size(); ++k) EXPECT_EQ(dlr.per_round[k], slr.per_round[k]);
}

TEST(Slr, FrozenIterateOnStationaryStreamIsConstant) {
  const RunTrace trace = scripted({0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  const RegretLedger slr = slr_cumulative(trace, 3);
  for (std::size_t k = 3; k < 6; ++k) EXPECT_DOUBLE_EQ(slr.per_round[k], slr.per_round[2]);
}

TEST(Slr, MissingHandle) {
  RunTrace trace = scripted({1.0, 1.0});
  trace.losses[0].reset();
  EXPECT_THROW(slr_cumulative(trace, 2), CapabilityError);
}

TEST(VarianceProxy, Examples) {
  EXPECT_EQ(variance_mu(0.0, 0.5, 4), 0.0);
  EXPECT_NEAR(variance_mu(2.0, 0.5, 2), 20.0 / 9.0, 1e-14);
  EXPECT_NEAR(variance_mu(2.0, 0.5, 2), 4.0 * (1.0 - 0.0625) / (1.5 * 1.5 * 0.75), 1e-14);
  const VarianceProxy p = variance_proxy(NoiseModel{NoiseKind::GaussianBoundedVariance, 1.0, 1.0}, 1.0, 4);
  EXPECT_DOUBLE_EQ(p.mu, 0.25);
  EXPECT_DOUBLE_EQ(p.zeta_expectation, 0.25);
  for (double alpha : {0.3, 0.9, 0.999}) {
    EXPECT_NEAR(variance_mu(0.7, alpha, 13), double(oracle::mu(0.7L, alpha, 13)), 1e-13);
  }
  EXPECT_THROW(variance_mubar(1.0, 0.9, 4, 1.0), ConfigError);
  EXPECT_NEAR(variance_mubar(2.0, 1.0, 4, 0.1), 4.0 * (1.0 + std::log(10.0)), 1e-12);
}

TEST(Bounds, AdagradExpectationDoubleEntry) {
  BoundInputs in = desk_point();
  expect_matches(bound_expectation(OptimizerFamily::Adagrad, in), oracle::adagrad_expectation(to_point(in)));
  in.alpha = 0.99;
  in.w = 64;
  in.T = 20000;
  expect_matches(bound_expectation(OptimizerFamily::Adagrad, in), oracle::adagrad_expectation(to_point(in)));
}

TEST(Bounds, AdagradHighProbDoubleEntry) {
  BoundInputs in = desk_point();
  expect_matches(bound_highprob(OptimizerFamily::Adagrad, in), oracle::adagrad_highprob(to_point(in)));
  in.delta = 0.01;
  in.kappa = 2.0;
  expect_matches(bound_highprob(OptimizerFamily::Adagrad, in), oracle::adagrad_highprob(to_point(in)));
}

TEST(Bounds, AdamDoubleEntry) {
  BoundInputs in = desk_point();
  in.beta1 = 0.9;
  in.beta2 = 0.999;
  in.T = 100;
  in.w = 50;
  expect_matches(bound_expectation(OptimizerFamily::Adam, in),
                 oracle::adam_expectation(to_point(in), std::sqrt(1.0L - 0.999L)));
  expect_matches(bound_highprob(OptimizerFamily::Adam, in), oracle::adam_highprob(to_point(in), std::sqrt(1.0L - 0.999L)));
  in.varsigma = 0.5;
  in.beta1 = 0.5;
  in.T = 40;
  expect_matches(bound_expectation(OptimizerFamily::Adam, in), oracle::adam_expectation(to_point(in), 0.5L));
  expect_matches(bound_highprob(OptimizerFamily::Adam, in), oracle::adam_highprob(to_point(in), 0.5L));
}

TEST(Bounds, SchemaAndStructure) {
  BoundInputs in = desk_point();
  const BoundReport rep = bound_expectation(OptimizerFamily::Adagrad, in);
  EXPECT_EQ(rep.kind, BoundKind::AdagradExpectation);
  for (double v : {rep.varpi1, rep.varpi2, rep.zeta, rep.C, rep.rhs}) EXPECT_GT(v, 0.0);

  in.T = 1;
  in.sigma = 0.0;
  const BoundReport one = bound_expectation(OptimizerFamily::Adagrad, in);
  EXPECT_EQ(one.zeta, 0.0);
  const double C = one.C;
  EXPECT_NEAR(one.rhs, 4.0 * C * std::sqrt(in.epsilon) / in.delta + 48.0 * C * C / (in.delta * in.delta),
              1e-12 * one.rhs);
}

TEST(Bounds, MonotoneInDeltaAndKappa) {
  BoundInputs in = desk_point();
  for (BoundKind kind : {BoundKind::AdagradExpectation, BoundKind::AdagradHighProb}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double delta : {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}) {
      in.delta = delta;
      const double rhs = compute_bound(kind, in).rhs;
      EXPECT_LT(rhs, prev);
      prev = rhs;
    }
  }
  in = desk_point();
  double prev = 0.0;
  for (double kappa : {0.1, 0.5, 1.0, 3.0}) {
    in.kappa = kappa;
    const double rhs = bound_highprob(OptimizerFamily::Adagrad, in).rhs;
    EXPECT_GT(rhs, prev);
    prev = rhs;
  }
}

TEST(Bounds, DeltaNearOneDropsLogTerms) {
  BoundInputs in = desk_point();
  in.beta1 = 0.9;
  in.beta2 = 0.99;
  in.T = 50;
  in.delta = 1.0 - 1e-15;
  const BoundReport rep = bound_highprob(OptimizerFamily::Adam, in);
  EXPECT_LT(rep.varpi3, 1e-9 * rep.C);
}

TEST(Bounds, AdamHighProbOverflowIsInfinite) {
  BoundInputs in = desk_point();
  in.beta1 = 0.9;
  in.beta2 = 0.999;
  in.T = 100000;
  const BoundReport rep = bound_highprob(OptimizerFamily::Adam, in);
  EXPECT_TRUE(rep.overflow);
  EXPECT_TRUE(std::isinf(rep.rhs));
  EXPECT_FALSE(bound_expectation(OptimizerFamily::Adam, in).overflow);
}

TEST(Bounds, ConstraintViolations) {
  BoundInputs in = desk_point();
  in.kappa = 0.0;
  EXPECT_THROW(bound_highprob(OptimizerFamily::Adagrad, in), ConfigError);
  in = desk_point();
  in.delta = 1.0;
  EXPECT_THROW(bound_expectation(OptimizerFamily::Adagrad, in), ConfigError);
  in = desk_point();
  in.beta1 = 0.5;
  EXPECT_THROW(bound_expectation(OptimizerFamily::Adagrad, in), ConfigError);
  in.beta2 = 0.4;
  EXPECT_THROW(bound_expectation(OptimizerFamily::Adam, in), ConfigError);
  try {
    in.beta2 = 1.0;
    bound_expectation(OptimizerFamily::Adam, in);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("beta2 < 1"), std::string::npos);
  }
}

TEST(LogFit, Examples) {
  const std::vector<double> T{500, 1000, 2000, 4000};
  std::vector<double> log_dlr, lin;
  for (double t : T) {
    log_dlr.push_back(5.0 * std::log(t));
    lin.push_back(t);
  }
  const LogFit a = logarithmic_fit(T, log_dlr);
  EXPECT_NEAR(a.slope, 5.0, 1e-12);
  for (double r : a.residuals) EXPECT_NEAR(r, 0.0, 1e-10);
  EXPECT_TRUE(a.logarithmic);

  const LogFit b = logarithmic_fit(T, lin);
  EXPECT_TRUE(b.ratios_strictly_increasing);
  EXPECT_FALSE(b.logarithmic);
  EXPECT_THROW(logarithmic_fit({10, 100}, {1, 2}), InvalidInputError);
}
