#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dynreg/error.hpp"
#include "dynreg/meta.hpp"
#include "dynreg/numerics.hpp"
#include "dynreg/optimizer.hpp"
#include "dynreg/tasks.hpp"

namespace dynreg {

// ---------------------------------------------------------------------------
// Smoothed objective and regret ledgers
// ---------------------------------------------------------------------------

/// (1/W) Sum_{r<w} alpha^r grad l_{t-r}(x_{t-r}) from the gradients stored in the
/// trace; rounds t - r <= 0 contribute zero.
inline RealVector exact_smoothed_gradient(const RunTrace& trace, std::uint64_t t, std::uint64_t w, double alpha) {
  if (t < 1 || t > trace.size()) throw IndexError("exact_smoothed_gradient: round " + std::to_string(t) + " out of range");
  const double W = weight_sum_W(alpha, w);
  const std::size_t d = trace.round(t).exact_gradient.dim();
  std::vector<double> acc(d, 0.0);
  double weight = 1.0;
  const std::uint64_t depth = std::min<std::uint64_t>(w, t);
  for (std::uint64_t r = 0; r < depth; ++r) {
    const RealVector& g = trace.records[t - r - 1].exact_gradient;
    for (std::size_t i = 0; i < d; ++i) acc[i] += weight * g[i];
    weight *= alpha;
  }
  for (double& a : acc) a /= W;
  return RealVector(std::move(acc));
}

/// S_t at a common point: (1/W) Sum_{r<w} alpha^r l_{t-r}(x).
inline double smoothed_objective_at(const RunTrace& trace, std::uint64_t t, const RealVector& x, std::uint64_t w,
                                    double alpha) {
  if (t < 1 || t > trace.size()) throw IndexError("smoothed_objective_at: round out of range");
  CompensatedSum sum;
  double weight = 1.0;
  const std::uint64_t depth = std::min<std::uint64_t>(w, t);
  for (std::uint64_t r = 0; r < depth; ++r) {
    sum += weight * trace.loss(t - r)->value(x);
    weight *= alpha;
  }
  return sum.value() / weight_sum_W(alpha, w);
}

/// S_t along the trajectory: (1/W) Sum_{r<w} alpha^r l_{t-r}(x_{t-r}).
inline double smoothed_objective(const RunTrace& trace, std::uint64_t t, std::uint64_t w, double alpha) {
  if (t < 1 || t > trace.size()) throw IndexError("smoothed_objective: round out of range");
  CompensatedSum sum;
  double weight = 1.0;
  const std::uint64_t depth = std::min<std::uint64_t>(w, t);
  for (std::uint64_t r = 0; r < depth; ++r) {
    sum += weight * trace.round(t - r).loss;
    weight *= alpha;
  }
  return sum.value() / weight_sum_W(alpha, w);
}

struct RegretLedger {
  std::uint64_t w = 1;
  double alpha = 1.0;
  double W = 1.0;
  std::vector<double> per_round;   // per_round[t-1]
  std::vector<double> cumulative;  // cumulative[t-1]

  double total() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

namespace detail {

inline void append(RegretLedger& ledger, double value, CompensatedSum& running) {
  running += value;
  ledger.per_round.push_back(value);
  ledger.cumulative.push_back(running.value());
}

}  // namespace detail

/// Dynamic local regret: Sum_t ||grad S_{t,w,alpha}(x_t)||^2.
inline RegretLedger dlr_cumulative(const RunTrace& trace, std::uint64_t w, double alpha) {
  RegretLedger ledger{w, alpha, weight_sum_W(alpha, w), {}, {}};
  ledger.per_round.reserve(trace.size());
  ledger.cumulative.reserve(trace.size());
  CompensatedSum running;
  for (std::uint64_t t = 1; t <= trace.size(); ++t) {
    detail::append(ledger, l2_norm_sq(exact_smoothed_gradient(trace, t, w, alpha)), running);
  }
  return ledger;
}

/// Static local regret: Sum_t ||grad F_{t,w}(x_t)||^2 with F_{t,w}(x) = (1/w) Sum_{r<w} l_{t-r}(x).
/// Past losses are re-evaluated at the current iterate through the retained handles.
inline RegretLedger slr_cumulative(const RunTrace& trace, std::uint64_t w) {
  if (w < 1) throw ConfigError("slr_cumulative: w must be >= 1");
  RegretLedger ledger{w, 1.0, static_cast<double>(w), {}, {}};
  CompensatedSum running;
  for (std::uint64_t t = 1; t <= trace.size(); ++t) {
    const RealVector& x = trace.round(t).x;
    std::vector<double> acc(x.dim(), 0.0);
    const std::uint64_t depth = std::min<std::uint64_t>(w, t);
    for (std::uint64_t r = 0; r < depth; ++r) {
      const RealVector g = r == 0 ? trace.round(t).exact_gradient : trace.loss(t - r)->gradient(x);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
    for (double& a : acc) a /= static_cast<double>(w);
    detail::append(ledger, l2_norm_sq(acc), running);
  }
  return ledger;
}

/// max_t ||g_tilde_t - grad S_t(x_t)||^2 over a run, using the run's own (w, alpha).
inline double max_smoothed_deviation_sq(const RunTrace& trace) {
  double worst = 0.0;
  for (std::uint64_t t = 1; t <= trace.size(); ++t) {
    const RealVector exact = exact_smoothed_gradient(trace, t, trace.optimizer.window, trace.optimizer.alpha);
    worst = std::max(worst, l2_norm_sq(trace.round(t).smoothed_sample - exact));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Constants and variance proxies
// ---------------------------------------------------------------------------

struct EffectiveConstants {
  double L_prime;
  double gamma_prime;
};

/// Lipschitz and smoothness constants of the composite round loss:
/// L' = (1 + theta gamma) L, gamma' = theta L H + (1 + theta gamma)^2 gamma.
inline EffectiveConstants effective_constants(const LossConstants& c, double theta) {
  const double lift = 1.0 + theta * c.gamma;
  return {lift * c.L, theta * c.L * c.H + lift * lift * c.gamma};
}

struct VarianceProxy {
  double mu = 0.0;                 // sigma^2 Sum alpha^{2r} / W^2
  double zeta_expectation = 0.0;   // sigma^2 / W
  double zeta_highprob = 0.0;      // kappa^2 ln(e / delta); 0 without delta
  double mubar = 0.0;              // kappa^2 ln(exp(w Sum alpha^{2r} / W^2) / delta); 0 without delta
};

/// mu for noise of total variance sigma^2; the alpha = 1 branch is sigma^2 / w.
inline double variance_mu(double sigma, double alpha, std::uint64_t w) {
  if (alpha == 1.0) return sigma * sigma / static_cast<double>(w);
  const double W = weight_sum_W(alpha, w);
  return sigma * sigma * weight_sum_sq(alpha, w) / (W * W);
}

/// kappa^2 (w Sum alpha^{2r} / W^2 + ln(1/delta)); the exponential is folded into the
/// log so large w cannot overflow.
inline double variance_mubar(double kappa, double alpha, std::uint64_t w, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta: requires 0 < delta < 1");
  const double W = weight_sum_W(alpha, w);
  const double spread = static_cast<double>(w) * weight_sum_sq(alpha, w) / (W * W);
  return kappa * kappa * (spread - std::log(delta));
}

inline VarianceProxy variance_proxy(const NoiseModel& noise, double alpha, std::uint64_t w,
                                    std::optional<double> delta = std::nullopt) {
  const double W = weight_sum_W(alpha, w);
  VarianceProxy out;
  out.mu = variance_mu(noise.sigma, alpha, w);
  out.zeta_expectation = noise.sigma * noise.sigma / W;
  if (delta) {
    out.mubar = variance_mubar(noise.kappa, alpha, w, *delta);
    out.zeta_highprob = noise.kappa * noise.kappa * (1.0 - std::log(*delta));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Regret bound calculators
// ---------------------------------------------------------------------------

enum class BoundKind { AdagradExpectation, AdamExpectation, AdagradHighProb, AdamHighProb };
enum class OptimizerFamily { Adagrad, Adam };

inline const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::AdagradExpectation: return "adagrad_expectation";
    case BoundKind::AdamExpectation: return "adam_expectation";
    case BoundKind::AdagradHighProb: return "adagrad_highprob";
    case BoundKind::AdamHighProb: return "adam_highprob";
  }
  return "unknown";
}

inline std::optional<BoundKind> bound_kind_from_string(const std::string& s) {
  for (BoundKind k : {BoundKind::AdagradExpectation, BoundKind::AdamExpectation, BoundKind::AdagradHighProb,
                      BoundKind::AdamHighProb}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

struct BoundInputs {
  std::uint64_t T = 1;
  std::uint64_t d = 1;
  double delta = 0.1;
  double eta = 0.1;
  double beta1 = 0.0;
  double beta2 = 1.0;
  double epsilon = kDefaultEpsilon;
  double alpha = 1.0;
  std::uint64_t w = 1;
  double sigma = 0.0;
  double kappa = 0.0;
  double theta = 0.1;
  std::optional<double> varsigma;  // Adam only; defaults to sqrt(1 - beta2)
  LossConstants constants{};
};

struct BoundReport {
  BoundKind kind{};
  BoundInputs inputs{};
  double W = 0.0;
  double L_prime = 0.0;
  double gamma_prime = 0.0;
  double zeta = 0.0;
  double mu = 0.0;     // expectation theorems
  double mubar = 0.0;  // high-probability theorems
  double varsigma = 0.0;
  double varpi1 = 0.0;
  double varpi2 = 0.0;
  double varpi3 = 0.0;
  double C = 0.0;
  double rhs = 0.0;
  bool overflow = false;  // rhs is +inf because beta1^-T exceeded the double range
};

namespace detail {

inline void validate_common(const BoundInputs& in, bool adam, bool highprob) {
  if (in.T < 1) throw ConfigError("T: requires T >= 1");
  if (in.d < 1) throw ConfigError("d: requires d >= 1");
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw ConfigError("delta: requires 0 < delta < 1");
  if (!(in.eta > 0.0)) throw ConfigError("eta: requires eta > 0");
  if (!(in.epsilon > 0.0)) throw ConfigError("epsilon: requires epsilon > 0");
  if (!(in.alpha > 0.0 && in.alpha <= 1.0)) throw ConfigError("alpha: requires 0 < alpha <= 1");
  if (in.w < 1) throw ConfigError("w: requires w >= 1");
  if (!(in.sigma >= 0.0)) throw ConfigError("sigma: requires sigma >= 0");
  if (!(in.theta >= 0.0)) throw ConfigError("theta: requires theta >= 0");
  in.constants.validate();
  if (highprob && !(in.kappa > 0.0)) throw ConfigError("kappa: high-probability bounds require kappa > 0");
  if (adam) {
    if (!(in.beta1 > 0.0)) throw ConfigError("beta1: Adam bounds require 0 < beta1");
    if (!(in.beta1 < in.beta2)) throw ConfigError("beta1: Adam bounds require beta1 < beta2");
    if (!(in.beta2 < 1.0)) throw ConfigError("beta2: Adam bounds require beta2 < 1");
    if (in.varsigma && !(*in.varsigma > 0.0)) throw ConfigError("varsigma: requires varsigma > 0");
  } else {
    if (in.beta1 != 0.0) throw ConfigError("beta1: Adagrad bounds require beta1 = 0");
    if (in.beta2 != 1.0) throw ConfigError("beta2: Adagrad bounds require beta2 = 1");
  }
}

inline BoundReport prepare(BoundKind kind, const BoundInputs& in) {
  BoundReport rep;
  rep.kind = kind;
  rep.inputs = in;
  rep.W = weight_sum_W(in.alpha, in.w);
  const EffectiveConstants eff = effective_constants(in.constants, in.theta);
  rep.L_prime = eff.L_prime;
  rep.gamma_prime = eff.gamma_prime;
  return rep;
}

// Adam varpi_1 (shared by both Adam theorems).
inline double adam_varpi1(const BoundInputs& in, double W, double L_prime) {
  const double T = static_cast<double>(in.T);
  return 4.0 * in.constants.D * T / W +
         8.0 * T * in.eta * (1.0 - in.beta1) * L_prime * L_prime / (in.beta1 * std::sqrt(1.0 - in.beta2) * W * W);
}

// Adam varpi_2; `noise_term` is sqrt(zeta) or sqrt(zeta)/sqrt(W).
inline double adam_varpi2(const BoundInputs& in, double gamma_prime, double noise_term) {
  const double d = static_cast<double>(in.d);
  const double b1 = in.beta1, b2 = in.beta2, eta = in.eta;
  const double ratio = 1.0 - b1 / b2;
  const double gp2 = gamma_prime * gamma_prime;
  return d * eta * eta * (1.0 - b1) * gamma_prime / (2.0 * (1.0 - b2) * ratio) +
         d * eta * eta * eta * gp2 * b1 / (ratio * std::pow(1.0 - b2, 1.5)) +
         2.0 * d * eta * (1.0 + noise_term) * std::sqrt(1.0 - b1) / (std::pow(ratio, 1.5) * std::sqrt(1.0 - b2)) +
         2.0 * eta * eta * eta * (1.0 - b1) * (1.0 - b1) * gp2 / (b1 * std::pow(1.0 - b2, 1.5) * ratio);
}

inline double adam_log_term(const BoundInputs& in, double zeta, double L_prime) {
  const double d = static_cast<double>(in.d);
  return d * std::log1p(2.0 * (zeta + L_prime * L_prime) / (d * in.epsilon * (1.0 - in.beta2))) -
         static_cast<double>(in.T) * std::log(in.beta2);
}

inline double adagrad_log_term(const BoundInputs& in, double zeta, double L_prime) {
  const double d = static_cast<double>(in.d);
  return d * std::log1p(2.0 * (zeta + L_prime * L_prime) * static_cast<double>(in.T) / (d * in.epsilon));
}

}  // namespace detail

/// Expectation bounds on Sum_t ||grad S_t(x_t)||^2 (Adagrad and the Adam-like schedule),
/// holding with probability at least 1 - delta.
inline BoundReport bound_expectation(OptimizerFamily family, const BoundInputs& in) {
  const bool adam = family == OptimizerFamily::Adam;
  detail::validate_common(in, adam, false);
  BoundReport rep = detail::prepare(adam ? BoundKind::AdamExpectation : BoundKind::AdagradExpectation, in);
  const double T = static_cast<double>(in.T);
  const double delta = in.delta;
  rep.zeta = in.sigma * in.sigma / rep.W;
  rep.mu = variance_mu(in.sigma, in.alpha, in.w);
  const double sqrt_eps = std::sqrt(in.epsilon);

  if (!adam) {
    rep.varpi1 = 4.0 * in.constants.D * T / (rep.W * in.eta);
    rep.varpi2 = (in.eta * rep.gamma_prime + 4.0 * std::sqrt(rep.zeta)) / 2.0;
    rep.C = rep.varpi1 + rep.varpi2 * detail::adagrad_log_term(in, rep.zeta, rep.L_prime);
    rep.rhs = 4.0 * rep.C * sqrt_eps / delta + 8.0 * rep.C * std::sqrt(rep.zeta * T) / std::pow(delta, 1.5) +
              48.0 * rep.C * rep.C / (delta * delta);
    return rep;
  }

  rep.varsigma = in.varsigma.value_or(std::sqrt(1.0 - in.beta2));
  rep.varpi1 = detail::adam_varpi1(in, rep.W, rep.L_prime);
  rep.varpi2 = detail::adam_varpi2(in, rep.gamma_prime, std::sqrt(rep.zeta));
  rep.C = rep.varpi1 + rep.varpi2 * detail::adam_log_term(in, rep.zeta, rep.L_prime);
  const double scale = rep.varsigma * in.eta * (1.0 - in.beta1);
  rep.rhs = std::sqrt(1.0 - in.beta2) / scale *
                (4.0 * rep.C * sqrt_eps / delta + 8.0 * rep.C * std::sqrt(rep.zeta * T) / std::pow(delta, 1.5)) +
            48.0 * (1.0 - in.beta2) * rep.C * rep.C / (scale * scale * delta * delta);
  return rep;
}

/// High-probability bounds under sub-Gaussian noise of scale kappa.
inline BoundReport bound_highprob(OptimizerFamily family, const BoundInputs& in) {
  const bool adam = family == OptimizerFamily::Adam;
  detail::validate_common(in, adam, true);
  BoundReport rep = detail::prepare(adam ? BoundKind::AdamHighProb : BoundKind::AdagradHighProb, in);
  const double T = static_cast<double>(in.T);
  const double k2 = in.kappa * in.kappa;
  const double log_inv_delta = -std::log(in.delta);
  rep.zeta = k2 * (1.0 - std::log(in.delta));
  rep.mubar = variance_mubar(in.kappa, in.alpha, in.w, in.delta);
  const double sqrt_eps = std::sqrt(in.epsilon);

  if (!adam) {
    rep.varpi1 = 4.0 * in.constants.D * T / (rep.W * in.eta);
    rep.varpi2 = in.eta * rep.gamma_prime / 2.0 + 2.0 * std::sqrt(rep.zeta) / std::sqrt(rep.W);
    rep.C = rep.varpi1 + rep.varpi2 * detail::adagrad_log_term(in, rep.zeta, rep.L_prime) +
            3.0 * k2 / sqrt_eps * log_inv_delta;
    rep.rhs = 4.0 * rep.C * sqrt_eps + 4.0 * rep.C * std::sqrt(2.0 * T * rep.zeta / rep.W) +
              48.0 * rep.C * rep.C / rep.W;
    return rep;
  }

  rep.varsigma = in.varsigma.value_or(std::sqrt(1.0 - in.beta2));
  rep.varpi1 = detail::adam_varpi1(in, rep.W, rep.L_prime);
  rep.varpi2 = detail::adam_varpi2(in, rep.gamma_prime, std::sqrt(rep.zeta) / std::sqrt(rep.W));
  if (log_inv_delta > 0.0) {
    const double prefactor = 3.0 * in.eta * (1.0 - in.beta1) * k2 * log_inv_delta /
                             (rep.W * rep.W * std::sqrt(1.0 - in.beta2) * sqrt_eps);
    const double log_varpi3 = std::log(prefactor) - T * std::log(in.beta1);
    if (log_varpi3 >= std::log(std::numeric_limits<double>::max())) {
      rep.varpi3 = std::numeric_limits<double>::infinity();
      rep.overflow = true;
    } else {
      rep.varpi3 = std::exp(log_varpi3);
    }
  }
  rep.C = rep.varpi1 + rep.varpi2 * detail::adam_log_term(in, rep.zeta, rep.L_prime) + rep.varpi3;
  const double scale = rep.varsigma * in.eta * (1.0 - in.beta1);
  rep.rhs = 4.0 * std::sqrt(1.0 - in.beta2) * rep.C / scale * (sqrt_eps + std::sqrt(2.0 * T * rep.zeta / rep.W)) +
            48.0 * (1.0 - in.beta2) * rep.C * rep.C / (rep.W * scale * scale);
  if (!std::isfinite(rep.rhs)) {
    rep.rhs = std::numeric_limits<double>::infinity();
    rep.overflow = true;
  }
  return rep;
}

inline BoundReport compute_bound(BoundKind kind, const BoundInputs& in) {
  switch (kind) {
    case BoundKind::AdagradExpectation: return bound_expectation(OptimizerFamily::Adagrad, in);
    case BoundKind::AdamExpectation: return bound_expectation(OptimizerFamily::Adam, in);
    case BoundKind::AdagradHighProb: return bound_highprob(OptimizerFamily::Adagrad, in);
    case BoundKind::AdamHighProb: return bound_highprob(OptimizerFamily::Adam, in);
  }
  throw ConfigError("unknown bound kind");
}

// ---------------------------------------------------------------------------
// Growth diagnostics
// ---------------------------------------------------------------------------

struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  std::vector<double> ratios;      // DLR(T_k) / ln T_k
  double tail_ratio_change = 0.0;  // |r_k - r_{k-1}| / r_{k-1} for the last two horizons
  bool ratios_strictly_increasing = false;
  bool logarithmic = false;        // tail_ratio_change <= tolerance
};

/// Least-squares fit of DLR(T) = slope ln T + intercept.
inline LogFit logarithmic_fit(const std::vector<double>& horizons, const std::vector<double>& dlr,
                              double tolerance = 0.10) {
  if (horizons.size() != dlr.size()) throw ShapeError("logarithmic_fit: horizons and values differ in length");
  if (horizons.size() < 3) throw InvalidInputError("logarithmic_fit: need at least 3 horizons");
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (!(horizons[k] > 1.0)) throw InvalidInputError("logarithmic_fit: horizons must exceed 1");
    if (k > 0 && !(horizons[k] > horizons[k - 1])) {
      throw InvalidInputError("logarithmic_fit: horizons must be strictly increasing");
    }
    if (!std::isfinite(dlr[k])) throw InvalidInputError("logarithmic_fit: non-finite regret value");
  }
  const std::size_t n = horizons.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n);
  for (std::size_t k = 0; k < n; ++k) {
    lx[k] = std::log(horizons[k]);
    mx += lx[k];
    my += dlr[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxy += (lx[k] - mx) * (dlr[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  LogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.ratios_strictly_increasing = true;
  for (std::size_t k = 0; k < n; ++k) {
    fit.residuals.push_back(dlr[k] - (fit.slope * lx[k] + fit.intercept));
    fit.ratios.push_back(dlr[k] / lx[k]);
    if (k > 0 && !(fit.ratios[k] > fit.ratios[k - 1])) fit.ratios_strictly_increasing = false;
  }
  const double prev = fit.ratios[n - 2];
  fit.tail_ratio_change = std::abs(fit.ratios[n - 1] - prev) / std::abs(prev);
  fit.logarithmic = fit.tail_ratio_change <= tolerance;
  return fit;
}

}  // namespace dynreg
