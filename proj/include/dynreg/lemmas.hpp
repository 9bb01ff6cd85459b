#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynreg/error.hpp"
#include "dynreg/meta.hpp"
#include "dynreg/numerics.hpp"
#include "dynreg/optimizer.hpp"
#include "dynreg/regret.hpp"
#include "dynreg/tasks.hpp"

namespace dynreg {

struct LemmaViolation {
  std::vector<std::pair<std::string, double>> params;
  double lhs;
  double rhs;
};

/// Outcome of checking one inequality over a parameter grid.
struct LemmaCheckResult {
  LemmaCheckResult() = default;
  explicit LemmaCheckResult(std::string lemma_id) : id(std::move(lemma_id)) {}

  std::string id;
  std::size_t grid_size = 0;
  std::vector<LemmaViolation> violations;
  double max_slack = std::numeric_limits<double>::infinity();  // smallest rhs - lhs seen
  std::vector<std::pair<std::string, double>> diagnostics;

  bool pass() const noexcept { return violations.empty(); }

  /// Records one (lhs, rhs) pair; violation iff rhs - lhs < -1e-9 max(1, |rhs|).
  void record(double lhs, double rhs, std::vector<std::pair<std::string, double>> params) {
    ++grid_size;
    const double slack = rhs - lhs;
    max_slack = std::min(max_slack, slack);
    if (std::isnan(slack) || slack < -1e-9 * std::max(1.0, std::abs(rhs))) {
      violations.push_back({std::move(params), lhs, rhs});
    }
  }
};

namespace detail {

inline void require_open_unit(double a, const char* name) {
  if (!(a > 0.0 && a < 1.0)) throw ConfigError(std::string(name) + ": requires 0 < a < 1");
}

// Evaluates Sum_{q<Q} term(a, q) at each requested Q with one pass up to max Q.
template <typename Term, typename Bound>
LemmaCheckResult check_geometric(const char* id, const std::vector<double>& a_grid, std::vector<std::uint64_t> Q_grid,
                                 Term&& term, Bound&& bound, double rhs_scale) {
  LemmaCheckResult res;
  res.id = id;
  for (std::uint64_t Q : Q_grid) {
    if (Q < 1) throw ConfigError(std::string(id) + ": requires Q >= 1");
  }
  std::sort(Q_grid.begin(), Q_grid.end());
  for (double a : a_grid) {
    require_open_unit(a, id);
    const double rhs = bound(a) * rhs_scale;
    CompensatedSum sum;
    std::uint64_t q = 0;
    for (std::uint64_t Q : Q_grid) {
      for (; q < Q; ++q) sum += term(a, q);
      res.record(sum.value(), rhs, {{"a", a}, {"Q", static_cast<double>(Q)}});
    }
  }
  return res;
}

}  // namespace detail

/// Sum_{q<Q} a^q sqrt(q+1) <= 2 / (1-a)^{3/2}.
inline LemmaCheckResult check_geom_sqrt_sum(const std::vector<double>& a_grid, const std::vector<std::uint64_t>& Q_grid,
                                            double rhs_scale = 1.0) {
  return detail::check_geometric(
      "geom_sqrt_sum", a_grid, Q_grid,
      [](double a, std::uint64_t q) { return std::pow(a, static_cast<double>(q)) * std::sqrt(static_cast<double>(q + 1)); },
      [](double a) { return 2.0 / std::pow(1.0 - a, 1.5); }, rhs_scale);
}

/// Sum_{q<Q} a^q sqrt(q) (q+1) <= 4a / (1-a)^{5/2}.
inline LemmaCheckResult check_geom_32_sum(const std::vector<double>& a_grid, const std::vector<std::uint64_t>& Q_grid,
                                          double rhs_scale = 1.0) {
  return detail::check_geometric(
      "geom_32_sum", a_grid, Q_grid,
      [](double a, std::uint64_t q) {
        const double qd = static_cast<double>(q);
        return std::pow(a, qd) * std::sqrt(qd) * (qd + 1.0);
      },
      [](double a) { return 4.0 * a / std::pow(1.0 - a, 2.5); }, rhs_scale);
}

/// Sum_{q<Q} a^q / sqrt(q+1) <= 2 / (a sqrt(1-a)).
inline LemmaCheckResult check_inv_sqrt_geom(const std::vector<double>& a_grid, const std::vector<std::uint64_t>& Q_grid,
                                            double rhs_scale = 1.0) {
  return detail::check_geometric(
      "inv_sqrt_geom", a_grid, Q_grid,
      [](double a, std::uint64_t q) { return std::pow(a, static_cast<double>(q)) / std::sqrt(static_cast<double>(q + 1)); },
      [](double a) { return 2.0 / (a * std::sqrt(1.0 - a)); }, rhs_scale);
}

/// Sum-ratio lemmas, checked at every prefix n = 1..N.
///
/// beta1 = 0: a_j >= 0, b_n = Sum beta2^{n-j} a_j, and
///   Sum a_j / (eps + b_j) <= ln(1 + b_n/eps) - n ln beta2.
/// beta1 > 0: b_n = Sum beta2^{n-j} a_j^2, c_n = Sum beta1^{n-j} a_j, and
///   Sum c_j^2 / (eps + b_j) <= (ln(1 + b_n/eps) - n ln beta2) / ((1-beta1)(1-beta1/beta2)).
inline LemmaCheckResult check_sum_ratio(double beta1, double beta2, const std::vector<double>& sequence, double eps,
                                        double rhs_scale = 1.0) {
  if (!(beta2 > 0.0 && beta2 <= 1.0)) throw ConfigError("sum_ratio: requires 0 < beta2 <= 1");
  if (!(beta1 >= 0.0 && beta1 < beta2)) throw ConfigError("sum_ratio: requires 0 <= beta1 < beta2");
  if (!(eps > 0.0)) throw ConfigError("sum_ratio: requires eps > 0");
  const bool momentum = beta1 > 0.0;
  LemmaCheckResult res;
  res.id = momentum ? "sum_ratio_momentum" : "sum_ratio";
  double b = 0.0, c = 0.0;
  CompensatedSum lhs;
  const double log_b2 = std::log(beta2);
  const double factor = momentum ? 1.0 / ((1.0 - beta1) * (1.0 - beta1 / beta2)) : 1.0;
  for (std::size_t j = 0; j < sequence.size(); ++j) {
    const double a = sequence[j];
    if (!std::isfinite(a)) throw ConfigError("sum_ratio: sequence must be finite");
    if (!momentum && a < 0.0) throw ConfigError("sum_ratio: sequence must be non-negative when beta1 = 0");
    if (momentum) {
      b = beta2 * b + a * a;
      c = beta1 * c + a;
      lhs += c * c / (eps + b);
    } else {
      b = beta2 * b + a;
      lhs += a / (eps + b);
    }
    const double n = static_cast<double>(j + 1);
    const double rhs = factor * (std::log1p(b / eps) - n * log_b2) * rhs_scale;
    res.record(lhs.value(), rhs, {{"beta1", beta1}, {"beta2", beta2}, {"eps", eps}, {"n", n}});
  }
  return res;
}

/// For a, b, c >= 0 and Z >= 0: Z / sqrt(cZ + a) <= b implies Z <= c b^2 + b sqrt(a).
/// Grid points where the hypothesis fails are skipped.
inline LemmaCheckResult check_quadratic(double a, double b, double c, const std::vector<double>& Z_grid,
                                        double rhs_scale = 1.0) {
  if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0)) throw ConfigError("quadratic: requires a, b, c >= 0");
  LemmaCheckResult res;
  res.id = "quadratic";
  const double rhs = (c * b * b + b * std::sqrt(a)) * rhs_scale;
  for (double Z : Z_grid) {
    if (!(Z >= 0.0)) throw ConfigError("quadratic: requires Z >= 0");
    const double denom = std::sqrt(c * Z + a);
    const bool hypothesis = Z == 0.0 || (denom > 0.0 && Z / denom <= b);
    if (!hypothesis) continue;
    res.record(Z, rhs, {{"a", a}, {"b", b}, {"c", c}, {"Z", Z}});
  }
  return res;
}

namespace detail {

inline void merge_into(LemmaCheckResult& into, const LemmaCheckResult& from) {
  into.grid_size += from.grid_size;
  into.max_slack = std::min(into.max_slack, from.max_slack);
  into.violations.insert(into.violations.end(), from.violations.begin(), from.violations.end());
}

}  // namespace detail

/// Randomized sweep of both sum-ratio forms (beta1 = 0 and beta1 > 0).
inline std::pair<LemmaCheckResult, LemmaCheckResult> check_sum_ratio_random(std::size_t sequences, std::size_t max_len,
                                                                            std::uint64_t seed,
                                                                            double rhs_scale = 1.0) {
  LemmaCheckResult plain{"sum_ratio"}, momentum{"sum_ratio_momentum"};
  RngStream rng(seed, 0x5A11);
  const double pinned_beta2[] = {0.5, 0.999, 1.0};
  for (std::size_t k = 0; k < sequences; ++k) {
    const double beta2 = k % 2 == 0 ? pinned_beta2[(k / 2) % 3] : rng.uniform(0.05, 1.0);
    const double eps = std::pow(10.0, rng.uniform(-10.0, 1.0));
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_len));
    std::vector<double> seq(n);
    for (double& a : seq) {
      a = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-12.0, 4.0));
    }
    detail::merge_into(plain, check_sum_ratio(0.0, beta2, seq, eps, rhs_scale));
    for (double& a : seq) {
      if (rng.uniform() < 0.5) a = -a;
    }
    const double beta1 = rng.uniform(0.0, 1.0) * beta2 * 0.999 + 1e-6 * beta2;
    detail::merge_into(momentum, check_sum_ratio(beta1, beta2, seq, eps, rhs_scale));
  }
  return {plain, momentum};
}

/// Randomized sweep of the quadratic lemma over hypothesis-satisfying (a, b, c, Z),
/// including the boundary root of Z^2 = b^2 (cZ + a).
inline LemmaCheckResult check_quadratic_random(std::size_t points, std::uint64_t seed, double rhs_scale = 1.0) {
  LemmaCheckResult res{"quadratic"};
  RngStream rng(seed, 0x0ADA);
  for (std::size_t k = 0; k < points; ++k) {
    const double a = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-8.0, 8.0));
    const double b = rng.uniform() < 0.05 ? 0.0 : std::exp(rng.uniform(-8.0, 8.0));
    const double c = rng.uniform() < 0.1 ? 0.0 : std::exp(rng.uniform(-8.0, 8.0));
    const double root = (c * b * b + std::sqrt(c * c * b * b * b * b + 4.0 * b * b * a)) / 2.0;
    const double Z = k % 10 == 0 ? root : root * rng.uniform();
    detail::merge_into(res, check_quadratic(a, b, c, {Z}, rhs_scale));
  }
  return res;
}

/// Objective drift along a trace, for every consecutive round pair:
///   S_{t+1}(x_{t+1}) - S_t(x_{t+1}) <= D(1+alpha^{w-1})/W + D(1-alpha^{w-1})(1+alpha)/(W(1-alpha)),
/// with both S at the common point x_{t+1}, and
///   S_t(x_t) - S_{t+1}(x_{t+1}) <= 2D(1-alpha^w)/(W(1-alpha)),
/// with S along the trajectory. At alpha = 1 the limits are 2D/w + 2D(w-1)/w and 2D.
inline LemmaCheckResult check_objective_drift(const RunTrace& trace, std::uint64_t w, double alpha, double D,
                                              double rhs_scale = 1.0) {
  if (!(D > 0.0)) throw ConfigError("objective_drift: requires D > 0");
  const double W = weight_sum_W(alpha, w);
  const double alpha_wm1 = std::pow(alpha, static_cast<double>(w - 1));
  const double partial = w >= 2 ? weight_sum_W(alpha, w - 1) : 0.0;  // (1-alpha^{w-1})/(1-alpha)
  const double bound_step = (D * (1.0 + alpha_wm1) / W + D * partial * (1.0 + alpha) / W) * rhs_scale;
  // (1 - alpha^w)/(1 - alpha) is W itself, so this side is exactly 2D.
  const double bound_descent = 2.0 * D * weight_sum_W(alpha, w) / W * rhs_scale;
  LemmaCheckResult res{"objective_drift"};
  for (std::uint64_t t = 1; t < trace.size(); ++t) {
    const RealVector& x_next = trace.round(t + 1).x;
    const double step = smoothed_objective_at(trace, t + 1, x_next, w, alpha) -
                        smoothed_objective_at(trace, t, x_next, w, alpha);
    res.record(step, bound_step, {{"t", static_cast<double>(t)}, {"form", 1.0}});
    const double descent = smoothed_objective(trace, t, w, alpha) - smoothed_objective(trace, t + 1, w, alpha);
    res.record(descent, bound_descent, {{"t", static_cast<double>(t)}, {"form", 2.0}});
  }
  return res;
}

struct SmoothedGradientMcConfig {
  StreamSpec stream{};  // noise is taken from `sigma` below
  std::uint64_t w = 8;
  double alpha = 0.9;
  double sigma = 0.5;
  std::uint64_t repetitions = 100000;
  double theta = 0.1;
  std::uint64_t seed = 1;
};

/// Monte-Carlo check of the smoothed stochastic gradient's first two moments at a fixed
/// window of composite losses and random iterates.
///
/// Part 1: ||mean - grad S|| <= 5 sqrt(tr(Cov)/N).
/// Part 2: mean ||dev||^2 <= 1.03 mu, and >= 0.97 mu because the Gaussian noise model
/// attains the variance bound with equality.
inline LemmaCheckResult mc_smoothed_gradient_lemmas(const SmoothedGradientMcConfig& cfg, double rhs_scale = 1.0) {
  if (cfg.repetitions < 10000) throw ConfigError("mc_smoothed_gradient: requires N >= 10^4 repetitions");
  StreamSpec spec = cfg.stream;
  spec.noise = NoiseModel::gaussian(cfg.sigma, spec.dim);
  const TaskStream stream(spec, cfg.seed);
  SmoothingWindow window(cfg.alpha, cfg.w);
  RngStream setup(cfg.seed, 0xC0FFEE);
  const std::uint64_t t = cfg.w;  // every slot occupied
  for (std::uint64_t s = 1; s <= t; ++s) {
    window.push(setup.normal_vector(spec.dim),
                std::make_shared<const CompositeRoundLoss>(stream.round(s), cfg.theta));
  }
  const RealVector exact = exact_window_gradient(window);
  const std::size_t d = spec.dim;
  std::vector<CompensatedSum> mean(d), sq(d);
  CompensatedSum dev_sq;
  for (std::uint64_t n = 0; n < cfg.repetitions; ++n) {
    const RealVector g = smoothed_stochastic_gradient(window, spec.noise, spawn_rng_stream(cfg.seed, n + 1));
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double dev = g[i] - exact[i];
      mean[i] += dev;
      sq[i] += dev * dev;
      norm += dev * dev;
    }
    dev_sq += norm;
  }
  const double N = static_cast<double>(cfg.repetitions);
  double bias_sq = 0.0, trace_cov = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double m = mean[i].value() / N;
    bias_sq += m * m;
    trace_cov += (sq[i].value() / N - m * m) * N / (N - 1.0);
  }
  const double bias = std::sqrt(bias_sq);
  const double standard_error = std::sqrt(trace_cov / N);
  const double sample_var = dev_sq.value() / N;
  const double mu = variance_mu(cfg.sigma, cfg.alpha, cfg.w);

  LemmaCheckResult res{"smoothed_gradient_moments"};
  const std::vector<std::pair<std::string, double>> base{
      {"w", static_cast<double>(cfg.w)}, {"alpha", cfg.alpha}, {"sigma", cfg.sigma}, {"N", N}};
  auto with_part = [&](double part) {
    auto p = base;
    p.emplace_back("part", part);
    return p;
  };
  res.record(bias, 5.0 * standard_error * rhs_scale, with_part(1));
  res.record(sample_var, 1.03 * mu * rhs_scale, with_part(2));
  res.record(0.97 * mu, sample_var / rhs_scale, with_part(3));
  res.diagnostics = {{"bias_norm", bias}, {"standard_error", standard_error}, {"sample_variance", sample_var},
                     {"mu", mu}};
  return res;
}

struct ExceedanceConfig {
  StreamSpec stream{};  // noise must be SubGaussian or Gaussian
  OptimizerConfig optimizer{};
  InnerAdaptConfig inner{};
  std::uint64_t horizon = 20;
  std::uint64_t runs = 500;
  double delta = 0.2;
  std::uint64_t seed = 1;
};

/// Frequency over seeded runs of max_t ||g_tilde_t - grad S_t||^2 > mubar must stay
/// within delta + 3 sqrt(delta (1 - delta) / runs).
inline LemmaCheckResult check_subgaussian_exceedance(const ExceedanceConfig& cfg, double rhs_scale = 1.0) {
  if (cfg.runs < 1) throw ConfigError("subgaussian_exceedance: requires runs >= 1");
  if (cfg.stream.noise.is_exact()) throw ConfigError("subgaussian_exceedance: requires a noisy stream");
  const NoiseModel oracle = cfg.stream.noise.averaged_over(cfg.inner.test_batch);
  const double mubar = variance_mubar(oracle.kappa, cfg.optimizer.alpha, cfg.optimizer.window, cfg.delta);
  std::uint64_t exceed = 0;
  double worst = 0.0;
  for (std::uint64_t r = 0; r < cfg.runs; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    const RunTrace trace = run_stream(TaskStream(cfg.stream, seed), cfg.horizon, cfg.inner, cfg.optimizer, seed);
    const double dev = max_smoothed_deviation_sq(trace);
    worst = std::max(worst, dev);
    if (dev > mubar) ++exceed;
  }
  const double runs = static_cast<double>(cfg.runs);
  const double freq = static_cast<double>(exceed) / runs;
  const double allowed = cfg.delta + 3.0 * std::sqrt(cfg.delta * (1.0 - cfg.delta) / runs);
  LemmaCheckResult res{"subgaussian_exceedance"};
  res.record(freq, allowed * rhs_scale, {{"delta", cfg.delta}, {"runs", runs}});
  res.diagnostics = {{"mubar", mubar}, {"exceedance_frequency", freq}, {"max_deviation_sq", worst}};
  return res;
}

// ---------------------------------------------------------------------------
// Registered suite
// ---------------------------------------------------------------------------

enum class LemmaPreset { Quick, Full };

struct LemmaSuiteReport {
  LemmaPreset preset{};
  std::vector<LemmaCheckResult> results;

  bool all_pass() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass(); });
  }
};

namespace detail {

inline std::vector<double> a_grid(LemmaPreset preset) {
  std::vector<double> grid{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
  if (preset == LemmaPreset::Full) {
    for (int k = 1; k < 200; ++k) grid.push_back(k / 200.0);
    for (double a : {1e-6, 1e-3, 0.999, 0.9999}) grid.push_back(a);
  }
  return grid;
}

inline std::vector<std::uint64_t> q_grid(LemmaPreset preset) {
  if (preset == LemmaPreset::Quick) return {1, 2, 3, 4, 5, 10, 50, 100, 1000, 5000};
  return {1, 2, 3, 4, 5, 7, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000, 50000, 200000};
}

}  // namespace detail

/// Identifiers reported by run_lemma_suite, in report order.
inline const std::vector<std::string>& lemma_ids() {
  static const std::vector<std::string> ids = {
      "geom_sqrt_sum", "geom_32_sum",     "sum_ratio",                 "sum_ratio_momentum",    "quadratic",
      "inv_sqrt_geom", "objective_drift", "smoothed_gradient_moments", "subgaussian_exceedance"};
  return ids;
}

/// Runs every registered lemma check. `corrupt_id`, when set, scales that lemma's
/// right-hand side by 1e-3 (harness self-test). Checks run on up to `jobs` threads;
/// results are ordered by registration regardless of scheduling.
inline LemmaSuiteReport run_lemma_suite(LemmaPreset preset, unsigned jobs = 1,
                                        const std::optional<std::string>& corrupt_id = std::nullopt) {
  const bool full = preset == LemmaPreset::Full;
  auto scale = [&](const char* id) { return corrupt_id && *corrupt_id == id ? 1e-3 : 1.0; };
  const auto a = detail::a_grid(preset);
  const auto q = detail::q_grid(preset);

  using Task = std::function<std::vector<LemmaCheckResult>()>;
  std::vector<Task> tasks;
  tasks.push_back([=] { return std::vector{check_geom_sqrt_sum(a, q, scale("geom_sqrt_sum"))}; });
  tasks.push_back([=] { return std::vector{check_geom_32_sum(a, q, scale("geom_32_sum"))}; });
  tasks.push_back([=] {
    auto [plain, mom] = check_sum_ratio_random(full ? 10000 : 1000, full ? 500 : 100, 7,
                                               corrupt_id && corrupt_id->rfind("sum_ratio", 0) == 0 ? 1e-3 : 1.0);
    // Degenerate points: a single eps-sized entry with beta2 = 1, and an all-zero sequence.
    detail::merge_into(plain, check_sum_ratio(0.0, 1.0, {1e-3}, 1e-3, scale("sum_ratio")));
    detail::merge_into(plain, check_sum_ratio(0.0, 0.999, std::vector<double>(10, 0.0), 1e-8, scale("sum_ratio")));
    return std::vector{plain, mom};
  });
  tasks.push_back([=] {
    auto res = check_quadratic_random(full ? 100000 : 10000, 11, scale("quadratic"));
    detail::merge_into(res, check_quadratic(0.0, 2.0, 1.0, {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}, scale("quadratic")));
    return std::vector{res};
  });
  tasks.push_back([=] { return std::vector{check_inv_sqrt_geom(a, q, scale("inv_sqrt_geom"))}; });
  tasks.push_back([=] {
    StreamSpec spec;
    spec.dim = 5;
    spec.drift_rate = 0.05;
    spec.noise = NoiseModel::gaussian(0.5, spec.dim);
    InnerAdaptConfig inner{0.1, 32, 32};
    LemmaCheckResult res{"objective_drift"};
    const std::uint64_t runs = full ? 20 : 3;
    const std::uint64_t T = full ? 500 : 100;
    for (std::uint64_t s = 1; s <= runs; ++s) {
      for (auto [w, alpha] : {std::pair<std::uint64_t, double>{32, 0.99}, {1, 1.0}, {8, 1.0}}) {
        const OptimizerConfig opt = make_config_adagrad(0.1, kDefaultEpsilon, alpha, w);
        const RunTrace trace = run_stream(TaskStream(spec, s), T, inner, opt, s);
        detail::merge_into(res, check_objective_drift(trace, w, alpha, spec.amplitude, scale("objective_drift")));
      }
    }
    return std::vector{res};
  });
  tasks.push_back([=] {
    std::vector<LemmaCheckResult> out;
    for (auto [alpha, w] : {std::pair<double, std::uint64_t>{1.0, 4}, {0.9, 8}, {0.5, 2}}) {
      SmoothedGradientMcConfig mc;
      mc.stream.dim = 5;
      mc.alpha = alpha;
      mc.w = w;
      mc.sigma = 1.0;
      mc.repetitions = full ? 100000 : 10000;
      out.push_back(mc_smoothed_gradient_lemmas(mc, scale("smoothed_gradient_moments")));
    }
    LemmaCheckResult merged{"smoothed_gradient_moments"};
    for (const auto& r : out) {
      detail::merge_into(merged, r);
      merged.diagnostics.insert(merged.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
    }
    return std::vector{merged};
  });
  tasks.push_back([=] {
    ExceedanceConfig ex;
    ex.stream.dim = 5;
    ex.stream.noise = NoiseModel::sub_gaussian(0.5, ex.stream.dim);
    ex.optimizer = make_config_adagrad(0.1, kDefaultEpsilon, 0.9, 4);
    ex.runs = full ? 500 : 100;
    return std::vector{check_subgaussian_exceedance(ex, scale("subgaussian_exceedance"))};
  });

  std::vector<std::vector<LemmaCheckResult>> outcomes(tasks.size());
  jobs = std::max(1u, jobs);
  for (std::size_t start = 0; start < tasks.size(); start += jobs) {
    std::vector<std::future<std::vector<LemmaCheckResult>>> batch;
    const std::size_t stop = std::min(tasks.size(), start + jobs);
    for (std::size_t k = start; k < stop; ++k) {
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, tasks[k]));
    }
    for (std::size_t k = start; k < stop; ++k) outcomes[k] = batch[k - start].get();
  }

  LemmaSuiteReport report{preset, {}};
  for (auto& group : outcomes) {
    for (auto& r : group) report.results.push_back(std::move(r));
  }
  return report;
}

}  // namespace dynreg
