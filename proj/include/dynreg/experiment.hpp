#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "dynreg/error.hpp"
#include "dynreg/io.hpp"
#include "dynreg/lemmas.hpp"
#include "dynreg/meta.hpp"
#include "dynreg/optimizer.hpp"
#include "dynreg/regret.hpp"
#include "dynreg/tasks.hpp"

namespace dynreg {

enum ExitCode : int { kExitOk = 0, kExitVerificationFailed = 1, kExitConfigError = 2, kExitNumericError = 3 };

/// Defaults every configuration document is merged onto. The window is left out on
/// purpose: `smoothing.window` and `smoothing.window_fraction` are mutually exclusive,
/// and w = 1 applies when neither is given.
inline json default_config_document() {
  return json::parse(R"({
    "stream": {
      "family": "drifting_sine",
      "dim": 10,
      "amplitude": 1.0,
      "frequency": 1.0,
      "drift_rate": 0.01,
      "segment_length": 100,
      "jump": 1.5707963267948966,
      "phase": 0.0,
      "noise": {"kind": "gaussian", "sigma": 0.1, "kappa": null}
    },
    "optimizer": {"preset": "adagrad", "eta": 0.1, "epsilon": 1e-8},
    "smoothing": {"alpha": 1.0},
    "meta": {"theta": 0.1, "train_batch": 32, "test_batch": 32},
    "horizon": 1000,
    "seeds": 1,
    "delta": 0.1,
    "output_dir": "out",
    "bounds": {"varsigma": null, "kappa": null}
  })");
}

/// Sets the dotted path `key` to `value`. The value is parsed as JSON when possible and
/// kept as a string otherwise; `null` removes the key.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream path(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(path, part, '.')) {
    if (part.empty()) throw ConfigError("--set: malformed key '" + key + "'");
    parts.push_back(part);
  }
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
    if (!node->is_object()) throw ConfigError("--set: '" + parts[k] + "' in '" + key + "' is not an object");
    node = &(*node)[parts[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError("--set: parent of '" + key + "' is not an object");
  if (value.is_null()) {
    node->erase(parts.back());
  } else {
    (*node)[parts.back()] = value;
  }
}

struct ExperimentConfig {
  StreamSpec stream{};
  std::string preset = "adagrad";
  double eta = 0.1;
  double beta1 = 0.0;
  double beta2 = 1.0;
  double epsilon = kDefaultEpsilon;
  double alpha = 1.0;
  std::optional<std::uint64_t> window;
  std::optional<double> window_fraction;
  InnerAdaptConfig meta{};
  std::vector<std::uint64_t> horizons{1000};
  std::vector<std::uint64_t> seeds{1};
  double delta = 0.1;
  std::string output_dir = "out";
  std::vector<BoundKind> theorems;
  std::optional<double> varsigma;
  std::optional<double> bound_kappa;
  json resolved;  // the merged document the fields above were read from

  bool adam() const noexcept { return preset == "adam"; }

  /// w for horizon T: explicit, ceil(fraction T), or 1.
  std::uint64_t window_for(std::uint64_t T) const {
    if (window) return *window;
    if (window_fraction) {
      const double w = std::ceil(*window_fraction * static_cast<double>(T));
      return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(w));
    }
    return 1;
  }

  OptimizerConfig optimizer_for(std::uint64_t T) const {
    const std::uint64_t w = window_for(T);
    return adam() ? make_config_adam(eta, beta1, beta2, epsilon, alpha, w)
                  : make_config_adagrad(eta, epsilon, alpha, w);
  }

  /// Noise seen by the outer learner: the stream noise averaged over the test batch.
  NoiseModel oracle_noise() const { return stream.noise.averaged_over(meta.test_batch); }

  BoundInputs bound_inputs(std::uint64_t T) const {
    const NoiseModel oracle = oracle_noise();
    BoundInputs in;
    in.T = T;
    in.d = stream.dim;
    in.delta = delta;
    in.eta = eta;
    in.beta1 = beta1;
    in.beta2 = beta2;
    in.epsilon = epsilon;
    in.alpha = alpha;
    in.w = window_for(T);
    in.sigma = oracle.sigma;
    in.kappa = bound_kappa ? *bound_kappa : oracle.kappa;
    in.theta = meta.theta;
    in.varsigma = varsigma;
    in.constants = TaskStream(stream, 1).constants();
    return in;
  }
};

namespace detail {

/// Collects every constraint failure so the whole document is reported at once.
class ConfigChecker {
 public:
  explicit ConfigChecker(const json& doc) : doc_(doc) {}

  const json* find(const std::string& path) const {
    const json* node = &doc_;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
    }
    return node->is_null() ? nullptr : node;
  }

  void fail(const std::string& field, const std::string& message) { errors_.push_back(field + ": " + message); }

  void require(bool ok, const std::string& field, const std::string& inequality) {
    if (!ok) fail(field, "requires " + inequality);
  }

  std::optional<double> number(const std::string& field) {
    const json* n = find(field);
    if (!n) return std::nullopt;
    if (!n->is_number()) {
      fail(field, "must be a number");
      return std::nullopt;
    }
    const double x = n->get<double>();
    if (!std::isfinite(x)) {
      fail(field, "must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::uint64_t> integer(const std::string& field) {
    const json* n = find(field);
    if (!n) return std::nullopt;
    return as_integer(*n, field);
  }

  std::optional<std::uint64_t> as_integer(const json& n, const std::string& field) {
    if (n.is_number_unsigned()) return n.get<std::uint64_t>();
    if (n.is_number_integer()) {
      const std::int64_t k = n.get<std::int64_t>();
      if (k >= 0) return static_cast<std::uint64_t>(k);
      fail(field, "must be a non-negative integer");
      return std::nullopt;
    }
    if (n.is_number_float()) {
      const double x = n.get<double>();
      if (x >= 0.0 && std::floor(x) == x && x < 1.8e19) return static_cast<std::uint64_t>(x);
    }
    fail(field, "must be a non-negative integer");
    return std::nullopt;
  }

  std::optional<std::string> string(const std::string& field) {
    const json* n = find(field);
    if (!n) return std::nullopt;
    if (!n->is_string()) {
      fail(field, "must be a string");
      return std::nullopt;
    }
    return n->get<std::string>();
  }

  /// Reports keys of the object at `prefix` that are not in `known`.
  void known_keys(const std::string& prefix, std::initializer_list<const char*> known) {
    const json* node = prefix.empty() ? &doc_ : find(prefix);
    if (!node) return;
    if (!node->is_object()) {
      fail(prefix, "must be an object");
      return;
    }
    for (const auto& item : node->items()) {
      const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; });
      if (!ok) fail(prefix.empty() ? item.key() : prefix + "." + item.key(), "unknown field");
    }
  }

  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  const json& doc_;
  std::vector<std::string> errors_;
};

}  // namespace detail

/// Parses and validates a configuration document merged onto the defaults. Every
/// violated constraint is collected; a single ConfigError lists all of them.
inline ExperimentConfig parse_config(const json& user_doc) {
  if (!user_doc.is_object()) throw ConfigError("configuration must be a JSON object");
  json doc = default_config_document();
  doc.merge_patch(user_doc);
  // merge_patch treats null as removal; restore the optional keys as explicit nulls.
  if (!doc["stream"]["noise"].contains("kappa")) doc["stream"]["noise"]["kappa"] = nullptr;

  detail::ConfigChecker ck(doc);
  ExperimentConfig cfg;
  cfg.resolved = doc;

  ck.known_keys("", {"stream", "optimizer", "smoothing", "meta", "horizon", "seeds", "delta", "output_dir", "bounds"});
  ck.known_keys("stream", {"family", "dim", "amplitude", "frequency", "drift_rate", "segment_length", "jump", "phase",
                           "noise"});
  ck.known_keys("stream.noise", {"kind", "sigma", "kappa"});
  ck.known_keys("optimizer", {"preset", "eta", "beta1", "beta2", "epsilon"});
  ck.known_keys("smoothing", {"alpha", "window", "window_fraction"});
  ck.known_keys("meta", {"theta", "train_batch", "test_batch"});
  ck.known_keys("bounds", {"theorems", "varsigma", "kappa"});

  // stream
  StreamSpec& s = cfg.stream;
  if (auto f = ck.string("stream.family")) {
    if (*f == "drifting_sine") {
      s.family = StreamFamily::DriftingSine;
    } else if (*f == "piecewise") {
      s.family = StreamFamily::PiecewiseDrift;
    } else {
      ck.fail("stream.family", "must be one of drifting_sine, piecewise");
    }
  }
  if (auto d = ck.integer("stream.dim")) {
    ck.require(*d >= 1, "stream.dim", "d >= 1");
    s.dim = std::max<std::uint64_t>(1, *d);
  }
  if (auto x = ck.number("stream.amplitude")) {
    ck.require(*x > 0.0, "stream.amplitude", "D > 0");
    s.amplitude = *x;
  }
  if (auto x = ck.number("stream.frequency")) {
    ck.require(*x > 0.0, "stream.frequency", "frequency > 0");
    s.frequency = *x;
  }
  if (auto x = ck.number("stream.drift_rate")) {
    ck.require(*x >= 0.0, "stream.drift_rate", "drift_rate >= 0");
    s.drift_rate = *x;
  }
  if (auto n = ck.integer("stream.segment_length")) {
    ck.require(*n >= 1, "stream.segment_length", "segment_length >= 1");
    s.segment_length = *n;
  }
  if (auto x = ck.number("stream.jump")) {
    ck.require(*x >= 0.0, "stream.jump", "jump >= 0");
    s.jump = *x;
  }
  if (auto x = ck.number("stream.phase")) s.phase = *x;

  const auto noise_kind = ck.string("stream.noise.kind").value_or("gaussian");
  const auto sigma = ck.number("stream.noise.sigma").value_or(0.0);
  const auto kappa = ck.number("stream.noise.kappa");
  ck.require(sigma >= 0.0, "stream.noise.sigma", "sigma >= 0");
  if (kappa) ck.require(*kappa > 0.0, "stream.noise.kappa", "kappa > 0");
  try {
    if (noise_kind == "exact") {
      if (sigma != 0.0) ck.fail("stream.noise.sigma", "requires sigma = 0 for exact noise");
      s.noise = NoiseModel::exact();
    } else if (noise_kind == "gaussian") {
      if (kappa) ck.fail("stream.noise.kappa", "only allowed with kind = subgaussian");
      s.noise = NoiseModel::gaussian(std::max(0.0, sigma), s.dim);
    } else if (noise_kind == "subgaussian") {
      s.noise = NoiseModel::sub_gaussian(std::max(0.0, sigma), s.dim, kappa.value_or(0.0));
    } else {
      ck.fail("stream.noise.kind", "must be one of exact, gaussian, subgaussian");
    }
  } catch (const ConfigError& e) {
    ck.fail("stream.noise", e.what());
  }

  // optimizer
  const auto preset = ck.string("optimizer.preset").value_or("adagrad");
  if (preset != "adagrad" && preset != "adam") ck.fail("optimizer.preset", "must be one of adagrad, adam");
  cfg.preset = preset;
  if (auto x = ck.number("optimizer.eta")) {
    ck.require(*x > 0.0, "optimizer.eta", "eta > 0");
    cfg.eta = *x;
  }
  if (auto x = ck.number("optimizer.epsilon")) {
    ck.require(*x > 0.0, "optimizer.epsilon", "epsilon > 0");
    cfg.epsilon = *x;
  }
  const auto b1 = ck.number("optimizer.beta1");
  const auto b2 = ck.number("optimizer.beta2");
  if (preset == "adam") {
    cfg.beta1 = b1.value_or(0.9);
    cfg.beta2 = b2.value_or(0.999);
    ck.require(cfg.beta1 > 0.0, "optimizer.beta1", "0 < beta1");
    ck.require(cfg.beta1 < cfg.beta2, "optimizer.beta1", "beta1 < beta2");
    ck.require(cfg.beta2 < 1.0, "optimizer.beta2", "beta2 < 1");
  } else {
    if (b1 && *b1 != 0.0) ck.fail("optimizer.beta1", "requires beta1 = 0 for the adagrad preset");
    if (b2 && *b2 != 1.0) ck.fail("optimizer.beta2", "requires beta2 = 1 for the adagrad preset");
    cfg.beta1 = 0.0;
    cfg.beta2 = 1.0;
  }
  cfg.resolved["optimizer"]["beta1"] = cfg.beta1;
  cfg.resolved["optimizer"]["beta2"] = cfg.beta2;

  // smoothing
  if (auto x = ck.number("smoothing.alpha")) {
    ck.require(*x > 0.0 && *x <= 1.0, "smoothing.alpha", "0 < alpha <= 1");
    cfg.alpha = *x;
  }
  cfg.window = ck.integer("smoothing.window");
  cfg.window_fraction = ck.number("smoothing.window_fraction");
  if (cfg.window && cfg.window_fraction) {
    ck.fail("smoothing.window", "mutually exclusive with smoothing.window_fraction");
  }
  if (cfg.window) ck.require(*cfg.window >= 1, "smoothing.window", "w >= 1");
  if (cfg.window_fraction) {
    ck.require(*cfg.window_fraction > 0.0 && *cfg.window_fraction <= 1.0, "smoothing.window_fraction",
               "0 < fraction <= 1");
  }

  // meta
  if (auto x = ck.number("meta.theta")) {
    ck.require(*x >= 0.0, "meta.theta", "theta >= 0");
    cfg.meta.theta = *x;
  }
  if (auto n = ck.integer("meta.train_batch")) {
    ck.require(*n >= 1, "meta.train_batch", "train_batch >= 1");
    cfg.meta.train_batch = std::max<std::uint64_t>(1, *n);
  }
  if (auto n = ck.integer("meta.test_batch")) {
    ck.require(*n >= 1, "meta.test_batch", "test_batch >= 1");
    cfg.meta.test_batch = std::max<std::uint64_t>(1, *n);
  }

  // horizon and seeds
  if (const json* h = ck.find("horizon")) {
    cfg.horizons.clear();
    const json list = h->is_array() ? *h : json::array({*h});
    if (list.empty()) ck.fail("horizon", "requires at least one horizon");
    for (const auto& item : list) {
      if (auto T = ck.as_integer(item, "horizon")) {
        ck.require(*T >= 1, "horizon", "T >= 1");
        cfg.horizons.push_back(*T);
      }
    }
  }
  if (const json* sd = ck.find("seeds")) {
    cfg.seeds.clear();
    if (sd->is_array()) {
      if (sd->empty()) ck.fail("seeds", "requires at least one seed");
      for (const auto& item : *sd) {
        if (auto v = ck.as_integer(item, "seeds")) cfg.seeds.push_back(*v);
      }
    } else if (auto n = ck.as_integer(*sd, "seeds")) {
      ck.require(*n >= 1, "seeds", "N >= 1");
      for (std::uint64_t k = 1; k <= *n; ++k) cfg.seeds.push_back(k);
    }
  }
  if (auto x = ck.number("delta")) {
    ck.require(*x > 0.0 && *x < 1.0, "delta", "0 < delta < 1");
    cfg.delta = *x;
  }
  if (auto o = ck.string("output_dir")) cfg.output_dir = *o;

  // bounds
  if (const json* th = ck.find("bounds.theorems")) {
    if (!th->is_array()) {
      ck.fail("bounds.theorems", "must be an array of theorem names");
    } else {
      for (const auto& item : *th) {
        const auto kind = item.is_string() ? bound_kind_from_string(item.get<std::string>()) : std::nullopt;
        if (!kind) {
          ck.fail("bounds.theorems",
                  "entries must be one of adagrad_expectation, adam_expectation, adagrad_highprob, adam_highprob");
        } else {
          cfg.theorems.push_back(*kind);
        }
      }
    }
  } else if (preset == "adam") {
    cfg.theorems = {BoundKind::AdamExpectation, BoundKind::AdamHighProb};
  } else {
    cfg.theorems = {BoundKind::AdagradExpectation, BoundKind::AdagradHighProb};
  }
  cfg.varsigma = ck.number("bounds.varsigma");
  if (cfg.varsigma) ck.require(*cfg.varsigma > 0.0, "bounds.varsigma", "varsigma > 0");
  cfg.bound_kappa = ck.number("bounds.kappa");
  if (cfg.bound_kappa) ck.require(*cfg.bound_kappa > 0.0, "bounds.kappa", "kappa > 0");

  if (!ck.errors().empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : ck.errors()) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

/// Reads a JSON file, merges it onto the defaults, applies --set overrides, validates.
inline ExperimentConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("--config: cannot open '" + *path + "'");
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("--config: '" + *path + "' is not valid JSON");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

struct SeedRun {
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::uint64_t w = 1;
  RunTrace trace;
  RegretLedger dlr;
  RegretLedger slr;
  double wall_time_s = 0.0;
  std::optional<std::string> error;  // set when the run aborted; trace holds the completed rounds
  std::uint64_t failed_round = 0;
};

/// One seeded run at horizon T with its DLR/SLR ledgers. The task stream shares the run seed.
inline SeedRun run_single(const ExperimentConfig& cfg, std::uint64_t T, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SeedRun out;
  out.seed = seed;
  out.horizon = T;
  out.w = cfg.window_for(T);
  const OptimizerConfig opt = cfg.optimizer_for(T);
  try {
    out.trace = run_stream(TaskStream(cfg.stream, seed), T, cfg.meta, opt, seed);
  } catch (const RunAborted& e) {
    out.trace = e.partial_trace();
    out.error = e.what();
    out.failed_round = e.round();
  }
  out.dlr = dlr_cumulative(out.trace, out.w, cfg.alpha);
  out.slr = slr_cumulative(out.trace, out.w);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

/// Runs f(0..n-1) on up to `jobs` threads. Work is claimed dynamically; callers store
/// results by index so output never depends on scheduling.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, n))));
  if (jobs == 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) f(k);
    });
  }
}

inline std::string run_stem(std::uint64_t T, std::uint64_t seed) {
  return "run_T" + std::to_string(T) + "_seed" + std::to_string(seed);
}

inline json run_summary_json(const ExperimentConfig& cfg, const SeedRun& run) {
  json j = {
      {"seed", run.seed},
      {"horizon", run.horizon},
      {"w", run.w},
      {"W", weight_sum_W(cfg.alpha, run.w)},
      {"rounds_completed", run.trace.size()},
      {"final_dlr", json_number(run.dlr.total())},
      {"final_slr", json_number(run.slr.total())},
      {"wall_time_s", run.wall_time_s},
      {"config", cfg.resolved},
  };
  if (run.error) {
    j["error"] = *run.error;
    j["failed_round"] = run.failed_round;
  }
  return j;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInputError("cannot write '" + path.string() + "'");
  out << text;
}

/// `run` subcommand: one CSV and one JSON summary per (horizon, seed), plus summary.json.
inline int cmd_run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, unsigned jobs,
                   std::ostream& log = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  struct Job {
    std::uint64_t T, seed;
  };
  std::vector<Job> work;
  for (auto T : cfg.horizons) {
    for (auto seed : cfg.seeds) work.push_back({T, seed});
  }
  std::vector<json> summaries(work.size());
  std::vector<double> finals(work.size(), 0.0), slr_finals(work.size(), 0.0);
  std::vector<std::string> failures(work.size());

  parallel_for(work.size(), jobs, [&](std::size_t k) {
    const SeedRun run = run_single(cfg, work[k].T, work[k].seed);
    std::ostringstream csv;
    write_run_csv(csv, run.trace, run.dlr, run.slr);
    const std::string stem = run_stem(run.horizon, run.seed);
    write_text(out_dir / (stem + ".csv"), csv.str());
    summaries[k] = run_summary_json(cfg, run);
    write_text(out_dir / (stem + ".json"), summaries[k].dump(2) + "\n");
    finals[k] = run.dlr.total();
    slr_finals[k] = run.slr.total();
    if (run.error) failures[k] = "T=" + std::to_string(run.horizon) + " seed=" + std::to_string(run.seed) + ": " + *run.error;
  });

  json per_horizon = json::array();
  std::vector<double> horizons, mean_dlr;
  for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
    CompensatedSum dlr, slr;
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      dlr += finals[h * cfg.seeds.size() + s];
      slr += slr_finals[h * cfg.seeds.size() + s];
    }
    const double n = static_cast<double>(cfg.seeds.size());
    const double T = static_cast<double>(cfg.horizons[h]);
    per_horizon.push_back({{"horizon", cfg.horizons[h]},
                           {"w", cfg.window_for(cfg.horizons[h])},
                           {"mean_dlr", json_number(dlr.value() / n)},
                           {"mean_slr", json_number(slr.value() / n)},
                           {"mean_dlr_over_log_T", json_number(dlr.value() / n / std::log(T))}});
    horizons.push_back(T);
    mean_dlr.push_back(dlr.value() / n);
  }
  json summary = {{"config", cfg.resolved}, {"seeds", cfg.seeds}, {"horizons", per_horizon}, {"runs", summaries}};
  if (horizons.size() >= 3 && std::all_of(mean_dlr.begin(), mean_dlr.end(), [](double x) { return std::isfinite(x); }) &&
      std::all_of(horizons.begin(), horizons.end(), [](double T) { return T > 1.0; })) {
    const LogFit fit = logarithmic_fit(horizons, mean_dlr);
    summary["log_fit"] = {{"slope", fit.slope},
                          {"intercept", fit.intercept},
                          {"tail_ratio_change", fit.tail_ratio_change},
                          {"ratios_strictly_increasing", fit.ratios_strictly_increasing},
                          {"logarithmic", fit.logarithmic}};
  }
  summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");

  bool failed = false;
  for (const auto& f : failures) {
    if (!f.empty()) {
      log << "error: " << f << '\n';
      failed = true;
    }
  }
  return failed ? kExitNumericError : kExitOk;
}

/// `bounds` subcommand: one BoundReport per (theorem, horizon).
inline int cmd_bounds(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& out,
                      std::ostream& log = std::cerr) {
  std::vector<BoundReport> reports;
  for (auto kind : cfg.theorems) {
    const bool highprob = kind == BoundKind::AdagradHighProb || kind == BoundKind::AdamHighProb;
    const bool adam_kind = kind == BoundKind::AdamExpectation || kind == BoundKind::AdamHighProb;
    if (adam_kind != cfg.adam()) {
      throw ConfigError(std::string("bounds.theorems: ") + to_string(kind) + " requires optimizer.preset = " +
                        (adam_kind ? "adam" : "adagrad"));
    }
    for (auto T : cfg.horizons) {
      const BoundInputs in = cfg.bound_inputs(T);
      if (highprob && !(in.kappa > 0.0)) {
        throw ConfigError(std::string("bounds.kappa: ") + to_string(kind) +
                          " requires kappa > 0 (set bounds.kappa or use noisy stream noise)");
      }
      reports.push_back(compute_bound(kind, in));
    }
  }
  std::filesystem::create_directories(out_dir);
  json all = json::array();
  for (const auto& rep : reports) {
    json j = to_json(rep);
    j["config"] = cfg.resolved;
    write_text(out_dir / ("bound_" + std::string(to_string(rep.kind)) + "_T" + std::to_string(rep.inputs.T) + ".json"),
               j.dump(2) + "\n");
    if (rep.overflow) {
      log << "warning: " << to_string(rep.kind) << " at T=" << rep.inputs.T
          << ": beta1^-T overflows; rhs reported as infinite\n";
    }
    all.push_back(std::move(j));
  }
  out << all.dump(2) << '\n';
  return kExitOk;
}

/// `verify-lemmas` subcommand. Exit 1 when any lemma reports a violation.
inline int cmd_verify_lemmas(LemmaPreset preset, unsigned jobs, const std::optional<std::string>& corrupt_id,
                             const std::optional<std::filesystem::path>& out_dir, std::ostream& out) {
  if (corrupt_id) {
    const auto& ids = lemma_ids();
    if (std::find(ids.begin(), ids.end(), *corrupt_id) == ids.end()) {
      throw ConfigError("--corrupt: unknown lemma id '" + *corrupt_id + "'");
    }
  }
  const LemmaSuiteReport report = run_lemma_suite(preset, jobs, corrupt_id);
  write_lemma_report(out, report);
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    json records = json::array();
    for (const auto& r : report.results) records.push_back(to_json(r));
    json doc = {{"preset", preset == LemmaPreset::Quick ? "quick" : "full"}, {"all_pass", report.all_pass()},
                {"lemmas", records}};
    write_text(*out_dir / "lemma_report.json", doc.dump(2) + "\n");
  }
  return report.all_pass() ? kExitOk : kExitVerificationFailed;
}

}  // namespace dynreg
