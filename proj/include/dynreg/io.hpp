#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"

#include "dynreg/lemmas.hpp"
#include "dynreg/meta.hpp"
#include "dynreg/regret.hpp"

namespace dynreg {

using json = nlohmann::json;

inline constexpr const char* kRunCsvHeader = "t,loss,grad_norm_sq,dlr_cum,slr_cum,eta_t";

/// 17 significant digits, '.' decimal separator, no grouping.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// JSON number, or the string "inf"/"nan" for values JSON cannot represent.
inline json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

/// One row per round; grad_norm_sq is ||grad S_t(x_t)||^2, the per-round DLR term.
inline void write_run_csv(std::ostream& out, const RunTrace& trace, const RegretLedger& dlr,
                          const RegretLedger& slr) {
  out << kRunCsvHeader << '\n';
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const RoundRecord& rec = trace.records[k];
    out << rec.t << ',' << format_double(rec.loss) << ',' << format_double(dlr.per_round[k]) << ','
        << format_double(dlr.cumulative[k]) << ',' << format_double(slr.cumulative[k]) << ','
        << format_double(rec.eta) << '\n';
  }
}

inline json to_json(const LossConstants& c) { return {{"D", c.D}, {"L", c.L}, {"gamma", c.gamma}, {"H", c.H}}; }

/// Flat record: every input and derived constant keyed by its symbol name.
inline json to_json(const BoundReport& rep) {
  const BoundInputs& in = rep.inputs;
  const bool adam = rep.kind == BoundKind::AdamExpectation || rep.kind == BoundKind::AdamHighProb;
  const bool highprob = rep.kind == BoundKind::AdagradHighProb || rep.kind == BoundKind::AdamHighProb;
  json j = {
      {"theorem", to_string(rep.kind)},
      {"T", in.T},
      {"d", in.d},
      {"delta", in.delta},
      {"eta", in.eta},
      {"beta1", in.beta1},
      {"beta2", in.beta2},
      {"epsilon", in.epsilon},
      {"alpha", in.alpha},
      {"w", in.w},
      {"sigma", in.sigma},
      {"kappa", in.kappa},
      {"theta", in.theta},
      {"D", in.constants.D},
      {"L", in.constants.L},
      {"gamma", in.constants.gamma},
      {"H", in.constants.H},
      {"W", rep.W},
      {"L_prime", rep.L_prime},
      {"gamma_prime", rep.gamma_prime},
      {"zeta", json_number(rep.zeta)},
      {"varpi1", json_number(rep.varpi1)},
      {"varpi2", json_number(rep.varpi2)},
      {"C", json_number(rep.C)},
      {"rhs", json_number(rep.rhs)},
      {"overflow", rep.overflow},
  };
  if (highprob) {
    j["mubar"] = json_number(rep.mubar);
  } else {
    j["mu"] = json_number(rep.mu);
  }
  if (adam) j["varsigma"] = rep.varsigma;
  if (rep.kind == BoundKind::AdamHighProb) j["varpi3"] = json_number(rep.varpi3);
  if (rep.overflow) j["warning"] = "beta1^-T exceeds the double range; bound reported as infinite";
  return j;
}

inline json to_json(const LemmaCheckResult& r) {
  json j = {{"id", r.id}, {"grid_size", r.grid_size}, {"pass", r.pass()}, {"max_slack", json_number(r.max_slack)}};
  if (!r.violations.empty()) {
    json v = json::array();
    for (const auto& viol : r.violations) {
      json params = json::object();
      for (const auto& [k, x] : viol.params) params[k] = json_number(x);
      v.push_back({{"params", params}, {"lhs", json_number(viol.lhs)}, {"rhs", json_number(viol.rhs)}});
    }
    j["violations"] = v;
  }
  if (!r.diagnostics.empty()) {
    json d = json::array();
    for (const auto& [k, x] : r.diagnostics) d.push_back({{"name", k}, {"value", json_number(x)}});
    j["diagnostics"] = d;
  }
  return j;
}

/// One line per lemma: "PASS <id> grid=<n> max_slack=<s>", followed by violations.
inline void write_lemma_report(std::ostream& out, const LemmaSuiteReport& report) {
  for (const auto& r : report.results) {
    out << (r.pass() ? "PASS " : "FAIL ") << r.id << " grid=" << r.grid_size
        << " max_slack=" << format_double(r.max_slack) << '\n';
    for (const auto& v : r.violations) {
      out << "  violation " << r.id << ':';
      for (const auto& [k, x] : v.params) out << ' ' << k << '=' << format_double(x);
      out << " lhs=" << format_double(v.lhs) << " rhs=" << format_double(v.rhs) << '\n';
    }
  }
}

}  // namespace dynreg
