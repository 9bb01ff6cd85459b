// Command-line front end: run, bounds, verify-lemmas.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dynreg/dynreg.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string seeds;
  std::string seed_list;
  unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_seeds) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  cmd->add_option("--set", o.overrides, "Override a config key, KEY=VALUE with dotted keys (repeatable)");
  cmd->add_option("--out", o.out_dir, "Output directory (DYNREG_OUT takes precedence)");
  if (with_seeds) {
    auto* n = cmd->add_option("--seeds", o.seeds, "Run seeds 1..N");
    auto* l = cmd->add_option("--seed-list", o.seed_list, "Comma-separated seeds");
    n->excludes(l);
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  }
}

dynreg::ExperimentConfig resolve(const CommonOptions& o) {
  std::vector<std::string> overrides = o.overrides;
  if (!o.seeds.empty()) overrides.push_back("seeds=" + o.seeds);
  if (!o.seed_list.empty()) overrides.push_back("seeds=[" + o.seed_list + "]");
  return dynreg::load_config(o.config_path.empty() ? std::nullopt : std::optional<std::string>(o.config_path),
                             overrides);
}

std::string output_dir(const CommonOptions& o, const dynreg::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("DYNREG_OUT"); env && *env) return env;
  if (!o.out_dir.empty()) return o.out_dir;
  return cfg.output_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic local regret experiments for online meta-learning with DTS-AG"};
  app.require_subcommand(1);

  CommonOptions run_opts, bound_opts;
  auto* run = app.add_subcommand("run", "Run the meta-learner and record DLR/SLR per seed");
  add_common(run, run_opts, true);

  auto* bounds = app.add_subcommand("bounds", "Evaluate the regret bound calculators");
  add_common(bounds, bound_opts, false);

  std::string preset = "quick";
  std::string corrupt;
  std::string lemma_out;
  unsigned lemma_jobs = 1;
  auto* verify = app.add_subcommand("verify-lemmas", "Check the technical lemmas numerically");
  verify->add_option("--preset", preset, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  verify->add_option("--out", lemma_out, "Directory for lemma_report.json");
  verify->add_option("--jobs", lemma_jobs, "Worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--corrupt", corrupt, "Test hook: shrink the named lemma's bound so it must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dynreg::kExitConfigError;
  }

  try {
    if (run->parsed()) {
      const auto cfg = resolve(run_opts);
      return dynreg::cmd_run(cfg, output_dir(run_opts, cfg), run_opts.jobs);
    }
    if (bounds->parsed()) {
      const auto cfg = resolve(bound_opts);
      return dynreg::cmd_bounds(cfg, output_dir(bound_opts, cfg), std::cout);
    }
    std::optional<std::filesystem::path> dir;
    if (const char* env = std::getenv("DYNREG_OUT"); env && *env) {
      dir = env;
    } else if (!lemma_out.empty()) {
      dir = lemma_out;
    }
    return dynreg::cmd_verify_lemmas(preset == "full" ? dynreg::LemmaPreset::Full : dynreg::LemmaPreset::Quick,
                                     lemma_jobs, corrupt.empty() ? std::nullopt : std::optional<std::string>(corrupt),
                                     dir, std::cout);
  } catch (const dynreg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return dynreg::kExitConfigError;
  } catch (const dynreg::Error& e) {
    std::cerr << "error (" << dynreg::to_string(e.kind()) << "): " << e.what() << '\n';
    return dynreg::kExitNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dynreg::kExitNumericError;
  }
}
