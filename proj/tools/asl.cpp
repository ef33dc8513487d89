// Command-line runner for the goal-representation experiments.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 I/O error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "asl/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

void say(const std::filesystem::path& p) { std::cout << "wrote " << p.string() << '\n'; }

int report_verify(const asl::ExperimentConfig& cfg, const asl::CubeLab& lab) {
  const auto rep = asl::cmd_verify(cfg, lab);
  say(cfg.out_dir / "verify.json");
  std::size_t failed = 0;
  for (const auto& c : rep.checks)
    if (!c.passed) {
      ++failed;
      std::cerr << "FAIL " << c.name << " spec=" << c.spec << " quantity=\"" << c.quantity << "\" value=" << c.value
                << " tol=" << c.tolerance << '\n';
    }
  std::cout << rep.checks.size() - failed << "/" << rep.checks.size() << " checks passed\n";
  return failed ? kExitVerifyFailed : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  asl::ExperimentConfig cfg;
  if (const char* env = std::getenv("ASL_OUT_DIR"); env && *env) cfg.out_dir = env;
  cfg.threads = std::max(1u, std::thread::hardware_concurrency());
  std::size_t subset = 0;
  std::string out_dir = cfg.out_dir.string();

  CLI::App app{"Exact information analysis of goal representations on the Discrete Cube grid"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--grid-size", cfg.grid_size, "Grid side length")->capture_default_str();
  app.add_option("--library-size", cfg.library_size, "Number of sampled specs")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Root seed")->capture_default_str();
  app.add_option("--tasks", cfg.rollout.n_tasks, "Rollout tasks")->capture_default_str();
  app.add_option("--rollouts", cfg.rollout.n_rollouts_per_task, "Rollouts per task")->capture_default_str();
  app.add_option("--margin", cfg.rollout.margin, "Horizon margin over D*")->capture_default_str();
  app.add_option("--cap", cfg.rollout.horizon_cap, "Horizon cap")->capture_default_str();
  app.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Output directory (default $ASL_OUT_DIR or ./out)")->capture_default_str();
  app.add_option("--rollout-subset", subset, "Roll out only k specs, stratified by template");
  app.add_flag("--train-actors", cfg.train_actors, "Train a tabular actor for every library spec");
  app.add_flag("--inject-verify-fault", cfg.inject_verify_fault)->group("");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"env-report", "State, goal and pair counts"},
      {"baselines", "Metrics, rollouts and actor training for the four baselines"},
      {"library", "Metrics for the sampled library (resumable)"},
      {"rollout", "Mixed-policy rollouts for baselines and library specs"},
      {"actor", "Actor training for baselines and a 50-spec sample"},
      {"line1d", "Integer-line example"},
      {"verify", "Check every identity and bound; exit 1 on any violation"},
      {"all", "Every command above except rollout"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  cfg.out_dir = out_dir;
  if (app.count("--rollout-subset")) cfg.rollout_subset = subset;
  if (std::getenv("ASL_VERIFY_INJECT_FAULT")) cfg.inject_verify_fault = true;
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    cfg.validate();
    if (cmd == "line1d") {
      say(asl::cmd_line1d(cfg));
      return kExitOk;
    }
    const asl::CubeLab lab(cfg.grid_size, cfg.threads);
    if (cmd == "env-report" || cmd == "all") say(asl::cmd_env_report(cfg, lab));
    if (cmd == "baselines" || cmd == "all") say(asl::cmd_baselines(cfg, lab));
    if (cmd == "library" || cmd == "all") {
      const auto run = asl::cmd_library(cfg, lab);
      say(run.json);
      say(run.csv);
      say(run.summary);
      if (run.resumed) std::cout << "resumed " << run.resumed << " rows, computed " << run.computed << '\n';
    }
    if (cmd == "rollout") say(asl::cmd_rollout(cfg, lab));
    if (cmd == "actor" || cmd == "all") say(asl::cmd_actor(cfg, lab));
    if (cmd == "all") say(asl::cmd_line1d(cfg));
    if (cmd == "verify" || cmd == "all") return report_verify(cfg, lab);
    return kExitOk;
  } catch (const asl::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const asl::ConfigMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const asl::InvalidConfiguration& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const asl::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
}
