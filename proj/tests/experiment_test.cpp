#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "asl/experiment.hpp"
#include "asl/reference.hpp"
#include "asl/stats.hpp"

namespace {

namespace fs = std::filesystem;

const asl::CubeLab& lab4() {
  static const asl::CubeLab l(4, 2);
  return l;
}

const asl::CubeLab& lab2() {
  static const asl::CubeLab l(2);
  return l;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::path(::testing::TempDir()) / ("asl_" + name);
  fs::remove_all(p);
  return p;
}

asl::ExperimentConfig small_config(const fs::path& out) {
  asl::ExperimentConfig cfg;
  cfg.library_size = 24;
  cfg.rollout.n_tasks = 40;
  cfg.rollout.n_rollouts_per_task = 4;
  cfg.verify_sample = 2;
  cfg.out_dir = out;
  return cfg;
}

// ---------------------------------------------------------------------------

TEST(EnvReport, DefaultGrid) {
  const auto r = asl::env_report(lab4());
  EXPECT_EQ(r.grid_size, 4);
  EXPECT_EQ(r.states, 4352u);
  EXPECT_EQ(r.goals, 32u);
  EXPECT_EQ(r.valid_pairs, 120960u);
  EXPECT_EQ(r.unreachable_pairs, 0u);
  EXPECT_EQ(r.max_distance, 14);
}

TEST(EnvReport, SmallGridAgainstForwardSearch) {
  namespace ref = asl::reference;
  const auto states = ref::naive_reachable(2);
  const auto goals = ref::naive_goals(2);
  std::size_t pairs = 0;
  int max_d = 0;
  for (const auto& s : states) {
    const auto dist = ref::naive_distances(s, 2, goals);
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (ref::naive_valid_pair(s, goals[g]) && dist[g] > 0) {
        ++pairs;
        max_d = std::max(max_d, dist[g]);
      }
  }
  const auto r = asl::env_report(lab2());
  EXPECT_EQ(r.states, states.size());
  EXPECT_EQ(r.states, 80u);
  EXPECT_EQ(r.goals, goals.size());
  EXPECT_EQ(r.valid_pairs, pairs);
  EXPECT_EQ(r.valid_pairs, 288u);
  EXPECT_EQ(r.max_distance, max_d);
}

TEST(EnvReport, WritesJson) {
  const auto dir = scratch("env");
  asl::ExperimentConfig cfg;
  cfg.out_dir = dir;
  const auto path = asl::cmd_env_report(cfg, lab2());
  const auto j = asl::Json::parse(asl::read_text(path));
  EXPECT_EQ(j.at("states").get<int>(), 80);
  EXPECT_EQ(j.at("valid_pairs").get<int>(), 288);
  EXPECT_EQ(j.at("unreachable_pairs").get<int>(), 0);
}

// ---------------------------------------------------------------------------

TEST(Config, Validation) {
  asl::ExperimentConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.grid_size = 1;
  EXPECT_THROW(cfg.validate(), asl::InvalidConfiguration);
  cfg = {};
  cfg.library_size = 0;
  EXPECT_THROW(cfg.validate(), asl::InvalidConfiguration);
  cfg = {};
  cfg.rollout.n_rollouts_per_task = 0;
  EXPECT_THROW(cfg.validate(), asl::InvalidArgument);
}

TEST(Config, CanonicalTextTracksOutputSettings) {
  asl::ExperimentConfig a, b;
  EXPECT_EQ(a.canonical(), b.canonical());
  b.threads = 7;
  b.out_dir = "elsewhere";
  EXPECT_EQ(a.canonical(), b.canonical());
  b.seed = 3;
  EXPECT_NE(a.canonical(), b.canonical());
  EXPECT_NE(asl::config_digest(a.canonical()), asl::config_digest(b.canonical()));
  EXPECT_EQ(a.rollout_config().seed, 0u);
  EXPECT_EQ(b.rollout_config().seed, 3u);
}

// ---------------------------------------------------------------------------

TEST(Csv, FormatDoubleRoundTrips) {
  for (double x : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5}) {
    const auto s = asl::format_double(x);
    EXPECT_EQ(std::stod(s), x) << s;
  }
  EXPECT_EQ(asl::format_double(0.5), "0.5");
}

TEST(Csv, EscapeAndSplit) {
  EXPECT_EQ(asl::csv_escape("plain"), "plain");
  EXPECT_EQ(asl::csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(asl::csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  const auto cells = asl::split_csv_line("x,\"a,b\",\"q\"\"q\",,");
  ASSERT_EQ(cells.size(), 5u);
  EXPECT_EQ(cells[1], "a,b");
  EXPECT_EQ(cells[2], "q\"q");
  EXPECT_EQ(cells[3], "");
}

TEST(Csv, HeaderAndSchemaLine) {
  EXPECT_EQ(asl::csv_header().substr(0, 24), "spec_id,template,delta_a");
  EXPECT_EQ(asl::csv_schema_line(0xABCULL), "# asl-metrics v1 log_base=e config=0000000000000abc");
}

TEST(Csv, RowsRoundTrip) {
  asl::MetricsRow full;
  full.spec_id = "odd,\"id\"";
  full.family = "dist_coarse";
  full.delta_a = 0.1;
  full.delta_v = 1.0 / 3.0;
  full.i_az_sv = 0;
  full.i_ag_sv = 0.25;
  full.i_av_sz = 1e-17;
  full.h_a_sg = 0.4;
  full.success_rate = 0.75;
  full.seed = 9;
  full.off_support_steps = 12;
  full.nll = 0.5;
  full.excess = 0.1;
  full.modeling_error = 1e-9;
  full.iterations = 40;
  full.converged = true;
  asl::MetricsRow sparse;
  sparse.spec_id = "s";
  sparse.family = "Baseline";
  sparse.delta_a = 0.2;
  const std::vector rows{full, sparse};

  const auto dir = scratch("csv");
  asl::write_text(dir / "m.csv", asl::format_csv(rows, 42));
  const auto back = asl::read_metrics_csv((dir / "m.csv").string());
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(asl::format_row(back[i]), asl::format_row(rows[i]));
  EXPECT_EQ(back[0].spec_id, full.spec_id);
  EXPECT_FALSE(back[1].success_rate.has_value());
  EXPECT_FALSE(back[1].converged.has_value());

  const auto progress = asl::read_csv_progress((dir / "m.csv").string());
  EXPECT_EQ(progress.config, 42u);
  EXPECT_EQ(progress.spec_ids.size(), 2u);
}

TEST(Csv, ProgressIgnoresPartialLastLine) {
  const auto dir = scratch("partial");
  asl::MetricsRow r;
  r.spec_id = "a";
  r.family = "f";
  asl::write_text(dir / "m.csv", asl::format_csv({r}, 1) + "b,f,0.1,0.");
  const auto p = asl::read_csv_progress((dir / "m.csv").string());
  EXPECT_EQ(p.spec_ids.size(), 1u);
  EXPECT_TRUE(p.spec_ids.contains("a"));
}

TEST(Csv, RejectsForeignFiles) {
  const auto dir = scratch("foreign");
  asl::write_text(dir / "x.csv", "spec_id,delta_a\n");
  EXPECT_THROW(asl::read_csv_progress((dir / "x.csv").string()), asl::IoError);
  EXPECT_THROW(asl::read_metrics_csv((dir / "x.csv").string()), asl::IoError);
  EXPECT_THROW(asl::read_csv_progress((dir / "missing.csv").string()), asl::IoError);
}

// ---------------------------------------------------------------------------

TEST(Stats, RanksWithTies) {
  const std::vector<double> x{3, 1, 2, 2, 5};
  const auto r = asl::average_ranks(x);
  EXPECT_EQ(r, (std::vector<double>{4, 1, 2.5, 2.5, 5}));
}

TEST(Stats, PearsonAndSpearmanExamples) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> sq{1, 4, 9, 16, 25};
  const std::vector<double> rev{5, 4, 3, 2, 1};
  EXPECT_NEAR(asl::spearman(x, sq), 1.0, 1e-15);
  EXPECT_NEAR(asl::spearman(x, rev), -1.0, 1e-15);
  // Hand-computed: cov = 12, var_x = 2, var_sq = 74.8, both over n.
  EXPECT_NEAR(asl::pearson(x, sq), 12.0 / std::sqrt(2.0 * 74.8), 1e-12);
  // Ranks of y = {1, 2.5, 2.5, 4}: Pearson with 1..4 = 4.5 / sqrt(5 * 4.5).
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> b{10, 20, 20, 30};
  EXPECT_NEAR(asl::spearman(a, b), 4.5 / std::sqrt(5.0 * 4.5), 1e-12);
}

TEST(Stats, DegenerateInputs) {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> c{7, 7, 7};
  EXPECT_TRUE(std::isnan(asl::spearman(x, c)));
  EXPECT_THROW(asl::spearman(x, std::vector<double>{1, 2}), asl::InvalidArgument);
  EXPECT_THROW(asl::pearson(std::vector<double>{1}, std::vector<double>{1}), asl::InvalidArgument);
}

TEST(Summary, CorrelationsOverRowsWithSuccess) {
  std::vector<asl::MetricsRow> rows;
  auto add = [&](double succ, double da, double dv, double iaz, bool rolled = true) {
    asl::MetricsRow r;
    r.delta_a = da;
    r.delta_v = dv;
    r.i_az_sv = iaz;
    if (rolled) r.success_rate = succ;
    rows.push_back(r);
  };
  add(0.9, 0.01, 0.05, 0.3);
  add(0.7, 0.05, 0.5, 0.2);
  add(0.5, 0.10, 0.1, 0.1);
  add(0.1, 0.30, 0.9, 0.0);
  add(0.0, 9.00, 9.0, 9.0, false);
  const auto s = asl::summarize_library(rows, 0.2);
  EXPECT_EQ(s.rows, 5u);
  EXPECT_EQ(s.rows_with_success, 4u);
  EXPECT_NEAR(s.spearman_neg_delta_a, 1.0, 1e-12);
  EXPECT_EQ(s.low_delta_v_rows, 2u);
  EXPECT_NEAR(s.spearman_low_delta_v_i_az_sv, 1.0, 1e-12);
  const auto j = asl::summary_json(s, 0.2);
  EXPECT_EQ(j.at("rows_with_success").get<int>(), 4);
}

// ---------------------------------------------------------------------------

TEST(Subset, StratifiedAcrossTemplates) {
  const auto specs = asl::sample_library(400, 0);
  std::map<std::string, std::size_t> have;
  for (const auto& s : specs) ++have[s.family];
  for (std::size_t k : {0u, 1u, 11u, 50u, 399u}) {
    const auto chosen = asl::stratified_subset(specs, k, 0);
    std::map<std::string, std::size_t> got;
    std::size_t total = 0;
    for (std::size_t i = 0; i < specs.size(); ++i)
      if (chosen[i]) ++got[specs[i].family], ++total;
    EXPECT_EQ(total, k);
    // Round-robin: no template falls more than one behind another that
    // still has unchosen specs.
    for (const auto& [fa, ca] : got)
      for (const auto& [fb, nb] : have)
        if (got[fb] < nb) {
          EXPECT_LE(ca, got[fb] + 1) << fa << " vs " << fb;
        }
    EXPECT_EQ(chosen, asl::stratified_subset(specs, k, 0));
  }
  EXPECT_EQ(asl::stratified_subset(specs, 1000, 0), std::vector<bool>(400, true));
  EXPECT_NE(asl::stratified_subset(specs, 50, 0), asl::stratified_subset(specs, 50, 1));
}

// ---------------------------------------------------------------------------

std::map<std::string, std::string> run_all(const fs::path& dir, unsigned threads) {
  auto cfg = small_config(dir);
  cfg.threads = threads;
  cfg.rollout_subset = 10;
  std::vector<fs::path> paths{asl::cmd_env_report(cfg, lab4()), asl::cmd_baselines(cfg, lab4()),
                              asl::cmd_rollout(cfg, lab4()), asl::cmd_actor(cfg, lab4()), asl::cmd_line1d(cfg)};
  const auto lib = asl::cmd_library(cfg, lab4());
  for (const auto& p : {lib.csv, lib.json, lib.summary}) paths.push_back(p);
  std::map<std::string, std::string> out;
  for (const auto& p : paths) out[p.filename().string()] = asl::read_text(p);
  return out;
}

TEST(Commands, ByteIdenticalAcrossRunsAndThreadCounts) {
  const auto a = run_all(scratch("det_a"), 1);
  const auto b = run_all(scratch("det_b"), 3);
  ASSERT_EQ(a.size(), 8u);
  for (const auto& [name, text] : a) {
    EXPECT_FALSE(text.empty()) << name;
    EXPECT_EQ(text, b.at(name)) << name;
  }
}

TEST(Commands, BaselinesCsvShape) {
  const auto dir = scratch("base");
  const auto cfg = small_config(dir);
  const auto rows = asl::read_metrics_csv(asl::cmd_baselines(cfg, lab4()).string());
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.delta_a && r.success_rate && r.nll && r.converged);
    EXPECT_TRUE(*r.converged);
  }
  EXPECT_EQ(rows[0].spec_id, "full");
  EXPECT_EQ(*rows[0].delta_a, 0.0);
}

TEST(Commands, LibraryWritesSpecsAndSummary) {
  const auto dir = scratch("lib");
  auto cfg = small_config(dir);
  cfg.rollout_subset = 6;
  const auto run = asl::cmd_library(cfg, lab4());
  EXPECT_EQ(run.computed, 24u);
  EXPECT_EQ(run.resumed, 0u);
  const auto specs = asl::library_from_json(asl::Json::parse(asl::read_text(run.json)));
  EXPECT_EQ(specs, asl::sample_library(24, 0));
  const auto rows = asl::read_metrics_csv(run.csv.string());
  ASSERT_EQ(rows.size(), 24u);
  std::size_t rolled = 0;
  for (const auto& r : rows) rolled += r.success_rate.has_value();
  EXPECT_EQ(rolled, 6u);
  const auto summary = asl::Json::parse(asl::read_text(run.summary));
  EXPECT_EQ(summary.at("rows_with_success").get<int>(), 6);
  EXPECT_EQ(summary.at("template_weights").size(), asl::kTemplates.size());
  EXPECT_EQ(summary.at("template_weights").at("value_plus").get<double>(), 2.0);
}

TEST(Commands, LibraryResumesAfterInterruption) {
  const auto full_dir = scratch("resume_full");
  const auto cut_dir = scratch("resume_cut");
  const auto full = asl::cmd_library(small_config(full_dir), lab4());
  const auto text = asl::read_text(full.csv);

  // Keep the two header lines and ten rows, then half of the next row.
  std::size_t pos = 0;
  for (int i = 0; i < 12; ++i) pos = text.find('\n', pos) + 1;
  const auto next = text.find('\n', pos);
  asl::write_text(cut_dir / "library.csv", text.substr(0, pos + (next - pos) / 2));

  const auto resumed = asl::cmd_library(small_config(cut_dir), lab4());
  EXPECT_EQ(resumed.resumed, 10u);
  EXPECT_EQ(resumed.computed, 14u);
  EXPECT_EQ(asl::read_text(resumed.csv), text);
  EXPECT_EQ(asl::read_text(resumed.summary), asl::read_text(full.summary));

  const auto again = asl::cmd_library(small_config(cut_dir), lab4());
  EXPECT_EQ(again.computed, 0u);
  EXPECT_EQ(asl::read_text(again.csv), text);
}

TEST(Commands, LibraryRefusesDifferentConfig) {
  const auto dir = scratch("mismatch");
  asl::cmd_library(small_config(dir), lab4());
  auto cfg = small_config(dir);
  cfg.seed = 5;
  EXPECT_THROW(asl::cmd_library(cfg, lab4()), asl::ConfigMismatch);
}

TEST(Commands, LineCsvShape) {
  const auto dir = scratch("line");
  const auto text = asl::read_text(asl::cmd_line1d(small_config(dir)));
  EXPECT_TRUE(text.starts_with("# asl-line1d v1 log_base=e"));
  EXPECT_NE(text.find("\nphi,distance_class,success_rate,delta_a,delta_v,i_az_sv\n"), std::string::npos);
  EXPECT_NE(text.find("\nphi_sign,1,1,0,0,"), std::string::npos);
  EXPECT_NE(text.find("\nphi_dist,1,"), std::string::npos);
  const auto rows = asl::line_rows(asl::line::LineConfig{});
  EXPECT_EQ(rows.size(), 2u * 16u);
}

TEST(Commands, UnwritableOutputDirectory) {
  const auto dir = scratch("blocked");
  asl::write_text(dir / "file", "x");
  asl::ExperimentConfig cfg;
  cfg.out_dir = dir / "file" / "sub";
  EXPECT_THROW(asl::cmd_env_report(cfg, lab2()), asl::IoError);
}

// ---------------------------------------------------------------------------

TEST(Verify, PassesOnCorrectTables) {
  const auto dir = scratch("verify");
  const auto rep = asl::cmd_verify(small_config(dir), lab4());
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.spec << " " << c.value;
  EXPECT_TRUE(rep.passed());
  // Six checks per spec, then Pinsker and three brute-force checks.
  EXPECT_EQ(rep.checks.size(), 6u * 6u + 4u);
  const auto j = asl::Json::parse(asl::read_text(dir / "verify.json"));
  EXPECT_TRUE(j.at("passed").get<bool>());
}

TEST(Verify, FailsWhenAnEntropyIsCorrupted) {
  auto cfg = small_config(scratch("verify_fault"));
  cfg.inject_verify_fault = true;
  const auto rep = asl::run_verify(cfg, lab4());
  EXPECT_FALSE(rep.passed());
  std::size_t failed_chain = 0;
  for (const auto& c : rep.checks)
    if (!c.passed) {
      EXPECT_EQ(c.spec, "full");
      failed_chain += c.name == "chain_rule";
    }
  EXPECT_EQ(failed_chain, 1u);
}

}  // namespace
