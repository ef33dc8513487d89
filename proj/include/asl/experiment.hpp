#pragma once

// Experiment commands. Each one is a pure function of its config: it writes
// files into cfg.out_dir and returns what it wrote, so tests can call them
// in-process.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asl/actor_lab.hpp"
#include "asl/csv.hpp"
#include "asl/errors.hpp"
#include "asl/info_metrics.hpp"
#include "asl/lab.hpp"
#include "asl/line1d.hpp"
#include "asl/mixed_policy.hpp"
#include "asl/parallel.hpp"
#include "asl/reference.hpp"
#include "asl/rep_library.hpp"
#include "asl/spec_json.hpp"
#include "asl/stats.hpp"

namespace asl {

struct ExperimentConfig {
  int grid_size = 4;
  std::size_t library_size = 2000;
  std::uint64_t seed = 0;
  RolloutConfig rollout{};
  unsigned threads = 1;
  std::filesystem::path out_dir = "out";
  std::optional<std::size_t> rollout_subset;  ///< unset: evaluate every spec
  bool train_actors = false;
  double value_sufficiency_threshold = 0.2;
  std::size_t verify_sample = 50;
  /// Test hook: corrupt one entropy inside `verify` so it must fail.
  bool inject_verify_fault = false;

  void validate() const {
    if (grid_size < 2) throw InvalidConfiguration("grid size must be at least 2");
    if (library_size == 0) throw InvalidConfiguration("library size must be positive");
    if (!(value_sufficiency_threshold > 0)) throw InvalidConfiguration("threshold must be positive");
    rollout.validate();
  }

  /// Rollout settings with the experiment seed applied.
  [[nodiscard]] RolloutConfig rollout_config() const {
    RolloutConfig r = rollout;
    r.seed = seed;
    return r;
  }

  /// Canonical text of every setting that affects output bytes.
  [[nodiscard]] std::string canonical() const {
    return "grid=" + std::to_string(grid_size) + ";library=" + std::to_string(library_size) +
           ";seed=" + std::to_string(seed) + ";tasks=" + std::to_string(rollout.n_tasks) +
           ";rollouts=" + std::to_string(rollout.n_rollouts_per_task) + ";margin=" + std::to_string(rollout.margin) +
           ";cap=" + std::to_string(rollout.horizon_cap) +
           ";subset=" + (rollout_subset ? std::to_string(*rollout_subset) : std::string("all")) +
           ";actors=" + (train_actors ? "1" : "0");
  }
};

// ---------------------------------------------------------------------------
// File helpers.

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

/// Writes through a temporary file and renames it into place.
inline void write_text(const std::filesystem::path& path, const std::string& text) {
  ensure_dir(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// Per-spec pipeline.

struct SpecEvaluation {
  InfoReport info;
  std::optional<RolloutOutcome> rollout;
  std::optional<TrainReport> actor;
};

struct SpecJobs {
  bool rollout = false;
  bool actor = false;
};

/// Info quantities always; rollouts and actor training on request. Runs on
/// the calling thread.
inline SpecEvaluation evaluate_spec(const RepresentationSpec& spec, const CubeLab& lab, const TaskSample* tasks,
                                    const RolloutConfig& rcfg, SpecJobs jobs, const TrainOptions& topt = {}) {
  const auto enc = lab.encode(spec);
  const auto z = lab.pair_z(enc);
  SpecEvaluation out;
  out.info = info_report(lab.law(), z, &lab.law_entropies());
  if (jobs.rollout) {
    if (!tasks) throw InvalidArgument("rollout requested without tasks");
    out.rollout = evaluate(build_mixed_policy(lab, enc), lab, *tasks, rcfg, 1);
  }
  if (jobs.actor) out.actor = train_actor(lab.law(), make_actor_problem(lab.law(), z), out.info, topt);
  return out;
}

inline MetricsRow metrics_row(const RepresentationSpec& spec, const SpecEvaluation& ev, std::uint64_t seed) {
  MetricsRow r;
  r.spec_id = spec.id;
  r.family = spec.family;
  r.seed = seed;
  r.delta_a = ev.info.delta_a;
  r.delta_v = ev.info.delta_v;
  r.i_az_sv = ev.info.i_az_sv;
  r.i_ag_sv = ev.info.i_ag_sv;
  r.i_av_sz = ev.info.i_av_sz;
  r.h_a_sg = ev.info.h_a_sg;
  if (ev.rollout) {
    r.success_rate = ev.rollout->success_rate;
    r.off_support_steps = ev.rollout->off_support_steps;
  }
  if (ev.actor) {
    r.nll = ev.actor->nll;
    r.excess = ev.actor->excess;
    r.modeling_error = ev.actor->modeling_error;
    r.iterations = ev.actor->iterations;
    r.converged = ev.actor->converged;
  }
  return r;
}

inline std::vector<RepresentationSpec> baseline_specs() {
  std::vector<RepresentationSpec> out;
  for (auto k : kAllBaselines) out.push_back(baseline(k));
  return out;
}

/// Evaluates `specs` in parallel across specs; results keep input order.
inline std::vector<SpecEvaluation> evaluate_specs(const std::vector<RepresentationSpec>& specs, const CubeLab& lab,
                                                  const TaskSample* tasks, const RolloutConfig& rcfg,
                                                  const std::vector<SpecJobs>& jobs, unsigned threads) {
  std::vector<SpecEvaluation> out(specs.size());
  parallel_for(specs.size(), threads,
               [&](std::size_t i) { out[i] = evaluate_spec(specs[i], lab, tasks, rcfg, jobs[i]); });
  return out;
}

/// Picks k specs spread evenly over templates: each template's specs are
/// shuffled, then templates are visited round-robin in their fixed order.
inline std::vector<bool> stratified_subset(const std::vector<RepresentationSpec>& specs, std::size_t k,
                                           std::uint64_t seed) {
  std::vector<bool> chosen(specs.size(), false);
  if (k >= specs.size()) {
    chosen.assign(specs.size(), true);
    return chosen;
  }
  std::map<std::string, std::vector<std::size_t>> by_family;
  for (std::size_t i = 0; i < specs.size(); ++i) by_family[specs[i].family].push_back(i);
  std::vector<std::vector<std::size_t>> strata;
  for (const auto& t : kTemplates)
    if (auto it = by_family.find(std::string(t.name)); it != by_family.end()) strata.push_back(it->second);
  for (auto& [name, idx] : by_family)
    if (std::none_of(kTemplates.begin(), kTemplates.end(), [&](const auto& t) { return t.name == name; }))
      strata.push_back(idx);
  CounterRng rng(seed, {0x535542ULL /* "SUB" */});
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto local = rng.split(s);
    auto& v = strata[s];
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[local.uniform_below(i)]);
  }
  std::size_t taken = 0;
  for (std::size_t round = 0; taken < k; ++round)
    for (auto& v : strata)
      if (round < v.size() && taken < k) {
        chosen[v[round]] = true;
        ++taken;
      }
  return chosen;
}

// ---------------------------------------------------------------------------
// Commands.

struct EnvReport {
  int grid_size = 0;
  std::size_t states = 0, goals = 0, valid_pairs = 0, unreachable_pairs = 0;
  int max_distance = 0;
};

inline EnvReport env_report(const CubeLab& lab) {
  EnvReport r;
  r.grid_size = lab.env().grid_size();
  r.states = lab.env().state_count();
  r.goals = lab.env().goal_count();
  r.valid_pairs = lab.env().pairs().size();
  r.unreachable_pairs = unreachable_pair_count(lab.oracle(), lab.env());
  for (const auto& p : lab.env().pairs())
    if (lab.oracle().reachable(p.state, p.goal))
      r.max_distance = std::max<int>(r.max_distance, lab.oracle().dist(p.state, p.goal));
  return r;
}

inline std::filesystem::path cmd_env_report(const ExperimentConfig& cfg, const CubeLab& lab) {
  const auto r = env_report(lab);
  Json j;
  j["grid_size"] = r.grid_size;
  j["states"] = r.states;
  j["goals"] = r.goals;
  j["valid_pairs"] = r.valid_pairs;
  j["unreachable_pairs"] = r.unreachable_pairs;
  j["max_distance"] = r.max_distance;
  const auto path = cfg.out_dir / "env_report.json";
  write_json(path, j);
  return path;
}

inline std::vector<MetricsRow> baseline_rows(const ExperimentConfig& cfg, const CubeLab& lab) {
  const auto specs = baseline_specs();
  const auto rcfg = cfg.rollout_config();
  const auto tasks = sample_tasks(rcfg, lab.env(), lab.oracle());
  const std::vector<SpecJobs> jobs(specs.size(), SpecJobs{true, true});
  const auto evs = evaluate_specs(specs, lab, &tasks, rcfg, jobs, cfg.threads);
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) rows.push_back(metrics_row(specs[i], evs[i], cfg.seed));
  return rows;
}

inline std::filesystem::path cmd_baselines(const ExperimentConfig& cfg, const CubeLab& lab) {
  const auto path = cfg.out_dir / "baselines.csv";
  write_text(path, format_csv(baseline_rows(cfg, lab), config_digest("baselines;" + cfg.canonical())));
  return path;
}

struct LibrarySummary {
  std::size_t rows = 0;
  std::size_t rows_with_success = 0;
  double spearman_neg_delta_a = 0;
  double spearman_neg_delta_v = 0;
  std::size_t low_delta_v_rows = 0;
  double spearman_low_delta_v_i_az_sv = 0;
};

/// Correlations between success and the sufficiency gaps over rows that
/// carry a success rate.
inline LibrarySummary summarize_library(const std::vector<MetricsRow>& rows, double threshold) {
  LibrarySummary s;
  s.rows = rows.size();
  std::vector<double> succ, da, dv, lo_succ, lo_iaz;
  for (const auto& r : rows) {
    if (!r.success_rate) continue;
    succ.push_back(*r.success_rate);
    da.push_back(-*r.delta_a);
    dv.push_back(-*r.delta_v);
    if (*r.delta_v < threshold) {
      lo_succ.push_back(*r.success_rate);
      lo_iaz.push_back(*r.i_az_sv);
    }
  }
  s.rows_with_success = succ.size();
  s.low_delta_v_rows = lo_succ.size();
  if (succ.size() >= 2) {
    s.spearman_neg_delta_a = spearman(succ, da);
    s.spearman_neg_delta_v = spearman(succ, dv);
  }
  if (lo_succ.size() >= 2) s.spearman_low_delta_v_i_az_sv = spearman(lo_succ, lo_iaz);
  return s;
}

inline Json summary_json(const LibrarySummary& s, double threshold) {
  auto num = [](double x) { return std::isnan(x) ? Json(nullptr) : Json(x); };
  Json j;
  j["rows"] = s.rows;
  j["rows_with_success"] = s.rows_with_success;
  j["spearman_success_neg_delta_a"] = num(s.spearman_neg_delta_a);
  j["spearman_success_neg_delta_v"] = num(s.spearman_neg_delta_v);
  j["value_sufficiency_threshold"] = threshold;
  j["low_delta_v_rows"] = s.low_delta_v_rows;
  j["spearman_success_i_az_sv_low_delta_v"] = num(s.spearman_low_delta_v_i_az_sv);
  return j;
}

/// Library metrics for every spec, computed in memory.
inline std::vector<MetricsRow> library_rows(const ExperimentConfig& cfg, const CubeLab& lab,
                                            const std::vector<RepresentationSpec>& specs) {
  const auto rcfg = cfg.rollout_config();
  const auto tasks = sample_tasks(rcfg, lab.env(), lab.oracle());
  const auto subset = stratified_subset(specs, cfg.rollout_subset.value_or(specs.size()), cfg.seed);
  std::vector<SpecJobs> jobs(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) jobs[i] = {subset[i], cfg.train_actors};
  const auto evs = evaluate_specs(specs, lab, &tasks, rcfg, jobs, cfg.threads);
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) rows.push_back(metrics_row(specs[i], evs[i], cfg.seed));
  return rows;
}

struct LibraryRun {
  std::filesystem::path csv, json, summary;
  std::size_t computed = 0;  ///< rows added by this call
  std::size_t resumed = 0;   ///< rows found already present
};

/// Writes library.json, then appends rows to library.csv spec by spec. An
/// existing library.csv from the same config is resumed: rows whose spec_id
/// is already present are skipped. A different config is refused.
inline LibraryRun cmd_library(const ExperimentConfig& cfg, const CubeLab& lab) {
  const auto specs = sample_library(cfg.library_size, cfg.seed);
  const std::uint64_t digest = config_digest("library;" + cfg.canonical());
  LibraryRun run;
  run.json = cfg.out_dir / "library.json";
  run.csv = cfg.out_dir / "library.csv";
  run.summary = cfg.out_dir / "library_summary.json";
  write_json(run.json, library_to_json(specs));

  std::unordered_set<std::string> done;
  if (std::filesystem::exists(run.csv)) {
    const auto progress = read_csv_progress(run.csv.string());
    if (progress.config != digest)
      throw ConfigMismatch("existing " + run.csv.string() + " was written with config " + hex64(progress.config) +
                           ", current config is " + hex64(digest) + "; remove it or use another --out-dir");
    done = progress.spec_ids;
    // Drop a partially written last line before appending.
    auto text = read_text(run.csv);
    text.resize(text.rfind('\n') + 1);
    write_text(run.csv, text);
  } else {
    write_text(run.csv, csv_schema_line(digest) + "\n" + csv_header() + "\n");
  }
  run.resumed = done.size();

  const auto rcfg = cfg.rollout_config();
  const auto tasks = sample_tasks(rcfg, lab.env(), lab.oracle());
  const auto subset = stratified_subset(specs, cfg.rollout_subset.value_or(specs.size()), cfg.seed);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < specs.size(); ++i)
    if (!done.contains(specs[i].id)) todo.push_back(i);

  std::ofstream out(run.csv, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + run.csv.string());
  const std::size_t batch = std::max<std::size_t>(16, 4 * std::max(1u, cfg.threads));
  for (std::size_t b = 0; b < todo.size(); b += batch) {
    const std::size_t e = std::min(todo.size(), b + batch);
    std::vector<SpecEvaluation> evs(e - b);
    parallel_for(e - b, cfg.threads, [&](std::size_t k) {
      const auto i = todo[b + k];
      evs[k] = evaluate_spec(specs[i], lab, &tasks, rcfg, SpecJobs{subset[i], cfg.train_actors});
    });
    for (std::size_t k = 0; k < evs.size(); ++k) out << format_row(metrics_row(specs[todo[b + k]], evs[k], cfg.seed)) << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + run.csv.string());
    run.computed += evs.size();
  }
  out.close();

  auto summary = summary_json(summarize_library(read_metrics_csv(run.csv.string()), cfg.value_sufficiency_threshold),
                              cfg.value_sufficiency_threshold);
  Json weights;
  for (const auto& t : kTemplates) weights[std::string(t.name)] = t.weight;
  summary["template_weights"] = std::move(weights);
  write_json(run.summary, summary);
  return run;
}

inline std::filesystem::path cmd_rollout(const ExperimentConfig& cfg, const CubeLab& lab) {
  auto specs = baseline_specs();
  const auto lib = sample_library(cfg.library_size, cfg.seed);
  const auto subset = stratified_subset(lib, cfg.rollout_subset.value_or(lib.size()), cfg.seed);
  for (std::size_t i = 0; i < lib.size(); ++i)
    if (subset[i]) specs.push_back(lib[i]);
  const auto rcfg = cfg.rollout_config();
  const auto tasks = sample_tasks(rcfg, lab.env(), lab.oracle());
  const std::vector<SpecJobs> jobs(specs.size(), SpecJobs{true, false});
  const auto evs = evaluate_specs(specs, lab, &tasks, rcfg, jobs, cfg.threads);
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) rows.push_back(metrics_row(specs[i], evs[i], cfg.seed));
  const auto path = cfg.out_dir / "rollout.csv";
  write_text(path, format_csv(rows, config_digest("rollout;" + cfg.canonical())));
  return path;
}

/// Baselines plus the first `verify_sample` library specs.
inline std::vector<RepresentationSpec> actor_specs(const ExperimentConfig& cfg) {
  auto specs = baseline_specs();
  for (auto& s : sample_library(cfg.verify_sample, cfg.seed)) specs.push_back(std::move(s));
  return specs;
}

inline std::filesystem::path cmd_actor(const ExperimentConfig& cfg, const CubeLab& lab) {
  const auto specs = actor_specs(cfg);
  const std::vector<SpecJobs> jobs(specs.size(), SpecJobs{false, true});
  const auto evs = evaluate_specs(specs, lab, nullptr, cfg.rollout_config(), jobs, cfg.threads);
  std::vector<MetricsRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) rows.push_back(metrics_row(specs[i], evs[i], cfg.seed));
  const auto path = cfg.out_dir / "actor.csv";
  write_text(path, format_csv(rows, config_digest("actor;" + cfg.canonical())));
  return path;
}

struct LineRow {
  std::string phi;
  int distance_class = 0;
  double success_rate = 0;
  InfoReport info;
};

inline std::vector<LineRow> line_rows(const line::LineConfig& lcfg) {
  std::vector<LineRow> rows;
  for (auto e : {line::Encoder::Sign, line::Encoder::Dist}) {
    const auto info = line::line_info_report(lcfg, e);
    for (const auto& c : line::line_mixed_policy_eval(lcfg, e)) {
      if (c.distance == 0 || c.pairs == 0) continue;
      rows.push_back({std::string(line::encoder_name(e)), c.distance, c.success_rate, info});
    }
  }
  return rows;
}

inline std::filesystem::path cmd_line1d(const ExperimentConfig& cfg) {
  line::LineConfig lcfg;
  lcfg.seed = cfg.seed;
  std::string text = "# asl-line1d v1 log_base=e radius=" + std::to_string(lcfg.radius) +
                     " horizon=" + std::to_string(lcfg.horizon) +
                     " episodes=" + std::to_string(lcfg.episodes_per_pair) + " seed=" + std::to_string(cfg.seed) +
                     "\nphi,distance_class,success_rate,delta_a,delta_v,i_az_sv\n";
  for (const auto& r : line_rows(lcfg))
    text += r.phi + ',' + std::to_string(r.distance_class) + ',' + format_double(r.success_rate) + ',' +
            format_double(r.info.delta_a) + ',' + format_double(r.info.delta_v) + ',' +
            format_double(r.info.i_az_sv) + '\n';
  const auto path = cfg.out_dir / "line1d.csv";
  write_text(path, text);
  return path;
}

// ---------------------------------------------------------------------------
// Verification.

struct CheckResult {
  std::string name;
  std::string spec;
  std::string quantity;
  double value = 0;
  double tolerance = 0;
  bool passed = true;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  [[nodiscard]] bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

/// Compares the fast tables on a small grid against the naive reference:
/// state set, distances, and every information quantity for `specs`.
/// Returns the largest absolute disagreement (distances count as 0 or 1).
struct SmallGridCheck {
  bool same_states = false;
  std::size_t distance_mismatches = 0;
  double max_info_error = 0;
  std::string worst_spec;
};

inline SmallGridCheck cross_check_small_grid(const CubeLab& lab, const std::vector<RepresentationSpec>& specs) {
  namespace ref = reference;
  const int n = lab.env().grid_size();
  SmallGridCheck out;
  const auto naive_states = ref::naive_reachable(n);
  out.same_states = naive_states.size() == lab.env().state_count();
  for (const auto& t : naive_states)
    if (!lab.env().space().find(ref::to_cube_state(t))) out.same_states = false;

  const auto goals = ref::naive_goals(n);
  for (const auto& t : naive_states) {
    const auto found = lab.env().space().find(ref::to_cube_state(t));
    if (!found) continue;
    const auto dist = ref::naive_distances(t, n, goals);
    for (std::size_t g = 0; g < goals.size(); ++g) {
      const auto d = lab.oracle().dist(*found, GoalIndex{static_cast<std::uint32_t>(g)});
      const int mine = d == kUnreachable ? -1 : static_cast<int>(d);
      if (mine != dist[g]) ++out.distance_mismatches;
    }
  }

  for (const auto& spec : specs) {
    std::unordered_map<RepValue, std::int64_t, RepValueHash> ids;
    const auto rows = ref::naive_joint(n, [&](const ref::NaiveState& s, const ref::NaiveGoal& g) {
      const auto si = lab.env().space().index_of(ref::to_cube_state(s));
      const auto gi = GoalIndex{static_cast<std::uint32_t>(g.target * n * n + g.x * n + g.y)};
      const auto z = encode(spec, lab.env(), lab.oracle(), si, gi);
      return ids.emplace(z, static_cast<std::int64_t>(ids.size())).first->second;
    });
    const auto naive = ref::naive_info(rows);
    const auto fast = info_report(spec, lab);
    const double err = std::max({std::abs(naive.h_a_sg - fast.h_a_sg), std::abs(naive.h_a_sz - fast.h_a_sz),
                                 std::abs(naive.h_a_sv - fast.h_a_sv), std::abs(naive.h_a_svz - fast.h_a_svz),
                                 std::abs(naive.h_v_sz - fast.h_v_sz), std::abs(naive.delta_a - fast.delta_a),
                                 std::abs(naive.delta_v - fast.delta_v), std::abs(naive.i_az_sv - fast.i_az_sv),
                                 std::abs(naive.i_ag_sv - fast.i_ag_sv), std::abs(naive.i_av_sz - fast.i_av_sz)});
    if (err >= out.max_info_error) {
      out.max_info_error = err;
      out.worst_spec = spec.id;
    }
  }
  return out;
}

inline constexpr double kChainTolerance = 1e-9;
inline constexpr double kNonNegTolerance = 1e-9;
inline constexpr double kBoundTolerance = 1e-7;
inline constexpr double kConvergedGapTolerance = 1e-5;
inline constexpr double kIdentityTolerance = 1e-8;
inline constexpr double kPinskerTolerance = 1e-9;
inline constexpr double kBruteForceTolerance = 1e-10;

/// Every identity and bound over the baselines plus a seeded sample of specs,
/// and the small-grid cross-check.
inline VerifyReport run_verify(const ExperimentConfig& cfg, const CubeLab& lab) {
  VerifyReport rep;
  auto add = [&](std::string name, std::string spec, std::string quantity, double value, double tol, bool ok) {
    rep.checks.push_back({std::move(name), std::move(spec), std::move(quantity), value, tol, ok});
  };
  const auto specs = actor_specs(cfg);
  std::vector<InfoReport> infos(specs.size());
  std::vector<DependenceCheck> deps(specs.size());
  std::vector<TrainReport> trains(specs.size());
  parallel_for(specs.size(), cfg.threads, [&](std::size_t i) {
    const auto z = lab.pair_z(lab.encode(specs[i]));
    infos[i] = info_report(lab.law(), z, &lab.law_entropies());
    deps[i] = verify_value_functional_dependence(lab.law(), z, infos[i], kNonNegTolerance);
    trains[i] = train_actor(lab.law(), make_actor_problem(lab.law(), z), infos[i]);
  });
  if (cfg.inject_verify_fault && !infos.empty()) infos[0].delta_a += 1e-3;

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& id = specs[i].id;
    const auto& info = infos[i];
    const double chain = verify_exact_decomposition(info);
    add("chain_rule", id, "|dA - (I(A;G|S,V) - I(A;Z|S,V) + I(A;V|S,Z))|", chain, kChainTolerance,
        chain < kChainTolerance);
    const double floor = min_report_field(info);
    add("non_negative", id, "min information field", floor, kNonNegTolerance, floor >= -kNonNegTolerance);
    add("value_dependence", id, "V* constant on (s, z) groups when dV = 0", info.delta_v, kNonNegTolerance,
        deps[i] != DependenceCheck::Violated);
    const auto& tr = trains[i];
    const double slack_now = (tr.nll - info.h_a_sg) - info.delta_a;
    const double slack = std::min(tr.min_bound_slack, slack_now);
    add("actor_bound", id, "min over iterates of NLL - H(A|S,G) - dA", slack, kBoundTolerance,
        slack >= -kBoundTolerance);
    const double gap = std::abs(tr.nll - info.h_a_sg - info.delta_a);
    add("actor_converged_gap", id, "|excess - dA| at convergence", gap, kConvergedGapTolerance,
        tr.converged && gap < kConvergedGapTolerance);
    add("risk_identity", id, "max |L_act - H(A|S,G) - (ME + dA)|", tr.max_identity_residual, kIdentityTolerance,
        tr.identity_checks > 0 && tr.max_identity_residual < kIdentityTolerance);
  }

  const auto pinsker = pinsker_lower_bound(lab.law(), kPinskerTolerance);
  add("pinsker", "law", "max_a 2 E[Var(P(A=a|S,V,G) | S,V)] vs I(A;G|S,V)", pinsker.max_bound - pinsker.i_ag_sv,
      kPinskerTolerance, pinsker.holds && pinsker.max_bound > 0);

  const CubeLab small(2, cfg.threads);
  std::vector<RepresentationSpec> small_specs = baseline_specs();
  for (auto& s : sample_library(std::min<std::size_t>(cfg.verify_sample, 20), cfg.seed)) small_specs.push_back(s);
  const auto bf = cross_check_small_grid(small, small_specs);
  add("brute_force_states", "n=2", "reachable state set matches", bf.same_states ? 0 : 1, 0, bf.same_states);
  add("brute_force_distances", "n=2", "distance mismatches", static_cast<double>(bf.distance_mismatches), 0,
      bf.distance_mismatches == 0);
  add("brute_force_info", bf.worst_spec, "max |fast - naive| over entropies", bf.max_info_error,
      kBruteForceTolerance, bf.max_info_error < kBruteForceTolerance);
  return rep;
}

inline Json verify_json(const VerifyReport& rep) {
  Json j;
  j["passed"] = rep.passed();
  j["checks"] = Json::array();
  for (const auto& c : rep.checks) {
    Json e;
    e["name"] = c.name;
    e["spec"] = c.spec;
    e["quantity"] = c.quantity;
    e["value"] = c.value;
    e["tolerance"] = c.tolerance;
    e["passed"] = c.passed;
    j["checks"].push_back(std::move(e));
  }
  return j;
}

inline VerifyReport cmd_verify(const ExperimentConfig& cfg, const CubeLab& lab) {
  auto rep = run_verify(cfg, lab);
  write_json(cfg.out_dir / "verify.json", verify_json(rep));
  return rep;
}

}  // namespace asl
