#pragma once

// Representation-conditioned mixed policy pi_phi(a | s, z): the optimal action
// law averaged uniformly over the goals that share the encoding z at state s,
// and a seeded Monte-Carlo evaluator of its control success.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "asl/lab.hpp"
#include "asl/parallel.hpp"
#include "asl/rng.hpp"

namespace asl {

struct RolloutConfig {
  std::size_t n_tasks = 600;
  std::size_t n_rollouts_per_task = 50;
  int margin = 6;
  int horizon_cap = 30;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_tasks < 1 || n_rollouts_per_task < 1) throw InvalidArgument("task and rollout counts must be >= 1");
    if (margin < 0) throw InvalidArgument("margin must be >= 0");
    if (horizon_cap < 1) throw InvalidArgument("horizon cap must be >= 1");
  }
};

/// Rows of pi_phi indexed by (state, goal) cell.
///
/// On the filtered support the row for (s, z) averages P*(.|s, g) over the
/// filtered goals g with phi(s, g) = z. A rollout can visit (s, z) pairs that
/// no filtered pair produces (e.g. carrying the target onto the goal cell);
/// there the row averages over every non-success goal of s with that z, and
/// the cell is flagged off-support.
class MixedPolicyTable {
 public:
  static constexpr std::uint32_t kNoRow = 0xFFFFFFFFu;

  [[nodiscard]] std::size_t goal_count() const noexcept { return goals_; }

  [[nodiscard]] std::uint32_t row_of(StateIndex s, GoalIndex g) const noexcept { return cell_row_[cell(s, g)]; }
  [[nodiscard]] bool off_support(StateIndex s, GoalIndex g) const noexcept { return cell_off_[cell(s, g)] != 0; }
  [[nodiscard]] const ActionDistribution& row(std::uint32_t r) const noexcept { return rows_[r]; }
  [[nodiscard]] const ActionDistribution& cumulative(std::uint32_t r) const noexcept { return cumulative_[r]; }
  [[nodiscard]] std::size_t row_count() const noexcept { return rows_.size(); }
  [[nodiscard]] std::size_t support_row_count() const noexcept { return support_rows_; }

  /// pi_phi(. | s, z) on the filtered support, if (s, z) occurs there.
  [[nodiscard]] std::optional<ActionDistribution> support_entry(StateIndex s, std::uint32_t z) const {
    for (std::size_t k = state_support_[s.value]; k < state_support_[s.value + 1]; ++k)
      if (support_keys_[k].first == z) return rows_[support_keys_[k].second];
    return std::nullopt;
  }

  /// Draws an action from row r given u in [0, 1).
  [[nodiscard]] std::size_t sample(std::uint32_t r, double u) const noexcept {
    const auto& cum = cumulative_[r];
    std::size_t last_positive = 0;
    for (std::size_t a = 0; a < kActionCount; ++a) {
      if (rows_[r][a] > 0) last_positive = a;
      if (u < cum[a] && rows_[r][a] > 0) return a;
    }
    return last_positive;
  }

 private:
  friend MixedPolicyTable build_mixed_policy(const CubeLab&, const EncodedTable&);

  [[nodiscard]] std::size_t cell(StateIndex s, GoalIndex g) const noexcept {
    return static_cast<std::size_t>(s.value) * goals_ + g.value;
  }

  std::uint32_t add_row(const ActionDistribution& p) {
    rows_.push_back(p);
    ActionDistribution cum{};
    double acc = 0;
    for (std::size_t a = 0; a < kActionCount; ++a) cum[a] = (acc += p[a]);
    cumulative_.push_back(cum);
    return static_cast<std::uint32_t>(rows_.size() - 1);
  }

  std::size_t goals_ = 0;
  std::vector<ActionDistribution> rows_;
  std::vector<ActionDistribution> cumulative_;
  std::vector<std::uint32_t> cell_row_;
  std::vector<std::uint8_t> cell_off_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> support_keys_;  ///< (z, row) per state
  std::vector<std::size_t> state_support_;
  std::size_t support_rows_ = 0;
};

inline MixedPolicyTable build_mixed_policy(const CubeLab& lab, const EncodedTable& enc) {
  const auto& env = lab.env();
  const auto& oracle = lab.oracle();
  const auto& law = lab.law();
  const std::size_t goals = env.goal_count();
  MixedPolicyTable t;
  t.goals_ = goals;
  t.cell_row_.assign(env.state_count() * goals, MixedPolicyTable::kNoRow);
  t.cell_off_.assign(env.state_count() * goals, 0);
  t.state_support_.assign(env.state_count() + 1, 0);

  struct Acc {
    std::uint32_t z;
    ActionDistribution sum{};
    std::size_t count = 0;
  };
  auto find = [](std::vector<Acc>& v, std::uint32_t z) -> Acc& {
    for (auto& a : v)
      if (a.z == z) return a;
    v.push_back(Acc{z});
    return v.back();
  };
  auto mean = [](const Acc& a) {
    ActionDistribution p{};
    for (std::size_t k = 0; k < kActionCount; ++k) p[k] = a.sum[k] / static_cast<double>(a.count);
    return p;
  };

  std::vector<Acc> support, extended;
  for (std::uint32_t s = 0; s < env.state_count(); ++s) {
    support.clear();
    extended.clear();
    // Filtered support, in goal order.
    for (std::size_t i = law.offsets[s]; i < law.offsets[s + 1]; ++i) {
      const auto z = enc.z[static_cast<std::size_t>(s) * goals + law.goal[i]];
      auto& acc = find(support, z);
      const auto p = law.probs_of(i);
      for (std::size_t a = 0; a < kActionCount; ++a) acc.sum[a] += p[a];
      ++acc.count;
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> keys;
    for (const auto& acc : support) keys.emplace_back(acc.z, t.add_row(mean(acc)));
    t.support_rows_ += keys.size();

    auto support_row = [&](std::uint32_t z) -> std::optional<std::uint32_t> {
      for (const auto& [kz, r] : keys)
        if (kz == z) return r;
      return std::nullopt;
    };

    // Remaining non-success goals whose encoding never occurs on the support.
    for (std::uint32_t g = 0; g < goals; ++g) {
      const StateIndex si{s};
      const GoalIndex gi{g};
      const auto d = oracle.dist(si, gi);
      if (d == 0 || d == kUnreachable) continue;
      const auto z = enc.z[static_cast<std::size_t>(s) * goals + g];
      if (support_row(z)) continue;
      auto& acc = find(extended, z);
      const auto p = optimal_policy(oracle, si, gi);
      for (std::size_t a = 0; a < kActionCount; ++a) acc.sum[a] += p[a];
      ++acc.count;
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ext_keys;
    for (const auto& acc : extended) ext_keys.emplace_back(acc.z, t.add_row(mean(acc)));

    for (std::uint32_t g = 0; g < goals; ++g) {
      const auto d = oracle.dist(StateIndex{s}, GoalIndex{g});
      if (d == 0 || d == kUnreachable) continue;
      const auto cell = static_cast<std::size_t>(s) * goals + g;
      const auto z = enc.z[cell];
      if (auto r = support_row(z)) {
        t.cell_row_[cell] = *r;
      } else {
        for (const auto& [kz, r2] : ext_keys)
          if (kz == z) t.cell_row_[cell] = r2;
        t.cell_off_[cell] = 1;
      }
    }
    t.support_keys_.insert(t.support_keys_.end(), keys.begin(), keys.end());
    t.state_support_[s + 1] = t.support_keys_.size();
  }
  return t;
}

inline MixedPolicyTable build_mixed_policy(const RepresentationSpec& spec, const CubeLab& lab) {
  return build_mixed_policy(lab, lab.encode(spec));
}

struct Task {
  StateIndex state;
  GoalIndex goal;
  int horizon = 0;
  friend bool operator==(const Task&, const Task&) = default;
};

struct TaskSample {
  std::vector<Task> tasks;
  std::size_t eligible = 0;
  bool with_replacement = false;
};

inline int task_horizon(int optimal_distance, const RolloutConfig& cfg) {
  return std::min(optimal_distance + cfg.margin, cfg.horizon_cap);
}

/// Tasks (s0, g) with an empty gripper and the target not already on the
/// goal cell, drawn uniformly; without replacement when enough are eligible.
inline TaskSample sample_tasks(const RolloutConfig& cfg, const CubeEnv& env, const OracleTables& oracle) {
  cfg.validate();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> eligible;
  for (std::uint32_t s = 0; s < env.state_count(); ++s) {
    const auto& st = env.state(StateIndex{s});
    if (st.gripper != Gripper::None) continue;
    for (std::uint32_t g = 0; g < env.goal_count(); ++g) {
      const auto& goal = env.goal(GoalIndex{g});
      if (std::get<GridPos>(st.place(goal.target)) == goal.pos) continue;
      if (!oracle.reachable(StateIndex{s}, GoalIndex{g})) continue;
      eligible.emplace_back(s, g);
    }
  }
  if (eligible.empty()) throw InvalidArgument("no eligible tasks");
  TaskSample out;
  out.eligible = eligible.size();
  CounterRng rng(cfg.seed, {0x5441534BULL /* "TASK" */});
  std::vector<std::pair<std::uint32_t, std::uint32_t>> chosen;
  if (eligible.size() >= cfg.n_tasks) {
    for (std::size_t i = 0; i < cfg.n_tasks; ++i) {
      const auto j = i + rng.uniform_below(eligible.size() - i);
      std::swap(eligible[i], eligible[j]);
      chosen.push_back(eligible[i]);
    }
  } else {
    out.with_replacement = true;
    for (std::size_t i = 0; i < cfg.n_tasks; ++i) chosen.push_back(eligible[rng.uniform_below(eligible.size())]);
  }
  for (auto [s, g] : chosen) {
    const int d = oracle.dist(StateIndex{s}, GoalIndex{g});
    out.tasks.push_back(Task{StateIndex{s}, GoalIndex{g}, task_horizon(d, cfg)});
  }
  return out;
}

struct RolloutOutcome {
  double success_rate = 0;
  std::uint64_t successes = 0;
  std::uint64_t total = 0;
  std::uint64_t off_support_steps = 0;
  std::uint64_t steps = 0;
  std::vector<std::uint32_t> per_task_successes;
  bool tasks_with_replacement = false;
};

/// Rolls out pi_phi on every task; rollout r of task i draws from its own
/// sub-stream (seed, i, r), so results do not depend on `threads`.
inline RolloutOutcome evaluate(const MixedPolicyTable& policy, const CubeLab& lab, const TaskSample& sample,
                               const RolloutConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  const auto& env = lab.env();
  const auto& next = env.transitions();
  struct Slot {
    std::uint32_t successes = 0;
    std::uint64_t off = 0;
    std::uint64_t steps = 0;
  };
  std::vector<Slot> slots(sample.tasks.size());
  const CounterRng root(cfg.seed, {0x524F4C4CULL /* "ROLL" */});
  parallel_for(sample.tasks.size(), threads, [&](std::size_t i) {
    const auto& task = sample.tasks[i];
    const auto task_rng = root.split(i);
    Slot slot;
    for (std::size_t r = 0; r < cfg.n_rollouts_per_task; ++r) {
      auto rng = task_rng.split(r);
      std::uint32_t s = task.state.value;
      for (int t = 0;; ++t) {
        if (env.success(StateIndex{s}, task.goal)) {
          ++slot.successes;
          break;
        }
        if (t >= task.horizon) break;
        const auto row = policy.row_of(StateIndex{s}, task.goal);
        if (policy.off_support(StateIndex{s}, task.goal)) ++slot.off;
        const auto a = policy.sample(row, rng.uniform01());
        s = next[static_cast<std::size_t>(s) * kActionCount + a];
        ++slot.steps;
      }
    }
    slots[i] = slot;
  });
  RolloutOutcome out;
  out.tasks_with_replacement = sample.with_replacement;
  for (const auto& slot : slots) {
    out.per_task_successes.push_back(slot.successes);
    out.successes += slot.successes;
    out.off_support_steps += slot.off;
    out.steps += slot.steps;
  }
  out.total = static_cast<std::uint64_t>(sample.tasks.size()) * cfg.n_rollouts_per_task;
  out.success_rate = static_cast<double>(out.successes) / static_cast<double>(out.total);
  return out;
}

inline RolloutOutcome evaluate(const RepresentationSpec& spec, const RolloutConfig& cfg, const CubeLab& lab,
                               unsigned threads = 1) {
  const auto policy = build_mixed_policy(spec, lab);
  const auto sample = sample_tasks(cfg, lab.env(), lab.oracle());
  return evaluate(policy, lab, sample, cfg, threads);
}

}  // namespace asl
