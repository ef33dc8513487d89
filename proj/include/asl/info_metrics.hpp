#pragma once

// Exact information quantities under the uniform law on a finite set of
// (state, goal) pairs. All entropies are in nats; 0 log 0 = 0.
//
// The law is generic: each pair carries a state id, a goal id, an integer
// value level, and an optimal-action distribution. Discrete Cube and the
// integer-line example both feed the same machinery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asl/cube_env.hpp"
#include "asl/errors.hpp"
#include "asl/oracle.hpp"
#include "asl/rep_library.hpp"

namespace asl {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double entropy(std::span<const double> p) noexcept {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

/// Uniform law over pairs, sorted by state.
struct PairLaw {
  std::size_t action_count = kActionCount;
  std::size_t state_count = 0;
  std::vector<std::uint32_t> state;
  std::vector<std::uint32_t> goal;
  std::vector<std::int64_t> value;
  std::vector<double> probs;          ///< size() x action_count, row-major
  std::vector<std::size_t> offsets;   ///< pairs of state s are [offsets[s], offsets[s+1])

  [[nodiscard]] std::size_t size() const noexcept { return state.size(); }
  [[nodiscard]] bool empty() const noexcept { return state.empty(); }
  [[nodiscard]] std::span<const double> probs_of(std::size_t i) const noexcept {
    return {probs.data() + i * action_count, action_count};
  }

  /// Rebuilds `offsets` from `state`; requires `state` sorted ascending.
  void index_states() {
    offsets.assign(state_count + 1, 0);
    for (auto s : state) ++offsets[s + 1];
    for (std::size_t s = 0; s < state_count; ++s) offsets[s + 1] += offsets[s];
  }
};

/// The Discrete Cube law: filtered pairs with P*(a | s, g) and V* levels.
/// Every filtered pair must be reachable and not yet successful.
inline PairLaw cube_pair_law(const CubeEnv& env, const OracleTables& oracle) {
  PairLaw law;
  law.action_count = kActionCount;
  law.state_count = env.state_count();
  const auto& pairs = env.pairs();
  law.state.reserve(pairs.size());
  law.goal.reserve(pairs.size());
  law.value.reserve(pairs.size());
  law.probs.reserve(pairs.size() * kActionCount);
  for (const auto& p : pairs) {
    const auto d = oracle.dist(p.state, p.goal);
    if (d == kUnreachable) throw UnreachableError("filtered pair has no path to success");
    if (d == 0) throw SuccessStateError("filtered pair is already successful");
    law.state.push_back(p.state.value);
    law.goal.push_back(p.goal.value);
    law.value.push_back(-static_cast<std::int64_t>(d));
    const auto pi = optimal_policy(oracle, p.state, p.goal);
    law.probs.insert(law.probs.end(), pi.begin(), pi.end());
  }
  law.index_states();
  return law;
}

/// Encoding id of each filtered pair, read from a full-grid encoding.
inline std::vector<std::uint32_t> pair_encodings(const CubeEnv& env, const EncodedTable& table) {
  std::vector<std::uint32_t> z;
  z.reserve(env.pairs().size());
  for (const auto& p : env.pairs()) z.push_back(table.z[static_cast<std::size_t>(p.state.value) * env.goal_count() + p.goal.value]);
  return z;
}

namespace detail {

/// Calls fn(begin, end, order) for every (state, key) group, where
/// order[begin..end) are the pair indices of the group.
template <class Fn>
void for_each_group(const PairLaw& law, std::span<const std::uint64_t> keys, Fn&& fn) {
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < law.state_count; ++s) {
    const auto b = law.offsets[s], e = law.offsets[s + 1];
    if (b == e) continue;
    order.resize(e - b);
    for (std::size_t i = b; i < e; ++i) order[i - b] = i;
    if (order.size() <= 64) {
      // Per-state groups are small; insertion sort is stable and allocation-free.
      for (std::size_t i = 1; i < order.size(); ++i) {
        const auto v = order[i];
        std::size_t j = i;
        for (; j > 0 && keys[order[j - 1]] > keys[v]; --j) order[j] = order[j - 1];
        order[j] = v;
      }
    } else {
      std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return keys[x] < keys[y]; });
    }
    std::size_t run = 0;
    for (std::size_t k = 1; k <= order.size(); ++k)
      if (k == order.size() || keys[order[k]] != keys[order[run]]) {
        fn(run, k, std::span<const std::size_t>(order));
        run = k;
      }
  }
}

}  // namespace detail

/// H(A | S, K) where K is given per pair as an integer key.
inline double conditional_action_entropy(const PairLaw& law, std::span<const std::uint64_t> keys) {
  if (law.empty()) throw InvalidArgument("empty pair set");
  CompensatedSum total;
  std::vector<double> mix(law.action_count);
  detail::for_each_group(law, keys, [&](std::size_t b, std::size_t e, std::span<const std::size_t> order) {
    std::fill(mix.begin(), mix.end(), 0.0);
    for (std::size_t k = b; k < e; ++k) {
      const auto p = law.probs_of(order[k]);
      for (std::size_t a = 0; a < law.action_count; ++a) mix[a] += p[a];
    }
    const double n = static_cast<double>(e - b);
    for (auto& m : mix) m /= n;
    total.add(n * entropy(mix));
  });
  return total.value() / static_cast<double>(law.size());
}

/// H(V | S, K).
inline double conditional_value_entropy(const PairLaw& law, std::span<const std::uint64_t> keys) {
  if (law.empty()) throw InvalidArgument("empty pair set");
  CompensatedSum total;
  std::vector<std::int64_t> values;
  detail::for_each_group(law, keys, [&](std::size_t b, std::size_t e, std::span<const std::size_t> order) {
    values.clear();
    for (std::size_t k = b; k < e; ++k) values.push_back(law.value[order[k]]);
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(e - b);
    double h = 0.0;
    std::size_t run = 0;
    for (std::size_t k = 1; k <= values.size(); ++k)
      if (k == values.size() || values[k] != values[run]) {
        const double p = static_cast<double>(k - run) / n;
        h -= p * std::log(p);
        run = k;
      }
    total.add(n * h);
  });
  return total.value() / static_cast<double>(law.size());
}

struct InfoReport {
  double delta_a = 0;   ///< I(A;G|S,Z) = H(A|S,Z) - H(A|S,G)
  double delta_v = 0;   ///< I(V;G|S,Z) = H(V|S,Z)
  double i_az_sv = 0;   ///< I(A;Z|S,V)
  double i_ag_sv = 0;   ///< I(A;G|S,V)
  double i_av_sz = 0;   ///< I(A;V|S,Z)
  double h_a_sg = 0;
  double h_a_sz = 0;
  double h_v_sz = 0;
  double h_a_sv = 0;
  double h_a_svz = 0;
};

namespace detail {

struct KeySets {
  std::vector<std::uint64_t> goal, z, v, vz;
};

inline KeySets make_keys(const PairLaw& law, std::span<const std::uint32_t> z) {
  if (z.size() != law.size()) throw InvalidArgument("encoding count does not match pair count");
  KeySets k;
  const auto vmin = law.empty() ? 0 : *std::min_element(law.value.begin(), law.value.end());
  k.goal.assign(law.goal.begin(), law.goal.end());
  k.z.assign(z.begin(), z.end());
  k.v.resize(law.size());
  k.vz.resize(law.size());
  for (std::size_t i = 0; i < law.size(); ++i) {
    const auto level = static_cast<std::uint64_t>(law.value[i] - vmin);
    k.v[i] = level;
    k.vz[i] = (level << 32) | z[i];
  }
  return k;
}

}  // namespace detail

/// Encoding-independent terms of a law: H(A|S,G) and H(A|S,V).
struct LawEntropies {
  double h_a_sg = 0;
  double h_a_sv = 0;
};

inline LawEntropies law_entropies(const PairLaw& law) {
  if (law.empty()) throw InvalidArgument("empty pair set");
  std::vector<std::uint32_t> none(law.size(), 0);
  const auto keys = detail::make_keys(law, none);
  return {conditional_action_entropy(law, keys.goal), conditional_action_entropy(law, keys.v)};
}

/// Every quantity by exact grouping over the pairs; `z` is the encoding id of
/// each pair (any injective relabelling gives the same report). `base` must
/// come from law_entropies(law) when given.
inline InfoReport info_report(const PairLaw& law, std::span<const std::uint32_t> z,
                              const LawEntropies* base = nullptr) {
  if (law.empty()) throw InvalidArgument("empty pair set");
  const auto keys = detail::make_keys(law, z);
  InfoReport r;
  if (base) {
    r.h_a_sg = base->h_a_sg;
    r.h_a_sv = base->h_a_sv;
  } else {
    r.h_a_sg = conditional_action_entropy(law, keys.goal);
    r.h_a_sv = conditional_action_entropy(law, keys.v);
  }
  r.h_a_sz = conditional_action_entropy(law, keys.z);
  r.h_a_svz = conditional_action_entropy(law, keys.vz);
  r.h_v_sz = conditional_value_entropy(law, keys.z);
  r.delta_a = r.h_a_sz - r.h_a_sg;
  r.delta_v = r.h_v_sz;
  r.i_ag_sv = r.h_a_sv - r.h_a_sg;
  r.i_az_sv = r.h_a_sv - r.h_a_svz;
  r.i_av_sz = r.h_a_sz - r.h_a_svz;
  return r;
}

/// |dA - (I(A;G|S,V) - I(A;Z|S,V) + I(A;V|S,Z))|.
inline double verify_exact_decomposition(const InfoReport& r) {
  return std::abs(r.delta_a - (r.i_ag_sv - r.i_az_sv + r.i_av_sz));
}

/// Smallest field of the report; every field should be >= -1e-9.
inline double min_report_field(const InfoReport& r) {
  return std::min({r.delta_a, r.delta_v, r.i_az_sv, r.i_ag_sv, r.i_av_sz, r.h_a_sg, r.h_a_sz, r.h_v_sz, r.h_a_sv,
                   r.h_a_svz});
}

enum class DependenceCheck { Holds, Violated, NotApplicable };

inline const char* to_string(DependenceCheck c) {
  switch (c) {
    case DependenceCheck::Holds: return "holds";
    case DependenceCheck::Violated: return "violated";
    case DependenceCheck::NotApplicable: return "not_applicable";
  }
  return "?";
}

/// When dV < tol, V must be constant inside every (s, z) group.
inline DependenceCheck verify_value_functional_dependence(const PairLaw& law, std::span<const std::uint32_t> z,
                                                          const InfoReport& r, double tol = 1e-9) {
  if (!(r.delta_v < tol)) return DependenceCheck::NotApplicable;
  std::vector<std::uint64_t> keys(z.begin(), z.end());
  bool ok = true;
  detail::for_each_group(law, keys, [&](std::size_t b, std::size_t e, std::span<const std::size_t> order) {
    for (std::size_t k = b + 1; k < e; ++k)
      if (law.value[order[k]] != law.value[order[b]]) ok = false;
  });
  return ok ? DependenceCheck::Holds : DependenceCheck::Violated;
}

struct PinskerReport {
  std::vector<double> bounds;  ///< 2 E[Var(P(A=a|S,V,G) | S,V)] per action a
  double max_bound = 0;
  double i_ag_sv = 0;
  bool holds = true;  ///< every bound <= I(A;G|S,V) + tol
};

/// Variance lower bound on I(A;G|S,V) using the singleton event {a} for
/// each action.
inline PinskerReport pinsker_lower_bound(const PairLaw& law, double tol = 1e-9) {
  if (law.empty()) throw InvalidArgument("empty pair set");
  std::vector<std::uint32_t> dummy(law.size(), 0);
  const auto keys = detail::make_keys(law, dummy);
  const double h_a_sg = conditional_action_entropy(law, keys.goal);
  const double h_a_sv = conditional_action_entropy(law, keys.v);
  PinskerReport out;
  out.i_ag_sv = h_a_sv - h_a_sg;
  std::vector<CompensatedSum> acc(law.action_count);
  detail::for_each_group(law, keys.v, [&](std::size_t b, std::size_t e, std::span<const std::size_t> order) {
    const double n = static_cast<double>(e - b);
    for (std::size_t a = 0; a < law.action_count; ++a) {
      double mean = 0;
      for (std::size_t k = b; k < e; ++k) mean += law.probs_of(order[k])[a];
      mean /= n;
      double ss = 0;
      for (std::size_t k = b; k < e; ++k) {
        const double d = law.probs_of(order[k])[a] - mean;
        ss += d * d;
      }
      acc[a].add(ss);
    }
  });
  for (auto& s : acc) {
    const double bound = 2.0 * s.value() / static_cast<double>(law.size());
    out.bounds.push_back(bound);
    out.max_bound = std::max(out.max_bound, bound);
    if (bound > out.i_ag_sv + tol) out.holds = false;
  }
  return out;
}

struct StrictnessWitness {
  StateIndex state;
  GoalIndex goal_a;
  GoalIndex goal_b;
  int value_a = 0;
  int value_b = 0;
};

struct StrictnessResult {
  bool injective = true;
  std::optional<StrictnessWitness> witness;  ///< set when a collision changes V* somewhere
};

/// For a goal-only encoder psi(g): if two goals collide, look for a state at
/// which their optimal values differ, which rules out strict value
/// sufficiency for psi.
template <class GoalEncoder>
StrictnessResult check_goal_only_strictness(GoalEncoder&& psi, const CubeEnv& env, const OracleTables& oracle) {
  StrictnessResult out;
  const auto& goals = env.goals();
  std::vector<decltype(psi(goals[0]))> codes;
  for (const auto& g : goals) codes.push_back(psi(g));
  for (std::uint32_t a = 0; a < goals.size(); ++a)
    for (std::uint32_t b = a + 1; b < goals.size(); ++b) {
      if (!(codes[a] == codes[b])) continue;
      out.injective = false;
      for (std::uint32_t s = 0; s < env.state_count(); ++s) {
        const StateIndex si{s};
        const auto da = oracle.dist(si, GoalIndex{a});
        const auto db = oracle.dist(si, GoalIndex{b});
        if (da == kUnreachable || db == kUnreachable || da == db) continue;
        out.witness = StrictnessWitness{si, GoalIndex{a}, GoalIndex{b}, -static_cast<int>(da), -static_cast<int>(db)};
        return out;
      }
    }
  return out;
}

/// Fraction of t in [0, T-k] with values[t+k] > values[t], where the
/// trajectory has T+1 entries.
inline double order_consistency_ratio(std::span<const double> values, std::size_t k) {
  if (values.empty() || values.size() - 1 < k)
    throw InvalidArgument("trajectory shorter than the step gap");
  const std::size_t last = values.size() - 1 - k;
  std::size_t hits = 0;
  for (std::size_t t = 0; t <= last; ++t)
    if (values[t + k] > values[t]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(last + 1);
}

}  // namespace asl
