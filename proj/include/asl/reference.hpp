#pragma once

// Slow, independent re-implementations used to cross-check the fast tables:
// a separate state encoding and step function, forward BFS from each start
// state, and conditional entropies from explicit joint-mass maps.

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "asl/cube_env.hpp"

namespace asl::reference {

/// {agent x, agent y, red x, red y, blue x, blue y, gripper}; a held cube has
/// coordinates (-1, -1); gripper 0 = empty, 1 = red, 2 = blue.
using NaiveState = std::array<int, 7>;

struct NaiveGoal {
  int target;  ///< 0 red, 1 blue
  int x, y;
};

inline NaiveState from_cube_state(const CubeState& s) {
  NaiveState t{s.agent.x, s.agent.y, -1, -1, -1, -1, static_cast<int>(s.gripper)};
  if (!is_held(s.red)) t[2] = std::get<GridPos>(s.red).x, t[3] = std::get<GridPos>(s.red).y;
  if (!is_held(s.blue)) t[4] = std::get<GridPos>(s.blue).x, t[5] = std::get<GridPos>(s.blue).y;
  return t;
}

inline CubeState to_cube_state(const NaiveState& t) {
  CubeState s;
  s.agent = {t[0], t[1]};
  s.gripper = static_cast<Gripper>(t[6]);
  s.red = t[6] == 1 ? CubePlace{Held{}} : CubePlace{GridPos{t[2], t[3]}};
  s.blue = t[6] == 2 ? CubePlace{Held{}} : CubePlace{GridPos{t[4], t[5]}};
  return s;
}

/// Action ids: 0 up (+y), 1 down, 2 left (-x), 3 right, 4 pick, 5 place.
inline NaiveState naive_step(NaiveState s, int action, int n) {
  auto clampi = [n](int v) { return v < 0 ? 0 : (v > n - 1 ? n - 1 : v); };
  if (action < 4) {
    static constexpr int dx[] = {0, 0, -1, 1};
    static constexpr int dy[] = {1, -1, 0, 0};
    s[0] = clampi(s[0] + dx[action]);
    s[1] = clampi(s[1] + dy[action]);
  } else if (action == 4) {
    if (s[6] == 0) {
      if (s[2] == s[0] && s[3] == s[1]) {
        s[2] = s[3] = -1;
        s[6] = 1;
      } else if (s[4] == s[0] && s[5] == s[1]) {
        s[4] = s[5] = -1;
        s[6] = 2;
      }
    }
  } else if (s[6] != 0) {
    const int held = s[6] == 1 ? 2 : 4;
    const int other = s[6] == 1 ? 4 : 2;
    if (!(s[other] == s[0] && s[other + 1] == s[1])) {
      s[held] = s[0];
      s[held + 1] = s[1];
      s[6] = 0;
    }
  }
  return s;
}

inline bool naive_success(const NaiveState& s, const NaiveGoal& g) {
  const int off = g.target == 0 ? 2 : 4;
  return s[6] != g.target + 1 && s[off] == g.x && s[off + 1] == g.y;
}

/// Mutual-distinctness filter on the cells that are physically occupied.
inline bool naive_valid_pair(const NaiveState& s, const NaiveGoal& g) {
  std::vector<std::pair<int, int>> cells;
  if (s[6] == 0) {
    cells = {{s[2], s[3]}, {s[4], s[5]}, {g.x, g.y}};
  } else {
    const int floor = s[6] == 1 ? 4 : 2;
    cells = {{s[0], s[1]}, {s[floor], s[floor + 1]}, {g.x, g.y}};
  }
  return std::set<std::pair<int, int>>(cells.begin(), cells.end()).size() == 3;
}

inline std::vector<NaiveGoal> naive_goals(int n) {
  std::vector<NaiveGoal> out;
  for (int t = 0; t < 2; ++t)
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) out.push_back({t, x, y});
  return out;
}

/// Closure of one start state under naive_step, sorted.
inline std::vector<NaiveState> naive_reachable(int n) {
  const NaiveState start{0, 0, 0, 0, 1, 0, 0};
  std::set<NaiveState> seen{start};
  std::deque<NaiveState> q{start};
  while (!q.empty()) {
    const auto s = q.front();
    q.pop_front();
    for (int a = 0; a < 6; ++a) {
      const auto t = naive_step(s, a, n);
      if (seen.insert(t).second) q.push_back(t);
    }
  }
  return {seen.begin(), seen.end()};
}

/// Minimum steps from `start` to each goal (-1 if never satisfied).
inline std::vector<int> naive_distances(const NaiveState& start, int n, const std::vector<NaiveGoal>& goals) {
  std::vector<int> dist(goals.size(), -1);
  std::map<NaiveState, int> depth{{start, 0}};
  std::deque<NaiveState> q{start};
  while (!q.empty()) {
    const auto s = q.front();
    q.pop_front();
    const int d = depth[s];
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (dist[g] < 0 && naive_success(s, goals[g])) dist[g] = d;
    for (int a = 0; a < 6; ++a) {
      const auto t = naive_step(s, a, n);
      if (depth.emplace(t, d + 1).second) q.push_back(t);
    }
  }
  return dist;
}

/// Optimal actions at `s` for every goal, as 6-bit masks.
inline std::vector<std::uint8_t> naive_optimal_masks(const NaiveState& s, int n, const std::vector<NaiveGoal>& goals) {
  const auto here = naive_distances(s, n, goals);
  std::vector<std::uint8_t> masks(goals.size(), 0);
  for (int a = 0; a < 6; ++a) {
    const auto there = naive_distances(naive_step(s, a, n), n, goals);
    for (std::size_t g = 0; g < goals.size(); ++g)
      if (here[g] > 0 && there[g] >= 0 && there[g] + 1 == here[g]) masks[g] |= static_cast<std::uint8_t>(1u << a);
  }
  return masks;
}

/// One weighted outcome of the joint law over (S, G, A, V, Z).
struct JointRow {
  std::int64_t s, g, a, v, z;
  double mass;
};

using ZFunction = std::function<std::int64_t(const NaiveState&, const NaiveGoal&)>;

/// Uniform law over filtered pairs, each split over its optimal actions.
/// State ids index `naive_reachable(n)`.
inline std::vector<JointRow> naive_joint(int n, const ZFunction& z) {
  const auto states = naive_reachable(n);
  const auto goals = naive_goals(n);
  std::vector<JointRow> rows;
  std::size_t pairs = 0;
  for (std::size_t si = 0; si < states.size(); ++si) {
    const auto dist = naive_distances(states[si], n, goals);
    const auto masks = naive_optimal_masks(states[si], n, goals);
    for (std::size_t gi = 0; gi < goals.size(); ++gi) {
      if (!naive_valid_pair(states[si], goals[gi]) || dist[gi] <= 0) continue;
      ++pairs;
      const int k = std::popcount(masks[gi]);
      const auto zv = z(states[si], goals[gi]);
      for (int a = 0; a < 6; ++a)
        if (masks[gi] >> a & 1)
          rows.push_back({static_cast<std::int64_t>(si), static_cast<std::int64_t>(gi), a, -dist[gi], zv, 1.0 / k});
    }
  }
  for (auto& r : rows) r.mass /= static_cast<double>(pairs);
  return rows;
}

enum Var { S = 0, G = 1, A = 2, V = 3, Z = 4 };

/// Joint entropy of the listed variables.
inline double joint_entropy(const std::vector<JointRow>& rows, std::initializer_list<Var> vars) {
  std::map<std::vector<std::int64_t>, double> mass;
  for (const auto& r : rows) {
    const std::array<std::int64_t, 5> all{r.s, r.g, r.a, r.v, r.z};
    std::vector<std::int64_t> key;
    for (Var v : vars) key.push_back(all[v]);
    mass[key] += r.mass;
  }
  double h = 0;
  for (const auto& [k, p] : mass)
    if (p > 0) h -= p * std::log(p);
  return h;
}

/// H(X | Y) = H(X, Y) - H(Y).
inline double cond_entropy(const std::vector<JointRow>& rows, std::initializer_list<Var> x,
                           std::initializer_list<Var> y) {
  std::vector<Var> xy(y);
  xy.insert(xy.end(), x.begin(), x.end());
  std::map<std::vector<std::int64_t>, double> joint, cond;
  for (const auto& r : rows) {
    const std::array<std::int64_t, 5> all{r.s, r.g, r.a, r.v, r.z};
    std::vector<std::int64_t> ky, kxy;
    for (Var v : y) ky.push_back(all[v]);
    for (Var v : xy) kxy.push_back(all[v]);
    cond[ky] += r.mass;
    joint[kxy] += r.mass;
  }
  auto h = [](const auto& m) {
    double out = 0;
    for (const auto& [k, p] : m)
      if (p > 0) out -= p * std::log(p);
    return out;
  };
  return h(joint) - h(cond);
}

struct NaiveInfo {
  double h_a_sg, h_a_sz, h_a_sv, h_a_svz, h_v_sz;
  double delta_a, delta_v, i_az_sv, i_ag_sv, i_av_sz;
};

inline NaiveInfo naive_info(const std::vector<JointRow>& rows) {
  NaiveInfo r{};
  r.h_a_sg = cond_entropy(rows, {A}, {S, G});
  r.h_a_sz = cond_entropy(rows, {A}, {S, Z});
  r.h_a_sv = cond_entropy(rows, {A}, {S, V});
  r.h_a_svz = cond_entropy(rows, {A}, {S, V, Z});
  // V is a function of (S, G), so the action split does not change H(V|S,Z).
  r.h_v_sz = cond_entropy(rows, {V}, {S, Z});
  r.delta_a = r.h_a_sz - r.h_a_sg;
  r.delta_v = r.h_v_sz;
  r.i_ag_sv = r.h_a_sv - r.h_a_sg;
  r.i_az_sv = r.h_a_sv - r.h_a_svz;
  r.i_av_sz = r.h_a_sz - r.h_a_svz;
  return r;
}

}  // namespace asl::reference
