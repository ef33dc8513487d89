#pragma once

// Exact shortest-path oracle for Discrete Cube: D*(s, g) by backward BFS from
// the success states of each goal, V* = -D*, and the optimal action sets.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "asl/cube_env.hpp"
#include "asl/errors.hpp"
#include "asl/parallel.hpp"

namespace asl {

inline constexpr std::uint16_t kUnreachable = 0xFFFF;

using ActionDistribution = std::array<double, kActionCount>;

class OracleTables {
 public:
  OracleTables() = default;
  OracleTables(int n, std::size_t states, std::size_t goals)
      : n_(n), states_(states), goals_(goals), dist_(states * goals, kUnreachable), masks_(states * goals, 0) {}

  [[nodiscard]] int grid_size() const noexcept { return n_; }
  [[nodiscard]] std::size_t state_count() const noexcept { return states_; }
  [[nodiscard]] std::size_t goal_count() const noexcept { return goals_; }

  [[nodiscard]] std::uint16_t dist(StateIndex s, GoalIndex g) const noexcept { return dist_[cell(s, g)]; }
  [[nodiscard]] bool reachable(StateIndex s, GoalIndex g) const noexcept { return dist(s, g) != kUnreachable; }
  /// Bit a is set iff action a is optimal at (s, g).
  [[nodiscard]] std::uint8_t opt_actions(StateIndex s, GoalIndex g) const noexcept { return masks_[cell(s, g)]; }

  [[nodiscard]] const std::vector<std::uint16_t>& dist_table() const noexcept { return dist_; }
  [[nodiscard]] const std::vector<std::uint8_t>& mask_table() const noexcept { return masks_; }
  std::vector<std::uint16_t>& dist_table() noexcept { return dist_; }
  std::vector<std::uint8_t>& mask_table() noexcept { return masks_; }

  [[nodiscard]] std::size_t cell(StateIndex s, GoalIndex g) const noexcept {
    return static_cast<std::size_t>(s.value) * goals_ + g.value;
  }

  friend bool operator==(const OracleTables&, const OracleTables&) = default;

 private:
  int n_ = 0;
  std::size_t states_ = 0;
  std::size_t goals_ = 0;
  std::vector<std::uint16_t> dist_;
  std::vector<std::uint8_t> masks_;
};

namespace detail {

struct ReverseAdjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> sources;
};

inline ReverseAdjacency reverse_adjacency(const CubeEnv& env) {
  const std::size_t count = env.state_count();
  const auto& next = env.transitions();
  ReverseAdjacency adj;
  adj.offsets.assign(count + 1, 0);
  for (auto t : next) ++adj.offsets[t + 1];
  for (std::size_t s = 0; s < count; ++s) adj.offsets[s + 1] += adj.offsets[s];
  adj.sources.resize(next.size());
  auto fill = adj.offsets;
  // Ascending source order inside each predecessor list.
  for (std::size_t s = 0; s < count; ++s)
    for (std::size_t a = 0; a < kActionCount; ++a) {
      const auto t = next[s * kActionCount + a];
      auto& slot = fill[t];
      if (slot > adj.offsets[t] && adj.sources[slot - 1] == s) continue;  // self-loop or repeated edge
      adj.sources[slot++] = static_cast<std::uint32_t>(s);
    }
  // Compact out the slots left empty by deduplicated edges.
  std::vector<std::size_t> offsets(count + 1, 0);
  std::vector<std::uint32_t> sources;
  sources.reserve(adj.sources.size());
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t k = adj.offsets[t]; k < fill[t]; ++k) sources.push_back(adj.sources[k]);
    offsets[t + 1] = sources.size();
  }
  return {std::move(offsets), std::move(sources)};
}

}  // namespace detail

/// Builds the distance and optimal-action tables. Goals are independent and
/// may be processed concurrently; the result does not depend on `threads`.
inline OracleTables compute_oracle(const CubeEnv& env, unsigned threads = 1) {
  const std::size_t count = env.state_count();
  const std::size_t goals = env.goal_count();
  OracleTables tables(env.grid_size(), count, goals);
  const auto adj = detail::reverse_adjacency(env);
  auto& dist = tables.dist_table();

  parallel_for(goals, threads, [&](std::size_t gi) {
    const GoalIndex g{static_cast<std::uint32_t>(gi)};
    std::vector<std::uint16_t> d(count, kUnreachable);
    std::vector<std::uint32_t> frontier;
    for (std::uint32_t s = 0; s < count; ++s)
      if (env.success(StateIndex{s}, g)) {
        d[s] = 0;
        frontier.push_back(s);
      }
    std::vector<std::uint32_t> next_frontier;
    for (std::uint16_t level = 1; !frontier.empty(); ++level) {
      next_frontier.clear();
      for (auto s : frontier)
        for (std::size_t k = adj.offsets[s]; k < adj.offsets[s + 1]; ++k) {
          const auto p = adj.sources[k];
          if (d[p] == kUnreachable) {
            d[p] = level;
            next_frontier.push_back(p);
          }
        }
      std::sort(next_frontier.begin(), next_frontier.end());
      frontier.swap(next_frontier);
    }
    for (std::size_t s = 0; s < count; ++s) dist[s * goals + gi] = d[s];
  });

  auto& masks = tables.mask_table();
  for (std::uint32_t s = 0; s < count; ++s)
    for (std::uint32_t g = 0; g < goals; ++g) {
      const auto here = dist[s * goals + g];
      if (here == kUnreachable || here == 0) continue;
      std::uint8_t mask = 0;
      for (std::size_t a = 0; a < kActionCount; ++a) {
        const auto t = env.transitions()[s * kActionCount + a];
        if (dist[t * goals + g] + 1 == here) mask |= static_cast<std::uint8_t>(1u << a);
      }
      masks[s * goals + g] = mask;
    }
  return tables;
}

/// V*(s, g) = -D*(s, g).
inline int value(const OracleTables& t, StateIndex s, GoalIndex g) {
  const auto d = t.dist(s, g);
  if (d == kUnreachable)
    throw UnreachableError("goal " + std::to_string(g.value) + " is unreachable from state " +
                           std::to_string(s.value));
  return -static_cast<int>(d);
}

/// Uniform distribution over the optimal actions at (s, g).
inline ActionDistribution optimal_policy(const OracleTables& t, StateIndex s, GoalIndex g) {
  const auto d = t.dist(s, g);
  if (d == kUnreachable) throw UnreachableError("no optimal policy: goal unreachable");
  if (d == 0) throw SuccessStateError("no optimal policy: state already satisfies the goal");
  const auto mask = t.opt_actions(s, g);
  const double p = 1.0 / std::popcount(mask);
  ActionDistribution out{};
  for (std::size_t a = 0; a < kActionCount; ++a)
    if (mask & (1u << a)) out[a] = p;
  return out;
}

inline std::size_t unreachable_pair_count(const OracleTables& t, const CubeEnv& env) {
  return static_cast<std::size_t>(std::count_if(env.pairs().begin(), env.pairs().end(), [&](const auto& p) {
    return !t.reachable(p.state, p.goal);
  }));
}

// Binary cache: header {magic[8], version, n, state_count, goal_count} as
// little-endian u32 after the magic, then row-major u16 distances and u8 masks.

inline constexpr char kOracleMagic[8] = {'A', 'S', 'L', 'O', 'R', 'C', 'L', '\0'};
inline constexpr std::uint32_t kOracleFormatVersion = 1;

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return true;
}

}  // namespace detail

inline void save_oracle(const OracleTables& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open oracle cache for writing: " + path.string());
  out.write(kOracleMagic, sizeof kOracleMagic);
  detail::put_u32(out, kOracleFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(t.grid_size()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.state_count()));
  detail::put_u32(out, static_cast<std::uint32_t>(t.goal_count()));
  for (auto d : t.dist_table()) {
    const unsigned char b[2] = {static_cast<unsigned char>(d), static_cast<unsigned char>(d >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
  }
  out.write(reinterpret_cast<const char*>(t.mask_table().data()),
            static_cast<std::streamsize>(t.mask_table().size()));
  if (!out) throw IoError("failed writing oracle cache: " + path.string());
}

/// Loads a cache file; returns nullopt when it is missing, truncated, or its
/// header does not match (grid size, format version, table shape).
inline std::optional<OracleTables> load_oracle(const std::filesystem::path& path, const CubeEnv& env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kOracleMagic, sizeof magic) != 0) return std::nullopt;
  std::uint32_t version = 0, n = 0, states = 0, goals = 0;
  if (!detail::get_u32(in, version) || !detail::get_u32(in, n) || !detail::get_u32(in, states) ||
      !detail::get_u32(in, goals))
    return std::nullopt;
  if (version != kOracleFormatVersion || static_cast<int>(n) != env.grid_size() || states != env.state_count() ||
      goals != env.goal_count())
    return std::nullopt;
  OracleTables t(static_cast<int>(n), states, goals);
  std::vector<unsigned char> raw(t.dist_table().size() * 2);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) return std::nullopt;
  for (std::size_t i = 0; i < t.dist_table().size(); ++i)
    t.dist_table()[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
  if (!in.read(reinterpret_cast<char*>(t.mask_table().data()), static_cast<std::streamsize>(t.mask_table().size())))
    return std::nullopt;
  return t;
}

/// Reads the cache at `path`, or computes the tables and rewrites the cache.
inline OracleTables load_or_compute_oracle(const std::filesystem::path& path, const CubeEnv& env,
                                           unsigned threads = 1) {
  if (auto cached = load_oracle(path, env)) return std::move(*cached);
  auto tables = compute_oracle(env, threads);
  save_oracle(tables, path);
  return tables;
}

}  // namespace asl
