#pragma once

// Exact success probability of the goal-averaged line policy, by forward
// propagation of the state distribution. Shares no code with the Monte-Carlo
// evaluator beyond the encoder formulas.

#include <algorithm>
#include <vector>

#include "asl/line1d.hpp"

namespace line_oracle {

/// p(+1 | s, z), recomputed by listing goals.
inline double p_up(const asl::line::LineConfig& cfg, asl::line::Encoder e, long s, long z) {
  int up = 0, all = 0;
  for (long g = -cfg.radius; g <= cfg.radius; ++g) {
    if (g == s || asl::line::encode(e, s, g) != z) continue;
    ++all;
    up += g > s;
  }
  return static_cast<double>(up) / all;
}

inline double exact_success(const asl::line::LineConfig& cfg, asl::line::Encoder e, long s0, long g) {
  const long n = cfg.radius;
  std::vector<double> mass(2 * n + 1, 0.0);
  mass[s0 + n] = 1;
  double done = 0;
  for (int t = 0;; ++t) {
    done += mass[g + n];
    mass[g + n] = 0;
    if (t == cfg.horizon) break;
    std::vector<double> next(mass.size(), 0.0);
    for (long s = -n; s <= n; ++s) {
      if (mass[s + n] == 0) continue;
      const double p = p_up(cfg, e, s, asl::line::encode(e, s, g));
      next[std::min(s + 1, n) + n] += mass[s + n] * p;
      next[std::max(s - 1, -n) + n] += mass[s + n] * (1 - p);
    }
    mass = std::move(next);
  }
  return done;
}

/// Mean exact success over all ordered pairs at distance d.
inline double exact_class_success(const asl::line::LineConfig& cfg, asl::line::Encoder e, long d) {
  double sum = 0;
  int count = 0;
  for (long s = -cfg.radius; s <= cfg.radius; ++s)
    for (long g = -cfg.radius; g <= cfg.radius; ++g)
      if (asl::line::phi_dist(s, g) == d) {
        sum += exact_success(cfg, e, s, g);
        ++count;
      }
  return sum / count;
}

}  // namespace line_oracle
