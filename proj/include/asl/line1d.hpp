#pragma once

// The integer-line example: states and goals in [-N, N], actions +1/-1,
// and two goal encoders that both determine the optimal value but only one
// of which determines the optimal action.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string_view>
#include <vector>

#include "asl/errors.hpp"
#include "asl/info_metrics.hpp"
#include "asl/rng.hpp"

namespace asl::line {

struct LineConfig {
  int radius = 8;
  double gamma = 0.9;
  int horizon = 8;
  std::size_t episodes_per_pair = 400;
  std::uint64_t seed = 0;

  void validate() const {
    if (radius < 1) throw InvalidArgument("radius must be >= 1");
    if (!(gamma > 0 && gamma < 1)) throw InvalidArgument("gamma must lie in (0, 1)");
    if (horizon < radius) throw InvalidArgument("horizon must be >= radius");
    if (episodes_per_pair < 1) throw InvalidArgument("episodes per pair must be >= 1");
  }
};

enum class Encoder { Sign, Dist };

inline std::string_view encoder_name(Encoder e) { return e == Encoder::Sign ? "phi_sign" : "phi_dist"; }

/// Optimal value under reward -1[s != g]: -(1 - gamma^|s-g|) / (1 - gamma).
inline double v_star_line(long s, long g, double gamma) {
  return -(1.0 - std::pow(gamma, static_cast<double>(std::labs(s - g)))) / (1.0 - gamma);
}

constexpr long phi_sign(long s, long g) noexcept { return s - g; }
constexpr long phi_dist(long s, long g) noexcept { return s > g ? s - g : g - s; }

inline long encode(Encoder e, long s, long g) { return e == Encoder::Sign ? phi_sign(s, g) : phi_dist(s, g); }

/// Action index 0 is +1, index 1 is -1.
inline constexpr std::size_t kLineActions = 2;
constexpr int action_delta(std::size_t a) noexcept { return a == 0 ? 1 : -1; }

/// Moves one cell, reflecting at the window edge (the agent stays put).
constexpr long step(long s, std::size_t a, int radius) noexcept {
  return std::clamp<long>(s + action_delta(a), -radius, radius);
}

/// Uniform law over ordered pairs (s, g) in the window with s != g. State and
/// goal ids are offset by the radius; the value level is -|s - g|, which
/// orders pairs the same way as V*.
inline PairLaw line_pair_law(const LineConfig& cfg) {
  cfg.validate();
  const long n = cfg.radius;
  PairLaw law;
  law.action_count = kLineActions;
  law.state_count = static_cast<std::size_t>(2 * n + 1);
  for (long s = -n; s <= n; ++s)
    for (long g = -n; g <= n; ++g) {
      if (s == g) continue;
      law.state.push_back(static_cast<std::uint32_t>(s + n));
      law.goal.push_back(static_cast<std::uint32_t>(g + n));
      law.value.push_back(-phi_dist(s, g));
      law.probs.push_back(g > s ? 1.0 : 0.0);
      law.probs.push_back(g > s ? 0.0 : 1.0);
    }
  law.index_states();
  return law;
}

inline std::vector<std::uint32_t> line_encodings(const LineConfig& cfg, const PairLaw& law, Encoder e) {
  const long n = cfg.radius;
  std::vector<std::uint32_t> z;
  z.reserve(law.size());
  for (std::size_t i = 0; i < law.size(); ++i) {
    const long s = static_cast<long>(law.state[i]) - n;
    const long g = static_cast<long>(law.goal[i]) - n;
    z.push_back(static_cast<std::uint32_t>(encode(e, s, g) + 2 * n));
  }
  return z;
}

inline InfoReport line_info_report(const LineConfig& cfg, Encoder e) {
  const auto law = line_pair_law(cfg);
  return info_report(law, line_encodings(cfg, law, e));
}

/// pi_phi(+1 | s, z) for every state and encoding value, averaged uniformly
/// over the goals g != s with phi(s, g) = z. Indexed [s + N][z + 2N]; NaN
/// where no goal produces z.
inline std::vector<std::vector<double>> line_mixed_policy(const LineConfig& cfg, Encoder e) {
  cfg.validate();
  const long n = cfg.radius;
  std::vector<std::vector<double>> up(2 * n + 1, std::vector<double>(4 * n + 1, 0.0));
  std::vector<std::vector<int>> count(2 * n + 1, std::vector<int>(4 * n + 1, 0));
  for (long s = -n; s <= n; ++s)
    for (long g = -n; g <= n; ++g) {
      if (s == g) continue;
      const auto zi = encode(e, s, g) + 2 * n;
      up[s + n][zi] += g > s ? 1.0 : 0.0;
      ++count[s + n][zi];
    }
  for (std::size_t s = 0; s < up.size(); ++s)
    for (std::size_t z = 0; z < up[s].size(); ++z)
      up[s][z] = count[s][z] ? up[s][z] / count[s][z] : std::nan("");
  return up;
}

struct ClassOutcome {
  int distance = 0;
  std::size_t pairs = 0;
  std::uint64_t episodes = 0;
  std::uint64_t successes = 0;
  double success_rate = 0;
};

/// Monte-Carlo success of the mixed policy from every ordered pair in the
/// window, grouped by |s0 - g|. Episode e of pair (s0, g) uses sub-stream
/// (seed, s0, g, e).
inline std::vector<ClassOutcome> line_mixed_policy_eval(const LineConfig& cfg, Encoder e) {
  const auto policy = line_mixed_policy(cfg, e);
  const long n = cfg.radius;
  std::vector<ClassOutcome> classes(static_cast<std::size_t>(2 * n + 1));
  for (std::size_t d = 0; d < classes.size(); ++d) classes[d].distance = static_cast<int>(d);
  const CounterRng root(cfg.seed, {0x4C494E45ULL /* "LINE" */});
  for (long s0 = -n; s0 <= n; ++s0)
    for (long g = -n; g <= n; ++g) {
      auto& cls = classes[static_cast<std::size_t>(phi_dist(s0, g))];
      ++cls.pairs;
      const auto pair_rng = root.split(static_cast<std::uint64_t>(s0 + n)).split(static_cast<std::uint64_t>(g + n));
      for (std::size_t ep = 0; ep < cfg.episodes_per_pair; ++ep) {
        auto rng = pair_rng.split(ep);
        long s = s0;
        for (int t = 0;; ++t) {
          if (s == g) {
            ++cls.successes;
            break;
          }
          if (t >= cfg.horizon) break;
          const double p_up = policy[s + n][encode(e, s, g) + 2 * n];
          const std::size_t a = rng.uniform01() < p_up ? 0 : 1;
          s = step(s, a, cfg.radius);
        }
        ++cls.episodes;
      }
    }
  for (auto& c : classes) c.success_rate = static_cast<double>(c.successes) / static_cast<double>(c.episodes);
  return classes;
}

}  // namespace asl::line
