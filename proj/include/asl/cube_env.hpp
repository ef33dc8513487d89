#pragma once

// Discrete Cube: an n x n grid with an agent and two cubes (red, blue), six
// deterministic actions, and pick/place semantics.
//
// Canonical state order is lexicographic on (gripper, agent, red, blue) with
// gripper None < Red < Blue, positions ordered by (x, y), and Held sorting
// before every floor position. Goals are ordered by (target, x, y).

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "asl/errors.hpp"

namespace asl {

struct GridPos {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const GridPos&, const GridPos&) = default;
};

enum class Cube : std::uint8_t { Red = 0, Blue = 1 };
enum class Gripper : std::uint8_t { None = 0, Red = 1, Blue = 2 };

struct Held {
  friend constexpr auto operator<=>(const Held&, const Held&) = default;
};

/// Where a cube is: carried by the agent, or on a floor cell.
using CubePlace = std::variant<Held, GridPos>;

/// Up is +y, Down is -y, Left is -x, Right is +x.
enum class Action : std::uint8_t { Up = 0, Down, Left, Right, Pick, Place };
inline constexpr std::size_t kActionCount = 6;
inline constexpr std::array<Action, kActionCount> kAllActions{
    Action::Up, Action::Down, Action::Left, Action::Right, Action::Pick, Action::Place};

inline constexpr const char* action_name(Action a) {
  constexpr std::array<const char*, kActionCount> names{"up", "down", "left", "right", "pick", "place"};
  return names[static_cast<std::size_t>(a)];
}

constexpr Gripper gripper_for(Cube c) noexcept {
  return c == Cube::Red ? Gripper::Red : Gripper::Blue;
}

struct CubeState {
  GridPos agent;
  CubePlace red = GridPos{};
  CubePlace blue = GridPos{};
  Gripper gripper = Gripper::None;

  friend bool operator==(const CubeState&, const CubeState&) = default;
  friend std::strong_ordering operator<=>(const CubeState& a, const CubeState& b) {
    if (auto c = a.gripper <=> b.gripper; c != 0) return c;
    if (auto c = a.agent <=> b.agent; c != 0) return c;
    if (auto c = a.red <=> b.red; c != 0) return c;
    return a.blue <=> b.blue;
  }

  [[nodiscard]] const CubePlace& place(Cube c) const noexcept { return c == Cube::Red ? red : blue; }
  CubePlace& place(Cube c) noexcept { return c == Cube::Red ? red : blue; }
};

struct Goal {
  Cube target = Cube::Red;
  GridPos pos;
  friend constexpr auto operator<=>(const Goal&, const Goal&) = default;
};

/// Dense index into a canonical enumeration.
template <class Tag>
struct DenseIndex {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(const DenseIndex&, const DenseIndex&) = default;
};
using StateIndex = DenseIndex<struct StateIndexTag>;
using GoalIndex = DenseIndex<struct GoalIndexTag>;

struct StateGoalPair {
  StateIndex state;
  GoalIndex goal;
  friend constexpr auto operator<=>(const StateGoalPair&, const StateGoalPair&) = default;
};

inline bool in_grid(GridPos p, int n) noexcept { return p.x >= 0 && p.y >= 0 && p.x < n && p.y < n; }

inline bool is_held(const CubePlace& p) noexcept { return std::holds_alternative<Held>(p); }

/// Cube position on the grid; a held cube sits at the agent's cell.
inline GridPos cube_position(const CubeState& s, Cube c) noexcept {
  const auto& p = s.place(c);
  return is_held(p) ? s.agent : std::get<GridPos>(p);
}

inline bool is_valid(const CubeState& s, int n) {
  if (!in_grid(s.agent, n)) return false;
  for (Cube c : {Cube::Red, Cube::Blue}) {
    const auto& p = s.place(c);
    const bool held = is_held(p);
    if (held != (s.gripper == gripper_for(c))) return false;
    if (!held && !in_grid(std::get<GridPos>(p), n)) return false;
  }
  if (s.gripper == Gripper::None && s.red == s.blue) return false;
  return true;
}

/// Deterministic transition. Failed pick/place leave the state unchanged.
inline CubeState step(const CubeState& s, Action a, int n) {
  CubeState out = s;
  auto move = [&](int dx, int dy) {
    out.agent.x = std::min(n - 1, std::max(0, s.agent.x + dx));
    out.agent.y = std::min(n - 1, std::max(0, s.agent.y + dy));
  };
  switch (a) {
    case Action::Up: move(0, 1); break;
    case Action::Down: move(0, -1); break;
    case Action::Left: move(-1, 0); break;
    case Action::Right: move(1, 0); break;
    case Action::Pick:
      if (s.gripper == Gripper::None) {
        if (s.red == CubePlace{s.agent}) {
          out.red = Held{};
          out.gripper = Gripper::Red;
        } else if (s.blue == CubePlace{s.agent}) {
          out.blue = Held{};
          out.gripper = Gripper::Blue;
        }
      }
      break;
    case Action::Place:
      if (s.gripper != Gripper::None) {
        const Cube held = s.gripper == Gripper::Red ? Cube::Red : Cube::Blue;
        const Cube other = held == Cube::Red ? Cube::Blue : Cube::Red;
        if (s.place(other) != CubePlace{s.agent}) {
          out.place(held) = s.agent;
          out.gripper = Gripper::None;
        }
      }
      break;
  }
  return out;
}

/// Target cube on the goal cell and not held.
inline bool is_success(const CubeState& s, const Goal& g) noexcept {
  if (s.gripper == gripper_for(g.target)) return false;
  return std::get<GridPos>(s.place(g.target)) == g.pos;
}

/// Pair filter: with an empty gripper the two cubes and the goal cell are
/// mutually distinct; while holding, the agent, the floor cube and the goal
/// cell are mutually distinct.
inline bool is_valid_pair(const CubeState& s, const Goal& g) noexcept {
  if (s.gripper == Gripper::None) {
    const auto r = std::get<GridPos>(s.red);
    const auto b = std::get<GridPos>(s.blue);
    return r != b && r != g.pos && b != g.pos;
  }
  const Cube floor = s.gripper == Gripper::Red ? Cube::Blue : Cube::Red;
  const auto f = std::get<GridPos>(s.place(floor));
  return s.agent != f && s.agent != g.pos && f != g.pos;
}

/// Enumerated reachable states with the inverse index map.
class StateSpace {
 public:
  StateSpace() = default;

  explicit StateSpace(int n) : n_(n) {
    if (n < 2) throw InvalidConfiguration("grid size must be at least 2, got " + std::to_string(n));
    const int cells = n * n;
    lookup_.assign(static_cast<std::size_t>(3 * cells * (cells + 1) * (cells + 1)), kAbsent);
    std::vector<CubePlace> places;
    places.emplace_back(Held{});
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) places.emplace_back(GridPos{x, y});
    for (Gripper h : {Gripper::None, Gripper::Red, Gripper::Blue})
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          for (const auto& r : places)
            for (const auto& b : places) {
              CubeState s{GridPos{x, y}, r, b, h};
              if (!is_valid(s, n)) continue;
              lookup_[key(s)] = static_cast<std::uint32_t>(states_.size());
              states_.push_back(s);
            }
  }

  [[nodiscard]] int grid_size() const noexcept { return n_; }
  [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
  [[nodiscard]] const std::vector<CubeState>& states() const noexcept { return states_; }
  [[nodiscard]] const CubeState& operator[](StateIndex i) const { return states_.at(i.value); }

  [[nodiscard]] std::optional<StateIndex> find(const CubeState& s) const {
    if (!is_valid(s, n_)) return std::nullopt;
    const auto v = lookup_[key(s)];
    if (v == kAbsent) return std::nullopt;
    return StateIndex{v};
  }

  [[nodiscard]] StateIndex index_of(const CubeState& s) const {
    if (auto i = find(s)) return *i;
    throw InvalidArgument("state is not in the enumerated state space");
  }

 private:
  static constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;

  [[nodiscard]] std::size_t key(const CubeState& s) const noexcept {
    const std::size_t cells = static_cast<std::size_t>(n_ * n_);
    auto cell = [&](GridPos p) { return static_cast<std::size_t>(p.x * n_ + p.y); };
    auto place = [&](const CubePlace& p) { return is_held(p) ? 0 : 1 + cell(std::get<GridPos>(p)); };
    return ((static_cast<std::size_t>(s.gripper) * cells + cell(s.agent)) * (cells + 1) + place(s.red)) *
               (cells + 1) +
           place(s.blue);
  }

  int n_ = 0;
  std::vector<CubeState> states_;
  std::vector<std::uint32_t> lookup_;
};

inline StateSpace enumerate_states(int n) { return StateSpace(n); }

inline std::vector<Goal> enumerate_goals(int n) {
  if (n < 2) throw InvalidConfiguration("grid size must be at least 2, got " + std::to_string(n));
  std::vector<Goal> goals;
  for (Cube t : {Cube::Red, Cube::Blue})
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) goals.push_back(Goal{t, GridPos{x, y}});
  return goals;
}

inline std::vector<StateGoalPair> valid_pairs(const StateSpace& space, const std::vector<Goal>& goals) {
  std::vector<StateGoalPair> out;
  for (std::uint32_t s = 0; s < space.size(); ++s)
    for (std::uint32_t g = 0; g < goals.size(); ++g)
      if (is_valid_pair(space.states()[s], goals[g])) out.push_back({StateIndex{s}, GoalIndex{g}});
  return out;
}

inline std::vector<StateGoalPair> valid_pairs(int n) { return valid_pairs(StateSpace(n), enumerate_goals(n)); }

/// Immutable environment tables: states, goals, transition table, and the
/// filtered pair list (sorted by state, then goal) with per-state offsets.
class CubeEnv {
 public:
  explicit CubeEnv(int n = 4) : space_(n), goals_(enumerate_goals(n)) {
    const std::size_t count = space_.size();
    next_.resize(count * kActionCount);
    for (std::size_t s = 0; s < count; ++s)
      for (std::size_t a = 0; a < kActionCount; ++a)
        next_[s * kActionCount + a] = space_.index_of(step(space_.states()[s], kAllActions[a], n)).value;
    success_.resize(count * goals_.size());
    for (std::size_t s = 0; s < count; ++s)
      for (std::size_t g = 0; g < goals_.size(); ++g)
        success_[s * goals_.size() + g] = is_success(space_.states()[s], goals_[g]);
    pairs_ = valid_pairs(space_, goals_);
    pair_offsets_.assign(count + 1, 0);
    for (const auto& p : pairs_) ++pair_offsets_[p.state.value + 1];
    for (std::size_t s = 0; s < count; ++s) pair_offsets_[s + 1] += pair_offsets_[s];
  }

  [[nodiscard]] int grid_size() const noexcept { return space_.grid_size(); }
  [[nodiscard]] const StateSpace& space() const noexcept { return space_; }
  [[nodiscard]] std::size_t state_count() const noexcept { return space_.size(); }
  [[nodiscard]] std::size_t goal_count() const noexcept { return goals_.size(); }
  [[nodiscard]] const CubeState& state(StateIndex s) const { return space_[s]; }
  [[nodiscard]] const Goal& goal(GoalIndex g) const { return goals_.at(g.value); }
  [[nodiscard]] const std::vector<Goal>& goals() const noexcept { return goals_; }

  [[nodiscard]] StateIndex next(StateIndex s, Action a) const noexcept {
    return StateIndex{next_[s.value * kActionCount + static_cast<std::size_t>(a)]};
  }
  [[nodiscard]] const std::vector<std::uint32_t>& transitions() const noexcept { return next_; }

  [[nodiscard]] bool success(StateIndex s, GoalIndex g) const noexcept {
    return success_[s.value * goals_.size() + g.value] != 0;
  }

  [[nodiscard]] const std::vector<StateGoalPair>& pairs() const noexcept { return pairs_; }
  /// pairs()[pair_begin(s) .. pair_begin(s+1)) are the valid pairs of state s.
  [[nodiscard]] std::size_t pair_begin(std::uint32_t s) const noexcept { return pair_offsets_[s]; }

 private:
  StateSpace space_;
  std::vector<Goal> goals_;
  std::vector<std::uint32_t> next_;
  std::vector<std::uint8_t> success_;
  std::vector<StateGoalPair> pairs_;
  std::vector<std::size_t> pair_offsets_;
};

}  // namespace asl
