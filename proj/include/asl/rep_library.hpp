#pragma once

// Goal representations for Discrete Cube: relative-position features, scalar
// feature transforms, the four baseline encoders, and a seeded template
// sampler that produces a library of encoder specs.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "asl/cube_env.hpp"
#include "asl/errors.hpp"
#include "asl/oracle.hpp"
#include "asl/rng.hpp"

namespace asl {

/// Relative-position features of a state-goal pair. The target position is
/// the agent's cell while the target is held.
struct FeatureVector {
  int h = 0;  ///< gripper: 0 none, 1 red, 2 blue
  int t = 0;  ///< target cube: 0 red, 1 blue
  int dx1 = 0, dy1 = 0;  ///< agent -> target cube
  int dx2 = 0, dy2 = 0;  ///< target cube -> goal cell
  int d_at = 0, d_bg = 0;
  int v = 0;  ///< V*(s, g)
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline FeatureVector features(const CubeEnv& env, const OracleTables& oracle, StateIndex s, GoalIndex g) {
  const auto& st = env.state(s);
  const auto& goal = env.goal(g);
  const GridPos target = cube_position(st, goal.target);
  FeatureVector f;
  f.h = static_cast<int>(st.gripper);
  f.t = static_cast<int>(goal.target);
  f.dx1 = target.x - st.agent.x;
  f.dy1 = target.y - st.agent.y;
  f.dx2 = goal.pos.x - target.x;
  f.dy2 = goal.pos.y - target.y;
  f.d_at = std::abs(f.dx1) + std::abs(f.dy1);
  f.d_bg = std::abs(f.dx2) + std::abs(f.dy2);
  f.v = value(oracle, s, g);
  return f;
}

enum class Field : std::uint8_t { H, T, Dx1, Dy1, Dx2, Dy2, DAt, DBg, V };

inline constexpr std::array<std::string_view, 9> kFieldNames{"h", "t", "dx1", "dy1", "dx2", "dy2", "d_at", "d_bg", "v"};

constexpr std::string_view field_name(Field f) { return kFieldNames[static_cast<std::size_t>(f)]; }

inline Field parse_field(std::string_view name) {
  for (std::size_t i = 0; i < kFieldNames.size(); ++i)
    if (kFieldNames[i] == name) return static_cast<Field>(i);
  throw InvalidArgument("unknown feature field: " + std::string(name));
}

constexpr int field_value(const FeatureVector& f, Field field) noexcept {
  switch (field) {
    case Field::H: return f.h;
    case Field::T: return f.t;
    case Field::Dx1: return f.dx1;
    case Field::Dy1: return f.dy1;
    case Field::Dx2: return f.dx2;
    case Field::Dy2: return f.dy2;
    case Field::DAt: return f.d_at;
    case Field::DBg: return f.d_bg;
    case Field::V: return f.v;
  }
  return 0;
}

enum class TransformKind : std::uint8_t {
  Raw,
  Sign,
  Abs,
  Clip,
  Parity,
  SgnBucket,
  DistBucket,
  DistParity,
  ValueRaw,
  ValueBucket3,
};

struct Transform {
  TransformKind kind = TransformKind::Raw;
  int k = 0;  ///< Clip: 1..3, SgnBucket: 2..3, DistBucket: 2..4
  friend constexpr bool operator==(const Transform&, const Transform&) = default;
};

constexpr int sgn(int x) noexcept { return (x > 0) - (x < 0); }

constexpr int apply_transform(Transform tr, int x) noexcept {
  switch (tr.kind) {
    case TransformKind::Raw:
    case TransformKind::ValueRaw: return x;
    case TransformKind::Sign: return sgn(x);
    case TransformKind::Abs: return x < 0 ? -x : x;
    case TransformKind::Clip: return std::max(-tr.k, std::min(tr.k, x));
    case TransformKind::Parity:
    case TransformKind::DistParity: return (x < 0 ? -x : x) % 2;
    case TransformKind::SgnBucket: return sgn(x) * std::min(x < 0 ? -x : x, tr.k);
    case TransformKind::DistBucket: return std::min(x, tr.k);
    case TransformKind::ValueBucket3: return std::min(-x, 4);  // cost buckets {0,1,2,3,>=4}
  }
  return x;
}

inline std::string transform_name(Transform tr) {
  switch (tr.kind) {
    case TransformKind::Raw: return "raw";
    case TransformKind::Sign: return "sign";
    case TransformKind::Abs: return "abs";
    case TransformKind::Clip: return "clip_" + std::to_string(tr.k);
    case TransformKind::Parity: return "parity";
    case TransformKind::SgnBucket: return "sgn_bucket_" + std::to_string(tr.k);
    case TransformKind::DistBucket: return "bucket_" + std::to_string(tr.k);
    case TransformKind::DistParity: return "dist_parity";
    case TransformKind::ValueRaw: return "value_raw";
    case TransformKind::ValueBucket3: return "value_bucket_3";
  }
  return "raw";
}

inline Transform parse_transform(std::string_view name) {
  auto suffix = [&](std::string_view prefix) -> int {
    const auto rest = name.substr(prefix.size());
    int k = 0;
    const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec != std::errc{} || end != rest.data() + rest.size() || k < 1)
      throw InvalidArgument("bad transform parameter: " + std::string(name));
    return k;
  };
  if (name == "raw") return {TransformKind::Raw};
  if (name == "sign") return {TransformKind::Sign};
  if (name == "abs") return {TransformKind::Abs};
  if (name == "parity") return {TransformKind::Parity};
  if (name == "dist_parity") return {TransformKind::DistParity};
  if (name == "value_raw") return {TransformKind::ValueRaw};
  if (name == "value_bucket_3") return {TransformKind::ValueBucket3};
  if (name.starts_with("clip_")) return {TransformKind::Clip, suffix("clip_")};
  if (name.starts_with("sgn_bucket_")) return {TransformKind::SgnBucket, suffix("sgn_bucket_")};
  if (name.starts_with("bucket_")) return {TransformKind::DistBucket, suffix("bucket_")};
  throw InvalidArgument("unknown transform: " + std::string(name));
}

inline const std::vector<Transform>& directional_transforms() {
  static const std::vector<Transform> v{
      {TransformKind::Raw},          {TransformKind::Sign},         {TransformKind::Abs},
      {TransformKind::Clip, 1},      {TransformKind::Clip, 2},      {TransformKind::Clip, 3},
      {TransformKind::Parity},       {TransformKind::SgnBucket, 2}, {TransformKind::SgnBucket, 3},
  };
  return v;
}

inline const std::vector<Transform>& distance_transforms() {
  static const std::vector<Transform> v{
      {TransformKind::Raw},           {TransformKind::DistBucket, 2}, {TransformKind::DistBucket, 3},
      {TransformKind::DistBucket, 4}, {TransformKind::DistParity},
  };
  return v;
}

inline const std::vector<Transform>& value_transforms() {
  static const std::vector<Transform> v{{TransformKind::ValueRaw}, {TransformKind::ValueBucket3}};
  return v;
}

// Encoder terms. Each term contributes one integer to the encoding tuple.

struct FeatureTerm {
  Field field = Field::H;
  Transform transform{};
  friend bool operator==(const FeatureTerm&, const FeatureTerm&) = default;
};

/// Polynomial rolling hash of raw field values reduced modulo `modulus`.
struct HashTerm {
  std::vector<Field> fields;
  int modulus = 2;
  friend bool operator==(const HashTerm&, const HashTerm&) = default;
};

/// (c . (dx1, dy1, dx2, dy2)) mod `modulus`, as a non-negative residue.
struct ProjTerm {
  std::array<int, 4> coef{};
  int modulus = 2;
  friend bool operator==(const ProjTerm&, const ProjTerm&) = default;
};

using Term = std::variant<FeatureTerm, HashTerm, ProjTerm>;

inline constexpr std::uint64_t kHashMultiplier = 1000003;
inline constexpr std::uint64_t kHashOffset = 17;

inline std::uint64_t rolling_hash(const FeatureVector& f, const std::vector<Field>& fields) noexcept {
  std::uint64_t acc = kHashOffset;
  for (Field field : fields)
    acc = acc * kHashMultiplier + static_cast<std::uint64_t>(static_cast<std::int64_t>(field_value(f, field)));
  return acc;
}

inline int evaluate_term(const Term& term, const FeatureVector& f) {
  return std::visit(
      [&](const auto& t) -> int {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, FeatureTerm>) {
          return apply_transform(t.transform, field_value(f, t.field));
        } else if constexpr (std::is_same_v<T, HashTerm>) {
          return static_cast<int>(rolling_hash(f, t.fields) % static_cast<std::uint64_t>(t.modulus));
        } else {
          const int dot = t.coef[0] * f.dx1 + t.coef[1] * f.dy1 + t.coef[2] * f.dx2 + t.coef[3] * f.dy2;
          return ((dot % t.modulus) + t.modulus) % t.modulus;
        }
      },
      term);
}

inline std::string term_text(const Term& term) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, FeatureTerm>) {
          std::string s(field_name(t.field));
          if (t.transform.kind != TransformKind::Raw && t.transform.kind != TransformKind::ValueRaw)
            s += "/" + transform_name(t.transform);
          return s;
        } else if constexpr (std::is_same_v<T, HashTerm>) {
          std::string s = "hash(";
          for (std::size_t i = 0; i < t.fields.size(); ++i) {
            if (i) s += '+';
            s += field_name(t.fields[i]);
          }
          return s + ")%" + std::to_string(t.modulus);
        } else {
          std::string s = "proj(";
          for (std::size_t i = 0; i < 4; ++i) {
            if (i) s += ':';
            s += std::to_string(t.coef[i]);
          }
          return s + ")%" + std::to_string(t.modulus);
        }
      },
      term);
}

/// An encoding Z = phi(s, g): a short tuple of small integers.
inline constexpr std::size_t kMaxRepArity = 12;

struct RepValue {
  std::array<std::int32_t, kMaxRepArity> parts{};
  std::uint8_t size = 0;

  void push(std::int32_t v) {
    if (size == kMaxRepArity) throw InvalidArgument("encoding exceeds maximum arity");
    parts[size++] = v;
  }
  friend bool operator==(const RepValue& a, const RepValue& b) noexcept {
    return a.size == b.size && std::equal(a.parts.begin(), a.parts.begin() + a.size, b.parts.begin());
  }
};

struct RepValueHash {
  std::size_t operator()(const RepValue& r) const noexcept {
    std::uint64_t h = r.size;
    for (std::size_t i = 0; i < r.size; ++i) h = mix64(h ^ static_cast<std::uint32_t>(r.parts[i]));
    return static_cast<std::size_t>(h);
  }
};

enum class BaselineKind : std::uint8_t { Full, Signs, ValueOnly, Distances };

inline constexpr std::array<BaselineKind, 4> kAllBaselines{BaselineKind::Full, BaselineKind::Signs,
                                                           BaselineKind::ValueOnly, BaselineKind::Distances};

inline constexpr std::string_view kBaselineFamily = "baseline";

struct RepresentationSpec {
  std::string id;
  std::string family;  ///< "baseline" or a template name
  std::uint64_t seed = 0;
  std::uint32_t index = 0;
  std::vector<Term> terms;          ///< used when the gripper is empty, or always when not split
  std::vector<Term> holding_terms;  ///< used while holding a cube when `phase_split`
  bool phase_split = false;

  [[nodiscard]] const std::vector<Term>& terms_for(int gripper) const noexcept {
    return phase_split && gripper != 0 ? holding_terms : terms;
  }
  friend bool operator==(const RepresentationSpec&, const RepresentationSpec&) = default;
};

inline RepValue encode(const RepresentationSpec& spec, const FeatureVector& f) {
  RepValue z;
  for (const auto& term : spec.terms_for(f.h)) z.push(evaluate_term(term, f));
  return z;
}

inline RepValue encode(const RepresentationSpec& spec, const CubeEnv& env, const OracleTables& oracle, StateIndex s,
                       GoalIndex g) {
  return encode(spec, features(env, oracle, s, g));
}

inline std::string terms_text(const std::vector<Term>& terms) {
  std::string s;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) s += ';';
    s += term_text(terms[i]);
  }
  return s;
}

inline std::string spec_params_text(const RepresentationSpec& spec) {
  if (!spec.phase_split) return "[" + terms_text(spec.terms) + "]";
  return "free[" + terms_text(spec.terms) + "]hold[" + terms_text(spec.holding_terms) + "]";
}

namespace detail {

inline FeatureTerm feat(Field f, Transform tr = {}) { return {f, tr}; }

}  // namespace detail

inline std::string_view baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Full: return "full";
    case BaselineKind::Signs: return "signs";
    case BaselineKind::ValueOnly: return "value_only";
    case BaselineKind::Distances: return "distances";
  }
  return "full";
}

inline RepresentationSpec baseline(BaselineKind kind) {
  using detail::feat;
  RepresentationSpec spec;
  spec.id = std::string(baseline_name(kind));
  spec.family = std::string(kBaselineFamily);
  const Transform sign{TransformKind::Sign};
  switch (kind) {
    case BaselineKind::Full:
      spec.terms = {feat(Field::H), feat(Field::T), feat(Field::Dx1), feat(Field::Dy1), feat(Field::Dx2),
                    feat(Field::Dy2)};
      break;
    case BaselineKind::Signs:
      spec.terms = {feat(Field::H),          feat(Field::T),          feat(Field::Dx1, sign),
                    feat(Field::Dy1, sign), feat(Field::Dx2, sign), feat(Field::Dy2, sign)};
      break;
    case BaselineKind::ValueOnly: spec.terms = {feat(Field::V, {TransformKind::ValueRaw})}; break;
    case BaselineKind::Distances: spec.terms = {feat(Field::H), feat(Field::DAt), feat(Field::DBg)}; break;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Template sampler.

struct TemplateInfo {
  std::string_view name;
  double weight;
};

/// Uniform base weight, doubled for the four families that anchor the
/// extremes of the sufficiency plane.
inline constexpr std::array<TemplateInfo, 11> kTemplates{{
    {"value_plus", 2.0},
    {"dist_coarse", 2.0},
    {"dir_subset", 2.0},
    {"dir_coarse", 2.0},
    {"mixed_dir_dist", 1.0},
    {"phase_split", 1.0},
    {"proj_mod", 1.0},
    {"two_hash", 1.0},
    {"hashed_actor", 1.0},
    {"hashed_dist", 1.0},
    {"drop_id", 1.0},
}};

// Parameter ranges chosen for the sampler.
inline constexpr double kIncludeTargetProbability = 0.5;
inline constexpr double kSubsetInclusionProbability = 0.5;
inline constexpr int kHashModulusMin = 3;
inline constexpr int kHashModulusMax = 24;
inline constexpr int kProjCoefMin = -2;
inline constexpr int kProjCoefMax = 2;
inline constexpr int kProjModulusMin = 2;
inline constexpr int kProjModulusMax = 5;
inline constexpr int kProjCountMax = 3;

namespace detail {

template <class T>
const T& pick(CounterRng& rng, const std::vector<T>& v) {
  return v[rng.uniform_below(v.size())];
}

/// Each candidate independently kept with probability 1/2; resampled until nonempty.
inline std::vector<Field> nonempty_subset(CounterRng& rng, const std::vector<Field>& candidates) {
  for (;;) {
    std::vector<Field> out;
    for (Field f : candidates)
      if (rng.bernoulli(kSubsetInclusionProbability)) out.push_back(f);
    if (!out.empty()) return out;
  }
}

inline const std::vector<Field>& directional_fields() {
  static const std::vector<Field> v{Field::Dx1, Field::Dy1, Field::Dx2, Field::Dy2};
  return v;
}

inline bool is_directional(Field f) { return f == Field::Dx1 || f == Field::Dy1 || f == Field::Dx2 || f == Field::Dy2; }

inline Transform random_transform_for(CounterRng& rng, Field f) {
  return is_directional(f) ? pick(rng, directional_transforms()) : pick(rng, distance_transforms());
}

inline void push_header(CounterRng& rng, std::vector<Term>& terms, bool force_target) {
  terms.push_back(feat(Field::H));
  if (force_target || rng.bernoulli(kIncludeTargetProbability)) terms.push_back(feat(Field::T));
}

inline int hash_modulus(CounterRng& rng) {
  return static_cast<int>(rng.uniform_int(kHashModulusMin, kHashModulusMax));
}

inline void sample_template(std::string_view name, CounterRng& rng, RepresentationSpec& spec) {
  auto& terms = spec.terms;
  if (name == "value_plus") {
    push_header(rng, terms, false);
    terms.push_back(feat(Field::V, pick(rng, value_transforms())));
  } else if (name == "dist_coarse") {
    push_header(rng, terms, false);
    terms.push_back(feat(Field::DAt, pick(rng, distance_transforms())));
    terms.push_back(feat(Field::DBg, pick(rng, distance_transforms())));
  } else if (name == "dir_subset") {
    push_header(rng, terms, false);
    for (Field f : nonempty_subset(rng, directional_fields())) terms.push_back(feat(f, {TransformKind::Sign}));
  } else if (name == "dir_coarse") {
    push_header(rng, terms, true);
    for (Field f : directional_fields()) terms.push_back(feat(f, pick(rng, directional_transforms())));
  } else if (name == "mixed_dir_dist") {
    push_header(rng, terms, false);
    for (Field f : nonempty_subset(rng, directional_fields()))
      terms.push_back(feat(f, pick(rng, directional_transforms())));
    terms.push_back(feat(Field::DAt, pick(rng, distance_transforms())));
    terms.push_back(feat(Field::DBg, pick(rng, distance_transforms())));
  } else if (name == "phase_split") {
    static const std::vector<Field> all{Field::Dx1, Field::Dy1, Field::Dx2, Field::Dy2, Field::DAt, Field::DBg};
    spec.phase_split = true;
    for (auto* phase : {&spec.terms, &spec.holding_terms}) {
      push_header(rng, *phase, true);
      for (Field f : nonempty_subset(rng, all)) phase->push_back(feat(f, random_transform_for(rng, f)));
    }
  } else if (name == "proj_mod") {
    push_header(rng, terms, true);
    const auto count = rng.uniform_int(1, kProjCountMax);
    for (std::int64_t i = 0; i < count; ++i) {
      ProjTerm p;
      do {
        for (auto& c : p.coef) c = static_cast<int>(rng.uniform_int(kProjCoefMin, kProjCoefMax));
      } while (std::all_of(p.coef.begin(), p.coef.end(), [](int c) { return c == 0; }));
      p.modulus = static_cast<int>(rng.uniform_int(kProjModulusMin, kProjModulusMax));
      terms.push_back(p);
    }
  } else if (name == "two_hash") {
    push_header(rng, terms, true);
    terms.push_back(HashTerm{{Field::Dx1, Field::Dy1}, hash_modulus(rng)});
    terms.push_back(HashTerm{{Field::Dx2, Field::Dy2}, hash_modulus(rng)});
  } else if (name == "hashed_actor") {
    terms.push_back(HashTerm{{Field::H, Field::T, Field::Dx1, Field::Dy1, Field::Dx2, Field::Dy2}, hash_modulus(rng)});
  } else if (name == "hashed_dist") {
    terms.push_back(HashTerm{{Field::H, Field::DAt, Field::DBg}, hash_modulus(rng)});
  } else if (name == "drop_id") {
    terms.push_back(feat(Field::H));
    for (Field f : directional_fields()) terms.push_back(feat(f, pick(rng, directional_transforms())));
  } else {
    throw InvalidArgument("unknown template: " + std::string(name));
  }
}

inline std::string pad_index(std::uint32_t i) {
  std::string s = std::to_string(i);
  return s.size() >= 4 ? s : std::string(4 - s.size(), '0') + s;
}

}  // namespace detail

/// Spec `index` of the library drawn from `seed`. Depends only on (seed,
/// index), so any prefix of a library equals the smaller library.
inline RepresentationSpec sample_spec(std::uint64_t seed, std::uint32_t index) {
  CounterRng rng(seed, {0x4C4942ULL /* "LIB" */, index});
  double total = 0;
  for (const auto& t : kTemplates) total += t.weight;
  double u = rng.uniform01() * total;
  std::size_t chosen = kTemplates.size() - 1;
  for (std::size_t i = 0; i < kTemplates.size(); ++i) {
    if (u < kTemplates[i].weight) {
      chosen = i;
      break;
    }
    u -= kTemplates[i].weight;
  }
  RepresentationSpec spec;
  spec.family = std::string(kTemplates[chosen].name);
  spec.seed = seed;
  spec.index = index;
  detail::sample_template(spec.family, rng, spec);
  spec.id = spec.family + "-" + detail::pad_index(index) + ":" + spec_params_text(spec);
  return spec;
}

inline std::vector<RepresentationSpec> sample_library(std::size_t count, std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("library size must be positive");
  std::vector<RepresentationSpec> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_spec(seed, static_cast<std::uint32_t>(i)));
  return out;
}

// ---------------------------------------------------------------------------
// Precomputed features and dense encodings over the full state x goal grid.

inline constexpr std::uint32_t kNoRep = 0xFFFFFFFFu;

/// Features for every (s, g) cell, row-major by state. Unreachable cells have
/// no features (never observed at n >= 2, but not assumed).
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(const CubeEnv& env, const OracleTables& oracle)
      : goals_(env.goal_count()), cells_(env.state_count() * env.goal_count()), present_(cells_.size(), 0) {
    for (std::uint32_t s = 0; s < env.state_count(); ++s)
      for (std::uint32_t g = 0; g < env.goal_count(); ++g) {
        if (!oracle.reachable(StateIndex{s}, GoalIndex{g})) continue;
        const auto c = static_cast<std::size_t>(s) * goals_ + g;
        cells_[c] = features(env, oracle, StateIndex{s}, GoalIndex{g});
        present_[c] = 1;
      }
  }
  [[nodiscard]] std::size_t cell_count() const noexcept { return cells_.size(); }
  [[nodiscard]] std::size_t goal_count() const noexcept { return goals_; }
  [[nodiscard]] bool present(std::size_t cell) const noexcept { return present_[cell] != 0; }
  [[nodiscard]] const FeatureVector& at(std::size_t cell) const noexcept { return cells_[cell]; }

 private:
  std::size_t goals_ = 0;
  std::vector<FeatureVector> cells_;
  std::vector<std::uint8_t> present_;
};

/// Dense interned encoding ids for every (s, g) cell. Ids are assigned in
/// order of first appearance, so they are deterministic.
struct EncodedTable {
  std::vector<std::uint32_t> z;
  std::vector<RepValue> values;

  [[nodiscard]] std::size_t distinct() const noexcept { return values.size(); }
};

inline EncodedTable encode_all(const RepresentationSpec& spec, const FeatureTable& table) {
  EncodedTable out;
  out.z.assign(table.cell_count(), kNoRep);
  std::unordered_map<RepValue, std::uint32_t, RepValueHash> intern;
  intern.reserve(1024);
  for (std::size_t c = 0; c < table.cell_count(); ++c) {
    if (!table.present(c)) continue;
    const auto z = encode(spec, table.at(c));
    auto [it, inserted] = intern.try_emplace(z, static_cast<std::uint32_t>(out.values.size()));
    if (inserted) out.values.push_back(z);
    out.z[c] = it->second;
  }
  return out;
}

}  // namespace asl
