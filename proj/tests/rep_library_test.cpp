#include <gtest/gtest.h>

#include <map>
#include <set>

#include "asl/lab.hpp"
#include "asl/rep_library.hpp"
#include "asl/spec_json.hpp"

namespace {

using asl::Field;
using asl::Transform;
using asl::TransformKind;

const asl::CubeLab& lab() {
  static const asl::CubeLab l(4, 2);
  return l;
}

asl::StateIndex find_state(asl::GridPos agent, asl::CubePlace red, asl::CubePlace blue, asl::Gripper grip) {
  asl::CubeState s;
  s.agent = agent;
  s.red = red;
  s.blue = blue;
  s.gripper = grip;
  return lab().env().space().index_of(s);
}

asl::GoalIndex goal_index(asl::Cube t, asl::GridPos p) {
  const auto& goals = lab().env().goals();
  const auto it = std::find(goals.begin(), goals.end(), asl::Goal{t, p});
  return asl::GoalIndex{static_cast<std::uint32_t>(it - goals.begin())};
}

TEST(Features, HandArithmeticExample) {
  const auto s = find_state({0, 0}, asl::GridPos{2, 1}, asl::GridPos{0, 3}, asl::Gripper::None);
  const auto f = asl::features(lab().env(), lab().oracle(), s, goal_index(asl::Cube::Red, {3, 3}));
  EXPECT_EQ(f.dx1, 2);
  EXPECT_EQ(f.dy1, 1);
  EXPECT_EQ(f.dx2, 1);
  EXPECT_EQ(f.dy2, 2);
  EXPECT_EQ(f.d_at, 3);
  EXPECT_EQ(f.d_bg, 3);
  EXPECT_EQ(f.h, 0);
  EXPECT_EQ(f.t, 0);
  EXPECT_EQ(f.v, -(3 + 3 + 2));
}

TEST(Features, HeldTargetUsesAgentCell) {
  const auto s = find_state({1, 2}, asl::Held{}, asl::GridPos{3, 0}, asl::Gripper::Red);
  const auto f = asl::features(lab().env(), lab().oracle(), s, goal_index(asl::Cube::Red, {3, 3}));
  EXPECT_EQ(f.dx1, 0);
  EXPECT_EQ(f.dy1, 0);
  EXPECT_EQ(f.d_at, 0);
  EXPECT_EQ(f.dx2, 2);
  EXPECT_EQ(f.dy2, 1);
  EXPECT_EQ(f.h, 1);
}

TEST(Features, TargetAtGoalHasZeroCarry) {
  const auto s = find_state({0, 0}, asl::GridPos{2, 1}, asl::GridPos{0, 3}, asl::Gripper::None);
  const auto f = asl::features(lab().env(), lab().oracle(), s, goal_index(asl::Cube::Red, {2, 1}));
  EXPECT_EQ(f.dx2, 0);
  EXPECT_EQ(f.dy2, 0);
  EXPECT_EQ(f.d_bg, 0);
  EXPECT_EQ(f.v, 0);
}

TEST(Features, InvariantsOverAllPairs) {
  for (const auto& p : lab().env().pairs()) {
    const auto f = asl::features(lab().env(), lab().oracle(), p.state, p.goal);
    ASSERT_EQ(f.d_at, std::abs(f.dx1) + std::abs(f.dy1));
    ASSERT_EQ(f.d_bg, std::abs(f.dx2) + std::abs(f.dy2));
    if (f.h == f.t + 1) {
      ASSERT_EQ(f.d_at, 0);
    }
    ASSERT_EQ(f.v, -static_cast<int>(lab().oracle().dist(p.state, p.goal)));
  }
}

TEST(Transform, Examples) {
  EXPECT_EQ(asl::apply_transform({TransformKind::Sign}, -3), -1);
  EXPECT_EQ(asl::apply_transform({TransformKind::Clip, 2}, -3), -2);
  EXPECT_EQ(asl::apply_transform({TransformKind::Parity}, -3), 1);
  EXPECT_EQ(asl::apply_transform({TransformKind::Abs}, -3), 3);
  EXPECT_EQ(asl::apply_transform({TransformKind::SgnBucket, 2}, -3), -2);
  EXPECT_EQ(asl::apply_transform({TransformKind::SgnBucket, 3}, 1), 1);
  EXPECT_EQ(asl::apply_transform({TransformKind::DistBucket, 4}, 6), 4);
  EXPECT_EQ(asl::apply_transform({TransformKind::DistParity}, 5), 1);
  EXPECT_EQ(asl::apply_transform({TransformKind::ValueBucket3}, -2), 2);
  EXPECT_EQ(asl::apply_transform({TransformKind::ValueBucket3}, -9), 4);
  EXPECT_EQ(asl::apply_transform({TransformKind::ValueRaw}, -9), -9);
}

TEST(Transform, TotalOnFeatureDomains) {
  const int n = 4;
  for (const auto& tr : asl::directional_transforms())
    for (int x = -(n - 1); x <= n - 1; ++x) {
      const int y = asl::apply_transform(tr, x);
      EXPECT_LE(std::abs(y), n - 1);
    }
  for (const auto& tr : asl::distance_transforms())
    for (int x = 0; x <= 2 * (n - 1); ++x) EXPECT_GE(asl::apply_transform(tr, x), 0);
}

TEST(Transform, NamesRoundTrip) {
  std::vector<Transform> all = asl::directional_transforms();
  for (auto t : asl::distance_transforms()) all.push_back(t);
  for (auto t : asl::value_transforms()) all.push_back(t);
  for (const auto& t : all) EXPECT_EQ(asl::parse_transform(asl::transform_name(t)), t);
  EXPECT_THROW(asl::parse_transform("clip_x"), asl::InvalidArgument);
  EXPECT_THROW(asl::parse_transform("nonsense"), asl::InvalidArgument);
  EXPECT_THROW(asl::parse_field("z"), asl::InvalidArgument);
}

TEST(Baselines, TermsAsListed) {
  EXPECT_EQ(asl::baseline(asl::BaselineKind::Full).terms.size(), 6u);
  EXPECT_EQ(asl::baseline(asl::BaselineKind::Signs).terms.size(), 6u);
  EXPECT_EQ(asl::baseline(asl::BaselineKind::ValueOnly).terms.size(), 1u);
  EXPECT_EQ(asl::baseline(asl::BaselineKind::Distances).terms.size(), 3u);
  for (auto k : asl::kAllBaselines) EXPECT_EQ(asl::baseline(k).family, "baseline");
}

TEST(Baselines, SignsDropMagnitude) {
  const auto signs = asl::baseline(asl::BaselineKind::Signs);
  asl::FeatureVector a{0, 0, 2, 0, 1, -1, 2, 2, -6};
  asl::FeatureVector b{0, 0, 3, 0, 1, -1, 3, 2, -7};
  EXPECT_EQ(asl::encode(signs, a), asl::encode(signs, b));
  EXPECT_FALSE(asl::encode(asl::baseline(asl::BaselineKind::Full), a) ==
               asl::encode(asl::baseline(asl::BaselineKind::Full), b));
}

TEST(Baselines, ValueOnlyCollapsesEqualValues) {
  const auto vo = asl::baseline(asl::BaselineKind::ValueOnly);
  asl::FeatureVector a{0, 0, 2, 0, 1, -1, 2, 2, -6};
  asl::FeatureVector b{0, 1, -1, 1, 0, 2, 2, 2, -6};
  EXPECT_EQ(asl::encode(vo, a), asl::encode(vo, b));
}

TEST(Baselines, FullIsInjectiveOnListedFields) {
  const auto full = asl::baseline(asl::BaselineKind::Full);
  const auto& table = lab().features();
  const auto enc = asl::encode_all(full, table);
  std::map<std::array<int, 6>, std::uint32_t> seen;
  for (std::size_t c = 0; c < table.cell_count(); ++c) {
    const auto& f = table.at(c);
    const std::array<int, 6> key{f.h, f.t, f.dx1, f.dy1, f.dx2, f.dy2};
    auto [it, fresh] = seen.emplace(key, enc.z[c]);
    ASSERT_EQ(it->second, enc.z[c]);
  }
  EXPECT_EQ(seen.size(), enc.distinct());
}

TEST(Encode, DeterministicAndInterningIsFirstAppearance) {
  const auto spec = asl::sample_spec(3, 17);
  const auto a = lab().encode(spec);
  const auto b = lab().encode(spec);
  EXPECT_EQ(a.z, b.z);
  std::uint32_t next = 0;
  for (auto z : a.z) {
    if (z == asl::kNoRep) continue;
    ASSERT_LE(z, next);
    if (z == next) ++next;
  }
  EXPECT_EQ(next, a.distinct());
}

TEST(Encode, HashedComponentsStayBelowModulus) {
  for (std::uint32_t i = 0; i < 2000; ++i) {
    const auto spec = asl::sample_spec(0, i);
    if (spec.family != "hashed_actor" && spec.family != "hashed_dist" && spec.family != "two_hash") continue;
    for (const auto& p : lab().env().pairs()) {
      const auto f = lab().features().at(lab().oracle().cell(p.state, p.goal));
      const auto z = asl::encode(spec, f);
      for (std::size_t k = 0; k < spec.terms.size(); ++k)
        if (const auto* h = std::get_if<asl::HashTerm>(&spec.terms[k])) {
          ASSERT_GE(z.parts[k], 0);
          ASSERT_LT(z.parts[k], h->modulus);
        }
    }
    return;
  }
}

TEST(RollingHash, DocumentedConstants) {
  asl::FeatureVector f{};
  f.dx1 = -1;
  f.dy1 = 2;
  const std::uint64_t expect = (17ULL * 1000003ULL + static_cast<std::uint64_t>(-1LL)) * 1000003ULL + 2ULL;
  EXPECT_EQ(asl::rolling_hash(f, {Field::Dx1, Field::Dy1}), expect);
}

TEST(ProjTerm, NonNegativeResidue) {
  asl::ProjTerm p{{1, -2, 0, 0}, 3};
  asl::FeatureVector f{};
  f.dx1 = 1;
  f.dy1 = 2;  // 1 - 4 = -3 -> 0
  EXPECT_EQ(asl::evaluate_term(p, f), 0);
  f.dy1 = 3;  // -5 -> 1
  EXPECT_EQ(asl::evaluate_term(p, f), 1);
}

TEST(SampleLibrary, StableCountsAndEveryTemplatePresent) {
  const auto lib = asl::sample_library(2000, 0);
  ASSERT_EQ(lib.size(), 2000u);
  std::set<std::string> ids;
  std::map<std::string, int> families;
  for (const auto& s : lib) {
    ids.insert(s.id);
    ++families[s.family];
  }
  EXPECT_EQ(ids.size(), lib.size());
  EXPECT_EQ(families.size(), asl::kTemplates.size());
  for (const auto& t : asl::kTemplates) EXPECT_GT(families[std::string(t.name)], 0) << t.name;
  EXPECT_EQ(lib, asl::sample_library(2000, 0));
}

TEST(SampleLibrary, PrefixPropertyAndSeedSensitivity) {
  const auto big = asl::sample_library(100, 9);
  const auto small = asl::sample_library(10, 9);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(big[i], small[i]);
  EXPECT_NE(asl::sample_library(20, 1), asl::sample_library(20, 2));
}

TEST(SampleLibrary, ZeroCountRejected) { EXPECT_THROW(asl::sample_library(0, 0), asl::InvalidArgument); }

TEST(SampleLibrary, ParametersWithinRanges) {
  for (const auto& s : asl::sample_library(2000, 4)) {
    EXPECT_LE(s.terms.size(), asl::kMaxRepArity);
    for (const auto* terms : {&s.terms, &s.holding_terms})
      for (const auto& t : *terms) {
        if (const auto* h = std::get_if<asl::HashTerm>(&t)) {
          EXPECT_GE(h->modulus, asl::kHashModulusMin);
          EXPECT_LE(h->modulus, asl::kHashModulusMax);
        }
        if (const auto* p = std::get_if<asl::ProjTerm>(&t)) {
          EXPECT_GE(p->modulus, asl::kProjModulusMin);
          EXPECT_LE(p->modulus, asl::kProjModulusMax);
          bool nonzero = false;
          for (int c : p->coef) {
            EXPECT_GE(c, asl::kProjCoefMin);
            EXPECT_LE(c, asl::kProjCoefMax);
            nonzero |= c != 0;
          }
          EXPECT_TRUE(nonzero);
        }
      }
    EXPECT_EQ(s.phase_split, s.family == "phase_split");
    EXPECT_NE(s.id.find(asl::spec_params_text(s)), std::string::npos);
    EXPECT_EQ(s.id.find(','), std::string::npos);
  }
}

TEST(SpecJson, RoundTripsEverySpec) {
  std::vector<asl::RepresentationSpec> specs = asl::sample_library(300, 5);
  for (auto k : asl::kAllBaselines) specs.push_back(asl::baseline(k));
  const auto j = asl::library_to_json(specs);
  const auto back = asl::library_from_json(asl::Json::parse(j.dump()));
  EXPECT_EQ(back, specs);
}

TEST(SpecJson, Shape) {
  const auto j = asl::spec_to_json(asl::baseline(asl::BaselineKind::Signs));
  EXPECT_EQ(j["template"], "baseline");
  EXPECT_EQ(j["params"]["free"][2]["op"], "feat");
  EXPECT_EQ(j["params"]["free"][2]["field"], "dx1");
  EXPECT_EQ(j["params"]["free"][2]["tf"], "sign");
  EXPECT_FALSE(j["params"].contains("holding"));
}

TEST(SpecJson, MalformedInputRejected) {
  EXPECT_THROW(asl::spec_from_json(asl::Json::parse(R"({"id":"x"})")), asl::InvalidArgument);
  EXPECT_THROW(asl::spec_from_json(asl::Json::parse(R"({"id":"x","template":"t","params":{"free":[]}})")),
               asl::InvalidArgument);
  EXPECT_THROW(
      asl::spec_from_json(asl::Json::parse(R"({"id":"x","template":"t","params":{"free":[{"op":"warp"}]}})")),
      asl::InvalidArgument);
  EXPECT_THROW(asl::library_from_json(asl::Json::parse("{}")), asl::InvalidArgument);
}

}  // namespace
