#pragma once

#include <cstdint>
#include <vector>

#include "asl/cube_env.hpp"
#include "asl/info_metrics.hpp"
#include "asl/oracle.hpp"
#include "asl/rep_library.hpp"

namespace asl {

/// Shared read-only tables for one grid size: environment, oracle, features
/// for every (s, g) cell, and the uniform law on filtered pairs.
class CubeLab {
 public:
  explicit CubeLab(int n = 4, unsigned threads = 1)
      : env_(n), oracle_(compute_oracle(env_, threads)), features_(env_, oracle_), law_(cube_pair_law(env_, oracle_)),
        base_(asl::law_entropies(law_)) {}

  CubeLab(CubeEnv env, OracleTables oracle)
      : env_(std::move(env)), oracle_(std::move(oracle)), features_(env_, oracle_), law_(cube_pair_law(env_, oracle_)),
        base_(asl::law_entropies(law_)) {}

  [[nodiscard]] const CubeEnv& env() const noexcept { return env_; }
  [[nodiscard]] const OracleTables& oracle() const noexcept { return oracle_; }
  [[nodiscard]] const FeatureTable& features() const noexcept { return features_; }
  [[nodiscard]] const PairLaw& law() const noexcept { return law_; }
  [[nodiscard]] const LawEntropies& law_entropies() const noexcept { return base_; }

  [[nodiscard]] EncodedTable encode(const RepresentationSpec& spec) const { return encode_all(spec, features_); }
  [[nodiscard]] std::vector<std::uint32_t> pair_z(const EncodedTable& table) const {
    return pair_encodings(env_, table);
  }

 private:
  CubeEnv env_;
  OracleTables oracle_;
  FeatureTable features_;
  PairLaw law_;
  LawEntropies base_;
};

inline InfoReport info_report(const RepresentationSpec& spec, const CubeLab& lab) {
  const auto z = lab.pair_z(lab.encode(spec));
  return info_report(lab.law(), z, &lab.law_entropies());
}

inline double verify_exact_decomposition(const RepresentationSpec& spec, const CubeLab& lab) {
  return verify_exact_decomposition(info_report(spec, lab));
}

inline DependenceCheck verify_value_functional_dependence(const RepresentationSpec& spec, const CubeLab& lab) {
  const auto z = lab.pair_z(lab.encode(spec));
  return verify_value_functional_dependence(lab.law(), z, info_report(lab.law(), z, &lab.law_entropies()));
}

}  // namespace asl
