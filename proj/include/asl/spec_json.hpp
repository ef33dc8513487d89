#pragma once

// JSON form of a representation spec:
//   {"id", "template", "params": {"free": [...], "holding": [...]}, "seed", "index"}
// Each term is {"op": "feat", "field", "tf"}, {"op": "hash", "fields", "mod"}
// or {"op": "proj", "coef", "mod"}. "holding" is present only for split specs.

#include <string>
#include <vector>

#include <json.hpp>

#include "asl/errors.hpp"
#include "asl/rep_library.hpp"

namespace asl {

using Json = nlohmann::ordered_json;

inline Json term_to_json(const Term& term) {
  return std::visit(
      [](const auto& t) -> Json {
        using T = std::decay_t<decltype(t)>;
        Json j;
        if constexpr (std::is_same_v<T, FeatureTerm>) {
          j["op"] = "feat";
          j["field"] = std::string(field_name(t.field));
          j["tf"] = transform_name(t.transform);
        } else if constexpr (std::is_same_v<T, HashTerm>) {
          j["op"] = "hash";
          j["fields"] = Json::array();
          for (Field f : t.fields) j["fields"].push_back(std::string(field_name(f)));
          j["mod"] = t.modulus;
        } else {
          j["op"] = "proj";
          j["coef"] = t.coef;
          j["mod"] = t.modulus;
        }
        return j;
      },
      term);
}

inline Term term_from_json(const Json& j) {
  try {
    const auto op = j.at("op").get<std::string>();
    if (op == "feat") {
      return FeatureTerm{parse_field(j.at("field").get<std::string>()), parse_transform(j.at("tf").get<std::string>())};
    }
    if (op == "hash") {
      HashTerm h;
      for (const auto& f : j.at("fields")) h.fields.push_back(parse_field(f.get<std::string>()));
      h.modulus = j.at("mod").get<int>();
      if (h.fields.empty() || h.modulus < 1) throw InvalidArgument("bad hash term");
      return h;
    }
    if (op == "proj") {
      ProjTerm p;
      p.coef = j.at("coef").get<std::array<int, 4>>();
      p.modulus = j.at("mod").get<int>();
      if (p.modulus < 1) throw InvalidArgument("bad proj modulus");
      return p;
    }
    throw InvalidArgument("unknown term op: " + op);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed term: ") + e.what());
  }
}

inline Json spec_to_json(const RepresentationSpec& spec) {
  Json j;
  j["id"] = spec.id;
  j["template"] = spec.family;
  Json params;
  params["free"] = Json::array();
  for (const auto& t : spec.terms) params["free"].push_back(term_to_json(t));
  if (spec.phase_split) {
    params["holding"] = Json::array();
    for (const auto& t : spec.holding_terms) params["holding"].push_back(term_to_json(t));
  }
  j["params"] = std::move(params);
  j["seed"] = spec.seed;
  j["index"] = spec.index;
  return j;
}

inline RepresentationSpec spec_from_json(const Json& j) {
  try {
    RepresentationSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.family = j.at("template").get<std::string>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.index = j.value("index", std::uint32_t{0});
    const auto& params = j.at("params");
    for (const auto& t : params.at("free")) spec.terms.push_back(term_from_json(t));
    if (params.contains("holding")) {
      spec.phase_split = true;
      for (const auto& t : params.at("holding")) spec.holding_terms.push_back(term_from_json(t));
    }
    if (spec.terms.empty()) throw InvalidArgument("spec has no terms: " + spec.id);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed spec: ") + e.what());
  }
}

inline Json library_to_json(const std::vector<RepresentationSpec>& specs) {
  Json arr = Json::array();
  for (const auto& s : specs) arr.push_back(spec_to_json(s));
  return arr;
}

inline std::vector<RepresentationSpec> library_from_json(const Json& arr) {
  if (!arr.is_array()) throw InvalidArgument("library must be a JSON array");
  std::vector<RepresentationSpec> out;
  for (const auto& j : arr) out.push_back(spec_from_json(j));
  return out;
}

}  // namespace asl
