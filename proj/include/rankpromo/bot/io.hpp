#pragma once

#include "rankpromo/bot/modify.hpp"
#include "rankpromo/bot/pair_model.hpp"
#include "rankpromo/jsonl.hpp"

namespace rankpromo::bot {

inline json features_to_json(const PairFeatures& f) {
  json j = json::object();
  for (std::size_t i = 0; i < kNumPairFeatures; ++i) j[std::string(kPairFeatureNames[i])] = f.values[i];
  return j;
}

/// Requires all fifteen names; rejects unknown ones.
inline PairFeatures features_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("pair features must be an object");
  PairFeatures f;
  std::size_t seen = 0;
  for (const auto& [k, v] : j.items()) {
    f.values[pair_feature_index(k)] = v.get<double>();
    ++seen;
  }
  if (seen != kNumPairFeatures) {
    throw ValidationError("pair features need exactly " + std::to_string(kNumPairFeatures) +
                          " entries, got " + std::to_string(seen));
  }
  return f;
}

inline json pair_to_json(const PassagePair& p) {
  return json{{"src_index", p.src_index},
              {"target_doc_id", p.target_doc_id},
              {"target_rank", p.target_rank},
              {"target_index", p.target_index}};
}

inline PassagePair pair_from_json(const json& j) {
  return PassagePair{require<std::size_t>(j, "src_index"),
                     require<std::string>(j, "target_doc_id"),
                     optional_field<int>(j, "target_rank", 0),
                     require<std::size_t>(j, "target_index")};
}

inline json pair_model_to_json(const PairModel& m) {
  json weights = json::object();
  for (std::size_t i = 0; i < kNumPairFeatures; ++i) {
    weights[std::string(kPairFeatureNames[i])] = m.weights[i];
  }
  json j{{"weights", weights}};
  if (m.bounds) {
    json bounds = json::object();
    for (std::size_t i = 0; i < kNumPairFeatures; ++i) {
      bounds[std::string(kPairFeatureNames[i])] = json::array({m.bounds->min[i], m.bounds->max[i]});
    }
    j["bounds"] = bounds;
  }
  return j;
}

inline PairModel pair_model_from_json(const json& j) {
  PairModel m;
  PairFeatures w = features_from_json(require<json>(j, "weights"));
  m.weights = w.values;
  if (j.contains("bounds") && !j["bounds"].is_null()) {
    const auto& b = j["bounds"];
    FeatureBounds fb;
    std::size_t seen = 0;
    for (const auto& [k, v] : b.items()) {
      const auto i = pair_feature_index(k);
      if (!v.is_array() || v.size() != 2) {
        throw ValidationError("bounds for '" + k + "' must be [min, max]");
      }
      fb.min[i] = v[0].get<double>();
      fb.max[i] = v[1].get<double>();
      ++seen;
    }
    if (seen != kNumPairFeatures) throw ValidationError("bounds must cover all pair features");
    m.bounds = fb;
  }
  return m;
}

inline json audit_to_json(const ModificationAudit& a) {
  json cands = json::array();
  for (const auto& c : a.candidates) {
    cands.push_back(json{{"pair", pair_to_json(c.pair)},
                         {"target_text", c.target_text},
                         {"raw", features_to_json(c.raw)},
                         {"normalized", features_to_json(c.normalized)},
                         {"score", c.score}});
  }
  json j{{"query_id", a.query_id},
         {"d_cur_id", a.d_cur_id},
         {"result_id", a.result_id},
         {"modified", a.modified},
         {"reason", a.reason},
         {"skipped_over_cap", a.skipped_over_cap},
         {"candidates", cands}};
  j["chosen"] = a.chosen ? pair_to_json(a.candidates[*a.chosen].pair) : json(nullptr);
  if (a.chosen) j["chosen_score"] = a.candidates[*a.chosen].score;
  return j;
}

}  // namespace rankpromo::bot
