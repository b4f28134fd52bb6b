#pragma once

#include <string>
#include <vector>

#include "rankpromo/bot/io.hpp"
#include "rankpromo/jsonl.hpp"
#include "rankpromo/training/ranksvm.hpp"

namespace rankpromo::training {

inline json labeled_pair_to_json(const LabeledPair& p) {
  return json{{"group_id", p.group_id},
              {"query_id", p.query_id},
              {"src_index", p.pair.src_index},
              {"target_doc_id", p.pair.target_doc_id},
              {"target_rank", p.pair.target_rank},
              {"target_index", p.pair.target_index},
              {"features", bot::features_to_json(p.features)},
              {"r", p.r},
              {"c", p.c},
              {"l", p.l}};
}

inline LabeledPair labeled_pair_from_json(const json& j) {
  LabeledPair p;
  p.group_id = require<std::string>(j, "group_id");
  p.query_id = require<std::string>(j, "query_id");
  p.pair = bot::pair_from_json(j);
  p.features = bot::features_from_json(require<json>(j, "features"));
  p.r = require<int>(j, "r");
  p.c = require<double>(j, "c");
  p.l = require<double>(j, "l");
  if (p.r < 0 || p.c < 0.0 || p.l < 0.0) throw ValidationError("labels must be >= 0");
  return p;
}

inline void save_dataset(const std::string& path, const std::vector<LabeledPair>& data) {
  std::vector<json> rows;
  rows.reserve(data.size());
  for (const auto& p : data) rows.push_back(labeled_pair_to_json(p));
  write_jsonl(path, rows);
}

inline std::vector<LabeledPair> load_dataset(const std::string& path) {
  std::vector<LabeledPair> out;
  for (const auto& j : read_jsonl(path)) out.push_back(labeled_pair_from_json(j));
  return out;
}

inline json trained_model_to_json(const TrainedModel& m) {
  json cv = json::array();
  for (const auto& [c, v] : m.cv_ndcg) cv.push_back(json{{"C", c}, {"ndcg", v}});
  json j = bot::pair_model_to_json(m.model);
  j["metadata"] = json{{"C", m.chosen_c},
                       {"label_mode", std::string(label_mode_name(m.label_mode))},
                       {"beta", m.beta},
                       {"epsilon", m.epsilon},
                       {"cv_ndcg", cv},
                       {"fold_ndcg", m.fold_ndcg},
                       {"groups", m.groups},
                       {"pairs", m.pairs},
                       {"dataset_fingerprint", m.dataset_fingerprint},
                       {"model_fingerprint", m.model_fingerprint}};
  return j;
}

/// Accepts a bare pair model too (no metadata), e.g. hand-written weights.
inline TrainedModel trained_model_from_json(const json& j) {
  TrainedModel m;
  m.model = bot::pair_model_from_json(j);
  if (j.contains("metadata")) {
    const auto& md = j["metadata"];
    m.chosen_c = optional_field<double>(md, "C", 0.0);
    m.label_mode = parse_label_mode(optional_field<std::string>(md, "label_mode", "l"));
    m.beta = optional_field<double>(md, "beta", kDefaultBeta);
    m.epsilon = optional_field<double>(md, "epsilon", kDefaultEpsilon);
    if (md.contains("cv_ndcg")) {
      for (const auto& e : md["cv_ndcg"]) {
        m.cv_ndcg.emplace_back(require<double>(e, "C"), require<double>(e, "ndcg"));
      }
    }
    m.fold_ndcg = optional_field<std::vector<double>>(md, "fold_ndcg", {});
    m.groups = optional_field<std::size_t>(md, "groups", 0);
    m.pairs = optional_field<std::size_t>(md, "pairs", 0);
    m.dataset_fingerprint = optional_field<std::string>(md, "dataset_fingerprint", "");
  }
  m.model_fingerprint = model_fingerprint(m.model);
  return m;
}

inline void save_trained_model(const std::string& path, const TrainedModel& m) {
  write_jsonl(path, {trained_model_to_json(m)});
}

inline TrainedModel load_trained_model(const std::string& path) {
  const auto rows = read_jsonl(path);
  if (rows.size() != 1) throw ValidationError("model file must hold exactly one record");
  return trained_model_from_json(rows.front());
}

}  // namespace rankpromo::training
