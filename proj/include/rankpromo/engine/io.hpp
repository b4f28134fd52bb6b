#pragma once

#include <string>
#include <vector>

#include "rankpromo/engine/document.hpp"
#include "rankpromo/engine/ranker.hpp"
#include "rankpromo/jsonl.hpp"

namespace rankpromo::engine {

inline json engine_model_to_json(const EngineModel& m) {
  if (m.kind == EngineKind::kLmDirichlet) return json{{"kind", "lm_dirichlet"}, {"mu", m.mu}};
  return json{{"kind", "linear"}, {"weights", m.weights}, {"mu", m.mu}};
}

inline EngineModel engine_model_from_json(const json& j) {
  const auto kind = require<std::string>(j, "kind");
  const double mu = optional_field<double>(j, "mu", kDefaultMu);
  if (kind == "lm_dirichlet") return EngineModel::lm_dirichlet(mu);
  if (kind == "linear") {
    return EngineModel::linear(require<std::map<std::string, double>>(j, "weights"), mu);
  }
  throw ValidationError("engine model: unknown kind '" + kind + "'");
}

inline json document_to_json(const Document& d) {
  return json{{"id", d.id()}, {"author_id", d.author_id()}, {"text", d.text()}};
}

inline Document document_from_json(const json& j, std::size_t term_cap = kDefaultTermCap) {
  const auto id = require<std::string>(j, "id");
  if (j.contains("passages")) {
    return Document::from_passages(id, optional_field<std::string>(j, "author_id", ""),
                                   require<std::vector<std::string>>(j, "passages"), term_cap);
  }
  return Document::from_text(id, optional_field<std::string>(j, "author_id", ""),
                             require<std::string>(j, "text"), term_cap);
}

inline json query_to_json(const Query& q) {
  return json{{"id", q.id}, {"text", q.text}, {"topic_description", q.topic_description}};
}

inline Query query_from_json(const json& j) {
  return Query::make(require<std::string>(j, "id"), require<std::string>(j, "text"),
                     optional_field<std::string>(j, "topic_description", ""));
}

inline json ranking_to_json(const Ranking& r) {
  return json{{"query_id", r.query_id}, {"round", r.round_index}, {"doc_ids", r.doc_ids}};
}

inline Ranking ranking_from_json(const json& j) {
  Ranking r;
  r.query_id = require<std::string>(j, "query_id");
  r.round_index = require<int>(j, "round");
  r.doc_ids = require<std::vector<std::string>>(j, "doc_ids");
  r.validate();
  return r;
}

inline std::vector<Query> load_queries(const std::string& path) {
  std::vector<Query> out;
  for (const auto& j : read_jsonl(path)) out.push_back(query_from_json(j));
  return out;
}

inline std::vector<Document> load_corpus(const std::string& path,
                                         std::size_t term_cap = kDefaultTermCap) {
  std::vector<Document> out;
  for (const auto& j : read_jsonl(path)) out.push_back(document_from_json(j, term_cap));
  return out;
}

}  // namespace rankpromo::engine
