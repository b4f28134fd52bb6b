#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rankpromo/engine/document.hpp"
#include "rankpromo/engine/features.hpp"

namespace rankpromo::engine {

enum class EngineKind { kLinear, kLmDirichlet };

/// The ranking function. Its parameters stay inside the engine: nothing on the
/// bot side reads an EngineModel.
struct EngineModel {
  EngineKind kind = EngineKind::kLmDirichlet;
  std::map<std::string, double> weights;  // linear kind only
  double mu = kDefaultMu;

  static EngineModel lm_dirichlet(double mu = kDefaultMu) {
    EngineModel m;
    m.kind = EngineKind::kLmDirichlet;
    m.mu = mu;
    m.validate();
    return m;
  }

  static EngineModel linear(std::map<std::string, double> weights, double mu = kDefaultMu) {
    EngineModel m;
    m.kind = EngineKind::kLinear;
    m.weights = std::move(weights);
    m.mu = mu;
    m.validate();
    return m;
  }

  void validate() const {
    if (!(mu > 0.0)) throw ValidationError("engine model: mu must be positive");
    if (kind == EngineKind::kLinear) {
      if (weights.empty()) throw ValidationError("engine model: linear kind needs weights");
      for (const auto& [name, _] : weights) {
        if (!DocFeatureVector::is_name(name)) {
          throw ValidationError("engine model: unknown feature '" + name + "'");
        }
      }
    }
  }
};

inline double score_document(const Document& doc, const Query& query,
                             const EngineModel& model, const text::CorpusStats& stats) {
  if (model.kind == EngineKind::kLmDirichlet) {
    return lm_dirichlet_score(doc, query, stats, model.mu);
  }
  const auto f = extract_doc_features(doc, query, stats, model.mu);
  double s = 0.0;
  for (const auto& [name, w] : model.weights) s += w * f.get(name);
  return s;
}

/// Descending score; ties broken by ascending document id.
inline Ranking rank_documents(const std::vector<Document>& docs, const Query& query,
                              const EngineModel& model, const text::CorpusStats& stats,
                              int round_index = 1) {
  if (docs.size() < 2) throw ValidationError("ranking needs at least two documents");
  std::vector<std::pair<double, const Document*>> scored;
  scored.reserve(docs.size());
  for (const auto& d : docs) scored.emplace_back(score_document(d, query, model, stats), &d);
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second->id() < b.second->id();
  });
  Ranking r;
  r.query_id = query.id;
  r.round_index = round_index;
  for (const auto& [_, d] : scored) r.doc_ids.push_back(d->id());
  r.validate();
  return r;
}

}  // namespace rankpromo::engine
