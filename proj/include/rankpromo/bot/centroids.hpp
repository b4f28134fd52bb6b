#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rankpromo/bot/pool.hpp"
#include "rankpromo/text/corpus_stats.hpp"
#include "rankpromo/text/embedding.hpp"

namespace rankpromo::bot {

inline constexpr int kDefaultTopM = 3;
inline constexpr double kDefaultDecayAlpha = 0.01;

/// A TF.IDF centroid and an embedding centroid over the same documents.
struct Centroid {
  text::TermVector tfidf;
  text::DenseVector embedding;

  Centroid& scale(double lambda) {
    tfidf.scale(lambda);
    embedding.scale(lambda);
    return *this;
  }
};

/// Document vectors: raw (not length-normalized) TF.IDF of the full text, and
/// the mean of passage embeddings.
inline text::TermVector doc_tfidf(const Document& d, const text::CorpusStats& stats) {
  return text::tfidf_vector(d.text(), stats);
}

inline text::DenseVector doc_embedding(const Document& d, const text::EmbeddingStore& store) {
  return text::embed_document(d.passages(), store);
}

/// Arithmetic mean over the m = min(m_max, rank(d_cur) - 1) highest-ranked
/// documents of the current ranking.
inline Centroid compute_top_centroids(const RankingHistory& history,
                                      const std::string& d_cur_id, int m_max,
                                      const text::CorpusStats& stats,
                                      const text::EmbeddingStore& store) {
  if (m_max < 1) throw ValidationError("m_max must be >= 1");
  const int rank = current_rank(history, d_cur_id);
  if (rank == 1) throw NothingToMimic(d_cur_id);
  const int m = std::min(m_max, rank - 1);
  Centroid c{text::TermVector{}, text::DenseVector(store.dimension())};
  const auto& ids = history.current().doc_ids;
  if (m == 1) {
    const auto& d = history.document(ids[0]);
    return Centroid{doc_tfidf(d, stats), doc_embedding(d, store)};
  }
  for (int i = 0; i < m; ++i) {
    const auto& d = history.document(ids[static_cast<std::size_t>(i)]);
    c.tfidf.axpy(1.0, doc_tfidf(d, stats));
    c.embedding.axpy(1.0, doc_embedding(d, store));
  }
  return c.scale(1.0 / m);
}

/// w_i = alpha exp(-alpha i) / sum_{j=1..p} exp(-alpha j), i = 1 (current)
/// .. p (oldest). The weights sum to alpha, not 1; cosine features do not
/// see the difference.
inline std::vector<double> past_decay_weights(std::size_t p, double alpha) {
  if (p == 0) throw ValidationError("decay weights need at least one ranking");
  double denom = 0.0;
  for (std::size_t j = 1; j <= p; ++j) denom += std::exp(-alpha * static_cast<double>(j));
  std::vector<double> w(p);
  for (std::size_t i = 1; i <= p; ++i) {
    w[i - 1] = alpha * std::exp(-alpha * static_cast<double>(i)) / denom;
  }
  return w;
}

/// Time-decayed sum of the top document of every observed ranking.
inline Centroid compute_past_centroid(const RankingHistory& history, double alpha,
                                      const text::CorpusStats& stats,
                                      const text::EmbeddingStore& store) {
  const auto w = past_decay_weights(history.size(), alpha);
  Centroid c{text::TermVector{}, text::DenseVector(store.dimension())};
  for (std::size_t i = 1; i <= history.size(); ++i) {
    const auto& top = history.document(history.at_lag(i).doc_ids.front());
    c.tfidf.axpy(w[i - 1], doc_tfidf(top, stats));
    c.embedding.axpy(w[i - 1], doc_embedding(top, store));
  }
  return c;
}

}  // namespace rankpromo::bot
