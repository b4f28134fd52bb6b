#pragma once

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "rankpromo/engine/document.hpp"
#include "rankpromo/text/corpus_stats.hpp"

namespace rankpromo::engine {

inline constexpr double kDefaultMu = 1000.0;
inline constexpr double kBm25K1 = 1.2;
inline constexpr double kBm25B = 0.75;

/// Content-based document features used by the linear ranker.
struct DocFeatureVector {
  double query_term_coverage = 0;  // distinct query terms present / distinct query terms
  double sum_tf = 0;
  double sum_tfidf = 0;
  double lm_dirichlet_score = 0;
  double bm25_score = 0;
  double stopword_ratio = 0;     // stopword occurrences / document terms
  double stopword_coverage = 0;  // stopword-list entries present / list size
  double term_entropy = 0;
  double doc_length = 0;

  static constexpr std::array<std::string_view, 9> kNames = {
      "query_term_coverage", "sum_tf",         "sum_tfidf",
      "lm_dirichlet_score",  "bm25_score",     "stopword_ratio",
      "stopword_coverage",   "term_entropy",   "doc_length"};

  std::array<double, 9> values() const {
    return {query_term_coverage, sum_tf,         sum_tfidf,
            lm_dirichlet_score,  bm25_score,     stopword_ratio,
            stopword_coverage,   term_entropy,   doc_length};
  }

  double get(std::string_view name) const {
    const auto v = values();
    for (std::size_t i = 0; i < kNames.size(); ++i) {
      if (kNames[i] == name) return v[i];
    }
    throw ValidationError("unknown document feature '" + std::string(name) + "'");
  }

  static bool is_name(std::string_view name) {
    for (auto n : kNames) {
      if (n == name) return true;
    }
    return false;
  }
};

/// Query likelihood with Dirichlet-smoothed document language model:
///   sum over query tokens t of ln((tf(t,d) + mu p(t|C)) / (|d| + mu)).
/// Throws when a query term has zero collection probability; the stats
/// builder folds query text into the collection, so that indicates a bug.
inline double lm_dirichlet_score(const text::Terms& doc_terms,
                                 const text::Terms& query_terms,
                                 const text::CorpusStats& stats, double mu) {
  if (!(mu > 0.0)) throw ValidationError("dirichlet mu must be positive");
  const auto tf = text::term_counts(doc_terms);
  const double len = static_cast<double>(doc_terms.size());
  double score = 0.0;
  for (const auto& t : query_terms) {
    const double pc = stats.collection_prob(t);
    if (pc <= 0.0) {
      throw RuntimeError("query term '" + t +
                         "' has zero collection probability; corpus stats "
                         "were built without the query");
    }
    auto it = tf.find(t);
    const double f = it == tf.end() ? 0.0 : it->second;
    score += std::log((f + mu * pc) / (len + mu));
  }
  return score;
}

inline double lm_dirichlet_score(const Document& doc, const Query& query,
                                 const text::CorpusStats& stats,
                                 double mu = kDefaultMu) {
  return lm_dirichlet_score(doc.terms(), query.terms(), stats, mu);
}

inline DocFeatureVector extract_doc_features(const Document& doc, const Query& query,
                                             const text::CorpusStats& stats,
                                             double mu = kDefaultMu) {
  DocFeatureVector f;
  const auto& terms = doc.terms();
  const auto tf = text::term_counts(terms);
  const auto qterms = query.terms();
  const std::set<std::string> distinct_q(qterms.begin(), qterms.end());
  const double len = static_cast<double>(terms.size());
  const double avgdl = stats.avg_doc_length() > 0 ? stats.avg_doc_length() : len;
  const double n_docs = static_cast<double>(stats.doc_count());

  std::size_t covered = 0;
  for (const auto& t : distinct_q) {
    auto it = tf.find(t);
    const double f_t = it == tf.end() ? 0.0 : it->second;
    if (f_t > 0) ++covered;
    f.sum_tf += f_t;
    f.sum_tfidf += f_t * stats.idf(t);
    const double df = static_cast<double>(stats.doc_freq(t));
    const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
    const double denom = f_t + kBm25K1 * (1.0 - kBm25B + kBm25B * len / avgdl);
    if (f_t > 0) f.bm25_score += idf * f_t * (kBm25K1 + 1.0) / denom;
  }
  f.query_term_coverage =
      distinct_q.empty() ? 0.0
                         : static_cast<double>(covered) / static_cast<double>(distinct_q.size());
  f.lm_dirichlet_score = lm_dirichlet_score(terms, qterms, stats, mu);

  const auto& stop = stats.stopwords();
  std::size_t stop_occ = 0;
  std::size_t stop_present = 0;
  for (const auto& [t, n] : tf) {
    if (stop.count(t)) {
      stop_occ += static_cast<std::size_t>(n);
      ++stop_present;
    }
  }
  f.stopword_ratio = terms.empty() ? 0.0 : static_cast<double>(stop_occ) / len;
  f.stopword_coverage =
      stop.empty() ? 0.0 : static_cast<double>(stop_present) / static_cast<double>(stop.size());

  for (const auto& [_, n] : tf) {
    const double p = n / len;
    f.term_entropy -= p * std::log(p);
  }
  if (f.term_entropy < 0.0) f.term_entropy = 0.0;  // -0.0 for a single term
  f.doc_length = len;
  return f;
}

}  // namespace rankpromo::engine
