#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rankpromo/bot/centroids.hpp"
#include "rankpromo/engine/document.hpp"

namespace rankpromo::bot {

/// The fifteen passage-pair features. Order is fixed and used for storage.
enum class PairFeature : std::size_t {
  kQryTermSrc,
  kQryTermTarget,
  kSimSrcTopTfidf,
  kSimTargetTopTfidf,
  kSimSrcTopW2v,
  kSimTargetTopW2v,
  kSimSrcPrevTopTfidf,
  kSimTargetPrevTopTfidf,
  kSimSrcPrevTopW2v,
  kSimTargetPrevTopW2v,
  kSimSrcTargetW2v,
  kSimSrcPrecPsgW2v,
  kSimSrcFollowPsgW2v,
  kSimTargetPrecPsgW2v,
  kSimTargetFollowPsgW2v,
};

inline constexpr std::size_t kNumPairFeatures = 15;

inline constexpr std::array<std::string_view, kNumPairFeatures> kPairFeatureNames = {
    "QryTermSrc",
    "QryTermTarget",
    "SimSrcTop(TF.IDF)",
    "SimTargetTop(TF.IDF)",
    "SimSrcTop(W2V)",
    "SimTargetTop(W2V)",
    "SimSrcPrevTop(TF.IDF)",
    "SimTargetPrevTop(TF.IDF)",
    "SimSrcPrevTop(W2V)",
    "SimTargetPrevTop(W2V)",
    "SimSrcTarget(W2V)",
    "SimSrcPrecPsg(W2V)",
    "SimSrcFollowPsg(W2V)",
    "SimTargetPrecPsg(W2V)",
    "SimTargetFollowPsg(W2V)",
};

inline std::size_t pair_feature_index(std::string_view name) {
  for (std::size_t i = 0; i < kNumPairFeatures; ++i) {
    if (kPairFeatureNames[i] == name) return i;
  }
  throw ValidationError("unknown pair feature '" + std::string(name) + "'");
}

struct PairFeatures {
  std::array<double, kNumPairFeatures> values{};

  double& operator[](PairFeature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](PairFeature f) const { return values[static_cast<std::size_t>(f)]; }

  bool operator==(const PairFeatures&) const = default;
};

/// How QryTermSrc / QryTermTarget read "fraction of occurrences of the query's
/// terms" in a passage.
enum class QueryTermMode {
  kOccurrenceFraction,  // query-term occurrences / passage length
  kDistinctCoverage,    // distinct query terms present / distinct query terms
};

struct FeatureConfig {
  int m_max = kDefaultTopM;
  double alpha = kDefaultDecayAlpha;
  QueryTermMode query_term_mode = QueryTermMode::kOccurrenceFraction;
};

inline double query_term_fraction(const text::Terms& passage,
                                  const std::set<std::string>& query_terms,
                                  QueryTermMode mode) {
  if (mode == QueryTermMode::kOccurrenceFraction) {
    if (passage.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& t : passage) hits += query_terms.count(t);
    return static_cast<double>(hits) / static_cast<double>(passage.size());
  }
  if (query_terms.empty()) return 0.0;
  const std::set<std::string> present(passage.begin(), passage.end());
  std::size_t covered = 0;
  for (const auto& t : query_terms) covered += present.count(t);
  return static_cast<double>(covered) / static_cast<double>(query_terms.size());
}

/// Indices of g_prec and g_follow for source passage `i` of an `n`-passage
/// document. A first passage uses its follower for both slots, a last passage
/// its predecessor; a single-passage document has no context.
struct ContextSlots {
  std::optional<std::size_t> prec;
  std::optional<std::size_t> follow;
};

inline ContextSlots context_slots(std::size_t i, std::size_t n) {
  if (n < 2) return {};
  const std::size_t prec = i == 0 ? 1 : i - 1;
  const std::size_t follow = i + 1 == n ? i - 1 : i + 1;
  return {prec, follow};
}

/// Computes pair features for one modification decision. Centroids and the
/// per-passage vectors of d_cur are computed once at construction.
class PairFeatureExtractor {
 public:
  PairFeatureExtractor(const Document& d_cur, const engine::Query& query,
                       Centroid top, Centroid past, const text::CorpusStats& stats,
                       const text::EmbeddingStore& store, FeatureConfig cfg = {})
      : stats_(&stats), store_(&store), cfg_(cfg), top_(std::move(top)),
        past_(std::move(past)) {
    const auto qt = query.terms();
    query_terms_.insert(qt.begin(), qt.end());
    for (const auto& p : d_cur.passages()) {
      src_.push_back(passage_vectors(p));
    }
  }

  /// Builds both centroids from the history.
  static PairFeatureExtractor from_history(const Document& d_cur, const engine::Query& query,
                                           const RankingHistory& history,
                                           const text::CorpusStats& stats,
                                           const text::EmbeddingStore& store,
                                           FeatureConfig cfg = {}) {
    return PairFeatureExtractor(
        d_cur, query, compute_top_centroids(history, d_cur.id(), cfg.m_max, stats, store),
        compute_past_centroid(history, cfg.alpha, stats, store), stats, store, cfg);
  }

  std::size_t passage_count() const { return src_.size(); }

  PairFeatures extract(std::size_t src_index, std::string_view target_text) const {
    if (src_index >= src_.size()) {
      throw ValidationError("source passage index out of range");
    }
    const auto target = passage_vectors(target_text);
    const auto& src = src_[src_index];
    PairFeatures f;
    using F = PairFeature;
    f[F::kQryTermSrc] = query_term_fraction(src.terms, query_terms_, cfg_.query_term_mode);
    f[F::kQryTermTarget] = query_term_fraction(target.terms, query_terms_, cfg_.query_term_mode);
    f[F::kSimSrcTopTfidf] = text::cosine(src.tfidf, top_.tfidf);
    f[F::kSimTargetTopTfidf] = text::cosine(target.tfidf, top_.tfidf);
    f[F::kSimSrcTopW2v] = text::cosine(src.embedding, top_.embedding);
    f[F::kSimTargetTopW2v] = text::cosine(target.embedding, top_.embedding);
    f[F::kSimSrcPrevTopTfidf] = text::cosine(src.tfidf, past_.tfidf);
    f[F::kSimTargetPrevTopTfidf] = text::cosine(target.tfidf, past_.tfidf);
    f[F::kSimSrcPrevTopW2v] = text::cosine(src.embedding, past_.embedding);
    f[F::kSimTargetPrevTopW2v] = text::cosine(target.embedding, past_.embedding);
    f[F::kSimSrcTargetW2v] = text::cosine(src.embedding, target.embedding);
    const auto ctx = context_slots(src_index, src_.size());
    if (ctx.prec && ctx.follow) {
      const auto& prec = src_[*ctx.prec].embedding;
      const auto& follow = src_[*ctx.follow].embedding;
      f[F::kSimSrcPrecPsgW2v] = text::cosine(src.embedding, prec);
      f[F::kSimSrcFollowPsgW2v] = text::cosine(src.embedding, follow);
      f[F::kSimTargetPrecPsgW2v] = text::cosine(target.embedding, prec);
      f[F::kSimTargetFollowPsgW2v] = text::cosine(target.embedding, follow);
    }
    return f;
  }

  const Centroid& top_centroid() const { return top_; }
  const Centroid& past_centroid() const { return past_; }

 private:
  struct PassageVectors {
    text::Terms terms;
    text::TermVector tfidf;
    text::DenseVector embedding;
  };

  PassageVectors passage_vectors(std::string_view p) const {
    return PassageVectors{text::tokenize(p), text::tfidf_vector(p, *stats_),
                          text::embed_text(p, *store_)};
  }

  const text::CorpusStats* stats_;
  const text::EmbeddingStore* store_;
  FeatureConfig cfg_;
  Centroid top_;
  Centroid past_;
  std::set<std::string> query_terms_;
  std::vector<PassageVectors> src_;
};

/// Features of one pair, computing the centroids from scratch.
inline PairFeatures extract_pair_features(const PassagePair& pair, std::string_view target_text,
                                          const Document& d_cur, const engine::Query& query,
                                          const RankingHistory& history,
                                          const text::CorpusStats& stats,
                                          const text::EmbeddingStore& store,
                                          FeatureConfig cfg = {}) {
  return PairFeatureExtractor::from_history(d_cur, query, history, stats, store, cfg)
      .extract(pair.src_index, target_text);
}

}  // namespace rankpromo::bot
