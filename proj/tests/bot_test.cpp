#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "rankpromo/bot/centroids.hpp"
#include "rankpromo/bot/io.hpp"
#include "rankpromo/bot/modify.hpp"
#include "rankpromo/bot/pair_features.hpp"
#include "rankpromo/bot/pair_model.hpp"
#include "rankpromo/bot/pool.hpp"

using namespace rankpromo;
using namespace rankpromo::bot;
using engine::Document;
using engine::Query;
using engine::Ranking;
using F = PairFeature;

namespace {

RankingHistory three_doc_history() {
  RankingHistory h("q");
  const std::vector<Document> docs = {
      Document::from_text("d1", "x", "One a. Two b."),
      Document::from_text("d2", "y", "Three c. Four d. Five e."),
      Document::from_text("d3", "z", "Six f. Seven g."),
  };
  h.append(Ranking{"q", {"d1", "d2", "d3"}, 1}, docs);
  return h;
}

text::EmbeddingStore store3() {
  text::EmbeddingStore s(3, text::OovMode::kError);
  s.insert("x", text::DenseVector{1, 0, 0});
  s.insert("y", text::DenseVector{0, 1, 0});
  s.insert("z", text::DenseVector{0, 0, 1});
  return s;
}

}  // namespace

TEST(CandidatePool, CountsPassagesAboveDcur) {
  const auto h = three_doc_history();
  const auto pool = build_candidate_pool(h, "d3");
  ASSERT_EQ(pool.size(), 5u);
  EXPECT_EQ(pool[0].doc_id, "d1");
  EXPECT_EQ(pool[0].doc_rank, 1);
  EXPECT_EQ(pool[4].doc_id, "d2");
  EXPECT_EQ(pool[4].index, 2u);
  EXPECT_EQ(build_candidate_pool(h, "d2").size(), 2u);
}

TEST(CandidatePool, BoundaryErrors) {
  const auto h = three_doc_history();
  EXPECT_THROW(build_candidate_pool(h, "d1"), NothingToMimic);
  EXPECT_THROW(build_candidate_pool(h, "nope"), ValidationError);
}

TEST(CandidatePool, ExcludesPassagesEqualToOwn) {
  RankingHistory h("q");
  const std::vector<Document> docs = {
      Document::from_text("d1", "x", "Shared sentence here. Unique top."),
      Document::from_text("d2", "y", "shared, SENTENCE here! Mine."),
  };
  h.append(Ranking{"q", {"d1", "d2"}, 1}, docs);
  const auto pool = build_candidate_pool(h, "d2");
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_EQ(pool[0].text, "Unique top.");
}

TEST(TopCentroids, RankTwoUsesTopDocumentExactly) {
  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  const auto c = compute_top_centroids(w.history, ids[1], 3, w.stats, w.store);
  const auto& top = w.history.document(ids[0]);
  EXPECT_EQ(c.tfidf.entries(), doc_tfidf(top, w.stats).entries());
  EXPECT_EQ(c.embedding, doc_embedding(top, w.store));
}

TEST(TopCentroids, CappedAtMmax) {
  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  const auto c = compute_top_centroids(w.history, ids[4], 3, w.stats, w.store);
  text::DenseVector mean(w.store.dimension());
  for (int i = 0; i < 3; ++i) {
    const auto e = doc_embedding(w.history.document(ids[static_cast<std::size_t>(i)]), w.store);
    for (std::size_t k = 0; k < mean.dimension(); ++k) mean.components[k] += e.components[k] / 3;
  }
  for (std::size_t k = 0; k < mean.dimension(); ++k) {
    EXPECT_NEAR(c.embedding.components[k], mean.components[k], 1e-15);
  }
  EXPECT_THROW(compute_top_centroids(w.history, ids[0], 3, w.stats, w.store), NothingToMimic);
}

TEST(TopCentroids, TwoDocumentHandMean) {
  // N = 4 (stats below): idf(one) = ln 2, idf(two) = ln 4, idf(six) = ln 4.
  RankingHistory h("q");
  const std::vector<Document> docs = {
      Document::from_text("d1", "x", "one one two."),
      Document::from_text("d2", "y", "one six."),
      Document::from_text("d3", "z", "seven."),
  };
  h.append(Ranking{"q", {"d1", "d2", "d3"}, 1}, docs);
  const auto stats = text::CorpusStats::build({"one one two", "one six", "seven", "eight"});
  const auto c = compute_top_centroids(h, "d3", 3, stats, store3());
  EXPECT_NEAR(c.tfidf.get("one"), (2 * std::log(2.0) + std::log(2.0)) / 2, 1e-15);
  EXPECT_NEAR(c.tfidf.get("two"), std::log(4.0) / 2, 1e-15);
  EXPECT_NEAR(c.tfidf.get("six"), std::log(4.0) / 2, 1e-15);
  EXPECT_EQ(c.tfidf.size(), 3u);
}

TEST(PastCentroid, DecayWeights) {
  const auto w = past_decay_weights(3, 0.01);
  EXPECT_NEAR(w[0], 0.0033667, 1e-7);
  EXPECT_NEAR(w[0], 0.003366721665289847, 1e-15);
  EXPECT_GT(w[0], w[1]);
  EXPECT_GT(w[1], w[2]);
  EXPECT_NEAR(w[0] + w[1] + w[2], 0.01, 1e-15);
  EXPECT_DOUBLE_EQ(past_decay_weights(1, 0.01)[0], 0.01);
}

TEST(PastCentroid, SingleRankingIsScaledTopDocument) {
  fixtures::HoofWorld w;
  RankingHistory one("q-hoof");
  one.append(w.history.at_lag(2), w.round1);
  const auto c = compute_past_centroid(one, 0.01, w.stats, w.store);
  const auto& top = one.document(one.current().doc_ids.front());
  const auto top_t = doc_tfidf(top, w.stats);
  const auto top_e = doc_embedding(top, w.store);
  for (const auto& [t, v] : top_t.entries()) EXPECT_NEAR(c.tfidf.get(t), 0.01 * v, 1e-15);
  for (const auto& p : w.round1[3].passages()) {
    const auto pt = text::tfidf_vector(p, w.stats);
    const auto pe = text::embed_text(p, w.store);
    EXPECT_NEAR(text::cosine(pt, c.tfidf), text::cosine(pt, top_t), 1e-12);
    EXPECT_NEAR(text::cosine(pe, c.embedding), text::cosine(pe, top_e), 1e-12);
  }
}

TEST(PairFeatures, QueryTermFractionReadings) {
  const std::set<std::string> q = {"a", "b"};
  const auto target = text::tokenize("a c a d");
  EXPECT_DOUBLE_EQ(query_term_fraction(target, q, QueryTermMode::kOccurrenceFraction), 0.5);
  EXPECT_DOUBLE_EQ(query_term_fraction(target, q, QueryTermMode::kDistinctCoverage), 0.5);
  const auto heavy = text::tokenize("a a a a");
  EXPECT_DOUBLE_EQ(query_term_fraction(heavy, q, QueryTermMode::kOccurrenceFraction), 1.0);
  EXPECT_DOUBLE_EQ(query_term_fraction(heavy, q, QueryTermMode::kDistinctCoverage), 0.5);
}

TEST(PairFeatures, QryTermTargetOnDecision) {
  fixtures::HoofWorld w;
  const auto q = Query::make("q", "a b");
  const auto& d = w.history.document(w.history.current().doc_ids[2]);
  const auto fx = PairFeatureExtractor::from_history(d, q, w.history, w.stats, w.store);
  EXPECT_DOUBLE_EQ(fx.extract(1, "a c a d")[F::kQryTermTarget], 0.5);
}

TEST(PairFeatures, ContextBoundaryRules) {
  EXPECT_EQ(context_slots(0, 3).prec, 1u);
  EXPECT_EQ(context_slots(0, 3).follow, 1u);
  EXPECT_EQ(context_slots(2, 3).prec, 1u);
  EXPECT_EQ(context_slots(2, 3).follow, 1u);
  EXPECT_EQ(context_slots(1, 3).prec, 0u);
  EXPECT_EQ(context_slots(1, 3).follow, 2u);
  EXPECT_FALSE(context_slots(0, 1).prec.has_value());

  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  const auto& d = w.history.document(ids[3]);
  const auto fx = PairFeatureExtractor::from_history(d, w.query, w.history, w.stats, w.store);
  const auto first = fx.extract(0, "Hoof cracks are common.");
  EXPECT_EQ(first[F::kSimSrcPrecPsgW2v], first[F::kSimSrcFollowPsgW2v]);
  EXPECT_EQ(first[F::kSimTargetPrecPsgW2v], first[F::kSimTargetFollowPsgW2v]);
  // g_target verbatim equal to g_prec
  const auto mid = fx.extract(2, d.passages()[1]);
  EXPECT_NEAR(mid[F::kSimTargetPrecPsgW2v], 1.0, 1e-12);
}

TEST(PairFeatures, SinglePassageDocumentHasNoContext) {
  RankingHistory h("q");
  const std::vector<Document> docs = {
      Document::from_text("top", "x", "Hoof cracks hurt. Trim hooves."),
      Document::from_text("solo", "y", "Horses eat hay."),
  };
  h.append(Ranking{"q", {"top", "solo"}, 1}, docs);
  const auto stats = text::CorpusStats::build({docs[0].text(), docs[1].text()}, {"hoof"});
  text::EmbeddingStore store(8, text::OovMode::kHashDeterministic);
  const auto fx = PairFeatureExtractor::from_history(docs[1], Query::make("q", "hoof"), h,
                                                     stats, store);
  const auto f = fx.extract(0, "Hoof cracks hurt.");
  EXPECT_EQ(f[F::kSimSrcPrecPsgW2v], 0.0);
  EXPECT_EQ(f[F::kSimSrcFollowPsgW2v], 0.0);
  EXPECT_EQ(f[F::kSimTargetPrecPsgW2v], 0.0);
  EXPECT_EQ(f[F::kSimTargetFollowPsgW2v], 0.0);
  EXPECT_GT(f[F::kQryTermTarget], 0.0);
}

TEST(PairFeatures, CentroidScaleInvariance) {
  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  for (std::size_t r = 1; r < ids.size(); ++r) {
    const auto& d = w.history.document(ids[r]);
    const auto top = compute_top_centroids(w.history, d.id(), 3, w.stats, w.store);
    const auto past = compute_past_centroid(w.history, 0.01, w.stats, w.store);
    const PairFeatureExtractor base(d, w.query, top, past, w.stats, w.store);
    for (double lambda : {0.01, 1.0, 100.0}) {
      const PairFeatureExtractor scaled(d, w.query, Centroid(top).scale(lambda),
                                        Centroid(past).scale(lambda), w.stats, w.store);
      for (const auto& g : build_candidate_pool(w.history, d.id())) {
        for (std::size_t s = 0; s < d.passages().size(); ++s) {
          const auto a = base.extract(s, g.text);
          const auto b = scaled.extract(s, g.text);
          for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
            EXPECT_NEAR(a.values[j], b.values[j], 1e-12) << kPairFeatureNames[j];
          }
        }
      }
    }
  }
}

TEST(MinMax, Examples) {
  auto rows = std::vector<PairFeatures>(3);
  rows[0].values[0] = 2;
  rows[1].values[0] = 4;
  rows[2].values[0] = 6;
  for (auto& r : rows) r.values[1] = 5;
  const auto n = min_max_normalize(rows);
  EXPECT_EQ(n.rows[0].values[0], 0.0);
  EXPECT_EQ(n.rows[1].values[0], 0.5);
  EXPECT_EQ(n.rows[2].values[0], 1.0);
  for (const auto& r : n.rows) EXPECT_EQ(r.values[1], 0.0);
  EXPECT_THROW(min_max_normalize({}), ValidationError);

  PairFeatures above;
  above.values[0] = 9;
  above.values[1] = 5;
  const auto clipped = apply_bounds({above}, n.bounds);
  EXPECT_EQ(clipped[0].values[0], 1.0);
  EXPECT_EQ(clipped[0].values[1], 0.0);
  above.values[0] = -3;
  EXPECT_EQ(apply_bounds({above}, n.bounds)[0].values[0], 0.0);
}

TEST(ScoreAndSelect, PublishedWeightsPreferQueryDenseTarget) {
  const auto model = PairModel::published();
  EXPECT_DOUBLE_EQ(model.weights[static_cast<std::size_t>(F::kQryTermTarget)], 0.189);
  EXPECT_DOUBLE_EQ(model.weights[static_cast<std::size_t>(F::kQryTermSrc)], -0.073);
  std::vector<PairFeatures> rows(2);
  for (auto& r : rows) r.values.fill(0.4);
  rows[1][F::kQryTermTarget] = 0.9;
  const std::vector<PassagePair> pairs = {{0, "t", 1, 0}, {0, "t", 1, 1}};
  // 0.189 * (0.9 - 0.4) > 0
  EXPECT_EQ(score_and_select(pairs, rows, model).best, 1u);
}

TEST(ScoreAndSelect, SingleCandidateAndZeroWeights) {
  const std::vector<PassagePair> one = {{1, "t", 2, 3}};
  EXPECT_EQ(score_and_select(one, std::vector<PairFeatures>(1), PairModel{}).best, 0u);
  const std::vector<PassagePair> pairs = {{1, "t", 1, 0}, {0, "u", 2, 1}, {0, "t", 1, 2},
                                          {0, "t", 1, 1}};
  std::mt19937_64 rng(1);
  std::vector<PairFeatures> rows(4);
  for (auto& r : rows)
    for (auto& x : r.values) x = std::uniform_real_distribution<double>(0, 1)(rng);
  // all-zero model: first pair by (src, target rank, target index)
  EXPECT_EQ(score_and_select(pairs, rows, PairModel{}).best, 3u);
  EXPECT_THROW(score_and_select({}, {}, PairModel{}), ValidationError);
}

TEST(ScoreAndSelect, ArgmaxInvariantUnderPositiveScaling) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 1), wdist(-1, 1), lam(1e-3, 1e3);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 40;
    std::vector<PassagePair> pairs;
    std::vector<PairFeatures> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      pairs.push_back({i / 5, "t", static_cast<int>(1 + i % 3), i % 5});
      for (auto& x : rows[i].values) x = u(rng);
    }
    PairModel m;
    for (auto& w : m.weights) w = wdist(rng);
    PairModel scaled = m;
    const double l = lam(rng);
    for (auto& w : scaled.weights) w *= l;
    EXPECT_EQ(score_and_select(pairs, rows, m).best, score_and_select(pairs, rows, scaled).best);
  }
}

TEST(ApplyReplacement, KeepsOtherPassages) {
  const auto d = Document::from_text("d", "auth", "First one. Second two. Third three.");
  const auto n = apply_replacement(d, 1, "Replacement here!");
  EXPECT_EQ(n.passages()[0], "First one.");
  EXPECT_EQ(n.passages()[1], "Replacement here!");
  EXPECT_EQ(n.passages()[2], "Third three.");
  EXPECT_EQ(n.id(), "d#1");
  EXPECT_EQ(n.author_id(), "auth");
  EXPECT_THROW(apply_replacement(d, 1, "so many words in this one sentence", 8),
               engine::LengthCapExceeded);
  EXPECT_THROW(apply_replacement(d, 3, "x."), ValidationError);
}

TEST(ApplyReplacement, ReproducesHoofCareExample) {
  const auto original =
      Document::from_text("hoof", "student", fixtures::join(fixtures::hoof_original_passages()),
                          200);
  ASSERT_EQ(original.passages(), fixtures::hoof_original_passages());
  const auto modified = apply_replacement(original, 8, fixtures::hoof_farrier_sentence(), 200);
  const std::string expected =
      "There are many different hoof problems that can occur in horses. To reduce hoof "
      "problems, follow these recommendations: Regular trimming or shoeing, Maintain good hoof "
      "balance, Maintain the correct hoof pastern angle, break over, and medial-lateral balance "
      ",Give heel support if needed ,Use appropriate shoeing for different weather and footing "
      "conditions ,Use appropriate treatment if disease process occurs. Poor shoeing or "
      "trimming. Long toes can results in strain on flexor tendons, the navicular bone, and "
      "collapsed heels. If the horse is \"too upright\" it can cause trauma to the coffin bone. "
      "An imbalanced hoof can cause stress on the collateral ligaments. Hoof cracks. Horizontal "
      "cracks or blowouts are usually caused by an injury to the coronary band or a blow to the "
      "hoof wall. an important recommendation is to go for a good farrier which is a specialist "
      "in equine hoof care, who's work consist of trimming and balancing of horses' hooves and "
      "the placing of shoes on their hooves. Grass cracks are usually seen in long, unshod "
      "horses, and can be corrected with trimming and shoeing.";
  EXPECT_EQ(modified.text(), expected);
  // The published 150-term cap rejects this swap.
  EXPECT_THROW(apply_replacement(original, 8, fixtures::hoof_farrier_sentence()),
               engine::LengthCapExceeded);
}

TEST(ModifyDocument, RankOneIsUnchanged) {
  fixtures::HoofWorld w;
  const auto& top = w.history.document(w.history.current().doc_ids[0]);
  const auto r = modify_document(top, w.query, w.history, PairModel::published(), w.stats, w.store);
  EXPECT_FALSE(r.audit.modified);
  EXPECT_EQ(r.document.id(), top.id());
  EXPECT_EQ(r.document.text(), top.text());
}

TEST(ModifyDocument, DeterministicAndSinglePassageEdit) {
  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const auto& d = w.history.document(ids[i]);
    const auto a = modify_document(d, w.query, w.history, PairModel::published(), w.stats, w.store);
    const auto b = modify_document(d, w.query, w.history, PairModel::published(), w.stats, w.store);
    ASSERT_TRUE(a.audit.modified);
    EXPECT_EQ(a.document.text(), b.document.text());
    EXPECT_EQ(a.document.id(), b.document.id());
    ASSERT_EQ(a.document.passages().size(), d.passages().size());
    std::size_t changed = 0;
    for (std::size_t k = 0; k < d.passages().size(); ++k) {
      changed += a.document.passages()[k] != d.passages()[k];
    }
    EXPECT_EQ(changed, 1u);
    const auto& chosen = a.audit.candidates[*a.audit.chosen];
    EXPECT_EQ(a.document.passages()[chosen.pair.src_index], chosen.target_text);
  }
}

TEST(ModifyDocument, ChosenTargetCarriesAtLeastAsManyQueryTerms) {
  // Brute force over every candidate of every non-top document: the chosen
  // pair never moves query-term occurrences out of the document.
  fixtures::HoofWorld w;
  const auto qt = w.query.terms();
  const std::set<std::string> qset(qt.begin(), qt.end());
  auto occurrences = [&](const std::string& p) {
    int n = 0;
    for (const auto& t : text::tokenize(p)) n += static_cast<int>(qset.count(t));
    return n;
  };
  const auto& ids = w.history.current().doc_ids;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const auto& d = w.history.document(ids[i]);
    const auto r = modify_document(d, w.query, w.history, PairModel::published(), w.stats, w.store);
    ASSERT_TRUE(r.audit.chosen.has_value());
    const auto& c = r.audit.candidates[*r.audit.chosen];
    EXPECT_GE(occurrences(c.target_text), occurrences(d.passages()[c.pair.src_index]))
        << d.id();
  }
}

TEST(ModifyDocument, LengthCapFallsBackToNextBest) {
  fixtures::HoofWorld w;
  const auto& ids = w.history.current().doc_ids;
  const auto& d = w.history.document(ids[4]);
  BotConfig tight;
  tight.term_cap = d.term_count();  // only swaps that do not grow the document fit
  const auto r = modify_document(d, w.query, w.history, PairModel::published(), w.stats, w.store,
                                 tight);
  if (r.audit.modified) {
    EXPECT_LE(r.document.term_count(), tight.term_cap);
  }
  BotConfig impossible;
  impossible.term_cap = 1;
  const auto none = modify_document(d, w.query, w.history, PairModel::published(), w.stats,
                                    w.store, impossible);
  EXPECT_FALSE(none.audit.modified);
  EXPECT_EQ(none.audit.skipped_over_cap.size(), none.audit.candidates.size());
}

TEST(ModifyDocument, FeatureRangesOnRandomCorpora) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> vocab = {"hoof",  "crack", "horse", "the",  "of",  "farrier",
                                          "trim",  "heel",  "toe",   "wall", "barn", "shoe",
                                          "grass", "care",  "a",     "is"};
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> len(2, 9), npass(1, 5);
  text::EmbeddingStore store(12, text::OovMode::kHashDeterministic);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Document> docs;
    std::vector<std::string> texts;
    for (int k = 0; k < 5; ++k) {
      std::string t;
      const int np = npass(rng);
      for (int p = 0; p < np; ++p) {
        const int n = len(rng);
        for (int i = 0; i < n; ++i) t += vocab[pick(rng)] + (i + 1 < n ? " " : ". ");
      }
      docs.push_back(Document::from_text("d" + std::to_string(k), "a", t));
      texts.push_back(t);
    }
    const auto q = Query::make("q", vocab[pick(rng)] + " " + vocab[pick(rng)]);
    const auto stats = text::CorpusStats::build(texts, {q.text});
    RankingHistory h("q");
    h.append(engine::rank_documents(docs, q, engine::EngineModel::lm_dirichlet(), stats), docs);
    for (std::size_t r = 1; r < 5; ++r) {
      const auto& d = h.document(h.current().doc_ids[r]);
      const auto c = enumerate_candidates(d, q, h, stats, store);
      for (const auto& f : c.raw) {
        for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
          if (j < 2) {
            EXPECT_GE(f.values[j], 0.0);
            EXPECT_LE(f.values[j], 1.0);
          } else {
            EXPECT_GE(f.values[j], -1.0);
            EXPECT_LE(f.values[j], 1.0);
          }
        }
      }
    }
  }
}

TEST(Audit, SerializesChosenPairAndCandidates) {
  fixtures::HoofWorld w;
  const auto& d = w.history.document(w.history.current().doc_ids[2]);
  const auto r = modify_document(d, w.query, w.history, PairModel::published(), w.stats, w.store);
  const auto j = audit_to_json(r.audit);
  EXPECT_EQ(j["modified"], true);
  EXPECT_EQ(j["candidates"].size(), r.audit.candidates.size());
  EXPECT_EQ(j["candidates"][0]["raw"].size(), kNumPairFeatures);
  EXPECT_TRUE(j["candidates"][0]["raw"].contains("SimSrcTarget(W2V)"));
  EXPECT_EQ(j["chosen"]["src_index"], r.audit.candidates[*r.audit.chosen].pair.src_index);
}

TEST(PairModelIo, RoundTrip) {
  PairModel m = PairModel::published();
  FeatureBounds b;
  for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
    b.min[j] = -0.5 + 0.01 * static_cast<double>(j);
    b.max[j] = 1.0 / 3.0 + static_cast<double>(j);
  }
  m.bounds = b;
  EXPECT_EQ(pair_model_from_json(pair_model_to_json(m)), m);
  EXPECT_EQ(pair_model_from_json(pair_model_to_json(PairModel::published())),
            PairModel::published());
  auto j = pair_model_to_json(m);
  j["weights"].erase("QryTermSrc");
  EXPECT_THROW(pair_model_from_json(j), ValidationError);
}
