#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "rankpromo/bot/modify.hpp"
#include "rankpromo/engine/ranker.hpp"
#include "rankpromo/training/labels.hpp"

namespace rankpromo::training {

/// One query's observed rankings, used as training material.
struct TrainingSnapshot {
  engine::Query query;
  bot::RankingHistory history;
};

struct LabeledPair {
  std::string group_id;  // the d_cur this pair is ranked within
  std::string query_id;
  bot::PassagePair pair;
  bot::PairFeatures features;  // raw, unnormalized
  int r = 0;
  double c = 0.0;
  double l = 0.0;
};

struct GenerationConfig {
  double beta = kDefaultBeta;
  double epsilon = kDefaultEpsilon;
  LabelMode label_mode = LabelMode::kHarmonic;
  bot::BotConfig bot;
  unsigned threads = 1;
};

/// Shape of a generated dataset.
struct DatasetSummary {
  std::size_t groups = 0;
  std::size_t pairs = 0;
  std::size_t skipped_over_cap = 0;
  double pairs_per_group_mean = 0.0;
  double pairs_per_group_sd = 0.0;
};

inline std::string group_id_for(const std::string& query_id, const std::string& doc_id) {
  return query_id + "/" + doc_id;
}

/// Training designates the second-ranked and the last-ranked document of the
/// current ranking as d_cur (one document when they coincide).
inline std::vector<std::string> designated_dcur(const engine::Ranking& current) {
  std::vector<std::string> out;
  if (current.size() < 2) return out;
  out.push_back(current.doc_ids[1]);
  if (current.size() > 2) out.push_back(current.doc_ids.back());
  return out;
}

namespace detail {

struct GroupResult {
  std::vector<LabeledPair> pairs;
  std::size_t skipped = 0;
};

inline GroupResult label_group(const TrainingSnapshot& snap, const std::string& d_cur_id,
                               const engine::EngineModel& engine,
                               const text::CorpusStats& stats,
                               const text::EmbeddingStore& store, const GenerationConfig& cfg) {
  GroupResult out;
  const auto& history = snap.history;
  const auto current_docs = history.current_documents();
  const auto& d_cur = history.document(d_cur_id);
  const int n = static_cast<int>(current_docs.size());
  const int rank_cur = history.current().rank_of(d_cur_id);
  const auto cands =
      bot::enumerate_candidates(d_cur, snap.query, history, stats, store, cfg.bot.features);
  const auto gid = group_id_for(snap.query.id, d_cur_id);
  for (std::size_t i = 0; i < cands.pairs.size(); ++i) {
    const auto& p = cands.pairs[i];
    engine::Document d_next;
    try {
      d_next = bot::apply_replacement(d_cur, p.src_index, cands.target_texts[i], cfg.bot.term_cap);
    } catch (const engine::LengthCapExceeded&) {
      ++out.skipped;
      continue;
    }
    // Other documents are held fixed; only d_cur is swapped for d_next.
    auto docs = current_docs;
    for (auto& d : docs) {
      if (d.id() == d_cur_id) d = d_next;
    }
    const auto next = engine::rank_documents(docs, snap.query, engine, stats);
    LabeledPair lp;
    lp.group_id = gid;
    lp.query_id = snap.query.id;
    lp.pair = p;
    lp.features = cands.raw[i];
    lp.r = promotion_label(rank_cur, next.rank_of(d_next.id()), n);
    lp.c = coherence_proxy_label(d_cur, p.src_index, cands.target_texts[i], store);
    lp.l = training_label(cfg.label_mode, lp.r, lp.c, cfg.beta, cfg.epsilon);
    out.pairs.push_back(std::move(lp));
  }
  return out;
}

}  // namespace detail

/// Recomputing the current ranking with `engine` must reproduce the stored
/// one; otherwise labels would be measured against a different ranker.
inline void check_snapshot_engine(const TrainingSnapshot& snap, const engine::EngineModel& engine,
                                  const text::CorpusStats& stats) {
  const auto& cur = snap.history.current();
  const auto recomputed = engine::rank_documents(snap.history.current_documents(), snap.query,
                                                 engine, stats, cur.round_index);
  if (recomputed.doc_ids != cur.doc_ids) {
    throw ValidationError("snapshot for query '" + snap.query.id +
                          "' was not ranked by the supplied engine model");
  }
}

/// Enumerates every (g_src, g_target) for the designated d_cur documents of
/// every snapshot, labels each by counterfactual re-ranking (r) and the
/// coherence proxy (c), and aggregates them per the label mode. Groups are
/// labeled concurrently when `threads > 1`; output order is deterministic.
inline std::vector<LabeledPair> generate_training_set(const std::vector<TrainingSnapshot>& snaps,
                                                      const engine::EngineModel& engine,
                                                      const text::CorpusStats& stats,
                                                      const text::EmbeddingStore& store,
                                                      const GenerationConfig& cfg = {},
                                                      DatasetSummary* summary = nullptr) {
  struct Job {
    const TrainingSnapshot* snap;
    std::string d_cur;
  };
  std::vector<Job> jobs;
  for (const auto& s : snaps) {
    check_snapshot_engine(s, engine, stats);
    for (auto& id : designated_dcur(s.history.current())) jobs.push_back({&s, std::move(id)});
  }

  std::vector<detail::GroupResult> results(jobs.size());
  const unsigned threads = std::max(1u, cfg.threads);
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    std::vector<std::future<detail::GroupResult>> batch;
    const auto end = std::min(jobs.size(), start + threads);
    for (std::size_t j = start; j < end; ++j) {
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&, j] {
                                   return detail::label_group(*jobs[j].snap, jobs[j].d_cur, engine,
                                                              stats, store, cfg);
                                 }));
    }
    for (std::size_t j = start; j < end; ++j) results[j] = batch[j - start].get();
  }

  std::vector<LabeledPair> out;
  DatasetSummary sum;
  std::vector<double> sizes;
  for (auto& g : results) {
    sum.skipped_over_cap += g.skipped;
    if (g.pairs.empty()) continue;
    sizes.push_back(static_cast<double>(g.pairs.size()));
    for (auto& p : g.pairs) out.push_back(std::move(p));
  }
  sum.groups = sizes.size();
  sum.pairs = out.size();
  if (!sizes.empty()) {
    double mean = 0.0;
    for (double s : sizes) mean += s;
    mean /= static_cast<double>(sizes.size());
    double var = 0.0;
    for (double s : sizes) var += (s - mean) * (s - mean);
    sum.pairs_per_group_mean = mean;
    sum.pairs_per_group_sd =
        sizes.size() > 1 ? std::sqrt(var / static_cast<double>(sizes.size() - 1)) : 0.0;
  }
  if (summary) *summary = sum;
  return out;
}

/// Recomputes l from stored r and c under another mode or beta.
inline std::vector<LabeledPair> relabel(std::vector<LabeledPair> data, LabelMode mode,
                                        double beta = kDefaultBeta,
                                        double epsilon = kDefaultEpsilon) {
  for (auto& p : data) p.l = training_label(mode, p.r, p.c, beta, epsilon);
  return data;
}

}  // namespace rankpromo::training
