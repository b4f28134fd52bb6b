#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rankpromo/bot/pair_model.hpp"
#include "rankpromo/engine/document.hpp"

namespace rankpromo::bot {

struct BotConfig {
  FeatureConfig features;
  std::size_t term_cap = engine::kDefaultTermCap;
};

/// d_cur with passage `src_index` replaced by `target_text`. Other passages are
/// kept byte-identical; the result gets the next version id and the same
/// author. Throws LengthCapExceeded when the result is over the cap.
inline Document apply_replacement(const Document& d_cur, std::size_t src_index,
                                  const std::string& target_text,
                                  std::size_t term_cap = engine::kDefaultTermCap) {
  auto passages = d_cur.passages();
  if (src_index >= passages.size()) throw ValidationError("source passage index out of range");
  passages[src_index] = target_text;
  return Document::from_passages(engine::next_version_id(d_cur.id()), d_cur.author_id(),
                                 std::move(passages), term_cap);
}

struct CandidateAudit {
  PassagePair pair;
  std::string target_text;
  PairFeatures raw;
  PairFeatures normalized;
  double score = 0.0;
};

/// Everything that went into one modification decision.
struct ModificationAudit {
  std::string query_id;
  std::string d_cur_id;
  std::string result_id;
  bool modified = false;
  std::string reason;
  std::optional<std::size_t> chosen;          // index into candidates
  std::vector<std::size_t> skipped_over_cap;  // better-scored candidates rejected by the cap
  std::vector<CandidateAudit> candidates;
};

struct ModifyResult {
  Document document;
  ModificationAudit audit;
};

/// All (g_src, g_target) candidates for d_cur with raw features, in tie-break
/// order. Empty when the pool is empty.
struct CandidateSet {
  std::vector<PassagePair> pairs;
  std::vector<std::string> target_texts;
  std::vector<PairFeatures> raw;
};

inline CandidateSet enumerate_candidates(const Document& d_cur, const engine::Query& query,
                                         const RankingHistory& history,
                                         const text::CorpusStats& stats,
                                         const text::EmbeddingStore& store,
                                         const FeatureConfig& cfg = {}) {
  CandidateSet out;
  const auto pool = build_candidate_pool(history, d_cur.id());
  if (pool.empty()) return out;
  const auto fx = PairFeatureExtractor::from_history(d_cur, query, history, stats, store, cfg);
  for (std::size_t s = 0; s < d_cur.passages().size(); ++s) {
    for (const auto& g : pool) {
      out.pairs.push_back(PassagePair{s, g.doc_id, g.doc_rank, g.index});
      out.target_texts.push_back(g.text);
      out.raw.push_back(fx.extract(s, g.text));
    }
  }
  return out;
}

/// Single-shot modification: pool, features, normalization, scoring, then the
/// best pair whose result fits the length cap. A rank-1 document or an empty
/// pool comes back unchanged with the reason recorded.
inline ModifyResult modify_document(const Document& d_cur, const engine::Query& query,
                                    const RankingHistory& history, const PairModel& model,
                                    const text::CorpusStats& stats,
                                    const text::EmbeddingStore& store,
                                    const BotConfig& cfg = {}) {
  ModifyResult res{d_cur, {}};
  auto& audit = res.audit;
  audit.query_id = query.id;
  audit.d_cur_id = d_cur.id();
  audit.result_id = d_cur.id();
  if (history.current().rank_of(d_cur.id()) == 0) {
    throw ValidationError("document '" + d_cur.id() + "' is not in the current ranking");
  }
  if (history.current().rank_of(d_cur.id()) == 1) {
    audit.reason = "ranked first: nothing to mimic";
    return res;
  }
  auto cands = enumerate_candidates(d_cur, query, history, stats, store, cfg.features);
  if (cands.pairs.empty()) {
    audit.reason = "empty candidate pool";
    return res;
  }
  const auto normalized = model.normalize(cands.raw);
  const auto sel = score_and_select(cands.pairs, normalized, model);

  audit.candidates.reserve(cands.pairs.size());
  for (std::size_t i = 0; i < cands.pairs.size(); ++i) {
    audit.candidates.push_back(CandidateAudit{cands.pairs[i], cands.target_texts[i],
                                              cands.raw[i], normalized[i], sel.scores[i]});
  }

  std::vector<std::size_t> order(cands.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sel.scores[a] != sel.scores[b]) return sel.scores[a] > sel.scores[b];
    return tie_order_less(cands.pairs[a], cands.pairs[b]);
  });
  for (std::size_t i : order) {
    try {
      res.document = apply_replacement(d_cur, cands.pairs[i].src_index, cands.target_texts[i],
                                       cfg.term_cap);
    } catch (const engine::LengthCapExceeded&) {
      audit.skipped_over_cap.push_back(i);
      continue;
    }
    audit.chosen = i;
    audit.modified = true;
    audit.result_id = res.document.id();
    audit.reason = audit.skipped_over_cap.empty() ? "best pair"
                                                  : "best pair within length cap";
    return res;
  }
  audit.reason = "every candidate exceeds the length cap";
  return res;
}

}  // namespace rankpromo::bot
