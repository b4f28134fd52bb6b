#pragma once

#include <set>
#include <string>
#include <vector>

#include "rankpromo/bot/history.hpp"
#include "rankpromo/text/tokenize.hpp"

namespace rankpromo::bot {

/// Thrown when the document to promote already holds rank 1.
class NothingToMimic : public RuntimeError {
 public:
  explicit NothingToMimic(const std::string& doc_id)
      : RuntimeError("document '" + doc_id + "' is ranked first: nothing to mimic") {}
};

/// A replacement candidate passage taken from a higher-ranked document.
struct PoolPassage {
  std::string doc_id;
  int doc_rank = 0;        // rank of the source document in the current ranking
  std::size_t index = 0;   // passage position within that document
  std::string text;
};

/// (g_src, g_target): replace passage `src_index` of d_cur with a pool passage.
struct PassagePair {
  std::size_t src_index = 0;
  std::string target_doc_id;
  int target_rank = 0;
  std::size_t target_index = 0;

  /// Tie-break order: src_index, then target rank, then target position.
  friend bool tie_order_less(const PassagePair& a, const PassagePair& b) {
    if (a.src_index != b.src_index) return a.src_index < b.src_index;
    if (a.target_rank != b.target_rank) return a.target_rank < b.target_rank;
    return a.target_index < b.target_index;
  }

  bool operator==(const PassagePair&) const = default;
};

/// 1-based rank of `d_cur_id` in the current ranking; throws when absent.
inline int current_rank(const RankingHistory& history, const std::string& d_cur_id) {
  const int r = history.current().rank_of(d_cur_id);
  if (r == 0) {
    throw ValidationError("document '" + d_cur_id + "' is not in the current ranking");
  }
  return r;
}

/// All passages of documents ranked strictly above d_cur in the current
/// ranking, in rank-then-position order. Passages whose term sequence equals
/// one of d_cur's own passages are left out.
inline std::vector<PoolPassage> build_candidate_pool(const RankingHistory& history,
                                                     const std::string& d_cur_id) {
  const int rank = current_rank(history, d_cur_id);
  if (rank == 1) throw NothingToMimic(d_cur_id);
  const auto& d_cur = history.document(d_cur_id);
  std::set<text::Terms> own;
  for (const auto& p : d_cur.passages()) own.insert(text::tokenize(p));

  std::vector<PoolPassage> pool;
  const auto& ids = history.current().doc_ids;
  for (int r = 1; r < rank; ++r) {
    const auto& doc = history.document(ids[static_cast<std::size_t>(r - 1)]);
    const auto& ps = doc.passages();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (own.count(text::tokenize(ps[i]))) continue;
      pool.push_back(PoolPassage{doc.id(), r, i, ps[i]});
    }
  }
  return pool;
}

}  // namespace rankpromo::bot
