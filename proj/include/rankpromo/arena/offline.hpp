#pragma once

// Offline protocol: the bot revises round-t documents at ranks 2..n; its
// revision is ranked against the other authors' round-(t+1) documents and
// contrasted with the author's own round-(t+1) revision.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankpromo/arena/competition.hpp"
#include "rankpromo/arena/snapshot.hpp"

namespace rankpromo::arena {

inline constexpr std::string_view kStudentRow = "student";
inline constexpr std::string_view kStaticRow = "static";

struct OfflineVariant {
  std::string name;
  bot::PairModel model;
};

struct OfflineConfig {
  int test_round = 7;
  int first_rank = 2;
  int last_rank = 5;
  std::size_t term_cap = engine::kDefaultTermCap;
  bot::FeatureConfig features;
  int n_perm = 100000;
  std::uint64_t seed = 42;
};

struct CellOutcome {
  std::string doc_id;
  int rank_next = 0;
  Promotion promotion;
  double quality = 0.0;
};

struct OfflineCell {
  std::string query_id;
  int rank_prev = 0;
  std::string author;
  std::string d_cur_id;
  std::string skip_reason;                      // non-empty: cell not evaluated
  std::map<std::string, CellOutcome> outcomes;  // row name -> outcome
};

struct OfflineRow {
  std::string name;
  std::size_t cells = 0;
  double average_rank = 0.0;
  double raw_promotion = 0.0;
  double scaled_promotion = 0.0;
  double quality = 0.0;
};

struct Comparison {
  std::string a;
  std::string b;
  double mean_diff = 0.0;  // per-query raw promotion, a - b
  double p = 1.0;
  double p_bonferroni = 1.0;
};

struct OfflineReport {
  std::vector<std::string> row_names;  // variants, then student, then static
  std::vector<OfflineCell> cells;
  std::vector<OfflineRow> rows;
  std::vector<Comparison> comparisons;
  std::size_t planned_cells = 0;
  std::size_t skipped_cells = 0;

  const OfflineRow& row(std::string_view name) const {
    for (const auto& r : rows) {
      if (r.name == name) return r;
    }
    throw ValidationError("no offline row named '" + std::string(name) + "'");
  }

  const Comparison& comparison(std::string_view a, std::string_view b) const {
    for (const auto& c : comparisons) {
      if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) return c;
    }
    throw ValidationError("no comparison between '" + std::string(a) + "' and '" +
                          std::string(b) + "'");
  }

  /// Per-query mean raw promotion of one row (queries with >= 1 evaluated cell).
  std::map<std::string, double> per_query_raw(std::string_view name) const {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& c : cells) {
      if (!c.skip_reason.empty()) continue;
      auto it = c.outcomes.find(std::string(name));
      if (it == c.outcomes.end()) continue;
      auto& [s, k] = acc[c.query_id];
      s += it->second.promotion.raw;
      ++k;
    }
    std::map<std::string, double> out;
    for (const auto& [q, sk] : acc) out[q] = sk.first / sk.second;
    return out;
  }
};

namespace detail {

inline CellOutcome rank_against(const engine::Document& candidate,
                                const std::vector<engine::Document>& others,
                                const engine::Query& query, const engine::EngineModel& engine,
                                const text::CorpusStats& stats, int rank_prev) {
  auto docs = others;
  docs.push_back(candidate);
  const auto r = engine::rank_documents(docs, query, engine, stats);
  CellOutcome o;
  o.doc_id = candidate.id();
  o.rank_next = r.rank_of(candidate.id());
  o.promotion = *raw_and_scaled_promotion(rank_prev, o.rank_next, static_cast<int>(docs.size()));
  o.quality = quality_proxy(candidate, stats);
  return o;
}

}  // namespace detail

inline OfflineReport offline_eval(const std::vector<QuerySnapshot>& snaps,
                                  const std::vector<OfflineVariant>& variants,
                                  const engine::EngineModel& engine, const Environment& env,
                                  const OfflineConfig& cfg = {}) {
  if (cfg.first_rank < 2 || cfg.last_rank < cfg.first_rank) {
    throw ValidationError("offline ranks must satisfy 2 <= first <= last");
  }
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (v.name.empty() || v.name == kStudentRow || v.name == kStaticRow ||
        !names.insert(v.name).second) {
      throw ValidationError("offline variant names must be distinct and not reserved");
    }
  }
  OfflineReport rep;
  for (const auto& v : variants) rep.row_names.push_back(v.name);
  rep.row_names.emplace_back(kStudentRow);
  rep.row_names.emplace_back(kStaticRow);

  const int t = cfg.test_round;
  for (const auto& s : snaps) {
    for (int rank = cfg.first_rank; rank <= cfg.last_rank; ++rank) {
      ++rep.planned_cells;
      OfflineCell cell;
      cell.query_id = s.query.id;
      cell.rank_prev = rank;
      auto skip = [&](std::string why) {
        cell.skip_reason = std::move(why);
        ++rep.skipped_cells;
        rep.cells.push_back(cell);
      };
      if (static_cast<int>(s.rankings.size()) < t) {
        skip("no ranking for round " + std::to_string(t));
        continue;
      }
      const auto& ranking = s.rankings[static_cast<std::size_t>(t - 1)];
      if (rank > static_cast<int>(ranking.size())) {
        skip("ranking has fewer than " + std::to_string(rank) + " documents");
        continue;
      }
      cell.d_cur_id = ranking.doc_ids[static_cast<std::size_t>(rank - 1)];
      cell.author = s.author_of(cell.d_cur_id, t);
      const auto* next_own = s.version(cell.author, t + 1);
      if (!next_own) {
        skip("author has no round-" + std::to_string(t + 1) + " version");
        continue;
      }
      std::vector<engine::Document> others;
      bool missing = false;
      for (const auto& id : ranking.doc_ids) {
        if (id == cell.d_cur_id) continue;
        const auto* o = s.version(s.author_of(id, t), t + 1);
        if (!o) missing = true;
        else others.push_back(*o);
      }
      if (missing) {
        skip("another author has no round-" + std::to_string(t + 1) + " version");
        continue;
      }
      const auto history = s.history_through(t);
      const auto& d_cur = history.document(cell.d_cur_id);
      for (const auto& v : variants) {
        const auto res = bot::modify_document(d_cur, s.query, history, v.model, env.stats,
                                              env.store, {cfg.features, cfg.term_cap});
        cell.outcomes[v.name] =
            detail::rank_against(res.document, others, s.query, engine, env.stats, rank);
      }
      cell.outcomes[std::string(kStudentRow)] =
          detail::rank_against(*next_own, others, s.query, engine, env.stats, rank);
      cell.outcomes[std::string(kStaticRow)] =
          detail::rank_against(d_cur, others, s.query, engine, env.stats, rank);
      rep.cells.push_back(std::move(cell));
    }
  }

  for (const auto& name : rep.row_names) {
    OfflineRow row;
    row.name = name;
    for (const auto& c : rep.cells) {
      if (!c.skip_reason.empty()) continue;
      const auto& o = c.outcomes.at(name);
      ++row.cells;
      row.average_rank += o.rank_next;
      row.raw_promotion += o.promotion.raw;
      row.scaled_promotion += o.promotion.scaled;
      row.quality += o.quality;
    }
    if (row.cells) {
      const double k = static_cast<double>(row.cells);
      row.average_rank /= k;
      row.raw_promotion /= k;
      row.scaled_promotion /= k;
      row.quality /= k;
    }
    rep.rows.push_back(row);
  }

  // Every pair of rows, paired by query.
  for (std::size_t i = 0; i < rep.row_names.size(); ++i) {
    for (std::size_t j = i + 1; j < rep.row_names.size(); ++j) {
      const auto a = rep.per_query_raw(rep.row_names[i]);
      const auto b = rep.per_query_raw(rep.row_names[j]);
      std::vector<double> xa, xb;
      for (const auto& [q, v] : a) {
        auto it = b.find(q);
        if (it == b.end()) continue;
        xa.push_back(v);
        xb.push_back(it->second);
      }
      Comparison c{rep.row_names[i], rep.row_names[j]};
      if (!xa.empty()) {
        for (std::size_t k = 0; k < xa.size(); ++k) c.mean_diff += xa[k] - xb[k];
        c.mean_diff /= static_cast<double>(xa.size());
        c.p = permutation_test(xa, xb, cfg.n_perm, cfg.seed);
      }
      rep.comparisons.push_back(c);
    }
  }
  const int m = static_cast<int>(rep.comparisons.size());
  for (auto& c : rep.comparisons) c.p_bonferroni = bonferroni(c.p, std::max(1, m));
  return rep;
}

}  // namespace rankpromo::arena
