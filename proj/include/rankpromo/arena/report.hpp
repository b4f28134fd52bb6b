#pragma once

// Rendering of competition and offline results: aligned plain-text tables
// plus line-delimited records that can be re-rendered later.

#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rankpromo/arena/competition.hpp"
#include "rankpromo/arena/offline.hpp"
#include "rankpromo/bot/io.hpp"
#include "rankpromo/jsonl.hpp"
#include "rankpromo/training/ranksvm.hpp"

namespace rankpromo::arena {

inline std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.000" || s == "-0.0000") s.erase(0, 1);
  return s;
}

/// Column-aligned text table. The first column is left-aligned, the rest
/// right-aligned.
class TextTable {
 public:
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
  void rule() { rows_.emplace_back(); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_) {
      if (width.size() < r.size()) width.resize(r.size(), 0);
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::size_t total = 0;
    for (auto w : width) total += w + 2;
    std::ostringstream out;
    for (const auto& r : rows_) {
      if (r.empty()) {
        out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
        continue;
      }
      std::string line;
      for (std::size_t i = 0; i < r.size(); ++i) {
        const auto pad = std::string(width[i] - r[i].size(), ' ');
        if (i) line += "  ";
        line += i == 0 ? r[i] + pad : pad + r[i];
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out << line << '\n';
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Online competitions

/// One player's outcome in one round, tagged with its competition.
struct ResultRow {
  std::string competition;
  std::string query_id;
  int round = 0;
  PlayerRound player;
};

inline json result_row_to_json(const ResultRow& r) {
  const auto& p = r.player;
  json j{{"type", "player_round"}, {"competition", r.competition}, {"query_id", r.query_id},
         {"round", r.round},       {"player_id", p.player_id},     {"label", p.label},
         {"doc_id", p.doc_id},     {"rank", p.rank}};
  j["raw_promotion"] = p.promotion ? json(p.promotion->raw) : json(nullptr);
  j["scaled_promotion"] = p.promotion ? json(p.promotion->scaled) : json(nullptr);
  j["quality_proxy"] = p.quality;
  j["modified"] = p.modified;
  j["note"] = p.note;
  return j;
}

inline ResultRow result_row_from_json(const json& j) {
  ResultRow r;
  r.competition = require<std::string>(j, "competition");
  r.query_id = require<std::string>(j, "query_id");
  r.round = require<int>(j, "round");
  auto& p = r.player;
  p.player_id = require<std::string>(j, "player_id");
  p.label = require<std::string>(j, "label");
  p.doc_id = require<std::string>(j, "doc_id");
  p.rank = require<int>(j, "rank");
  if (j.contains("raw_promotion") && !j["raw_promotion"].is_null()) {
    p.promotion = Promotion{require<int>(j, "raw_promotion"), require<double>(j, "scaled_promotion")};
  }
  p.quality = require<double>(j, "quality_proxy");
  p.modified = optional_field<bool>(j, "modified", false);
  p.note = optional_field<std::string>(j, "note", "");
  return r;
}

/// Flattens one competition: players in config order, the static shadow (if
/// any) after them.
inline std::vector<ResultRow> result_rows_of(const Competition& c) {
  std::vector<ResultRow> out;
  for (const auto& rec : c.records()) {
    for (const auto& p : rec.players) out.push_back({c.config().id, c.config().query.id, rec.round, p});
    if (rec.static_shadow) {
      out.push_back({c.config().id, c.config().query.id, rec.round, *rec.static_shadow});
    }
  }
  return out;
}

inline std::vector<ResultRow> result_rows(const std::vector<Competition>& comps) {
  std::vector<ResultRow> out;
  for (const auto& c : comps) {
    auto rows = result_rows_of(c);
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

/// Records of a batch: every player-round, every ranking and every bot audit.
inline std::vector<json> competition_records(const std::vector<Competition>& comps) {
  std::vector<json> out;
  for (const auto& c : comps) {
    for (const auto& rec : c.records()) {
      json rk = engine::ranking_to_json(rec.ranking);
      rk["type"] = "ranking";
      rk["competition"] = c.config().id;
      out.push_back(rk);
      for (const auto& p : rec.players) {
        out.push_back(result_row_to_json({c.config().id, c.config().query.id, rec.round, p}));
      }
      if (rec.static_shadow) {
        out.push_back(
            result_row_to_json({c.config().id, c.config().query.id, rec.round, *rec.static_shadow}));
      }
      for (const auto& a : rec.audits) {
        json j = bot::audit_to_json(a);
        j["type"] = "audit";
        j["competition"] = c.config().id;
        j["round"] = rec.round;
        out.push_back(j);
      }
    }
  }
  return out;
}

/// Averages of one player class in one round, over all its players across
/// the batch. Promotion means cover only players with a defined promotion.
struct ClassRoundStats {
  std::string label;
  int round = 0;
  std::size_t players = 0;
  std::size_t promotion_cells = 0;
  double average_rank = 0.0;
  std::optional<double> raw_promotion;
  std::optional<double> scaled_promotion;
  double quality = 0.0;
};

/// Per (class, round) aggregates. Classes keep their first-appearance order.
inline std::vector<ClassRoundStats> aggregate_rounds(const std::vector<ResultRow>& rows) {
  std::vector<std::string> labels;
  std::map<std::pair<std::string, int>, ClassRoundStats> acc;
  int max_round = 0;
  for (const auto& r : rows) {
    if (std::find(labels.begin(), labels.end(), r.player.label) == labels.end()) {
      labels.push_back(r.player.label);
    }
    max_round = std::max(max_round, r.round);
    auto& s = acc[{r.player.label, r.round}];
    s.label = r.player.label;
    s.round = r.round;
    ++s.players;
    s.average_rank += r.player.rank;
    s.quality += r.player.quality;
    if (r.player.promotion) {
      ++s.promotion_cells;
      s.raw_promotion = s.raw_promotion.value_or(0.0) + r.player.promotion->raw;
      s.scaled_promotion = s.scaled_promotion.value_or(0.0) + r.player.promotion->scaled;
    }
  }
  std::vector<ClassRoundStats> out;
  for (const auto& label : labels) {
    for (int round = 1; round <= max_round; ++round) {
      auto it = acc.find({label, round});
      if (it == acc.end()) continue;
      auto s = it->second;
      const double k = static_cast<double>(s.players);
      s.average_rank /= k;
      s.quality /= k;
      if (s.promotion_cells) {
        *s.raw_promotion /= static_cast<double>(s.promotion_cells);
        *s.scaled_promotion /= static_cast<double>(s.promotion_cells);
      }
      out.push_back(s);
    }
  }
  return out;
}

/// Per-round series, one record per (class, round), for external plotting.
inline std::vector<json> series_records(const std::vector<ClassRoundStats>& stats) {
  std::vector<json> out;
  for (const auto& s : stats) {
    json j{{"type", "series"},
           {"label", s.label},
           {"round", s.round},
           {"players", s.players},
           {"promotion_cells", s.promotion_cells},
           {"average_rank", s.average_rank}};
    j["raw_promotion"] = s.raw_promotion ? json(*s.raw_promotion) : json(nullptr);
    j["scaled_promotion"] = s.scaled_promotion ? json(*s.scaled_promotion) : json(nullptr);
    j["quality_proxy"] = s.quality;
    out.push_back(j);
  }
  return out;
}

/// Rows are measures, columns are (class, round). Promotions with no
/// defined value (every round-1 cell) print as NA.
inline std::string render_online_table(const std::vector<ClassRoundStats>& stats,
                                       const std::string& title = "Online competition") {
  TextTable t;
  // The class name is printed once, over its first round.
  std::vector<std::string> classes{""}, rounds{""};
  for (std::size_t i = 0; i < stats.size(); ++i) {
    classes.push_back(i > 0 && stats[i - 1].label == stats[i].label ? "" : stats[i].label);
    rounds.push_back("round " + std::to_string(stats[i].round));
  }
  t.add(classes);
  t.add(rounds);
  t.rule();
  auto row = [&](const char* name, auto value) {
    std::vector<std::string> r{name};
    for (const auto& s : stats) r.push_back(value(s));
    t.add(r);
  };
  row("average rank", [](const ClassRoundStats& s) { return fixed(s.average_rank); });
  row("raw promotion", [](const ClassRoundStats& s) {
    return s.raw_promotion ? fixed(*s.raw_promotion) : std::string("NA");
  });
  row("scaled promotion", [](const ClassRoundStats& s) {
    return s.scaled_promotion ? fixed(*s.scaled_promotion) : std::string("NA");
  });
  row("quality proxy", [](const ClassRoundStats& s) { return fixed(s.quality); });
  row("players", [](const ClassRoundStats& s) { return std::to_string(s.players); });
  return title + "\n" + t.str();
}

/// Re-renders stored competition records (only "player_round" is needed).
inline std::string render_online_records(const std::vector<json>& records) {
  std::vector<ResultRow> rows;
  for (const auto& j : records) {
    if (optional_field<std::string>(j, "type", "") == "player_round") {
      rows.push_back(result_row_from_json(j));
    }
  }
  return render_online_table(aggregate_rounds(rows));
}

// ---------------------------------------------------------------------------
// Offline evaluation

inline std::vector<json> offline_records(const OfflineReport& rep) {
  std::vector<json> out;
  out.push_back(json{{"type", "offline_summary"},
                     {"row_names", rep.row_names},
                     {"planned_cells", rep.planned_cells},
                     {"skipped_cells", rep.skipped_cells}});
  for (const auto& c : rep.cells) {
    json outcomes = json::object();
    for (const auto& [name, o] : c.outcomes) {
      outcomes[name] = json{{"doc_id", o.doc_id},
                            {"rank_next", o.rank_next},
                            {"raw_promotion", o.promotion.raw},
                            {"scaled_promotion", o.promotion.scaled},
                            {"quality_proxy", o.quality}};
    }
    out.push_back(json{{"type", "offline_cell"},
                       {"query_id", c.query_id},
                       {"rank_prev", c.rank_prev},
                       {"author", c.author},
                       {"d_cur_id", c.d_cur_id},
                       {"skip_reason", c.skip_reason},
                       {"outcomes", outcomes}});
  }
  for (const auto& r : rep.rows) {
    out.push_back(json{{"type", "offline_row"},
                       {"name", r.name},
                       {"cells", r.cells},
                       {"average_rank", r.average_rank},
                       {"raw_promotion", r.raw_promotion},
                       {"scaled_promotion", r.scaled_promotion},
                       {"quality_proxy", r.quality}});
  }
  for (const auto& c : rep.comparisons) {
    out.push_back(json{{"type", "offline_comparison"},
                       {"a", c.a},
                       {"b", c.b},
                       {"mean_diff", c.mean_diff},
                       {"p", c.p},
                       {"p_bonferroni", c.p_bonferroni}});
  }
  return out;
}

inline OfflineReport offline_report_from_records(const std::vector<json>& records) {
  OfflineReport rep;
  bool summary = false;
  for (const auto& j : records) {
    const auto type = optional_field<std::string>(j, "type", "");
    if (type == "offline_summary") {
      summary = true;
      rep.row_names = require<std::vector<std::string>>(j, "row_names");
      rep.planned_cells = require<std::size_t>(j, "planned_cells");
      rep.skipped_cells = require<std::size_t>(j, "skipped_cells");
    } else if (type == "offline_cell") {
      OfflineCell c;
      c.query_id = require<std::string>(j, "query_id");
      c.rank_prev = require<int>(j, "rank_prev");
      c.author = optional_field<std::string>(j, "author", "");
      c.d_cur_id = optional_field<std::string>(j, "d_cur_id", "");
      c.skip_reason = optional_field<std::string>(j, "skip_reason", "");
      if (j.contains("outcomes")) {
        for (const auto& [name, o] : j["outcomes"].items()) {
          CellOutcome co;
          co.doc_id = require<std::string>(o, "doc_id");
          co.rank_next = require<int>(o, "rank_next");
          co.promotion = {require<int>(o, "raw_promotion"), require<double>(o, "scaled_promotion")};
          co.quality = require<double>(o, "quality_proxy");
          c.outcomes.emplace(name, co);
        }
      }
      rep.cells.push_back(std::move(c));
    } else if (type == "offline_row") {
      OfflineRow r;
      r.name = require<std::string>(j, "name");
      r.cells = require<std::size_t>(j, "cells");
      r.average_rank = require<double>(j, "average_rank");
      r.raw_promotion = require<double>(j, "raw_promotion");
      r.scaled_promotion = require<double>(j, "scaled_promotion");
      r.quality = require<double>(j, "quality_proxy");
      rep.rows.push_back(r);
    } else if (type == "offline_comparison") {
      rep.comparisons.push_back({require<std::string>(j, "a"), require<std::string>(j, "b"),
                                 require<double>(j, "mean_diff"), require<double>(j, "p"),
                                 require<double>(j, "p_bonferroni")});
    }
  }
  if (!summary) throw ValidationError("records hold no offline evaluation summary");
  return rep;
}

/// One row per variant (plus student and static), then every pairwise test
/// on per-query mean raw promotion with its Bonferroni-adjusted p.
inline std::string render_offline_table(const OfflineReport& rep,
                                        const std::string& title = "Offline evaluation") {
  TextTable t;
  t.add({"", "cells", "average rank", "raw promotion", "scaled promotion", "quality proxy"});
  t.rule();
  for (const auto& r : rep.rows) {
    t.add({r.name, std::to_string(r.cells), fixed(r.average_rank), fixed(r.raw_promotion),
           fixed(r.scaled_promotion), fixed(r.quality)});
  }
  TextTable c;
  c.add({"comparison", "mean diff", "p", "p (Bonferroni)"});
  c.rule();
  for (const auto& x : rep.comparisons) {
    c.add({x.a + " vs " + x.b, fixed(x.mean_diff), fixed(x.p, 5), fixed(x.p_bonferroni, 5)});
  }
  std::ostringstream out;
  out << title << " (" << rep.planned_cells - rep.skipped_cells << " of " << rep.planned_cells
      << " cells evaluated)\n"
      << t.str() << '\n'
      << c.str();
  std::map<std::string, std::size_t> reasons;
  for (const auto& cell : rep.cells) {
    if (!cell.skip_reason.empty()) ++reasons[cell.skip_reason];
  }
  if (!reasons.empty()) {
    out << "\nskipped cells\n";
    for (const auto& [why, k] : reasons) out << "  " << k << "  " << why << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Model weights

/// Feature weights sorted from largest to smallest, one line per feature.
inline std::string render_weights(const bot::PairModel& m, const std::string& title = "Pair model") {
  std::vector<std::size_t> order(bot::kNumPairFeatures);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return m.weights[a] > m.weights[b]; });
  TextTable t;
  t.add({"feature", "weight"});
  t.rule();
  for (auto i : order) t.add({std::string(bot::kPairFeatureNames[i]), fixed(m.weights[i])});
  return title + "\n" + t.str();
}

inline std::string render_trained_model(const training::TrainedModel& m) {
  std::ostringstream out;
  out << render_weights(m.model, "Pair model (" + std::string(training::label_mode_name(m.label_mode)) +
                                     " label, C = " + fixed(m.chosen_c, 4) + ")");
  if (!m.cv_ndcg.empty()) {
    TextTable t;
    t.add({"C", "mean NDCG@5"});
    t.rule();
    for (const auto& [c, v] : m.cv_ndcg) t.add({fixed(c, 4), fixed(v, 4)});
    out << '\n' << t.str();
  }
  out << "\ngroups " << m.groups << ", pairs " << m.pairs << ", model " << m.model_fingerprint
      << '\n';
  return out.str();
}

}  // namespace rankpromo::arena
