#pragma once

// Multi-round competition records: every author's document version per round
// and the ranking induced in each round.

#include <map>
#include <string>
#include <vector>

#include "rankpromo/bot/history.hpp"
#include "rankpromo/engine/io.hpp"
#include "rankpromo/training/dataset.hpp"

namespace rankpromo::arena {

struct QuerySnapshot {
  engine::Query query;
  std::vector<std::string> authors;
  /// rounds[r - 1]: author id -> that author's document in round r.
  std::vector<std::map<std::string, engine::Document>> rounds;
  std::vector<engine::Ranking> rankings;  // one per round

  int round_count() const { return static_cast<int>(rounds.size()); }

  const engine::Document* version(const std::string& author, int round) const {
    if (round < 1 || round > round_count()) return nullptr;
    const auto& r = rounds[static_cast<std::size_t>(round - 1)];
    auto it = r.find(author);
    return it == r.end() ? nullptr : &it->second;
  }

  std::vector<engine::Document> documents_of(int round) const {
    std::vector<engine::Document> out;
    for (const auto& [_, d] : rounds.at(static_cast<std::size_t>(round - 1))) out.push_back(d);
    return out;
  }

  /// Rankings 1..round with the documents they mention.
  bot::RankingHistory history_through(int round) const {
    if (round < 1 || round > static_cast<int>(rankings.size())) {
      throw ValidationError("snapshot for '" + query.id + "' has no ranking for round " +
                            std::to_string(round));
    }
    bot::RankingHistory h(query.id);
    for (int r = 1; r <= round; ++r) {
      h.append(rankings[static_cast<std::size_t>(r - 1)], documents_of(r));
    }
    return h;
  }

  /// Author of a document id in a round (empty when unknown).
  std::string author_of(const std::string& doc_id, int round) const {
    for (const auto& [a, d] : rounds.at(static_cast<std::size_t>(round - 1))) {
      if (d.id() == doc_id) return a;
    }
    return {};
  }
};

/// Ranks every round with `engine` (used when building snapshots).
inline void rank_all_rounds(QuerySnapshot& s, const engine::EngineModel& engine,
                            const text::CorpusStats& stats) {
  s.rankings.clear();
  for (int r = 1; r <= s.round_count(); ++r) {
    s.rankings.push_back(engine::rank_documents(s.documents_of(r), s.query, engine, stats, r));
  }
}

inline std::vector<training::TrainingSnapshot> training_snapshots(
    const std::vector<QuerySnapshot>& snaps, int round) {
  std::vector<training::TrainingSnapshot> out;
  for (const auto& s : snaps) out.push_back({s.query, s.history_through(round)});
  return out;
}

/// Line-delimited records of three kinds:
///   {"type":"query","query_id","text"}
///   {"type":"document","query_id","round","author_id","doc_id","text"}
///   {"type":"ranking","query_id","round","doc_ids"}
inline std::vector<json> snapshot_records(const std::vector<QuerySnapshot>& snaps) {
  std::vector<json> out;
  for (const auto& s : snaps) {
    out.push_back(json{{"type", "query"}, {"query_id", s.query.id}, {"text", s.query.text}});
    for (int r = 1; r <= s.round_count(); ++r) {
      for (const auto& [a, d] : s.rounds[static_cast<std::size_t>(r - 1)]) {
        out.push_back(json{{"type", "document"},
                           {"query_id", s.query.id},
                           {"round", r},
                           {"author_id", a},
                           {"doc_id", d.id()},
                           {"text", d.text()}});
      }
    }
    for (const auto& rk : s.rankings) {
      json j = engine::ranking_to_json(rk);
      j["type"] = "ranking";
      out.push_back(j);
    }
  }
  return out;
}

inline std::vector<QuerySnapshot> snapshots_from_records(const std::vector<json>& records,
                                                         std::size_t term_cap = 1000000) {
  std::map<std::string, QuerySnapshot> by_id;
  std::vector<std::string> order;
  auto get = [&](const std::string& qid) -> QuerySnapshot& {
    auto it = by_id.find(qid);
    if (it == by_id.end()) {
      order.push_back(qid);
      it = by_id.emplace(qid, QuerySnapshot{}).first;
    }
    return it->second;
  };
  std::map<std::string, std::map<int, engine::Ranking>> rankings;
  for (const auto& j : records) {
    const auto type = require<std::string>(j, "type");
    const auto qid = require<std::string>(j, "query_id");
    auto& s = get(qid);
    if (type == "query") {
      s.query = engine::Query::make(qid, require<std::string>(j, "text"));
    } else if (type == "document") {
      const int r = require<int>(j, "round");
      if (r < 1) throw ValidationError("document round must be >= 1");
      if (static_cast<int>(s.rounds.size()) < r) s.rounds.resize(static_cast<std::size_t>(r));
      const auto author = require<std::string>(j, "author_id");
      s.rounds[static_cast<std::size_t>(r - 1)].insert_or_assign(
          author, engine::Document::from_text(require<std::string>(j, "doc_id"), author,
                                              require<std::string>(j, "text"), term_cap));
    } else if (type == "ranking") {
      auto rk = engine::ranking_from_json(j);
      rankings[qid][rk.round_index] = rk;
    } else {
      throw ValidationError("unknown snapshot record type '" + type + "'");
    }
  }
  std::vector<QuerySnapshot> out;
  for (const auto& qid : order) {
    auto& s = by_id.at(qid);
    if (s.query.id.empty()) throw ValidationError("snapshot has no query record for '" + qid + "'");
    std::set<std::string> authors;
    for (const auto& r : s.rounds) {
      for (const auto& [a, _] : r) authors.insert(a);
    }
    s.authors.assign(authors.begin(), authors.end());
    for (int r = 1; r <= s.round_count(); ++r) {
      auto it = rankings[qid].find(r);
      if (it == rankings[qid].end()) break;
      s.rankings.push_back(it->second);
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline void save_snapshots(const std::string& path, const std::vector<QuerySnapshot>& snaps) {
  write_jsonl(path, snapshot_records(snaps));
}

inline std::vector<QuerySnapshot> load_snapshots(const std::string& path) {
  return snapshots_from_records(read_jsonl(path));
}

}  // namespace rankpromo::arena
