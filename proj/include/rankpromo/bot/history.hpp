#pragma once

#include <map>
#include <string>
#include <vector>

#include "rankpromo/engine/document.hpp"

namespace rankpromo::bot {

using engine::Document;
using engine::Ranking;

/// Rankings observed for one query, oldest first, plus a snapshot of every
/// document version they mention. The bot's only signal about the ranker.
class RankingHistory {
 public:
  RankingHistory() = default;
  explicit RankingHistory(std::string query_id) : query_id_(std::move(query_id)) {}

  const std::string& query_id() const { return query_id_; }

  /// Appends a ranking; every ranked id must already be (or be given here as)
  /// a known document.
  void append(Ranking ranking, const std::vector<Document>& docs = {}) {
    for (const auto& d : docs) add_document(d);
    ranking.validate();
    for (const auto& id : ranking.doc_ids) {
      if (!documents_.count(id)) {
        throw ValidationError("ranking mentions unknown document '" + id + "'");
      }
    }
    rankings_.push_back(std::move(ranking));
  }

  void add_document(const Document& d) { documents_.insert_or_assign(d.id(), d); }

  std::size_t size() const { return rankings_.size(); }
  bool empty() const { return rankings_.empty(); }

  /// pi_{-lag}: lag 1 is the current ranking, lag size() the oldest.
  const Ranking& at_lag(std::size_t lag) const {
    if (lag < 1 || lag > rankings_.size()) {
      throw ValidationError("ranking history has no ranking at lag " + std::to_string(lag));
    }
    return rankings_[rankings_.size() - lag];
  }

  const Ranking& current() const { return at_lag(1); }

  const Document& document(const std::string& id) const {
    auto it = documents_.find(id);
    if (it == documents_.end()) throw ValidationError("unknown document '" + id + "'");
    return it->second;
  }

  const std::vector<Ranking>& rankings() const { return rankings_; }
  const std::map<std::string, Document>& documents() const { return documents_; }

  /// Documents of the current ranking, in rank order.
  std::vector<Document> current_documents() const {
    std::vector<Document> out;
    for (const auto& id : current().doc_ids) out.push_back(document(id));
    return out;
  }

 private:
  std::string query_id_;
  std::vector<Ranking> rankings_;
  std::map<std::string, Document> documents_;
};

}  // namespace rankpromo::bot
