#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include "rankpromo/common.hpp"
#include "rankpromo/text/tokenize.hpp"

namespace rankpromo::engine {

/// Competition documents are plain text of up to 150 terms.
inline constexpr std::size_t kDefaultTermCap = 150;

class LengthCapExceeded : public ValidationError {
 public:
  LengthCapExceeded(std::size_t terms, std::size_t cap)
      : ValidationError("length cap exceeded: " + std::to_string(terms) +
                        " terms > " + std::to_string(cap)),
        terms_(terms),
        cap_(cap) {}
  std::size_t terms() const { return terms_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t terms_;
  std::size_t cap_;
};

struct Query {
  std::string id;
  std::string text;
  std::string topic_description;

  text::Terms terms() const { return text::tokenize(text); }

  static Query make(std::string id, std::string text, std::string topic = {}) {
    if (text::tokenize(text).empty()) {
      throw ValidationError("query '" + id + "' has no terms");
    }
    return Query{std::move(id), std::move(text), std::move(topic)};
  }
};

/// A ranked unit of text. Passages are stored explicitly: a document built by
/// passage replacement keeps every untouched passage byte-identical even when
/// re-segmenting the joined text would split differently.
class Document {
 public:
  Document() = default;

  static Document from_text(std::string id, std::string author_id,
                            const std::string& text,
                            std::size_t term_cap = kDefaultTermCap) {
    return from_passages(std::move(id), std::move(author_id),
                         text::segment_passages(text), term_cap);
  }

  static Document from_passages(std::string id, std::string author_id,
                                std::vector<std::string> passages,
                                std::size_t term_cap = kDefaultTermCap) {
    if (passages.empty()) throw ValidationError("document '" + id + "' has no passages");
    Document d;
    d.id_ = std::move(id);
    d.author_id_ = std::move(author_id);
    d.passages_ = std::move(passages);
    for (const auto& p : d.passages_) {
      if (!d.text_.empty()) d.text_.push_back(' ');
      d.text_ += p;
    }
    d.terms_ = text::tokenize(d.text_);
    if (d.terms_.size() > term_cap) throw LengthCapExceeded(d.terms_.size(), term_cap);
    return d;
  }

  const std::string& id() const { return id_; }
  const std::string& author_id() const { return author_id_; }
  const std::string& text() const { return text_; }
  const std::vector<std::string>& passages() const { return passages_; }
  const text::Terms& terms() const { return terms_; }
  std::size_t term_count() const { return terms_.size(); }

  /// Same content under a new id.
  Document with_id(std::string id) const {
    Document d = *this;
    d.id_ = std::move(id);
    return d;
  }

 private:
  std::string id_;
  std::string author_id_;
  std::string text_;
  std::vector<std::string> passages_;
  text::Terms terms_;
};

/// Next version id: "doc" -> "doc#1" -> "doc#2".
inline std::string next_version_id(const std::string& id) {
  const auto hash = id.rfind('#');
  if (hash != std::string::npos && hash + 1 < id.size() &&
      std::all_of(id.begin() + static_cast<std::ptrdiff_t>(hash) + 1, id.end(),
                  [](char c) { return c >= '0' && c <= '9'; })) {
    const auto n = std::stoll(id.substr(hash + 1));
    return id.substr(0, hash) + "#" + std::to_string(n + 1);
  }
  return id + "#1";
}

/// An induced ranking; position 1 (index 0) is best.
struct Ranking {
  std::string query_id;
  std::vector<std::string> doc_ids;
  int round_index = 1;

  std::size_t size() const { return doc_ids.size(); }

  /// 1-based rank of `doc_id`, or 0 when absent.
  int rank_of(const std::string& doc_id) const {
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
      if (doc_ids[i] == doc_id) return static_cast<int>(i) + 1;
    }
    return 0;
  }

  void validate() const {
    std::unordered_set<std::string> seen;
    for (const auto& id : doc_ids) {
      if (!seen.insert(id).second) {
        throw ValidationError("ranking repeats document '" + id + "'");
      }
    }
    if (round_index < 1) throw ValidationError("ranking round index must be >= 1");
  }

  bool operator==(const Ranking&) const = default;
};

}  // namespace rankpromo::engine
