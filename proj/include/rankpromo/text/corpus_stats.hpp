#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rankpromo/common.hpp"
#include "rankpromo/text/tokenize.hpp"
#include "rankpromo/text/vectors.hpp"

namespace rankpromo::text {

using StopwordSet = std::unordered_set<std::string>;

/// Collection statistics backing IDF and Dirichlet smoothing. Built once, then
/// read-only.
///
/// Query texts are folded into the collection term counts (not into the
/// document counts) so every query term has a non-zero collection probability.
class CorpusStats {
 public:
  CorpusStats() = default;

  static CorpusStats build(const std::vector<std::string>& documents,
                           const std::vector<std::string>& queries = {},
                           StopwordSet stopwords = {}) {
    CorpusStats s;
    s.stopwords_ = std::move(stopwords);
    for (const auto& d : documents) s.add_document(d);
    for (const auto& q : queries) s.add_collection_text(q);
    if (s.doc_count_ == 0) throw ValidationError("corpus has no documents");
    return s;
  }

  void add_document(std::string_view text) {
    const auto terms = tokenize(text);
    ++doc_count_;
    doc_length_total_ += static_cast<long long>(terms.size());
    std::set<std::string_view> seen;
    for (const auto& t : terms) {
      if (seen.insert(t).second) ++doc_freq_[t];
      ++collection_tf_[t];
    }
    collection_length_ += static_cast<long long>(terms.size());
  }

  void add_collection_text(std::string_view text) {
    for (const auto& t : tokenize(text)) {
      ++collection_tf_[t];
      ++collection_length_;
    }
  }

  long long doc_count() const { return doc_count_; }
  long long collection_length() const { return collection_length_; }
  const StopwordSet& stopwords() const { return stopwords_; }
  bool is_stopword(const std::string& t) const { return stopwords_.count(t) > 0; }

  long long doc_freq(const std::string& t) const {
    auto it = doc_freq_.find(t);
    return it == doc_freq_.end() ? 0 : it->second;
  }

  long long collection_tf(const std::string& t) const {
    auto it = collection_tf_.find(t);
    return it == collection_tf_.end() ? 0 : it->second;
  }

  double avg_doc_length() const {
    return doc_count_ == 0 ? 0.0
                           : static_cast<double>(doc_length_total_) /
                                 static_cast<double>(doc_count_);
  }

  /// ln(N / df), with df floored at 1 for unseen terms.
  double idf(const std::string& t) const {
    const auto df = std::max<long long>(1, doc_freq(t));
    return std::log(static_cast<double>(doc_count_) / static_cast<double>(df));
  }

  /// p(t|C); 0 for terms never seen in the collection.
  double collection_prob(const std::string& t) const {
    if (collection_length_ == 0) return 0.0;
    return static_cast<double>(collection_tf(t)) /
           static_cast<double>(collection_length_);
  }

 private:
  long long doc_count_ = 0;
  long long doc_length_total_ = 0;
  long long collection_length_ = 0;
  std::map<std::string, long long, std::less<>> doc_freq_;
  std::map<std::string, long long, std::less<>> collection_tf_;
  StopwordSet stopwords_;
};

/// Raw term counts of a token sequence.
inline std::map<std::string, int> term_counts(const Terms& terms) {
  std::map<std::string, int> tf;
  for (const auto& t : terms) ++tf[t];
  return tf;
}

/// weight(t) = tf(t, text) * ln(N / max(1, df(t))). Terms with zero IDF are
/// not stored.
inline TermVector tfidf_vector(std::string_view text, const CorpusStats& stats) {
  TermVector v;
  for (const auto& [t, n] : term_counts(tokenize(text))) {
    v.add(t, n * stats.idf(t));
  }
  return v;
}

/// One term per line; blank lines and surrounding whitespace ignored.
inline StopwordSet load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open stopword file: " + path);
  StopwordSet out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = detail::trim(line);
    if (!t.empty()) out.emplace(t);
  }
  return out;
}

}  // namespace rankpromo::text
