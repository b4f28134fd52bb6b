#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rankpromo/common.hpp"
#include "rankpromo/text/tokenize.hpp"
#include "rankpromo/text/vectors.hpp"

namespace rankpromo::text {

enum class OovMode {
  kError,          // out-of-vocabulary terms are skipped
  kHashDeterministic,  // OOV terms get a reproducible pseudo-random unit vector
};

/// Word vectors keyed by term. Read-only after loading.
class EmbeddingStore {
 public:
  EmbeddingStore(std::size_t dimension, OovMode mode)
      : dimension_(dimension), mode_(mode) {
    if (dimension == 0) throw ValidationError("embedding dimension must be positive");
  }

  void insert(std::string term, DenseVector v) {
    if (v.dimension() != dimension_) {
      throw ValidationError("embedding for '" + term + "' has dimension " +
                            std::to_string(v.dimension()) + ", expected " +
                            std::to_string(dimension_));
    }
    for (double x : v.components) {
      if (!std::isfinite(x)) {
        throw ValidationError("embedding for '" + term + "' is not finite");
      }
    }
    vectors_.insert_or_assign(std::move(term), std::move(v));
  }

  std::size_t dimension() const { return dimension_; }
  OovMode mode() const { return mode_; }
  std::size_t size() const { return vectors_.size(); }

  const DenseVector* find(const std::string& term) const {
    auto it = vectors_.find(term);
    return it == vectors_.end() ? nullptr : &it->second;
  }

  /// Unit vector with components drawn from a splitmix64 stream seeded by
  /// FNV-1a of the term.
  DenseVector hash_vector(std::string_view term) const {
    std::uint64_t state = fnv1a64(term);
    DenseVector v(dimension_);
    for (auto& x : v.components) {
      const auto bits = splitmix64(state) >> 11;  // 53 random bits
      x = static_cast<double>(bits) * (2.0 / 9007199254740992.0) - 1.0;
    }
    const double n = v.norm();
    if (n > 0.0) v.scale(1.0 / n);
    return v;
  }

  /// Writes the vector for `term` into `out`; false when the term is OOV and
  /// the store is in error mode.
  bool lookup(const std::string& term, DenseVector& out) const {
    if (const auto* v = find(term)) {
      out = *v;
      return true;
    }
    if (mode_ == OovMode::kHashDeterministic) {
      out = hash_vector(term);
      return true;
    }
    return false;
  }

  /// Plain-text word-vector file: `term v1 ... vD` per line, optional first
  /// line `count dimension`.
  static EmbeddingStore load(const std::string& path, OovMode mode) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open embedding file: " + path);
    std::string line;
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    std::size_t dim = 0;
    bool first = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::istringstream ls(line);
      std::string term;
      if (!(ls >> term)) continue;
      std::vector<double> xs;
      double x;
      while (ls >> x) xs.push_back(x);
      if (!ls.eof()) {
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": malformed vector component");
      }
      if (first && xs.size() == 1 && term.find_first_not_of("0123456789") ==
                                         std::string::npos) {
        dim = static_cast<std::size_t>(xs[0]);
        first = false;
        continue;
      }
      first = false;
      if (dim == 0) dim = xs.size();
      if (xs.size() != dim) {
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(dim) +
                              " components, got " + std::to_string(xs.size()));
      }
      rows.emplace_back(std::move(term), std::move(xs));
    }
    if (dim == 0) throw ValidationError("embedding file has no vectors: " + path);
    EmbeddingStore store(dim, mode);
    for (auto& [t, xs] : rows) store.insert(std::move(t), DenseVector(std::move(xs)));
    return store;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw RuntimeError("cannot write embedding file: " + path);
    std::vector<const std::string*> terms;
    terms.reserve(vectors_.size());
    for (const auto& [t, _] : vectors_) terms.push_back(&t);
    std::sort(terms.begin(), terms.end(),
              [](const auto* a, const auto* b) { return *a < *b; });
    out << vectors_.size() << ' ' << dimension_ << '\n';
    for (const auto* t : terms) {
      out << *t;
      for (double x : vectors_.at(*t).components) out << ' ' << exact_decimal(x);
      out << '\n';
    }
  }

 private:
  std::size_t dimension_;
  OovMode mode_;
  std::unordered_map<std::string, DenseVector> vectors_;
};

/// Mean of the term vectors of `text`. OOV terms follow the store's mode;
/// text with no usable terms embeds to the zero vector. Terms are accumulated
/// in sorted order so any reordering of the text embeds bit-identically.
inline DenseVector embed_text(std::string_view text, const EmbeddingStore& store) {
  std::map<std::string, int> counts;
  for (auto& t : tokenize(text)) ++counts[std::move(t)];
  DenseVector sum(store.dimension());
  std::size_t used = 0;
  DenseVector v;
  for (const auto& [t, n] : counts) {
    if (!store.lookup(t, v)) continue;
    sum.axpy(static_cast<double>(n), v);
    used += static_cast<std::size_t>(n);
  }
  if (used > 0) sum.scale(1.0 / static_cast<double>(used));
  return sum;
}

/// Mean of per-passage embeddings (not the mean over all terms).
inline DenseVector embed_document(const std::vector<std::string>& passages,
                                  const EmbeddingStore& store) {
  if (passages.empty()) throw ValidationError("embed_document: no passages");
  DenseVector sum(store.dimension());
  for (const auto& p : passages) sum.axpy(1.0, embed_text(p, store));
  sum.scale(1.0 / static_cast<double>(passages.size()));
  return sum;
}

}  // namespace rankpromo::text
