#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rankpromo/common.hpp"

namespace rankpromo::text {

/// Sparse non-negative term weights. Zero weights are never stored.
class TermVector {
 public:
  using Map = std::map<std::string, double>;

  TermVector() = default;

  void add(const std::string& term, double weight) {
    if (weight == 0.0) return;
    auto& w = entries_[term];
    w += weight;
    if (w == 0.0) entries_.erase(term);
  }

  TermVector& scale(double factor) {
    if (factor == 0.0) {
      entries_.clear();
      return *this;
    }
    for (auto& [_, w] : entries_) w *= factor;
    return *this;
  }

  /// this += factor * other
  TermVector& axpy(double factor, const TermVector& other) {
    for (const auto& [t, w] : other.entries_) add(t, factor * w);
    return *this;
  }

  double get(const std::string& term) const {
    auto it = entries_.find(term);
    return it == entries_.end() ? 0.0 : it->second;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [_, w] : entries_) s += w * w;
    return std::sqrt(s);
  }

  const Map& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  Map entries_;
};

/// Dense embedding-space vector.
struct DenseVector {
  std::vector<double> components;

  DenseVector() = default;
  explicit DenseVector(std::size_t dim) : components(dim, 0.0) {}
  DenseVector(std::initializer_list<double> xs) : components(xs) {}
  explicit DenseVector(std::vector<double> xs) : components(std::move(xs)) {}

  std::size_t dimension() const { return components.size(); }

  DenseVector& scale(double factor) {
    for (auto& x : components) x *= factor;
    return *this;
  }

  DenseVector& axpy(double factor, const DenseVector& other) {
    if (other.dimension() != dimension()) {
      throw ValidationError("dense vector dimension mismatch");
    }
    for (std::size_t i = 0; i < components.size(); ++i) {
      components[i] += factor * other.components[i];
    }
    return *this;
  }

  double norm() const {
    double s = 0.0;
    for (double x : components) s += x * x;
    return std::sqrt(s);
  }

  bool operator==(const DenseVector&) const = default;
};

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(const TermVector& u, const TermVector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  const auto& a = u.entries();
  const auto& b = v.entries();
  double dot = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      dot += i->second * j->second;
      ++i;
      ++j;
    }
  }
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

inline double cosine(const DenseVector& u, const DenseVector& v) {
  if (u.dimension() != v.dimension()) {
    throw ValidationError("cosine: dimension mismatch (" +
                          std::to_string(u.dimension()) + " vs " +
                          std::to_string(v.dimension()) + ")");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.components.size(); ++i) {
    dot += u.components[i] * v.components[i];
  }
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

}  // namespace rankpromo::text
