#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "rankpromo/common.hpp"

namespace rankpromo::engine {

inline double dcg_at_k(std::span<const double> labels, int k) {
  double dcg = 0.0;
  const auto n = std::min<std::size_t>(labels.size(), static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    dcg += (std::exp2(labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

/// NDCG@k with gain 2^label - 1 and discount 1/log2(position + 1), normalized
/// by the ideal ordering of the same labels. Zero ideal DCG gives 0.
inline double ndcg_at_k(std::span<const double> ranked_labels, int k) {
  if (k < 1) throw ValidationError("ndcg: k must be >= 1");
  std::vector<double> ideal(ranked_labels.begin(), ranked_labels.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg <= 0.0) return 0.0;
  return dcg_at_k(ranked_labels, k) / idcg;
}

}  // namespace rankpromo::engine
