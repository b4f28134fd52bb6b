#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "rankpromo/engine/document.hpp"
#include "rankpromo/text/corpus_stats.hpp"

namespace rankpromo::arena {

struct Promotion {
  int raw = 0;
  double scaled = 0.0;
};

/// Rank movement between consecutive rounds. Promotions are scaled by the
/// room above (rank_prev - 1) and demotions by the room below (n - rank_prev),
/// so scaled lies in [-1, 1]. A previous rank-1 holder can only be demoted and
/// is excluded (nullopt).
inline std::optional<Promotion> raw_and_scaled_promotion(int rank_prev, int rank_next, int n) {
  if (n < 2 || rank_prev < 1 || rank_prev > n || rank_next < 1 || rank_next > n) {
    throw ValidationError("promotion: ranks must lie in 1.." + std::to_string(n));
  }
  if (rank_prev == 1) return std::nullopt;
  Promotion p;
  p.raw = rank_prev - rank_next;
  if (p.raw >= 0) {
    p.scaled = static_cast<double>(p.raw) / (rank_prev - 1);
  } else {
    p.scaled = static_cast<double>(p.raw) / (n - rank_prev);
  }
  return p;
}

/// Sub-scores of the quality proxy, each a penalty in [0, 1].
struct QualityBreakdown {
  double duplicate_ratio = 0.0;     // 1 - distinct passages / passages
  double stopword_starvation = 0.0; // clamp01(1 - stopword_ratio / 0.15); 0 without a list
  double entropy_collapse = 0.0;    // clamp01((0.6 - H / ln n) / 0.6); 1 for n < 2
  double proxy = 1.0;               // 1 - max of the above
};

inline constexpr double kStopwordFloor = 0.15;
inline constexpr double kEntropyFloor = 0.6;

/// Content-quality proxy in [0, 1]. Passages count as duplicates when their
/// term sequences match. H is the term-distribution entropy over the n
/// document terms, normalized by its maximum ln n.
inline QualityBreakdown quality_breakdown(const engine::Document& doc,
                                          const text::CorpusStats& stats) {
  QualityBreakdown q;
  const auto& ps = doc.passages();
  if (!ps.empty()) {
    std::set<text::Terms> distinct;
    for (const auto& p : ps) distinct.insert(text::tokenize(p));
    q.duplicate_ratio =
        1.0 - static_cast<double>(distinct.size()) / static_cast<double>(ps.size());
  }
  const auto& terms = doc.terms();
  const double n = static_cast<double>(terms.size());
  if (!stats.stopwords().empty() && n > 0) {
    double stop = 0.0;
    for (const auto& t : terms) stop += stats.is_stopword(t) ? 1.0 : 0.0;
    q.stopword_starvation = std::clamp(1.0 - (stop / n) / kStopwordFloor, 0.0, 1.0);
  }
  if (terms.size() < 2) {
    q.entropy_collapse = 1.0;
  } else {
    double h = 0.0;
    for (const auto& [_, c] : text::term_counts(terms)) {
      const double p = c / n;
      h -= p * std::log(p);
    }
    q.entropy_collapse = std::clamp((kEntropyFloor - h / std::log(n)) / kEntropyFloor, 0.0, 1.0);
  }
  q.proxy = 1.0 - std::max({q.duplicate_ratio, q.stopword_starvation, q.entropy_collapse});
  return q;
}

inline double quality_proxy(const engine::Document& doc, const text::CorpusStats& stats) {
  return quality_breakdown(doc, stats).proxy;
}

namespace detail {

inline std::vector<double> paired_differences(const std::vector<double>& a,
                                              const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw ValidationError("permutation test: empty sample");
  if (a.size() != b.size()) throw ValidationError("permutation test: samples must be paired");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

// Sums within this distance of the observed one count as ties.
inline double tie_slack(const std::vector<double>& d) {
  double m = 0.0;
  for (double x : d) m += std::abs(x);
  return 1e-12 * std::max(1.0, m);
}

}  // namespace detail

/// Two-tailed paired permutation (randomization) test: each permutation flips
/// the sign of every paired difference with probability 1/2, and
/// p = #{|sum| >= |observed sum|} / n_perm. Seeded.
inline double permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                               int n_perm = 100000, std::uint64_t seed = 42) {
  if (n_perm < 1) throw ValidationError("permutation test: n_perm must be >= 1");
  const auto d = detail::paired_differences(a, b);
  double observed = 0.0;
  for (double x : d) observed += x;
  observed = std::abs(observed);
  const double slack = detail::tie_slack(d);
  std::mt19937_64 rng(seed);
  long long hits = 0;
  for (int k = 0; k < n_perm; ++k) {
    double s = 0.0;
    std::uint64_t bits = 0;
    int left = 0;
    for (double x : d) {
      if (left == 0) {
        bits = rng();
        left = 64;
      }
      s += (bits & 1u) ? x : -x;
      bits >>= 1;
      --left;
    }
    if (std::abs(s) >= observed - slack) ++hits;
  }
  return static_cast<double>(hits) / n_perm;
}

/// Exact version over all 2^n sign assignments (n <= 24).
inline double permutation_test_exact(const std::vector<double>& a, const std::vector<double>& b) {
  const auto d = detail::paired_differences(a, b);
  if (d.size() > 24) throw ValidationError("exact permutation test supports at most 24 pairs");
  double observed = 0.0;
  for (double x : d) observed += x;
  observed = std::abs(observed);
  const double slack = detail::tie_slack(d);
  const std::uint64_t total = 1ULL << d.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) s += ((mask >> i) & 1u) ? d[i] : -d[i];
    if (std::abs(s) >= observed - slack) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

inline double bonferroni(double p, int comparisons) {
  if (comparisons < 1) throw ValidationError("bonferroni: comparisons must be >= 1");
  return std::min(1.0, p * comparisons);
}

}  // namespace rankpromo::arena
