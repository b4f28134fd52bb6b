#pragma once

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "rankpromo/bot/pair_features.hpp"
#include "rankpromo/bot/pool.hpp"

namespace rankpromo::bot {

/// Per-feature (min, max) used for min-max scaling.
struct FeatureBounds {
  std::array<double, kNumPairFeatures> min{};
  std::array<double, kNumPairFeatures> max{};

  bool operator==(const FeatureBounds&) const = default;
};

struct NormalizedRows {
  std::vector<PairFeatures> rows;
  FeatureBounds bounds;
};

/// (x - min) / (max - min) per feature, bounds taken from `rows` themselves.
/// A constant feature maps to 0.
inline NormalizedRows min_max_normalize(const std::vector<PairFeatures>& rows) {
  if (rows.empty()) throw ValidationError("min_max_normalize: no rows");
  NormalizedRows out;
  out.bounds.min.fill(std::numeric_limits<double>::infinity());
  out.bounds.max.fill(-std::numeric_limits<double>::infinity());
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
      out.bounds.min[j] = std::min(out.bounds.min[j], r.values[j]);
      out.bounds.max[j] = std::max(out.bounds.max[j], r.values[j]);
    }
  }
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    PairFeatures n;
    for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
      const double span = out.bounds.max[j] - out.bounds.min[j];
      n.values[j] = span > 0.0 ? (r.values[j] - out.bounds.min[j]) / span : 0.0;
    }
    out.rows.push_back(n);
  }
  return out;
}

/// Scales with previously captured bounds, clipping into [0, 1].
inline std::vector<PairFeatures> apply_bounds(const std::vector<PairFeatures>& rows,
                                              const FeatureBounds& b) {
  std::vector<PairFeatures> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    PairFeatures n;
    for (std::size_t j = 0; j < kNumPairFeatures; ++j) {
      const double span = b.max[j] - b.min[j];
      const double x = span > 0.0 ? (r.values[j] - b.min[j]) / span : 0.0;
      n.values[j] = std::clamp(x, 0.0, 1.0);
    }
    out.push_back(n);
  }
  return out;
}

/// Linear passage-pair scorer. When `bounds` is set (a trained model), rows
/// are scaled with those bounds; otherwise each decision's candidate set is
/// min-max scaled on its own.
struct PairModel {
  std::array<double, kNumPairFeatures> weights{};
  std::optional<FeatureBounds> bounds;

  double score(const PairFeatures& normalized) const {
    double s = 0.0;
    for (std::size_t j = 0; j < kNumPairFeatures; ++j) s += weights[j] * normalized.values[j];
    return s;
  }

  std::vector<PairFeatures> normalize(const std::vector<PairFeatures>& raw) const {
    if (bounds) return apply_bounds(raw, *bounds);
    return min_max_normalize(raw).rows;
  }

  /// Weights of the published passage-pair ranker (trained with the
  /// harmonic-mean label, beta = 1).
  static PairModel published() {
    PairModel m;
    auto set = [&m](std::string_view name, double w) {
      m.weights[pair_feature_index(name)] = w;
    };
    set("QryTermTarget", 0.189);
    set("SimTargetTop(TF.IDF)", 0.134);
    set("SimTargetPrevTop(W2V)", 0.138);
    set("SimTargetTop(W2V)", 0.085);
    set("SimSrcPrevTop(W2V)", 0.084);
    set("SimTargetPrecPsg(W2V)", 0.034);
    set("SimSrcPrecPsg(W2V)", 0.024);
    set("SimSrcTarget(W2V)", 0.015);
    set("SimTargetFollowPsg(W2V)", 0.015);
    set("SimSrcTop(W2V)", -0.013);
    set("SimSrcFollowPsg(W2V)", -0.015);
    set("SimSrcPrevTop(TF.IDF)", -0.020);
    set("SimTargetPrevTop(TF.IDF)", -0.022);
    set("SimSrcTop(TF.IDF)", -0.025);
    set("QryTermSrc", -0.073);
    return m;
  }

  bool operator==(const PairModel&) const = default;
};

struct Selection {
  std::size_t best = 0;         // index into the candidate list
  double best_score = 0.0;
  std::vector<double> scores;   // one per candidate, same order
};

/// Argmax of w.x over normalized rows. Exact ties go to the pair that comes
/// first by (src_index, target rank, target position).
inline Selection score_and_select(const std::vector<PassagePair>& pairs,
                                  const std::vector<PairFeatures>& normalized,
                                  const PairModel& model) {
  if (pairs.empty()) throw ValidationError("score_and_select: no candidate pairs");
  if (pairs.size() != normalized.size()) {
    throw ValidationError("score_and_select: pairs and rows differ in length");
  }
  Selection s;
  s.scores.reserve(pairs.size());
  for (const auto& r : normalized) s.scores.push_back(model.score(r));
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    if (s.scores[i] > s.scores[s.best] ||
        (s.scores[i] == s.scores[s.best] && tie_order_less(pairs[i], pairs[s.best]))) {
      s.best = i;
    }
  }
  s.best_score = s.scores[s.best];
  return s;
}

}  // namespace rankpromo::bot
