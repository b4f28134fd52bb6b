#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rankpromo/bot/pair_model.hpp"
#include "rankpromo/engine/ndcg.hpp"
#include "rankpromo/training/dataset.hpp"

namespace rankpromo::training {

struct SolverOptions {
  std::uint64_t seed = 42;
  int max_epochs = 200;
  double tolerance = 1e-6;  // relative objective change that ends training
};

struct TrainResult {
  bot::PairModel model;
  std::size_t constraints = 0;
  int epochs = 0;
  /// Primal objective of the reported model after each epoch.
  std::vector<double> objective_trace;
};

using Vec = std::array<double, bot::kNumPairFeatures>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Within-group difference vectors x_i - x_j for l_i > l_j, over normalized
/// rows. Rows identical in both features and label are collapsed first, so a
/// duplicated candidate adds no constraints.
inline std::vector<Vec> pairwise_differences(const std::vector<LabeledPair>& data,
                                             const std::vector<bot::PairFeatures>& normalized) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.size(); ++i) groups[data[i].group_id].push_back(i);
  std::vector<Vec> diffs;
  for (const auto& [_, idx] : groups) {
    std::set<std::pair<Vec, double>> seen;
    std::vector<std::size_t> rows;
    for (auto i : idx) {
      if (seen.insert({normalized[i].values, data[i].l}).second) rows.push_back(i);
    }
    for (auto i : rows) {
      for (auto j : rows) {
        if (data[i].l > data[j].l) {
          Vec d;
          for (std::size_t k = 0; k < d.size(); ++k) {
            d[k] = normalized[i].values[k] - normalized[j].values[k];
          }
          diffs.push_back(d);
        }
      }
    }
  }
  return diffs;
}

/// 1/2 |w|^2 + C * sum max(0, 1 - w.z)
inline double ranksvm_objective(const Vec& w, const std::vector<Vec>& diffs, double C) {
  double hinge = 0.0;
  for (const auto& z : diffs) hinge += std::max(0.0, 1.0 - dot(w, z));
  return 0.5 * dot(w, w) + C * hinge;
}

/// Linear pairwise ranker (RankSVM objective) fit by dual coordinate descent
/// with a seeded per-epoch visiting order. The reported model after each
/// epoch is the best primal iterate seen so far, so the trace never rises.
/// Normalization bounds are captured over all training rows.
inline TrainResult train_pairwise(const std::vector<LabeledPair>& data, double C,
                                  const SolverOptions& opt = {}) {
  if (C < 0.0) throw ValidationError("train_pairwise: C must be >= 0");
  if (data.empty()) throw ValidationError("train_pairwise: no training pairs");
  std::vector<bot::PairFeatures> raw;
  raw.reserve(data.size());
  for (const auto& p : data) raw.push_back(p.features);
  auto norm = bot::min_max_normalize(raw);
  const auto diffs = pairwise_differences(data, norm.rows);
  if (diffs.empty()) throw ValidationError("train_pairwise: no orderable pairs");

  std::vector<double> alpha(diffs.size(), 0.0);
  std::vector<double> qii(diffs.size());
  for (std::size_t i = 0; i < diffs.size(); ++i) qii[i] = dot(diffs[i], diffs[i]);
  Vec w{};
  Vec best_w{};
  double best_obj = ranksvm_objective(w, diffs, C);
  double prev_obj = best_obj;

  TrainResult res;
  res.constraints = diffs.size();
  std::vector<std::size_t> order(diffs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed);
  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto i : order) {
      if (qii[i] <= 0.0) continue;
      const double g = dot(w, diffs[i]) - 1.0;
      const double a = std::clamp(alpha[i] - g / qii[i], 0.0, C);
      const double delta = a - alpha[i];
      if (delta == 0.0) continue;
      alpha[i] = a;
      for (std::size_t k = 0; k < w.size(); ++k) w[k] += delta * diffs[i][k];
    }
    const double obj = ranksvm_objective(w, diffs, C);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
    }
    res.objective_trace.push_back(best_obj);
    res.epochs = epoch;
    const double rel = std::abs(prev_obj - obj) / std::max(1.0, std::abs(prev_obj));
    prev_obj = obj;
    if (rel < opt.tolerance) break;
  }
  res.model.weights = best_w;
  res.model.bounds = norm.bounds;
  return res;
}

/// Scores a group with `model` and returns labels in predicted order (ties
/// keep input order).
inline std::vector<double> labels_in_predicted_order(const std::vector<const LabeledPair*>& group,
                                                     const bot::PairModel& model) {
  std::vector<bot::PairFeatures> raw;
  for (const auto* p : group) raw.push_back(p->features);
  const auto rows = model.normalize(raw);
  std::vector<std::size_t> idx(group.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> scores;
  for (const auto& r : rows) scores.push_back(model.score(r));
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> labels;
  for (auto i : idx) labels.push_back(group[i]->l);
  return labels;
}

inline std::map<std::string, std::vector<const LabeledPair*>> by_group(
    const std::vector<LabeledPair>& data) {
  std::map<std::string, std::vector<const LabeledPair*>> g;
  for (const auto& p : data) g[p.group_id].push_back(&p);
  return g;
}

/// Mean NDCG@k of `model` over the groups in `data`.
inline double mean_group_ndcg(const std::vector<LabeledPair>& data, const bot::PairModel& model,
                              int k = 5) {
  const auto groups = by_group(data);
  if (groups.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [_, g] : groups) s += engine::ndcg_at_k(labels_in_predicted_order(g, model), k);
  return s / static_cast<double>(groups.size());
}

struct CrossValidationConfig {
  std::vector<double> c_grid = {0.001, 0.01, 0.1};
  int folds = 5;
  int ndcg_k = 5;
  LabelMode label_mode = LabelMode::kHarmonic;
  double beta = kDefaultBeta;
  double epsilon = kDefaultEpsilon;
  SolverOptions solver;

  void validate() const {
    if (folds < 2) throw ValidationError("folds must be >= 2");
    if (c_grid.empty()) throw ValidationError("C grid must not be empty");
    for (double c : c_grid) {
      if (!(c >= 0.0)) throw ValidationError("C values must be >= 0");
    }
  }
};

struct TrainedModel {
  bot::PairModel model;
  double chosen_c = 0.0;
  LabelMode label_mode = LabelMode::kHarmonic;
  double beta = kDefaultBeta;
  double epsilon = kDefaultEpsilon;
  /// Mean validation NDCG@k per C (grid order).
  std::vector<std::pair<double, double>> cv_ndcg;
  /// Per-fold validation NDCG@k for the chosen C.
  std::vector<double> fold_ndcg;
  std::size_t groups = 0;
  std::size_t pairs = 0;
  std::string dataset_fingerprint;
  std::string model_fingerprint;
};

inline std::string dataset_fingerprint(const std::vector<LabeledPair>& data) {
  std::uint64_t h = fnv1a64("");
  for (const auto& p : data) {
    h = fnv1a64(p.group_id, h);
    for (double x : p.features.values) h = fnv1a64(exact_decimal(x), h);
    h = fnv1a64(exact_decimal(p.l), h);
  }
  return hex64(h);
}

inline std::string model_fingerprint(const bot::PairModel& m) {
  std::uint64_t h = fnv1a64("pair-model");
  for (double x : m.weights) h = fnv1a64(exact_decimal(x), h);
  if (m.bounds) {
    for (double x : m.bounds->min) h = fnv1a64(exact_decimal(x), h);
    for (double x : m.bounds->max) h = fnv1a64(exact_decimal(x), h);
  }
  return hex64(h);
}

/// Seeded assignment of group ids to folds (round-robin over a shuffled
/// sorted list).
inline std::map<std::string, int> assign_folds(const std::vector<LabeledPair>& data, int folds,
                                               std::uint64_t seed) {
  std::vector<std::string> ids;
  for (const auto& [gid, _] : by_group(data)) ids.push_back(gid);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::map<std::string, int> fold;
  for (std::size_t i = 0; i < ids.size(); ++i) fold[ids[i]] = static_cast<int>(i % folds);
  return fold;
}

/// k-fold model selection over the C grid by mean validation NDCG@k across
/// all groups (each group is validated exactly once per C). Ties go to the
/// smallest C. The final model is retrained on all data with the chosen C.
inline TrainedModel cross_validate(const std::vector<LabeledPair>& data,
                                   const CrossValidationConfig& cfg) {
  cfg.validate();
  const auto folds = assign_folds(data, cfg.folds, cfg.solver.seed);
  if (static_cast<int>(folds.size()) < cfg.folds) {
    throw ValidationError("cross_validate: " + std::to_string(folds.size()) +
                          " groups is fewer than " + std::to_string(cfg.folds) + " folds");
  }
  auto grid = cfg.c_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  TrainedModel out;
  out.label_mode = cfg.label_mode;
  out.beta = cfg.beta;
  out.epsilon = cfg.epsilon;
  double best = -1.0;
  for (double C : grid) {
    double total = 0.0;
    std::size_t n_groups = 0;
    std::vector<double> per_fold;
    for (int f = 0; f < cfg.folds; ++f) {
      std::vector<LabeledPair> train, valid;
      for (const auto& p : data) (folds.at(p.group_id) == f ? valid : train).push_back(p);
      double fold_sum = 0.0;
      std::size_t fold_groups = 0;
      bot::PairModel m;
      bool trained = true;
      try {
        m = train_pairwise(train, C, cfg.solver).model;
      } catch (const ValidationError&) {
        trained = false;  // no orderable pairs in the training folds
      }
      for (const auto& [_, g] : by_group(valid)) {
        const double v =
            trained ? engine::ndcg_at_k(labels_in_predicted_order(g, m), cfg.ndcg_k) : 0.0;
        fold_sum += v;
        ++fold_groups;
      }
      total += fold_sum;
      n_groups += fold_groups;
      per_fold.push_back(fold_groups ? fold_sum / static_cast<double>(fold_groups) : 0.0);
    }
    const double mean = n_groups ? total / static_cast<double>(n_groups) : 0.0;
    out.cv_ndcg.emplace_back(C, mean);
    if (mean > best + 1e-12) {
      best = mean;
      out.chosen_c = C;
      out.fold_ndcg = per_fold;
    }
  }
  out.model = train_pairwise(data, out.chosen_c, cfg.solver).model;
  out.groups = by_group(data).size();
  out.pairs = data.size();
  out.dataset_fingerprint = dataset_fingerprint(data);
  out.model_fingerprint = model_fingerprint(out.model);
  return out;
}

}  // namespace rankpromo::training
