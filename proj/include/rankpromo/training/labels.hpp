#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include "rankpromo/bot/pair_features.hpp"
#include "rankpromo/engine/document.hpp"
#include "rankpromo/text/embedding.hpp"

namespace rankpromo::training {

inline constexpr double kDefaultBeta = 1.0;
inline constexpr double kDefaultEpsilon = 1e-4;

/// Which label the pair ranker is trained on.
enum class LabelMode { kHarmonic, kPromotionOnly, kCoherenceOnly };

inline std::string_view label_mode_name(LabelMode m) {
  switch (m) {
    case LabelMode::kHarmonic: return "l";
    case LabelMode::kPromotionOnly: return "r_only";
    case LabelMode::kCoherenceOnly: return "c_only";
  }
  return "l";
}

inline LabelMode parse_label_mode(std::string_view s) {
  if (s == "l") return LabelMode::kHarmonic;
  if (s == "r_only" || s == "r") return LabelMode::kPromotionOnly;
  if (s == "c_only" || s == "c") return LabelMode::kCoherenceOnly;
  throw ValidationError("unknown label mode '" + std::string(s) + "' (expected l, r_only, c_only)");
}

/// Positions gained: max(0, rank_cur - rank_next), ranks in 1..n.
inline int promotion_label(int rank_cur, int rank_next, int n = 5) {
  if (n < 1 || rank_cur < 1 || rank_cur > n || rank_next < 1 || rank_next > n) {
    throw ValidationError("promotion_label: ranks must lie in 1.." + std::to_string(n));
  }
  return std::max(0, rank_cur - rank_next);
}

/// Smoothed weighted harmonic mean (1 + b^2) r c / (r + b^2 c + eps).
inline double aggregate_label(double r, double c, double beta = kDefaultBeta,
                              double epsilon = kDefaultEpsilon) {
  if (r < 0.0 || c < 0.0) throw ValidationError("aggregate_label: labels must be >= 0");
  const double b2 = beta * beta;
  const double denom = r + b2 * c + epsilon;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * r * c / denom;
}

inline double training_label(LabelMode mode, double r, double c, double beta, double epsilon) {
  switch (mode) {
    case LabelMode::kPromotionOnly: return r;
    case LabelMode::kCoherenceOnly: return c;
    case LabelMode::kHarmonic: break;
  }
  return aggregate_label(r, c, beta, epsilon);
}

/// Automated stand-in for the crowdsourced coherence label, in [0, 4]:
///   c = 4 * clamp01((s_ctx + s_pair) / 2)
/// s_pair is cos(g_src, g_target); s_ctx is the mean cosine of g_target with
/// g_prec and g_follow (first/last passage boundary rules apply; a
/// single-passage document has s_ctx = 0). All cosines are over embeddings.
inline double coherence_proxy_label(const engine::Document& d_cur, std::size_t src_index,
                                    std::string_view target_text,
                                    const text::EmbeddingStore& store) {
  const auto& ps = d_cur.passages();
  if (src_index >= ps.size()) throw ValidationError("coherence proxy: source index out of range");
  const auto target = text::embed_text(target_text, store);
  const double s_pair = text::cosine(text::embed_text(ps[src_index], store), target);
  double s_ctx = 0.0;
  const auto ctx = bot::context_slots(src_index, ps.size());
  if (ctx.prec && ctx.follow) {
    s_ctx = 0.5 * (text::cosine(target, text::embed_text(ps[*ctx.prec], store)) +
                   text::cosine(target, text::embed_text(ps[*ctx.follow], store)));
  }
  return 4.0 * std::clamp((s_ctx + s_pair) / 2.0, 0.0, 1.0);
}

}  // namespace rankpromo::training
