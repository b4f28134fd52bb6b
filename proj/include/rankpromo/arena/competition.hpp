#pragma once

#include <future>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rankpromo/arena/metrics.hpp"
#include "rankpromo/bot/modify.hpp"
#include "rankpromo/engine/ranker.hpp"

namespace rankpromo::arena {

enum class Strategy { kBot, kStatic, kMimicTop, kPlanted, kHuman };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::kBot: return "bot";
    case Strategy::kStatic: return "static";
    case Strategy::kMimicTop: return "mimic_top";
    case Strategy::kPlanted: return "planted";
    case Strategy::kHuman: return "human";
  }
  return "static";
}

inline Strategy parse_strategy(std::string_view s) {
  for (auto v : {Strategy::kBot, Strategy::kStatic, Strategy::kMimicTop, Strategy::kPlanted,
                 Strategy::kHuman}) {
    if (strategy_name(v) == s) return v;
  }
  throw ValidationError("unknown strategy '" + std::string(s) +
                        "' (expected bot, static, mimic_top, planted, human)");
}

struct PlayerSpec {
  std::string id;
  Strategy strategy = Strategy::kStatic;
  std::string initial_text;         // round-1 document
  std::vector<std::string> replay;  // planted: one text per round, the last one reused
  std::string label;                // report class; defaults to the strategy name

  std::string class_label() const {
    return label.empty() ? std::string(strategy_name(strategy)) : label;
  }

  /// Text a non-reactive player submits in `round` (1-based), if scripted.
  std::optional<std::string> scripted_text(int round) const {
    if (strategy == Strategy::kPlanted && !replay.empty()) {
      const auto i = std::min<std::size_t>(static_cast<std::size_t>(round - 1), replay.size() - 1);
      return replay[i];
    }
    if (round == 1 && !initial_text.empty()) return initial_text;
    return std::nullopt;
  }
};

/// Shared read-only text resources for a batch of competitions.
struct Environment {
  text::CorpusStats stats;
  text::EmbeddingStore store{50, text::OovMode::kHashDeterministic};
};

/// `env` with any query term the collection has never seen folded into the
/// collection counts, as if the statistics had been built with those queries.
/// Returns `env` itself when nothing is missing.
inline std::shared_ptr<const Environment> with_queries(std::shared_ptr<const Environment> env,
                                                       const std::vector<engine::Query>& queries) {
  std::vector<const engine::Query*> missing;
  for (const auto& q : queries) {
    const auto terms = text::tokenize(q.text);
    if (std::any_of(terms.begin(), terms.end(),
                    [&](const std::string& t) { return env->stats.collection_tf(t) == 0; })) {
      missing.push_back(&q);
    }
  }
  if (missing.empty()) return env;
  auto out = std::make_shared<Environment>(*env);
  for (const auto* q : missing) out->stats.add_collection_text(q->text);
  return out;
}

struct CompetitionConfig {
  std::string id;
  engine::Query query;
  std::vector<PlayerSpec> players;
  int rounds = 2;
  engine::EngineModel engine;
  std::uint64_t seed = 0;
  std::size_t term_cap = engine::kDefaultTermCap;
  bot::PairModel bot_model = bot::PairModel::published();
  bot::FeatureConfig features;
  /// Player id of a bot whose round-1 document a simulated static bot keeps
  /// submitting; ranked counterfactually in place of that bot. Empty: none.
  std::string static_shadow_of;

  void validate() const {
    if (id.empty()) throw ValidationError("competition id must not be empty");
    if (query.text.empty()) throw ValidationError("competition query must not be empty");
    if (rounds < 2) throw ValidationError("rounds must be >= 2");
    if (players.size() < 2) throw ValidationError("a competition needs at least two players");
    engine.validate();
    std::set<std::string> ids;
    for (const auto& p : players) {
      if (p.id.empty()) throw ValidationError("player id must not be empty");
      if (p.id.find_first_of("#/~") != std::string::npos) {
        throw ValidationError("player id '" + p.id + "' must not contain '#', '/' or '~'");
      }
      if (!ids.insert(p.id).second) throw ValidationError("duplicate player id '" + p.id + "'");
      if (p.strategy != Strategy::kHuman && !p.scripted_text(1)) {
        throw ValidationError("player '" + p.id + "' needs an initial document");
      }
      auto check = [&](const std::string& t) {
        engine::Document::from_text(p.id, p.id, t, term_cap);
      };
      if (!p.initial_text.empty()) check(p.initial_text);
      for (const auto& t : p.replay) check(t);
    }
    if (!static_shadow_of.empty()) {
      auto it = std::find_if(players.begin(), players.end(),
                             [&](const PlayerSpec& p) { return p.id == static_shadow_of; });
      if (it == players.end()) {
        throw ValidationError("static shadow refers to unknown player '" + static_shadow_of + "'");
      }
    }
  }
};

struct PlayerRound {
  std::string player_id;
  std::string label;
  std::string doc_id;
  int rank = 0;
  std::optional<Promotion> promotion;  // vs previous round; none in round 1 or from rank 1
  double quality = 0.0;
  bool modified = false;
  std::string note;
};

struct RoundRecord {
  int round = 0;
  engine::Ranking ranking;
  std::vector<PlayerRound> players;  // config order
  std::optional<PlayerRound> static_shadow;
  std::vector<bot::ModificationAudit> audits;  // one per bot player, rounds >= 2
};

inline constexpr std::string_view kStaticShadowLabel = "static bot";

/// Copies the most query-dense sentence of `top` that `own` lacks over the
/// least query-dense sentence of `own`, falling back to denser victims when
/// the cap is hit. Unchanged when `top` offers nothing with a query term.
inline engine::Document mimic_top_revision(const engine::Document& own,
                                           const engine::Document& top,
                                           const engine::Query& query, std::size_t term_cap) {
  const auto qterms = query.terms();
  const std::set<std::string> qset(qterms.begin(), qterms.end());
  auto density = [&](const std::string& p) {
    const auto t = text::tokenize(p);
    if (t.empty()) return 0.0;
    double k = 0.0;
    for (const auto& x : t) k += qset.count(x) ? 1.0 : 0.0;
    return k / static_cast<double>(t.size());
  };
  std::set<text::Terms> own_terms;
  for (const auto& p : own.passages()) own_terms.insert(text::tokenize(p));
  std::optional<std::size_t> pick;
  double best = 0.0;
  for (std::size_t i = 0; i < top.passages().size(); ++i) {
    const auto& p = top.passages()[i];
    if (own_terms.count(text::tokenize(p))) continue;
    const double d = density(p);
    if (d > best) best = d, pick = i;
  }
  if (!pick) return own;
  std::vector<std::size_t> victims(own.passages().size());
  std::iota(victims.begin(), victims.end(), 0);
  std::stable_sort(victims.begin(), victims.end(), [&](std::size_t a, std::size_t b) {
    return density(own.passages()[a]) < density(own.passages()[b]);
  });
  for (auto v : victims) {
    if (density(own.passages()[v]) >= best) break;
    try {
      return bot::apply_replacement(own, v, top.passages()[*pick], term_cap);
    } catch (const engine::LengthCapExceeded&) {
    }
  }
  return own;
}

/// One query's multi-round competition. Rounds are run by a single writer;
/// everything is a pure function of the config, the environment and the
/// human submissions.
class Competition {
 public:
  Competition(CompetitionConfig cfg, std::shared_ptr<const Environment> env)
      : cfg_(std::move(cfg)), env_(std::move(env)), history_(cfg_.query.id) {
    if (!env_) throw ValidationError("competition needs an environment");
    cfg_.validate();
  }

  const CompetitionConfig& config() const { return cfg_; }
  const Environment& environment() const { return *env_; }
  int rounds_completed() const { return static_cast<int>(records_.size()); }
  bool finished() const { return rounds_completed() >= cfg_.rounds; }
  const bot::RankingHistory& history() const { return history_; }
  const std::vector<RoundRecord>& records() const { return records_; }

  const PlayerSpec& player(const std::string& id) const {
    for (const auto& p : cfg_.players) {
      if (p.id == id) return p;
    }
    throw ValidationError("unknown player '" + id + "'");
  }

  /// Current (last ranked) document of a player.
  const engine::Document& current_document(const std::string& player_id) const {
    auto it = current_.find(player_id);
    if (it == current_.end()) throw ValidationError("no document yet for '" + player_id + "'");
    return it->second;
  }

  /// Runs the next round. `submissions` holds human texts keyed by player id;
  /// humans without a (valid) submission carry their previous version over.
  RoundRecord run_round(const std::map<std::string, std::string>& submissions = {}) {
    if (finished()) throw ValidationError("competition '" + cfg_.id + "' is finished");
    const int round = rounds_completed() + 1;
    RoundRecord rec;
    rec.round = round;
    std::map<std::string, engine::Document> next;
    std::map<std::string, std::pair<bool, std::string>> notes;
    for (const auto& p : cfg_.players) {
      auto [doc, modified, note] = produce(p, round, submissions, rec);
      notes[p.id] = {modified, note};
      next.emplace(p.id, std::move(doc));
    }
    std::vector<engine::Document> docs;
    for (const auto& p : cfg_.players) docs.push_back(next.at(p.id));
    rec.ranking = engine::rank_documents(docs, cfg_.query, cfg_.engine, env_->stats, round);
    const int n = static_cast<int>(docs.size());
    for (const auto& p : cfg_.players) {
      const auto& d = next.at(p.id);
      PlayerRound pr;
      pr.player_id = p.id;
      pr.label = p.class_label();
      pr.doc_id = d.id();
      pr.rank = rec.ranking.rank_of(d.id());
      if (round > 1) {
        const int prev = records_.back().ranking.rank_of(current_.at(p.id).id());
        pr.promotion = raw_and_scaled_promotion(prev, pr.rank, n);
      }
      pr.quality = quality_proxy(d, env_->stats);
      pr.modified = notes[p.id].first;
      pr.note = notes[p.id].second;
      rec.players.push_back(std::move(pr));
    }
    if (!cfg_.static_shadow_of.empty()) rec.static_shadow = shadow_round(round, next, n);
    history_.append(rec.ranking, docs);
    current_ = std::move(next);
    records_.push_back(rec);
    return rec;
  }

  void run_to_end() {
    while (!finished()) run_round();
  }

 private:
  struct Produced {
    engine::Document doc;
    bool modified = false;
    std::string note;
  };

  Produced produce(const PlayerSpec& p, int round,
                   const std::map<std::string, std::string>& submissions, RoundRecord& rec) {
    const auto sub = submissions.find(p.id);
    if (round == 1) {
      if (p.strategy == Strategy::kHuman && sub != submissions.end()) {
        return {engine::Document::from_text(p.id, p.id, sub->second, cfg_.term_cap), true,
                "submitted"};
      }
      const auto t = p.scripted_text(1);
      if (!t) throw ValidationError("player '" + p.id + "' has no round-1 document");
      return {engine::Document::from_text(p.id, p.id, *t, cfg_.term_cap), false, ""};
    }
    const auto& cur = current_.at(p.id);
    auto revise = [&](const std::string& text, const char* why) -> Produced {
      if (text == cur.text()) return {cur, false, "unchanged"};
      return {engine::Document::from_text(engine::next_version_id(cur.id()), p.id, text,
                                          cfg_.term_cap),
              true, why};
    };
    switch (p.strategy) {
      case Strategy::kStatic: return {cur, false, "static"};
      case Strategy::kPlanted: return revise(*p.scripted_text(round), "replayed");
      case Strategy::kHuman: {
        if (sub == submissions.end()) return {cur, false, "carried over"};
        try {
          return revise(sub->second, "submitted");
        } catch (const engine::LengthCapExceeded& e) {
          return {cur, false, std::string("rejected: ") + e.what()};
        } catch (const ValidationError& e) {
          return {cur, false, std::string("rejected: ") + e.what()};
        }
      }
      case Strategy::kMimicTop: {
        const auto& ranking = history_.current();
        if (ranking.rank_of(cur.id()) == 1) return {cur, false, "ranked first"};
        const auto& top = history_.document(ranking.doc_ids.front());
        auto d = mimic_top_revision(cur, top, cfg_.query, cfg_.term_cap);
        if (d.id() == cur.id()) return {cur, false, "nothing to copy"};
        return {std::move(d), true, "copied from top"};
      }
      case Strategy::kBot: {
        bot::BotConfig bc{cfg_.features, cfg_.term_cap};
        auto res = bot::modify_document(cur, cfg_.query, history_, cfg_.bot_model, env_->stats,
                                        env_->store, bc);
        const bool modified = res.audit.modified;
        auto note = res.audit.reason;
        rec.audits.push_back(std::move(res.audit));
        return {std::move(res.document), modified, note};
      }
    }
    return {cur, false, ""};
  }

  PlayerRound shadow_round(int round, const std::map<std::string, engine::Document>& next, int n) {
    const auto& owner = cfg_.static_shadow_of;
    if (round == 1) shadow_doc_ = next.at(owner);
    std::vector<engine::Document> docs;
    for (const auto& p : cfg_.players) docs.push_back(p.id == owner ? shadow_doc_ : next.at(p.id));
    const auto r = engine::rank_documents(docs, cfg_.query, cfg_.engine, env_->stats, round);
    PlayerRound pr;
    pr.player_id = owner + "~static";
    pr.label = std::string(kStaticShadowLabel);
    pr.doc_id = shadow_doc_.id();
    pr.rank = r.rank_of(shadow_doc_.id());
    if (round > 1) {
      pr.promotion = raw_and_scaled_promotion(records_.back().static_shadow->rank, pr.rank, n);
    }
    pr.quality = quality_proxy(shadow_doc_, env_->stats);
    pr.note = "counterfactual";
    return pr;
  }

  CompetitionConfig cfg_;
  std::shared_ptr<const Environment> env_;
  bot::RankingHistory history_;
  std::map<std::string, engine::Document> current_;
  std::vector<RoundRecord> records_;
  engine::Document shadow_doc_;
};

/// Runs every competition to its last round, `threads` at a time. Results
/// keep the input order.
inline std::vector<Competition> run_batch(const std::vector<CompetitionConfig>& configs,
                                          std::shared_ptr<const Environment> env,
                                          unsigned threads = 1) {
  std::vector<std::optional<Competition>> slots(configs.size());
  threads = std::max(1u, threads);
  for (std::size_t start = 0; start < configs.size(); start += threads) {
    const auto end = std::min(configs.size(), start + threads);
    std::vector<std::future<Competition>> batch;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                 [&, i] {
                                   Competition c(configs[i], env);
                                   c.run_to_end();
                                   return c;
                                 }));
    }
    for (std::size_t i = start; i < end; ++i) slots[i].emplace(batch[i - start].get());
  }
  std::vector<Competition> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace rankpromo::arena
