#pragma once

// Online-style competitions assembled from a synthetic world: two reactive
// students, three planted replays, and the bot taking over one planted
// document after round 1.

#include <string>
#include <vector>

#include "rankpromo/arena/synth.hpp"

namespace rankpromo::arena {

struct OnlineBatchConfig {
  int rounds = 2;
  int students = 2;  // first authors of each query, playing mimic_top
  std::size_t term_cap = engine::kDefaultTermCap;
  bot::PairModel bot_model = bot::PairModel::published();
  bot::FeatureConfig features;
  bool static_shadow = true;
};

/// One competition per snapshot query. The remaining authors are planted and
/// replay their recorded versions. The bot takes the highest-ranked planted
/// document of round 1 that is not ranked first overall; the other planted
/// documents keep replaying.
inline std::vector<CompetitionConfig> online_batch(const std::vector<QuerySnapshot>& snaps,
                                                   const engine::EngineModel& engine,
                                                   const OnlineBatchConfig& cfg,
                                                   std::uint64_t seed = 0) {
  std::vector<CompetitionConfig> out;
  for (const auto& s : snaps) {
    if (static_cast<int>(s.authors.size()) <= cfg.students + 1) {
      throw ValidationError("query '" + s.query.id + "' has too few authors for the batch");
    }
    CompetitionConfig c;
    c.id = "online-" + s.query.id;
    c.query = s.query;
    c.rounds = cfg.rounds;
    c.engine = engine;
    c.seed = seed;
    c.term_cap = cfg.term_cap;
    c.bot_model = cfg.bot_model;
    c.features = cfg.features;
    const auto& r1 = s.rankings.at(0);
    std::set<std::string> planted(s.authors.begin() + cfg.students, s.authors.end());
    std::string bot_author;
    for (std::size_t i = 1; i < r1.doc_ids.size() && bot_author.empty(); ++i) {
      const auto a = s.author_of(r1.doc_ids[i], 1);
      if (planted.count(a)) bot_author = a;
    }
    if (bot_author.empty()) bot_author = *planted.begin();
    int k = 0;
    for (const auto& a : s.authors) {
      PlayerSpec p;
      p.initial_text = s.version(a, 1)->text();
      if (k++ < cfg.students) {
        p.id = "student-" + std::to_string(k);
        p.strategy = Strategy::kMimicTop;
        p.label = "students";
      } else if (a == bot_author) {
        p.id = "bot";
        p.strategy = Strategy::kBot;
        p.label = "bot";
      } else {
        p.id = "planted-" + std::to_string(k);
        p.strategy = Strategy::kPlanted;
        p.label = "planted";
        for (int r = 1; r <= s.round_count(); ++r) p.replay.push_back(s.version(a, r)->text());
      }
      c.players.push_back(std::move(p));
    }
    if (cfg.static_shadow) c.static_shadow_of = "bot";
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rankpromo::arena
