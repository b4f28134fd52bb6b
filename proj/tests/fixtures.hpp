#pragma once

// Small hand-written worlds shared by the unit tests.

#include <string>
#include <vector>

#include "rankpromo/bot/history.hpp"
#include "rankpromo/engine/ranker.hpp"
#include "rankpromo/text/corpus_stats.hpp"
#include "rankpromo/text/embedding.hpp"

namespace fixtures {

using rankpromo::bot::RankingHistory;
using rankpromo::engine::Document;
using rankpromo::engine::EngineModel;
using rankpromo::engine::Query;
using rankpromo::engine::Ranking;

inline const std::vector<std::string>& hoof_original_passages() {
  static const std::vector<std::string> p = {
      "There are many different hoof problems that can occur in horses.",
      "To reduce hoof problems, follow these recommendations: Regular trimming or shoeing, "
      "Maintain good hoof balance, Maintain the correct hoof pastern angle, break over, and "
      "medial-lateral balance ,Give heel support if needed ,Use appropriate shoeing for "
      "different weather and footing conditions ,Use appropriate treatment if disease process "
      "occurs.",
      "Poor shoeing or trimming.",
      "Long toes can results in strain on flexor tendons, the navicular bone, and collapsed "
      "heels.",
      "If the horse is \"too upright\" it can cause trauma to the coffin bone.",
      "An imbalanced hoof can cause stress on the collateral ligaments.",
      "Hoof cracks.",
      "Horizontal cracks or blowouts are usually caused by an injury to the coronary band or a "
      "blow to the hoof wall.",
      "Horizontal cracks or blowouts do not usually case lameness.",
      "Grass cracks are usually seen in long, unshod horses, and can be corrected with trimming "
      "and shoeing.",
  };
  return p;
}

inline std::string join(const std::vector<std::string>& ps) {
  std::string out;
  for (const auto& p : ps) {
    if (!out.empty()) out += ' ';
    out += p;
  }
  return out;
}

inline const std::string& hoof_farrier_sentence() {
  static const std::string s =
      "an important recommendation is to go for a good farrier which is a specialist in equine "
      "hoof care, who's work consist of trimming and balancing of horses' hooves and the placing "
      "of shoes on their hooves.";
  return s;
}

inline std::string hoof_modified_text() {
  auto p = hoof_original_passages();
  p[8] = hoof_farrier_sentence();
  return join(p);
}

/// Original document of the duplicated-sentence example (sentence 2 repeats).
inline std::string care_duplicate_text() {
  return "Supportive housing programs offer low-cost housing to older people with low to "
         "moderate incomes. Long term care insurance cover costs associated with a long term "
         "illness or disability. A number of these facilities offer help with meals and tasks "
         "such as housekeeping, shopping, and laundry. Long term care insurance cover costs "
         "associated with a long term illness or disability. Continuing care retirement "
         "communities (CCRCs) provide a full range of services and care based on what each "
         "resident needs over time. Care usually is provided in one of three main stages: "
         "independent living, assisted living, and skilled nursing. Health insurance and "
         "medical assistance often only cover a small portion of the expense of a nursing "
         "facility, which is why long-term care insurance is particularly important.";
}

inline rankpromo::text::StopwordSet english_stopwords() {
  return {"a",   "an",  "and", "are", "as",   "at",   "be",   "by",  "can", "for",
          "in",  "is",  "it",  "of",  "on",   "or",   "that", "the", "to",  "with",
          "if",  "do",  "not", "their", "these", "this", "who", "which", "there", "its"};
}

/// Five short documents on hoof care, ranked by query likelihood.
struct HoofWorld {
  Query query = Query::make("q-hoof", "hoof cracks");
  std::vector<Document> round1;
  std::vector<Document> round2;
  rankpromo::text::CorpusStats stats;
  rankpromo::text::EmbeddingStore store{24, rankpromo::text::OovMode::kHashDeterministic};
  EngineModel engine = EngineModel::lm_dirichlet(100.0);
  RankingHistory history{"q-hoof"};

  HoofWorld() {
    round1 = {
        Document::from_text("a", "s1",
                            "Hoof cracks are common. Cracks in the hoof wall need care. Trim the "
                            "hoof often."),
        Document::from_text("b", "s2",
                            "Horses need good shoes. Hoof cracks can be treated. A farrier "
                            "helps."),
        Document::from_text("c", "s3",
                            "Grass cracks appear in unshod horses. Regular trimming helps. Keep "
                            "the barn clean."),
        Document::from_text("d", "s4",
                            "Feed your horse hay. Water is important. Exercise daily. Brush "
                            "the coat."),
        Document::from_text("e", "s5",
                            "Riding lessons are fun. Saddles come in many sizes. Hoof care "
                            "matters too."),
    };
    std::vector<std::string> texts;
    for (const auto& d : round1) texts.push_back(d.text());
    stats = rankpromo::text::CorpusStats::build(texts, {query.text}, english_stopwords());
    history.append(rank(round1, 1), round1);
    // Round 2: "d" rewrites itself; everyone else stands still.
    round2 = round1;
    round2[3] = Document::from_text("d#1", "s4",
                                    "Feed your horse hay. Hoof cracks worry owners. Exercise "
                                    "daily. Brush the coat.");
    history.append(rank(round2, 2), round2);
  }

  Ranking rank(const std::vector<Document>& docs, int round) const {
    return rankpromo::engine::rank_documents(docs, query, engine, stats, round);
  }
};

}  // namespace fixtures
