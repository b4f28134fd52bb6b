#pragma once

// Seeded synthetic competitions: invented vocabularies with topic-clustered
// embeddings, template sentences, and human-like authors revising their
// documents round after round.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rankpromo/arena/competition.hpp"
#include "rankpromo/arena/snapshot.hpp"

namespace rankpromo::arena {

struct SynthConfig {
  int queries = 15;
  int authors = 5;
  int rounds = 8;
  std::uint64_t seed = 1;
  std::size_t dim = 32;
  std::size_t term_cap = engine::kDefaultTermCap;
  int background_docs = 120;
  int general_vocab = 400;
  int aspects = 4;        // sub-topics per query topic
  int aspect_vocab = 8;   // words per aspect
  double mu = engine::kDefaultMu;

  void validate() const {
    if (queries < 1) throw ValidationError("synthetic world needs >= 1 query");
    if (authors < 2) throw ValidationError("synthetic world needs >= 2 authors");
    if (rounds < 1) throw ValidationError("synthetic world needs >= 1 round");
    if (dim < 2) throw ValidationError("embedding dimension must be >= 2");
    if (term_cap < 40) throw ValidationError("term cap too small for synthetic documents");
    if (aspects < 1 || aspect_vocab < 2 || general_vocab < 10) {
      throw ValidationError("vocabulary too small");
    }
  }
};

struct SynthWorld {
  SynthConfig config;
  std::shared_ptr<Environment> env;
  engine::EngineModel engine;
  std::vector<QuerySnapshot> snapshots;
  std::vector<std::string> collection;  // texts the corpus statistics were built from
};

inline const std::vector<std::string>& synth_stopwords() {
  static const std::vector<std::string> s = {
      "the", "of",   "and",  "to",   "a",    "in",   "is",   "it",    "that", "for",
      "on",  "with", "as",   "are",  "be",   "this", "by",   "was",   "at",   "from",
      "or",  "an",   "can",  "which", "their", "these", "has", "have", "also", "more"};
  return s;
}

namespace detail {

class SynthGen {
 public:
  explicit SynthGen(const SynthConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

  std::string word() {
    static const char* cons[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t",
                                 "v", "z", "br", "st", "tr", "pl", "gr", "sh"};
    static const char* vow[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
    for (;;) {
      std::string w;
      const int syl = 2 + static_cast<int>(rng_() % 2);
      for (int i = 0; i < syl; ++i) {
        w += cons[rng_() % std::size(cons)];
        w += vow[rng_() % std::size(vow)];
      }
      if (rng_() % 2) w += cons[rng_() % 12];
      if (used_.insert(w).second) return w;
    }
  }

  text::DenseVector gaussian(double sd) {
    std::normal_distribution<double> n(0.0, sd);
    text::DenseVector v(cfg_.dim);
    for (auto& x : v.components) x = n(rng_);
    return v;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(rng_() % n); }
  int range(int lo, int hi) { return lo + static_cast<int>(rng_() % (hi - lo + 1)); }
  std::mt19937_64& rng() { return rng_; }

  void reserve(const std::vector<std::string>& words) { used_.insert(words.begin(), words.end()); }

 private:
  const SynthConfig& cfg_;
  std::mt19937_64 rng_;
  std::set<std::string> used_;
};

// Query terms sit at the topic center; each aspect is a word cluster offset
// from it, so sentences on one aspect read as coherent neighbors.
struct Topic {
  std::vector<std::string> query_terms;
  std::vector<std::vector<std::string>> aspects;
};

// Each slot draws a stopword, a query term (rate q), a word of the sentence's
// aspect or a general word.
inline std::string sentence(SynthGen& g, const Topic& t, std::size_t aspect,
                            const std::vector<std::string>& general, double q) {
  const auto& words = t.aspects[aspect];
  const auto& stop = synth_stopwords();
  const int len = g.range(7, 13);
  std::string s;
  for (int i = 0; i < len; ++i) {
    const double u = g.uniform();
    std::string w;
    if (u < 0.30) {
      w = stop[g.pick(stop.size())];
    } else if (u < 0.30 + q) {
      w = t.query_terms[g.pick(t.query_terms.size())];
    } else if (u < 0.62) {
      w = words[g.pick(words.size())];
    } else {
      w = general[g.pick(general.size())];
    }
    if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s + ".";
}

inline std::vector<std::string> document(SynthGen& g, const Topic& t,
                                         const std::vector<std::string>& general, double q,
                                         std::size_t cap) {
  std::vector<std::string> ps;
  std::size_t terms = 0;
  const int n = g.range(5, 8);
  std::size_t aspect = g.pick(t.aspects.size());
  for (int i = 0; i < n; ++i) {
    // Aspects come in runs: stay with probability 0.7.
    if (i > 0 && g.uniform() >= 0.7) aspect = g.pick(t.aspects.size());
    auto s = sentence(g, t, aspect, general, q);
    const auto k = text::tokenize(s).size();
    if (terms + k > cap) break;
    terms += k;
    ps.push_back(std::move(s));
  }
  return ps;
}

inline std::string join_passages(const std::vector<std::string>& ps) {
  std::string out;
  for (const auto& p : ps) out += (out.empty() ? "" : " ") + p;
  return out;
}

inline double query_density(const std::string& p, const std::set<std::string>& q) {
  const auto t = text::tokenize(p);
  if (t.empty()) return 0.0;
  double k = 0.0;
  for (const auto& x : t) k += q.count(x) ? 1.0 : 0.0;
  return k / static_cast<double>(t.size());
}

// One human-like revision: mimic the top document, work a query term into a
// random sentence, rewrite a sentence, or leave the document alone.
inline engine::Document revise(SynthGen& g, const engine::Document& own, int own_rank,
                               const engine::Document& top, const engine::Query& query,
                               const Topic& t, const std::vector<std::string>& general,
                               std::size_t cap) {
  const double u = g.uniform();
  const auto qterms = query.terms();
  const std::set<std::string> qset(qterms.begin(), qterms.end());
  auto try_replace = [&](std::size_t idx, const std::string& text) {
    try {
      return bot::apply_replacement(own, idx, text, cap);
    } catch (const engine::LengthCapExceeded&) {
      return own;
    }
  };
  if (u < 0.40 && own_rank > 1) return mimic_top_revision(own, top, query, cap);
  if (u < 0.65) {
    // Swap one non-query word of some sentence for a query term.
    const std::size_t target = g.pick(own.passages().size());
    auto words = text::tokenize(own.passages()[target]);
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!qset.count(words[i])) slots.push_back(i);
    }
    if (slots.empty()) return own;
    words[slots[g.pick(slots.size())]] = t.query_terms[g.pick(t.query_terms.size())];
    std::string s;
    for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return try_replace(target, s + ".");
  }
  if (u < 0.85) {
    return try_replace(g.pick(own.passages().size()),
                       sentence(g, t, g.pick(t.aspects.size()), general, 0.05));
  }
  return own;
}

}  // namespace detail

/// Builds a seeded world: vocabulary and embeddings, background collection,
/// and for each query a multi-round record of `authors` human-like authors.
/// Every round's ranking comes from the world's engine (Dirichlet LM).
inline SynthWorld make_synthetic_world(const SynthConfig& cfg) {
  cfg.validate();
  detail::SynthGen g(cfg);
  g.reserve(synth_stopwords());
  SynthWorld w;
  w.config = cfg;
  w.engine = engine::EngineModel::lm_dirichlet(cfg.mu);
  w.env = std::make_shared<Environment>();
  w.env->store = text::EmbeddingStore(cfg.dim, text::OovMode::kHashDeterministic);
  auto& store = w.env->store;
  const double word_sd = 1.0 / std::sqrt(static_cast<double>(cfg.dim));

  for (const auto& s : synth_stopwords()) store.insert(s, g.gaussian(word_sd));
  std::vector<std::string> general;
  for (int i = 0; i < cfg.general_vocab; ++i) {
    general.push_back(g.word());
    store.insert(general.back(), g.gaussian(word_sd));
  }
  std::vector<detail::Topic> topics;
  for (int q = 0; q < cfg.queries; ++q) {
    auto center = g.gaussian(word_sd);
    center.scale(1.0 / center.norm());
    detail::Topic t;
    for (int i = 0; i < 2; ++i) {
      auto v = g.gaussian(0.35 * word_sd);
      v.axpy(1.0, center);
      t.query_terms.push_back(g.word());
      store.insert(t.query_terms.back(), v);
    }
    for (int a = 0; a < cfg.aspects; ++a) {
      auto offset = g.gaussian(word_sd);
      offset.scale(0.9 / offset.norm());
      offset.axpy(1.0, center);
      offset.scale(1.0 / offset.norm());
      t.aspects.emplace_back();
      for (int i = 0; i < cfg.aspect_vocab; ++i) {
        auto v = g.gaussian(0.35 * word_sd);
        v.axpy(1.0, offset);
        t.aspects.back().push_back(g.word());
        store.insert(t.aspects.back().back(), v);
      }
    }
    topics.push_back(std::move(t));
  }

  std::vector<std::string> collection;
  for (int i = 0; i < cfg.background_docs; ++i) {
    const auto& t = topics[g.pick(topics.size())];
    collection.push_back(detail::join_passages(detail::document(g, t, general, 0.02, cfg.term_cap)));
  }

  for (int q = 0; q < cfg.queries; ++q) {
    QuerySnapshot s;
    const auto& t = topics[static_cast<std::size_t>(q)];
    char qid[32];
    std::snprintf(qid, sizeof qid, "q%03d", q + 1);
    s.query = engine::Query::make(qid, t.query_terms[0] + " " + t.query_terms[1]);
    s.rounds.resize(static_cast<std::size_t>(cfg.rounds));
    for (int a = 0; a < cfg.authors; ++a) {
      const std::string author = std::string(qid) + "-a" + std::to_string(a + 1);
      s.authors.push_back(author);
      const double density = 0.01 + 0.09 * g.uniform();
      auto ps = detail::document(g, t, general, density, cfg.term_cap);
      s.rounds[0].emplace(author, engine::Document::from_passages(author, author, ps,
                                                                  cfg.term_cap));
      collection.push_back(s.rounds[0].at(author).text());
    }
    w.snapshots.push_back(std::move(s));
  }

  std::vector<std::string> query_texts;
  for (const auto& s : w.snapshots) query_texts.push_back(s.query.text);
  const auto& sw = synth_stopwords();
  w.collection = collection;
  w.env->stats = text::CorpusStats::build(collection, query_texts,
                                          text::StopwordSet(sw.begin(), sw.end()));

  for (std::size_t q = 0; q < w.snapshots.size(); ++q) {
    auto& s = w.snapshots[q];
    const auto& t = topics[q];
    s.rankings.push_back(
        engine::rank_documents(s.documents_of(1), s.query, w.engine, w.env->stats, 1));
    for (int r = 2; r <= cfg.rounds; ++r) {
      const auto& prev = s.rankings.back();
      const auto& prev_docs = s.rounds[static_cast<std::size_t>(r - 2)];
      const auto& top = prev_docs.at(s.author_of(prev.doc_ids.front(), r - 1));
      auto& cur = s.rounds[static_cast<std::size_t>(r - 1)];
      for (const auto& author : s.authors) {
        const auto& own = prev_docs.at(author);
        cur.emplace(author, detail::revise(g, own, prev.rank_of(own.id()), top, s.query, t,
                                           general, cfg.term_cap));
      }
      s.rankings.push_back(
          engine::rank_documents(s.documents_of(r), s.query, w.engine, w.env->stats, r));
    }
  }
  return w;
}

}  // namespace rankpromo::arena
