#pragma once

// JSON run configuration: where the world comes from (a synthetic generator
// or corpus/embedding/snapshot files) and how competitions are described.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rankpromo/arena/snapshot.hpp"
#include "rankpromo/arena/synth.hpp"
#include "rankpromo/engine/io.hpp"
#include "rankpromo/training/io.hpp"

namespace rankpromo::arena {

/// A validation error that carries one reason per offending field.
class ConfigError : public ValidationError {
 public:
  using Field = std::pair<std::string, std::string>;  // (path, reason)

  explicit ConfigError(std::vector<Field> fields)
      : ValidationError(summarize(fields)), fields_(std::move(fields)) {}

  const std::vector<Field>& fields() const { return fields_; }

 private:
  static std::string summarize(const std::vector<Field>& f) {
    std::string s;
    for (const auto& [path, why] : f) s += (s.empty() ? "" : "; ") + path + ": " + why;
    return s;
  }
  std::vector<Field> fields_;
};

/// Collects field errors; throws them together on finish().
class FieldErrors {
 public:
  template <typename F>
  bool check(const std::string& path, F&& f) {
    try {
      f();
      return true;
    } catch (const ConfigError& e) {
      for (const auto& [p, why] : e.fields()) fields_.emplace_back(path + "." + p, why);
    } catch (const ValidationError& e) {
      fields_.emplace_back(path, e.what());
    }
    return false;
  }
  void add(std::string path, std::string why) { fields_.emplace_back(std::move(path), std::move(why)); }
  bool empty() const { return fields_.empty(); }
  void finish() const {
    if (!fields_.empty()) throw ConfigError(fields_);
  }

 private:
  std::vector<ConfigError::Field> fields_;
};

inline std::string resolve_path(const std::string& p, const std::string& base_dir) {
  if (p.empty() || base_dir.empty() || std::filesystem::path(p).is_absolute()) return p;
  return (std::filesystem::path(base_dir) / p).string();
}

inline SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  c.queries = optional_field<int>(j, "queries", c.queries);
  c.authors = optional_field<int>(j, "authors", c.authors);
  c.rounds = optional_field<int>(j, "rounds", c.rounds);
  c.seed = optional_field<std::uint64_t>(j, "seed", c.seed);
  c.dim = optional_field<int>(j, "dim", c.dim);
  c.term_cap = optional_field<std::size_t>(j, "term_cap", c.term_cap);
  c.background_docs = optional_field<int>(j, "background_docs", c.background_docs);
  c.general_vocab = optional_field<int>(j, "general_vocab", c.general_vocab);
  c.aspects = optional_field<int>(j, "aspects", c.aspects);
  c.aspect_vocab = optional_field<int>(j, "aspect_vocab", c.aspect_vocab);
  c.mu = optional_field<double>(j, "mu", c.mu);
  c.validate();
  return c;
}

inline json synth_config_to_json(const SynthConfig& c) {
  return json{{"queries", c.queries},       {"authors", c.authors},
              {"rounds", c.rounds},         {"seed", c.seed},
              {"dim", c.dim},               {"term_cap", c.term_cap},
              {"background_docs", c.background_docs}, {"general_vocab", c.general_vocab},
              {"aspects", c.aspects},       {"aspect_vocab", c.aspect_vocab},
              {"mu", c.mu}};
}

inline bot::FeatureConfig feature_config_from_json(const json& j) {
  bot::FeatureConfig f;
  f.m_max = optional_field<int>(j, "m_max", f.m_max);
  f.alpha = optional_field<double>(j, "alpha", f.alpha);
  const auto mode = optional_field<std::string>(j, "query_term_mode", "occurrence_fraction");
  if (mode == "occurrence_fraction") {
    f.query_term_mode = bot::QueryTermMode::kOccurrenceFraction;
  } else if (mode == "distinct_coverage") {
    f.query_term_mode = bot::QueryTermMode::kDistinctCoverage;
  } else {
    throw ValidationError("query_term_mode must be occurrence_fraction or distinct_coverage");
  }
  if (f.m_max < 1) throw ValidationError("m_max must be >= 1");
  if (!(f.alpha >= 0.0)) throw ValidationError("alpha must be >= 0");
  return f;
}

/// Everything a run needs besides its own section.
struct World {
  std::shared_ptr<Environment> env;
  engine::EngineModel engine;
  std::vector<QuerySnapshot> snapshots;
  std::size_t term_cap = engine::kDefaultTermCap;
  bot::FeatureConfig features;
};

namespace detail {

inline std::vector<std::string> texts_of_jsonl(const std::string& path) {
  std::vector<std::string> out;
  for (const auto& j : read_jsonl(path)) out.push_back(require<std::string>(j, "text"));
  return out;
}

}  // namespace detail

/// Builds the world described by a run config:
///   "world": {"synthetic": {...}}                 generated, or
///   "world": {"corpus": path, "queries": path, "stopwords": path,
///             "embeddings": path, "embedding_dim": n}
///   "snapshots": path (file worlds; optional)     "rerank": bool
///   "engine": {...}, "term_cap": n, "features": {...}
/// Relative paths resolve against `base_dir`.
inline World load_world(const json& cfg, const std::string& base_dir = "") {
  World w;
  const json world = cfg.value("world", json::object());
  w.term_cap = optional_field<std::size_t>(cfg, "term_cap", engine::kDefaultTermCap);
  if (cfg.contains("features")) w.features = feature_config_from_json(cfg["features"]);
  const bool custom_engine = cfg.contains("engine");
  if (custom_engine) w.engine = engine::engine_model_from_json(cfg["engine"]);

  if (world.contains("synthetic")) {
    auto sw = make_synthetic_world(synth_config_from_json(world["synthetic"]));
    w.env = sw.env;
    w.snapshots = std::move(sw.snapshots);
    if (!custom_engine) {
      w.engine = sw.engine;
    } else {
      for (auto& s : w.snapshots) rank_all_rounds(s, w.engine, w.env->stats);
    }
    if (!cfg.contains("term_cap")) w.term_cap = sw.config.term_cap;
    return w;
  }

  const auto corpus = resolve_path(optional_field<std::string>(world, "corpus", ""), base_dir);
  if (corpus.empty()) {
    throw ValidationError("world needs either 'synthetic' settings or a 'corpus' path");
  }
  const auto snap_path = resolve_path(optional_field<std::string>(cfg, "snapshots", ""), base_dir);
  if (!snap_path.empty()) w.snapshots = load_snapshots(snap_path);

  std::vector<std::string> queries;
  const auto qpath = resolve_path(optional_field<std::string>(world, "queries", ""), base_dir);
  if (!qpath.empty()) {
    for (const auto& q : engine::load_queries(qpath)) queries.push_back(q.text);
  } else {
    for (const auto& s : w.snapshots) queries.push_back(s.query.text);
  }
  text::StopwordSet stop;
  const auto swpath = resolve_path(optional_field<std::string>(world, "stopwords", ""), base_dir);
  if (!swpath.empty()) stop = text::load_stopwords(swpath);

  w.env = std::make_shared<Environment>();
  w.env->stats = text::CorpusStats::build(detail::texts_of_jsonl(corpus), queries, std::move(stop));
  const auto epath = resolve_path(optional_field<std::string>(world, "embeddings", ""), base_dir);
  if (!epath.empty()) {
    w.env->store = text::EmbeddingStore::load(epath, text::OovMode::kHashDeterministic);
  } else {
    w.env->store = text::EmbeddingStore(optional_field<std::size_t>(world, "embedding_dim", 50),
                                        text::OovMode::kHashDeterministic);
  }
  if (optional_field<bool>(cfg, "rerank", false)) {
    for (auto& s : w.snapshots) rank_all_rounds(s, w.engine, w.env->stats);
  }
  return w;
}

/// Writes a synthetic world as plain files plus a run config that reloads it
/// exactly: corpus.jsonl, queries.jsonl, stopwords.txt, vectors.txt,
/// snapshots.jsonl and world.json.
inline void export_world(const SynthWorld& w, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  std::vector<json> corpus;
  for (std::size_t i = 0; i < w.collection.size(); ++i) {
    corpus.push_back(json{{"id", "c" + std::to_string(i + 1)}, {"text", w.collection[i]}});
  }
  write_jsonl((d / "corpus.jsonl").string(), corpus);
  std::vector<json> queries;
  for (const auto& s : w.snapshots) queries.push_back(engine::query_to_json(s.query));
  write_jsonl((d / "queries.jsonl").string(), queries);
  {
    std::ofstream out(d / "stopwords.txt");
    if (!out) throw RuntimeError("cannot write " + (d / "stopwords.txt").string());
    for (const auto& s : synth_stopwords()) out << s << '\n';
  }
  w.env->store.save((d / "vectors.txt").string());
  save_snapshots((d / "snapshots.jsonl").string(), w.snapshots);
  const json cfg{{"world",
                  {{"corpus", "corpus.jsonl"},
                   {"queries", "queries.jsonl"},
                   {"stopwords", "stopwords.txt"},
                   {"embeddings", "vectors.txt"}}},
                 {"snapshots", "snapshots.jsonl"},
                 {"engine", engine::engine_model_to_json(w.engine)},
                 {"term_cap", w.config.term_cap},
                 {"synthetic_source", synth_config_to_json(w.config)}};
  std::ofstream out(d / "world.json");
  if (!out) throw RuntimeError("cannot write " + (d / "world.json").string());
  out << cfg.dump(2) << '\n';
}

/// A pair model from a path (trained-model file) or the published weights
/// when `path` is empty or "published".
inline bot::PairModel load_pair_model(const std::string& path) {
  if (path.empty() || path == "published") return bot::PairModel::published();
  return training::load_trained_model(path).model;
}

/// Parses a competition description:
///   {"id", "query": {"id","text"} | "text", "rounds", "seed", "term_cap",
///    "players": [{"id","strategy","text","replay","label"}], "static_shadow_of"}
/// Engine, pair model and feature settings come from `base`; they are never
/// taken from the description itself. Every bad field is reported.
inline CompetitionConfig competition_config_from_json(const json& j, const CompetitionConfig& base) {
  if (!j.is_object()) throw ConfigError(std::vector<ConfigError::Field>{{"$", "competition config must be an object"}});
  CompetitionConfig c = base;
  c.players.clear();
  FieldErrors errs;
  errs.check("id", [&] { c.id = optional_field<std::string>(j, "id", base.id); });
  errs.check("query", [&] {
    if (!j.contains("query")) throw ValidationError("required");
    const auto& q = j["query"];
    if (q.is_string()) {
      c.query = engine::Query::make(c.id.empty() ? "q" : c.id, q.get<std::string>());
    } else {
      c.query = engine::query_from_json(q);
    }
    if (text::tokenize(c.query.text).empty()) throw ValidationError("query has no terms");
  });
  errs.check("rounds", [&] {
    c.rounds = optional_field<int>(j, "rounds", base.rounds);
    if (c.rounds < 2) throw ValidationError("must be >= 2");
  });
  errs.check("seed", [&] { c.seed = optional_field<std::uint64_t>(j, "seed", base.seed); });
  errs.check("term_cap", [&] {
    c.term_cap = optional_field<std::size_t>(j, "term_cap", base.term_cap);
    if (c.term_cap == 0) throw ValidationError("must be positive");
  });
  errs.check("static_shadow_of",
             [&] { c.static_shadow_of = optional_field<std::string>(j, "static_shadow_of", ""); });
  if (!j.contains("players") || !j["players"].is_array()) {
    errs.add("players", "required list");
  } else {
    std::set<std::string> ids;
    for (std::size_t i = 0; i < j["players"].size(); ++i) {
      const auto& pj = j["players"][i];
      const std::string path = "players[" + std::to_string(i) + "]";
      PlayerSpec p;
      errs.check(path + ".id", [&] {
        p.id = require<std::string>(pj, "id");
        if (p.id.empty()) throw ValidationError("must not be empty");
        if (p.id.find_first_of("#/~") != std::string::npos) {
          throw ValidationError("must not contain '#', '/' or '~'");
        }
        if (!ids.insert(p.id).second) throw ValidationError("duplicate player id '" + p.id + "'");
      });
      const bool known_strategy = errs.check(
          path + ".strategy", [&] { p.strategy = parse_strategy(require<std::string>(pj, "strategy")); });
      errs.check(path + ".text", [&] {
        p.initial_text = optional_field<std::string>(pj, "text", "");
        if (!p.initial_text.empty()) {
          engine::Document::from_text("check", "check", p.initial_text, c.term_cap);
        }
      });
      errs.check(path + ".replay", [&] {
        p.replay = optional_field<std::vector<std::string>>(pj, "replay", {});
        for (const auto& t : p.replay) engine::Document::from_text("check", "check", t, c.term_cap);
      });
      errs.check(path + ".label", [&] { p.label = optional_field<std::string>(pj, "label", ""); });
      if (known_strategy && p.strategy != Strategy::kHuman && !p.scripted_text(1)) {
        errs.add(path + ".text", "required for a " + std::string(strategy_name(p.strategy)) +
                                     " player");
      }
      c.players.push_back(std::move(p));
    }
    if (c.players.size() < 2) errs.add("players", "at least two players are needed");
  }
  if (!c.static_shadow_of.empty() &&
      std::none_of(c.players.begin(), c.players.end(),
                   [&](const PlayerSpec& p) { return p.id == c.static_shadow_of; })) {
    errs.add("static_shadow_of", "unknown player '" + c.static_shadow_of + "'");
  }
  errs.finish();
  errs.check("$", [&] { c.validate(); });
  errs.finish();
  return c;
}

}  // namespace rankpromo::arena
