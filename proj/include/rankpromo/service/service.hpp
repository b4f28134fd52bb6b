#pragma once

// Live competitions with human players. State is a fold over an append-only
// event log, so a restarted server replays to exactly where it stopped.
// Nothing returned from here carries engine or pair-model parameters.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "rankpromo/arena/config.hpp"
#include "rankpromo/arena/report.hpp"

namespace rankpromo::service {

/// An error with the HTTP status it maps to.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, const std::string& message, json details = nullptr)
      : std::runtime_error(message), status_(status), details_(std::move(details)) {}
  int status() const { return status_; }
  const json& details() const { return details_; }

 private:
  int status_;
  json details_;
};

/// 128 random bits as 32 hex digits.
inline std::string random_token() {
  static std::mutex m;
  static std::random_device rd;
  std::lock_guard lock(m);
  std::string out;
  for (int i = 0; i < 4; ++i) {
    char buf[9];
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    out += buf;
  }
  return out;
}

/// Line-delimited event records, appended and flushed one at a time.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::string path) : path_(std::move(path)) {}

  bool persistent() const { return !path_.empty(); }

  std::vector<json> read() const {
    if (!persistent() || !std::filesystem::exists(path_)) return {};
    return read_jsonl(path_);
  }

  void append(const json& event) {
    if (!persistent()) return;
    std::lock_guard lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw RuntimeError("cannot append to event log " + path_);
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw RuntimeError("write to event log " + path_ + " failed");
  }

 private:
  std::string path_;
  std::mutex mutex_;
};

struct ServiceOptions {
  std::string log_path;     // empty: in-memory only
  std::string admin_token;  // empty: a random one is generated
  /// Engine, pair model, features and default term cap for new competitions.
  arena::CompetitionConfig defaults;
};

class CompetitionService {
 public:
  CompetitionService(std::shared_ptr<const arena::Environment> env, ServiceOptions opt)
      : env_(std::move(env)), opt_(std::move(opt)), log_(opt_.log_path) {
    if (!env_) throw ValidationError("service needs an environment");
    if (opt_.admin_token.empty()) opt_.admin_token = random_token();
    replay();
  }

  const std::string& admin_token() const { return opt_.admin_token; }

  struct Created {
    std::string id;
    std::map<std::string, std::string> tokens;  // human player id -> session token
  };

  /// POST /competitions. Tokens are issued for human players only.
  Created create(const json& body) {
    std::string id = optional_field<std::string>(body, "id", "");
    json cfg = body;
    std::unique_lock lock(map_mutex_);
    if (id.empty()) {
      do {
        id = "c" + random_token().substr(0, 12);
      } while (comps_.count(id));
    } else if (comps_.count(id)) {
      throw ServiceError(409, "competition '" + id + "' already exists");
    }
    cfg["id"] = id;
    auto entry = build(cfg);
    Created out{id, {}};
    for (const auto& p : entry->comp.config().players) {
      if (p.strategy == arena::Strategy::kHuman) {
        const auto tok = random_token();
        entry->tokens[tok] = p.id;
        out.tokens[p.id] = tok;
      }
    }
    log_.append(json{{"event", "create"}, {"id", id}, {"config", cfg}, {"tokens", out.tokens}});
    entry->publish();
    comps_.emplace(id, std::move(entry));
    return out;
  }

  /// GET /competitions/{id}: public summary.
  json get(const std::string& id) const {
    const auto e = find(id);
    const auto v = e->view();
    return json{{"id", id},
                {"query", v->query},
                {"rounds", v->rounds},
                {"completed_rounds", v->completed},
                {"open_round", v->finished ? json(nullptr) : json(v->completed + 1)},
                {"finished", v->finished},
                {"term_cap", v->term_cap},
                {"players", v->players.size()},
                {"humans", v->humans},
                {"submitted", v->submitted}};
  }

  /// POST /competitions/{id}/submissions. Resubmission overwrites.
  json submit(const std::string& id, const std::string& token, const std::string& text) {
    auto e = find(id);
    std::lock_guard lock(e->write);
    const auto player = e->player_for(token);
    if (e->comp.finished()) throw ServiceError(409, "competition is closed");
    engine::Document doc;
    try {
      doc = engine::Document::from_text(player, player, text, e->comp.config().term_cap);
    } catch (const engine::LengthCapExceeded& ex) {
      throw ServiceError(422, "length cap exceeded", json{{"reason", ex.what()}});
    } catch (const ValidationError& ex) {
      throw ServiceError(422, ex.what());
    }
    log_.append(json{{"event", "submit"}, {"id", id}, {"player_id", player}, {"text", text}});
    e->pending[player] = text;
    e->publish();
    return json{{"accepted", true},
                {"round", e->comp.rounds_completed() + 1},
                {"passages", doc.passages()},
                {"terms", doc.term_count()}};
  }

  /// GET /competitions/{id}/ranking with a session or admin token.
  json ranking(const std::string& id, const std::string& token) const {
    const auto e = find(id);
    // Tokens never change after creation, so no lock is needed here.
    const std::string self = token == opt_.admin_token ? "" : e->player_for(token);
    const auto v = e->view();
    if (v->completed == 0) throw ServiceError(404, "no round has completed yet");
    json out = v->rankings;
    if (!self.empty()) out["you"] = v->pseudonyms.at(self);
    return out;
  }

  /// POST /competitions/{id}/advance. Without `force`, every human must have
  /// submitted; with it, non-submitters carry their previous version over.
  json advance(const std::string& id, const std::string& admin, bool force) {
    if (admin != opt_.admin_token) throw ServiceError(403, "admin credential required");
    auto e = find(id);
    std::lock_guard lock(e->write);
    const auto rec = e->advance(force);
    log_.append(json{{"event", "advance"},
                     {"id", id},
                     {"force", force},
                     {"round", rec.round},
                     {"doc_ids", rec.ranking.doc_ids}});
    e->publish();
    return e->view()->rankings["rounds"].back();
  }

  /// GET /competitions/{id}/report: per-class aggregates and per-round series.
  json report(const std::string& id) const {
    const auto v = find(id)->view();
    return json{{"id", id}, {"text", v->report_text}, {"series", v->series}};
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : comps_) out.push_back(id);
    return out;
  }

 private:
  /// What readers see: rebuilt after each mutation, then swapped in.
  struct View {
    json query;
    int rounds = 0;
    int completed = 0;
    bool finished = false;
    std::size_t term_cap = 0;
    std::vector<std::string> players;
    std::size_t humans = 0;
    std::size_t submitted = 0;
    std::map<std::string, std::string> pseudonyms;  // player id -> label
    json rankings;
    std::string report_text;
    json series;
  };

  struct Entry {
    arena::Competition comp;
    std::map<std::string, std::string> tokens;   // token -> player id
    std::map<std::string, std::string> pending;  // player id -> text
    std::map<std::string, std::string> pseudonyms;
    mutable std::mutex write;                     // single writer
    mutable std::mutex publish_mutex;             // guards only the pointer swap
    std::shared_ptr<const View> current;

    Entry(arena::CompetitionConfig cfg, std::shared_ptr<const arena::Environment> env)
        : comp(std::move(cfg), std::move(env)) {
      // Stable pseudonyms: a seeded shuffle of "author 1".."author n".
      const auto& ps = comp.config().players;
      std::vector<std::size_t> order(ps.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(comp.config().seed ^ fnv1a64(comp.config().id));
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        pseudonyms[ps[order[i]].id] = "author " + std::to_string(i + 1);
      }
    }

    std::string player_for(const std::string& token) const {
      auto it = tokens.find(token);
      if (token.empty() || it == tokens.end()) throw ServiceError(401, "invalid session token");
      return it->second;
    }

    std::shared_ptr<const View> view() const {
      std::lock_guard lock(publish_mutex);
      return current;
    }

    arena::RoundRecord advance(bool force) {
      if (comp.finished()) throw ServiceError(409, "competition is closed");
      const int round = comp.rounds_completed() + 1;
      for (const auto& p : comp.config().players) {
        if (p.strategy != arena::Strategy::kHuman || pending.count(p.id)) continue;
        const bool has_previous = round > 1 || p.scripted_text(1).has_value();
        if (!force) {
          throw ServiceError(409, "waiting for submissions", json{{"missing", pseudonyms.at(p.id)}});
        }
        if (!has_previous) {
          throw ServiceError(409, "a human player has no document to carry over",
                             json{{"missing", pseudonyms.at(p.id)}});
        }
      }
      auto rec = comp.run_round(pending);
      pending.clear();
      return rec;
    }

    void publish() {
      auto v = std::make_shared<View>();
      const auto& cfg = comp.config();
      v->query = json{{"id", cfg.query.id}, {"text", cfg.query.text}};
      v->rounds = cfg.rounds;
      v->completed = comp.rounds_completed();
      v->finished = comp.finished();
      v->term_cap = cfg.term_cap;
      for (const auto& p : cfg.players) {
        v->players.push_back(p.id);
        if (p.strategy == arena::Strategy::kHuman) ++v->humans;
      }
      v->submitted = pending.size();
      v->pseudonyms = pseudonyms;
      json rounds = json::array();
      for (const auto& rec : comp.records()) {
        json entries = json::array();
        std::map<std::string, const arena::PlayerRound*> by_doc;
        for (const auto& p : rec.players) by_doc[p.doc_id] = &p;
        for (std::size_t i = 0; i < rec.ranking.doc_ids.size(); ++i) {
          const auto* p = by_doc.at(rec.ranking.doc_ids[i]);
          const auto& doc = comp.history().document(p->doc_id);
          json e{{"rank", static_cast<int>(i) + 1},
                 {"author", pseudonyms.at(p->player_id)},
                 {"text", doc.text()},
                 {"passages", doc.passages()},
                 {"quality_proxy", p->quality}};
          e["raw_promotion"] = p->promotion ? json(p->promotion->raw) : json(nullptr);
          e["scaled_promotion"] = p->promotion ? json(p->promotion->scaled) : json(nullptr);
          entries.push_back(e);
        }
        rounds.push_back(json{{"round", rec.round}, {"ranking", entries}});
      }
      v->rankings = json{{"query", v->query}, {"rounds", rounds}};
      const auto stats = arena::aggregate_rounds(arena::result_rows_of(comp));
      v->report_text = arena::render_online_table(stats, "Competition " + cfg.id);
      v->series = arena::series_records(stats);
      std::lock_guard lock(publish_mutex);
      current = std::move(v);
    }
  };

  std::unique_ptr<Entry> build(const json& cfg) const {
    arena::CompetitionConfig c;
    try {
      c = arena::competition_config_from_json(cfg, opt_.defaults);
    } catch (const arena::ConfigError& e) {
      json fields = json::array();
      for (const auto& [path, why] : e.fields()) fields.push_back(json{{"field", path}, {"reason", why}});
      throw ServiceError(422, "invalid competition config", json{{"fields", fields}});
    } catch (const ValidationError& e) {
      throw ServiceError(422, e.what());
    }
    auto env = arena::with_queries(env_, {c.query});
    return std::make_unique<Entry>(std::move(c), std::move(env));
  }

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = comps_.find(id);
    if (it == comps_.end()) throw ServiceError(404, "no competition '" + id + "'");
    return it->second;
  }

  /// Folds the log back into memory. A recorded ranking that the replay does
  /// not reproduce means the log and the configuration disagree.
  void replay() {
    for (const auto& ev : log_.read()) {
      const auto kind = require<std::string>(ev, "event");
      const auto id = require<std::string>(ev, "id");
      if (kind == "create") {
        auto entry = build(ev.at("config"));
        for (const auto& [player, tok] : ev.at("tokens").items()) {
          entry->tokens[tok.get<std::string>()] = player;
        }
        entry->publish();
        comps_.emplace(id, std::move(entry));
        continue;
      }
      auto e = find(id);
      if (kind == "submit") {
        e->pending[require<std::string>(ev, "player_id")] = require<std::string>(ev, "text");
      } else if (kind == "advance") {
        const auto rec = e->advance(optional_field<bool>(ev, "force", false));
        if (ev.contains("doc_ids") &&
            rec.ranking.doc_ids != ev["doc_ids"].get<std::vector<std::string>>()) {
          throw RuntimeError("event log replay diverged for competition '" + id + "' round " +
                             std::to_string(rec.round));
        }
      } else {
        throw RuntimeError("unknown event '" + kind + "' in log");
      }
      e->publish();
    }
  }

  std::shared_ptr<const arena::Environment> env_;
  ServiceOptions opt_;
  EventLog log_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> comps_;
};

}  // namespace rankpromo::service
