// rankpromo: train, run and inspect rank-promotion bots from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 runtime error.

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "rankpromo/arena/config.hpp"
#include "rankpromo/arena/offline.hpp"
#include "rankpromo/arena/online.hpp"
#include "rankpromo/arena/pipeline.hpp"
#include "rankpromo/arena/report.hpp"
#include "rankpromo/bot/io.hpp"
#include "rankpromo/service/server.hpp"
#include "rankpromo/training/io.hpp"

namespace fs = std::filesystem;
using namespace rankpromo;
using rankpromo::json;

namespace {

constexpr int kValidationExit = 2;
constexpr int kRuntimeExit = 3;

struct LoadedConfig {
  json j = json::object();
  std::string dir;  // relative paths in the file resolve against this
};

LoadedConfig load_config(const std::string& path) {
  LoadedConfig c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path + "'");
  try {
    c.j = json::parse(in, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path + "': " + e.what());
  }
  if (!c.j.is_object()) throw ValidationError("config '" + path + "' must be an object");
  c.dir = fs::absolute(path).parent_path().string();
  return c;
}

json section(const LoadedConfig& c, const char* name) {
  if (!c.j.contains(name)) return json::object();
  if (!c.j[name].is_object()) throw ValidationError(std::string("'") + name + "' must be an object");
  return c.j[name];
}

/// The pair model named on the command line, else by the config's "model"
/// key, else the published weights.
bot::PairModel resolve_model(const LoadedConfig& c, const std::string& flag) {
  if (!flag.empty()) return arena::load_pair_model(flag);
  const auto p = optional_field<std::string>(c.j, "model", "");
  if (p.empty() || p == "published") return bot::PairModel::published();
  return arena::load_pair_model(arena::resolve_path(p, c.dir));
}

void print_or_write(const std::string& out_path, const std::vector<json>& records) {
  if (out_path.empty()) return;
  write_jsonl(out_path, records);
  std::cerr << "wrote " << records.size() << " records to " << out_path << '\n';
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  std::string config;
  std::optional<int> queries, authors, rounds;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  const auto cfg = load_config(a.config);
  json sj = section(cfg, "world").value("synthetic", json::object());
  if (a.queries) sj["queries"] = *a.queries;
  if (a.authors) sj["authors"] = *a.authors;
  if (a.rounds) sj["rounds"] = *a.rounds;
  if (a.seed) sj["seed"] = *a.seed;
  const auto w = arena::make_synthetic_world(arena::synth_config_from_json(sj));
  arena::export_world(w, a.out);
  std::cout << "synthetic world: " << w.snapshots.size() << " queries, " << w.config.authors
            << " authors, " << w.config.rounds << " rounds\n"
            << "run config: " << (fs::path(a.out) / "world.json").string() << '\n';
  return 0;
}

struct TrainArgs {
  std::string config, out, dataset, label_mode;
  std::optional<int> round;
  std::optional<unsigned> threads;
};

int run_train(const TrainArgs& a) {
  const auto cfg = load_config(a.config);
  json tj = section(cfg, "training");
  if (!a.label_mode.empty()) tj["label_mode"] = a.label_mode;
  if (a.round) tj["round"] = *a.round;
  if (a.threads) tj["threads"] = *a.threads;
  const auto settings = arena::train_settings_from_json(tj);
  const auto world = arena::load_world(cfg.j, cfg.dir);

  training::DatasetSummary summary;
  const auto data = arena::build_dataset(world, settings, &summary);
  if (!a.dataset.empty()) training::save_dataset(a.dataset, data);
  std::cout << "dataset: " << summary.groups << " groups, " << summary.pairs << " pairs ("
            << arena::fixed(summary.pairs_per_group_mean, 1) << " +- "
            << arena::fixed(summary.pairs_per_group_sd, 1) << " per group), "
            << summary.skipped_over_cap << " candidates over the length cap\n";
  const auto model = training::cross_validate(data, settings.cv);
  training::save_trained_model(a.out, model);
  std::cout << arena::render_trained_model(model) << "model written to " << a.out << '\n';
  return 0;
}

struct ModifyArgs {
  std::string config, model, query, author;
  int round = 7;
  bool explain = false;
};

int run_modify(const ModifyArgs& a) {
  const auto cfg = load_config(a.config);
  const auto world = arena::load_world(cfg.j, cfg.dir);
  const auto model = resolve_model(cfg, a.model);
  const arena::QuerySnapshot* snap = nullptr;
  for (const auto& s : world.snapshots) {
    if (s.query.id == a.query) snap = &s;
  }
  if (!snap) throw ValidationError("no snapshot for query '" + a.query + "'");
  const auto history = snap->history_through(a.round);
  const auto* doc = snap->version(a.author, a.round);
  if (!doc) {
    throw ValidationError("author '" + a.author + "' has no document in round " +
                          std::to_string(a.round));
  }
  const auto res = bot::modify_document(*doc, snap->query, history, model, world.env->stats,
                                        world.env->store, bot::BotConfig{world.features, world.term_cap});
  if (a.explain) {
    std::cout << bot::audit_to_json(res.audit).dump(2) << '\n';
    return 0;
  }
  std::cout << "rank " << history.current().rank_of(doc->id()) << " of "
            << history.current().doc_ids.size() << ", "
            << (res.audit.modified ? "modified" : "unchanged (" + res.audit.reason + ")") << "\n\n"
            << res.document.text() << '\n';
  return 0;
}

struct CompeteArgs {
  std::string config, model, out;
  std::optional<unsigned> threads;
};

int run_compete(const CompeteArgs& a) {
  const auto cfg = load_config(a.config);
  const auto world = arena::load_world(cfg.j, cfg.dir);
  const auto model = resolve_model(cfg, a.model);

  std::vector<arena::CompetitionConfig> configs;
  unsigned threads = 1;
  if (cfg.j.contains("competitions")) {
    if (!cfg.j["competitions"].is_array()) throw ValidationError("'competitions' must be a list");
    arena::CompetitionConfig base;
    base.engine = world.engine;
    base.bot_model = model;
    base.features = world.features;
    base.term_cap = world.term_cap;
    int k = 0;
    for (const auto& cj : cfg.j["competitions"]) {
      ++k;
      base.id = "competition-" + std::to_string(k);
      configs.push_back(arena::competition_config_from_json(cj, base));
    }
  } else {
    const json oj = section(cfg, "online");
    arena::OnlineBatchConfig ob;
    ob.rounds = optional_field<int>(oj, "rounds", ob.rounds);
    ob.students = optional_field<int>(oj, "students", ob.students);
    ob.static_shadow = optional_field<bool>(oj, "static_shadow", ob.static_shadow);
    ob.term_cap = world.term_cap;
    ob.features = world.features;
    ob.bot_model = model;
    const auto n = optional_field<std::size_t>(oj, "queries", world.snapshots.size());
    if (n == 0 || n > world.snapshots.size()) {
      throw ValidationError("online.queries must be between 1 and " +
                            std::to_string(world.snapshots.size()));
    }
    std::vector<arena::QuerySnapshot> first(world.snapshots.begin(),
                                            world.snapshots.begin() + static_cast<std::ptrdiff_t>(n));
    configs = arena::online_batch(first, world.engine, ob, optional_field<std::uint64_t>(oj, "seed", 0));
    threads = optional_field<unsigned>(oj, "threads", threads);
  }
  if (configs.empty()) throw ValidationError("nothing to run");
  if (a.threads) threads = *a.threads;

  std::vector<engine::Query> queries;
  for (const auto& c : configs) queries.push_back(c.query);
  const auto comps = arena::run_batch(configs, arena::with_queries(world.env, queries), threads);
  auto records = arena::competition_records(comps);
  const auto stats = arena::aggregate_rounds(arena::result_rows(comps));
  for (auto& r : arena::series_records(stats)) records.push_back(std::move(r));
  print_or_write(a.out, records);
  std::cout << arena::render_online_table(stats,
                                          "Competitions (" + std::to_string(comps.size()) + ")");
  return 0;
}

struct OfflineArgs {
  std::string config, model, out;
  std::optional<int> n_perm;
};

int run_offline(const OfflineArgs& a) {
  const auto cfg = load_config(a.config);
  const auto world = arena::load_world(cfg.j, cfg.dir);
  const json oj = section(cfg, "offline");
  arena::OfflineConfig oc;
  oc.test_round = optional_field<int>(oj, "test_round", oc.test_round);
  oc.first_rank = optional_field<int>(oj, "first_rank", oc.first_rank);
  oc.last_rank = optional_field<int>(oj, "last_rank", oc.last_rank);
  oc.n_perm = optional_field<int>(oj, "n_perm", oc.n_perm);
  oc.seed = optional_field<std::uint64_t>(oj, "seed", oc.seed);
  oc.term_cap = world.term_cap;
  oc.features = world.features;
  if (a.n_perm) oc.n_perm = *a.n_perm;

  std::vector<arena::OfflineVariant> variants;
  if (oj.contains("variants")) {
    if (!oj["variants"].is_object()) throw ValidationError("offline.variants must map names to model paths");
    for (const auto& [name, path] : oj["variants"].items()) {
      if (!path.is_string()) throw ValidationError("offline.variants." + name + " must be a path");
      const auto p = path.get<std::string>();
      variants.push_back({name, arena::load_pair_model(p == "published" ? p : arena::resolve_path(p, cfg.dir))});
    }
  }
  if (!a.model.empty() || variants.empty()) variants.push_back({"bot", resolve_model(cfg, a.model)});

  const auto rep = arena::offline_eval(world.snapshots, variants, world.engine, *world.env, oc);
  print_or_write(a.out, arena::offline_records(rep));
  std::cout << arena::render_offline_table(
      rep, "Offline evaluation, round " + std::to_string(oc.test_round) + ", ranks " +
               std::to_string(oc.first_rank) + "-" + std::to_string(oc.last_rank));
  return 0;
}

struct ServeArgs {
  std::string config, model, host, static_dir, log, admin_token;
  int port = 0;
};

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

int run_serve(ServeArgs a) {
  const auto cfg = load_config(a.config);
  // Without a config the service ranks against a small generated collection.
  json wcfg = cfg.j;
  if (!wcfg.contains("world")) wcfg["world"] = json{{"synthetic", json::object()}};
  const auto world = arena::load_world(wcfg, cfg.dir);

  service::ServiceOptions opt;
  opt.log_path = a.log;
  opt.admin_token = a.admin_token.empty() ? env_or("RANKPROMO_ADMIN_TOKEN", "") : a.admin_token;
  const bool generated_token = opt.admin_token.empty();
  opt.defaults.engine = world.engine;
  opt.defaults.bot_model = resolve_model(cfg, a.model);
  opt.defaults.features = world.features;
  opt.defaults.term_cap = world.term_cap;
  service::CompetitionService svc(world.env, opt);

  if (a.host.empty()) a.host = env_or("RANKPROMO_HOST", "127.0.0.1");
  if (a.port == 0) a.port = std::stoi(env_or("RANKPROMO_PORT", "8080"));
  if (a.port < 0 || a.port > 65535) throw ValidationError("port out of range");

  httplib::Server server;
  service::exclusive_port(server);
  service::install_routes(server, svc, a.static_dir);
  if (!server.bind_to_port(a.host, a.port)) {
    throw RuntimeError("cannot bind " + a.host + ":" + std::to_string(a.port));
  }
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "listening on http://" << a.host << ":" << a.port << '\n';
  if (generated_token) std::cout << "admin token: " << svc.admin_token() << '\n';
  std::cout.flush();
  if (!server.listen_after_bind()) throw RuntimeError("server stopped unexpectedly");
  return 0;
}

struct ReportArgs {
  std::string records, model;
};

int run_report(const ReportArgs& a) {
  if (!a.model.empty()) {
    std::cout << arena::render_trained_model(training::load_trained_model(a.model));
    return 0;
  }
  if (a.records.empty()) throw ValidationError("report needs --records or --model");
  const auto recs = read_jsonl(a.records);
  auto has = [&](const char* type) {
    return std::any_of(recs.begin(), recs.end(), [&](const json& j) {
      return optional_field<std::string>(j, "type", "") == type;
    });
  };
  if (has("offline_summary")) {
    std::cout << arena::render_offline_table(arena::offline_report_from_records(recs),
                                             "Offline evaluation");
  } else if (has("player_round")) {
    std::cout << arena::render_online_records(recs);
  } else if (recs.size() == 1 && recs.front().contains("weights")) {
    std::cout << arena::render_trained_model(training::trained_model_from_json(recs.front()));
  } else {
    throw ValidationError("'" + a.records + "' holds no recognizable result records");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rank-promotion bots: training, simulation and evaluation"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic competition world as plain files");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--config", synth.config, "Run config whose world.synthetic section is the base");
  s->add_option("--queries", synth.queries, "Number of queries");
  s->add_option("--authors", synth.authors, "Authors per query");
  s->add_option("--rounds", synth.rounds, "Rounds of recorded history");
  s->add_option("--seed", synth.seed, "Generator seed");

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Label snapshot candidates and fit a pair model");
  t->add_option("--config", train.config, "Run config")->required()->check(CLI::ExistingFile);
  t->add_option("--out", train.out, "Where to write the trained model")->required();
  t->add_option("--dataset", train.dataset, "Also write the labeled pairs here");
  t->add_option("--label-mode", train.label_mode, "l, r_only or c_only");
  t->add_option("--round", train.round, "Snapshot round that designates documents");
  t->add_option("--threads", train.threads, "Labeling threads");

  ModifyArgs modify;
  auto* m = app.add_subcommand("modify", "Run the bot on one recorded document");
  m->add_option("--config", modify.config, "Run config")->required()->check(CLI::ExistingFile);
  m->add_option("--model", modify.model, "Trained model file, or 'published'");
  m->add_option("--query", modify.query, "Query id")->required();
  m->add_option("--author", modify.author, "Author whose document is modified")->required();
  m->add_option("--round", modify.round, "Round of the document and history")->capture_default_str();
  m->add_flag("--explain", modify.explain, "Print the full audit record as JSON");

  CompeteArgs compete;
  auto* c = app.add_subcommand("compete", "Run simulated competitions");
  c->add_option("--config", compete.config, "Run config")->required()->check(CLI::ExistingFile);
  c->add_option("--model", compete.model, "Bot model file, or 'published'");
  c->add_option("--out", compete.out, "Write result records (JSON lines) here");
  c->add_option("--threads", compete.threads, "Competitions run concurrently");

  OfflineArgs offline;
  auto* o = app.add_subcommand("offline-eval", "Counterfactual evaluation on recorded rounds");
  o->add_option("--config", offline.config, "Run config")->required()->check(CLI::ExistingFile);
  o->add_option("--model", offline.model, "Evaluate this model as variant 'bot'");
  o->add_option("--out", offline.out, "Write result records (JSON lines) here");
  o->add_option("--n-perm", offline.n_perm, "Permutation test samples");

  ServeArgs serve;
  auto* v = app.add_subcommand("serve", "Start the competition service");
  v->add_option("--config", serve.config, "Run config (world, engine, model)");
  v->add_option("--model", serve.model, "Bot model file, or 'published'");
  v->add_option("--host", serve.host, "Bind address (env RANKPROMO_HOST, default 127.0.0.1)");
  v->add_option("--port", serve.port, "Port (env RANKPROMO_PORT, default 8080)");
  v->add_option("--static", serve.static_dir, "Directory served at /");
  v->add_option("--log", serve.log, "Append-only event log; replayed on start");
  v->add_option("--admin-token", serve.admin_token,
                "Credential for advancing rounds (env RANKPROMO_ADMIN_TOKEN; generated if unset)");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Re-render stored results or a model");
  r->add_option("--records", report.records, "Records written by compete, offline-eval or train")
      ->check(CLI::ExistingFile);
  r->add_option("--model", report.model, "Trained model file")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kValidationExit;
  }

  try {
    if (*s) return run_synth(synth);
    if (*t) return run_train(train);
    if (*m) return run_modify(modify);
    if (*c) return run_compete(compete);
    if (*o) return run_offline(offline);
    if (*v) return run_serve(serve);
    if (*r) return run_report(report);
  } catch (const ValidationError& e) {
    if (const auto* ce = dynamic_cast<const arena::ConfigError*>(&e)) {
      std::cerr << "error: invalid competition config\n";
      for (const auto& [path, why] : ce->fields()) std::cerr << "  " << path << ": " << why << '\n';
    } else {
      std::cerr << "error: " << e.what() << '\n';
    }
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeExit;
  }
  return 0;
}
