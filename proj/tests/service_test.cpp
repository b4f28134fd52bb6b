#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <thread>

#include "fixtures.hpp"
#include "rankpromo/service/server.hpp"

namespace {

using namespace rankpromo;
using service::CompetitionService;
using service::ServiceError;

std::shared_ptr<const arena::Environment> hoof_env() {
  fixtures::HoofWorld w;
  auto env = std::make_shared<arena::Environment>();
  env->stats = w.stats;
  env->store = w.store;
  return env;
}

service::ServiceOptions options(std::string log = "") {
  service::ServiceOptions o;
  o.log_path = std::move(log);
  o.admin_token = "admin-secret";
  o.defaults.engine = engine::EngineModel::lm_dirichlet(100.0);
  o.defaults.bot_model = bot::PairModel::published();
  return o;
}

json two_human_config(int rounds = 3) {
  const fixtures::HoofWorld w;
  return json{{"query", {{"id", "q-hoof"}, {"text", "hoof cracks"}}},
              {"rounds", rounds},
              {"seed", 3},
              {"players",
               {{{"id", "alice"}, {"strategy", "human"}},
                {{"id", "bob"}, {"strategy", "human"}},
                {{"id", "bot"}, {"strategy", "bot"}, {"text", w.round1[3].text()}},
                {{"id", "static"}, {"strategy", "static"}, {"text", w.round1[4].text()}},
                {{"id", "planted"},
                 {"strategy", "planted"},
                 {"replay", {w.round1[1].text(), w.round2[3].text()}}}}}};
}

const std::string kAliceText = "Hoof cracks need care. Trim the hoof wall often.";
const std::string kBobText = "Hoof care matters. Cracks in the hoof can be treated by a farrier.";

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 200;
}

/// Entry of `author` in a ranking round, or null.
const json* entry_of(const json& round, const std::string& author) {
  for (const auto& e : round["ranking"]) {
    if (e["author"] == author) return &e;
  }
  return nullptr;
}

// No engine or pair-model parameter may appear in a response body.
void expect_no_weights(const std::string& body) {
  EXPECT_EQ(body.find("weights"), std::string::npos) << body;
  EXPECT_EQ(body.find("\"mu\""), std::string::npos) << body;
  EXPECT_EQ(body.find("bounds"), std::string::npos) << body;
  EXPECT_EQ(body.find("lm_dirichlet"), std::string::npos) << body;
  const auto pub = bot::PairModel::published();
  for (double w : pub.weights) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", std::abs(w));
    std::string lit = buf;
    lit = std::regex_replace(lit, std::regex("\\."), "\\.");
    EXPECT_FALSE(std::regex_search(body, std::regex("(^|[^0-9.])" + lit + "([^0-9]|$)")))
        << lit << " in " << body;
  }
}

TEST(Service, CreateIssuesTokensForHumansOnly) {
  CompetitionService svc(hoof_env(), options());
  const auto c = svc.create(two_human_config());
  ASSERT_EQ(c.tokens.size(), 2u);
  for (const auto& [player, tok] : c.tokens) {
    EXPECT_TRUE(player == "alice" || player == "bob");
    EXPECT_EQ(tok.size(), 32u);
    EXPECT_TRUE(std::regex_match(tok, std::regex("[0-9a-f]{32}")));
  }
  EXPECT_NE(c.tokens.at("alice"), c.tokens.at("bob"));
  const auto g = svc.get(c.id);
  EXPECT_EQ(g["id"], c.id);
  EXPECT_EQ(g["completed_rounds"], 0);
  EXPECT_EQ(g["open_round"], 1);
  EXPECT_EQ(g["humans"], 2);
  EXPECT_EQ(svc.ids(), std::vector<std::string>{c.id});
  expect_no_weights(g.dump());
}

TEST(Service, InvalidConfigsReportFields) {
  CompetitionService svc(hoof_env(), options());
  auto cfg = two_human_config();
  cfg["players"][1]["id"] = "alice";
  cfg["players"][3]["strategy"] = "greedy";
  try {
    svc.create(cfg);
    FAIL() << "expected rejection";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    const auto fields = e.details().at("fields");
    std::set<std::string> names;
    for (const auto& f : fields) names.insert(f["field"].get<std::string>());
    EXPECT_TRUE(names.count("players[1].id"));
    EXPECT_TRUE(names.count("players[3].strategy"));
  }
  EXPECT_TRUE(svc.ids().empty());

  auto fixed = two_human_config();
  fixed["id"] = "same";
  svc.create(fixed);
  EXPECT_EQ(status_of([&] { svc.create(fixed); }), 409);
  EXPECT_EQ(status_of([&] { svc.get("missing"); }), 404);
}

TEST(Service, SubmissionRules) {
  CompetitionService svc(hoof_env(), options());
  const auto c = svc.create(two_human_config());
  const auto other = svc.create(two_human_config());
  const auto& alice = c.tokens.at("alice");

  std::string over;
  for (int i = 0; i < 151; ++i) over += "hoof ";
  try {
    svc.submit(c.id, alice, over);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_STREQ(e.what(), "length cap exceeded");
  }
  EXPECT_EQ(status_of([&] { svc.submit(c.id, "deadbeef", kAliceText); }), 401);
  EXPECT_EQ(status_of([&] { svc.submit(c.id, other.tokens.at("alice"), kAliceText); }), 401);
  EXPECT_EQ(status_of([&] { svc.submit(c.id, alice, ""); }), 422);

  const auto r = svc.submit(c.id, alice, kAliceText);
  EXPECT_EQ(r["accepted"], true);
  EXPECT_EQ(r["round"], 1);
  EXPECT_EQ(r["passages"],
            (json{"Hoof cracks need care.", "Trim the hoof wall often."}));
  EXPECT_EQ(svc.get(c.id)["submitted"], 1);
}

TEST(Service, QueryOutsideTheCollectionCanBePlayed) {
  CompetitionService svc(hoof_env(), options());
  auto cfg = two_human_config(2);
  cfg["query"] = {{"id", "q-new"}, {"text", "laminitis treatment"}};
  const auto c = svc.create(cfg);
  svc.submit(c.id, c.tokens.at("alice"), "Laminitis treatment starts with rest.");
  svc.submit(c.id, c.tokens.at("bob"), "Treatment of laminitis needs a vet.");
  svc.advance(c.id, "admin-secret", false);
  EXPECT_EQ(svc.ranking(c.id, "admin-secret")["rounds"][0]["ranking"].size(), 5u);
}

TEST(Service, RoundFlow) {
  CompetitionService svc(hoof_env(), options());
  const auto c = svc.create(two_human_config(3));
  const auto& alice = c.tokens.at("alice");
  const auto& bob = c.tokens.at("bob");

  EXPECT_EQ(status_of([&] { svc.ranking(c.id, alice); }), 404);
  EXPECT_EQ(status_of([&] { svc.advance(c.id, "wrong", false); }), 403);
  svc.submit(c.id, alice, "An early draft about hoof care.");
  svc.submit(c.id, alice, kAliceText);  // overwrites
  EXPECT_EQ(status_of([&] { svc.advance(c.id, "admin-secret", false); }), 409);
  // Forcing cannot help in round 1: bob has nothing to carry over.
  EXPECT_EQ(status_of([&] { svc.advance(c.id, "admin-secret", true); }), 409);
  svc.submit(c.id, bob, kBobText);
  const auto round1 = svc.advance(c.id, "admin-secret", false);
  EXPECT_EQ(round1["round"], 1);

  const auto view = svc.ranking(c.id, alice);
  ASSERT_EQ(view["rounds"].size(), 1u);
  const std::string me = view["you"];
  const auto* mine = entry_of(view["rounds"][0], me);
  ASSERT_TRUE(mine);
  EXPECT_EQ((*mine)["text"], kAliceText);
  EXPECT_TRUE((*mine)["raw_promotion"].is_null());
  EXPECT_NE(svc.ranking(c.id, bob)["you"], me);

  // Which pseudonym is the bot? Its round-1 text is known.
  const fixtures::HoofWorld w;
  std::string bot_author;
  int bot_rank = 0;
  for (const auto& e : view["rounds"][0]["ranking"]) {
    if (e["text"] == w.round1[3].text()) {
      bot_author = e["author"];
      bot_rank = e["rank"];
    }
  }
  ASSERT_FALSE(bot_author.empty());

  // Round 2: only bob resubmits; a forced advance carries alice over.
  svc.submit(c.id, bob, kBobText + " Shoes help too.");
  EXPECT_EQ(status_of([&] { svc.advance(c.id, "admin-secret", false); }), 409);
  svc.advance(c.id, "admin-secret", true);
  const auto view2 = svc.ranking(c.id, alice);
  ASSERT_EQ(view2["rounds"].size(), 2u);
  EXPECT_EQ(view2["you"], me);
  EXPECT_EQ((*entry_of(view2["rounds"][1], me))["text"], kAliceText);

  // Pseudonyms are stable: the same five labels every round.
  std::set<std::string> a1, a2;
  for (const auto& e : view2["rounds"][0]["ranking"]) a1.insert(e["author"]);
  for (const auto& e : view2["rounds"][1]["ranking"]) a2.insert(e["author"]);
  EXPECT_EQ(a1, a2);
  EXPECT_EQ(a1.size(), 5u);

  // The bot's document changes exactly when it did not hold rank 1.
  const auto* bot2 = entry_of(view2["rounds"][1], bot_author);
  ASSERT_TRUE(bot2);
  EXPECT_EQ((*bot2)["text"] != w.round1[3].text(), bot_rank != 1);

  // Round-2 metrics exist for everyone who was not first in round 1.
  for (const auto& e : view2["rounds"][1]["ranking"]) {
    const auto* prev = entry_of(view2["rounds"][0], e["author"]);
    EXPECT_EQ(e["raw_promotion"].is_null(), (*prev)["rank"] == 1);
  }

  svc.advance(c.id, "admin-secret", true);
  EXPECT_EQ(svc.get(c.id)["finished"], true);
  EXPECT_EQ(status_of([&] { svc.submit(c.id, alice, kAliceText); }), 409);
  EXPECT_EQ(status_of([&] { svc.advance(c.id, "admin-secret", true); }), 409);

  const auto rep = svc.report(c.id);
  EXPECT_NE(rep["text"].get<std::string>().find("quality proxy"), std::string::npos);
  EXPECT_EQ(rep["series"].size(), 4u * 3u);  // human, bot, static, planted
  for (const auto& body : {svc.get(c.id).dump(), svc.ranking(c.id, alice).dump(),
                           svc.ranking(c.id, "admin-secret").dump(), rep.dump()}) {
    expect_no_weights(body);
  }
}

TEST(Service, RestartReplaysLogExactly) {
  const auto log = (std::filesystem::temp_directory_path() / "rankpromo_service_log.jsonl").string();
  std::filesystem::remove(log);
  std::string id;
  std::map<std::string, std::string> tokens;
  {
    CompetitionService svc(hoof_env(), options(log));
    const auto c = svc.create(two_human_config(3));
    id = c.id;
    tokens = c.tokens;
    svc.submit(id, tokens.at("alice"), kAliceText);
    svc.submit(id, tokens.at("bob"), kBobText);
    svc.advance(id, "admin-secret", false);
    svc.submit(id, tokens.at("bob"), kBobText + " Shoes help.");
  }
  CompetitionService a(hoof_env(), options(log));
  EXPECT_EQ(a.get(id)["completed_rounds"], 1);
  EXPECT_EQ(a.get(id)["submitted"], 1);
  const auto before = a.ranking(id, tokens.at("alice"));
  a.submit(id, tokens.at("alice"), kAliceText + " Check them weekly.");
  const auto next_a = a.advance(id, "admin-secret", false);

  // A second replay of the same log, given the same submission, agrees.
  std::filesystem::path copy = log + ".copy";
  {
    // Rebuild from the log as it stood before the extra submission.
    auto lines = read_jsonl(log);
    lines.resize(lines.size() - 2);
    write_jsonl(copy.string(), lines);
  }
  CompetitionService b(hoof_env(), options(copy.string()));
  EXPECT_EQ(b.ranking(id, tokens.at("alice")), before);
  b.submit(id, tokens.at("alice"), kAliceText + " Check them weekly.");
  EXPECT_EQ(b.advance(id, "admin-secret", false), next_a);

  // And the full log replays to the same state.
  CompetitionService c(hoof_env(), options(log));
  EXPECT_EQ(c.ranking(id, "admin-secret"), a.ranking(id, "admin-secret"));
  std::filesystem::remove(log);
  std::filesystem::remove(copy);
}

TEST(Service, ConcurrentSubmissionsAreSerialized) {
  CompetitionService svc(hoof_env(), options());
  const auto c = svc.create(two_human_config(3));
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) {
        const auto who = (t + i) % 2 ? "alice" : "bob";
        svc.submit(c.id, c.tokens.at(who), "Hoof cracks draft " + std::to_string(i) + ".");
        svc.get(c.id);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(svc.get(c.id)["submitted"], 2);
  EXPECT_NO_THROW(svc.advance(c.id, "admin-secret", false));
}

// ---------------------------------------------------------------------------
// Over HTTP

struct LiveServer {
  CompetitionService svc{hoof_env(), options()};
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::string static_dir;

  LiveServer() {
    static_dir = (std::filesystem::temp_directory_path() / "rankpromo_static_test").string();
    std::filesystem::create_directories(static_dir);
    std::ofstream(static_dir + "/index.html") << "<html>web ui</html>";
    service::install_routes(server, svc, static_dir);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
    std::filesystem::remove_all(static_dir);
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

TEST(Http, EndpointsAndStatusCodes) {
  LiveServer live;
  auto cli = live.client();
  std::vector<std::string> bodies;
  auto keep = [&](const httplib::Result& r) {
    EXPECT_TRUE(r);
    if (r) bodies.push_back(r->body);
    return r ? r->status : -1;
  };

  auto created = cli.Post("/competitions", two_human_config(2).dump(), "application/json");
  ASSERT_EQ(keep(created), 201);
  const auto cj = json::parse(created->body);
  const std::string id = cj["id"];
  const std::string alice = cj["tokens"]["alice"], bob = cj["tokens"]["bob"];

  EXPECT_EQ(keep(cli.Post("/competitions", "{not json", "application/json")), 400);
  EXPECT_EQ(keep(cli.Get("/competitions/" + id)), 200);
  EXPECT_EQ(keep(cli.Get("/competitions/nope")), 404);
  EXPECT_EQ(keep(cli.Get("/competitions/" + id + "/ranking", {{"X-Session-Token", alice}})), 404);

  std::string over;
  for (int i = 0; i < 200; ++i) over += "hoof ";
  auto sub = [&](const std::string& tok, const std::string& text) {
    return keep(cli.Post("/competitions/" + id + "/submissions",
                         json{{"token", tok}, {"text", text}}.dump(), "application/json"));
  };
  EXPECT_EQ(sub(alice, over), 422);
  EXPECT_EQ(sub("stale", kAliceText), 401);
  EXPECT_EQ(sub(alice, kAliceText), 200);
  EXPECT_EQ(sub(bob, kBobText), 200);

  EXPECT_EQ(keep(cli.Post("/competitions/" + id + "/advance", "", "application/json")), 403);
  EXPECT_EQ(keep(cli.Post("/competitions/" + id + "/advance", httplib::Headers{{"X-Admin-Token", "admin-secret"}},
                          "", "application/json")),
            200);
  auto ranking = cli.Get("/competitions/" + id + "/ranking", {{"X-Session-Token", alice}});
  ASSERT_EQ(keep(ranking), 200);
  EXPECT_NE(ranking->body.find(json(kAliceText).dump()), std::string::npos);
  EXPECT_EQ(keep(cli.Get("/competitions/" + id + "/ranking", {{"X-Session-Token", "stale"}})), 401);

  EXPECT_EQ(keep(cli.Post("/competitions/" + id + "/advance",
                          httplib::Headers{{"Authorization", "Bearer admin-secret"}},
                          json{{"force", true}}.dump(), "application/json")),
            200);
  EXPECT_EQ(sub(alice, kAliceText), 409);
  EXPECT_EQ(keep(cli.Get("/competitions/" + id + "/report")), 200);

  auto page = cli.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, "<html>web ui</html>");

  for (const auto& b : bodies) expect_no_weights(b);
}

}  // namespace
