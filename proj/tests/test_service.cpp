#include "prokno/http_server.hpp"
#include "prokno/service.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

using namespace prokno;
using prokno::testing::data_path;

namespace {

struct FakeClock {
    std::chrono::steady_clock::time_point now{};
    Service::Clock fn() {
        return [this] { return now; };
    }
};

ServiceConfig config() { return ServiceConfig::load_file(data_path("service.json")); }

Json post(Service& s, const std::string& path, const Json& body, int expect = 200) {
    const Response r = s.handle("POST", path, body.dump());
    EXPECT_EQ(r.status, expect) << path << " " << r.body.dump();
    return r.body;
}

}  // namespace

TEST(Service, ConfigValidation) {
    const auto cfg = config();
    EXPECT_EQ(cfg.host, "127.0.0.1");
    EXPECT_EQ(cfg.port, 8080);
    EXPECT_NO_THROW(cfg.validate());
    auto bad = cfg;
    bad.pk_dir = data_path("does-not-exist");
    EXPECT_THROW(bad.validate(), Error);
    bad = cfg;
    bad.session_idle_timeout_s = 0;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Service, ListsInstruments) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    const Response r = s.handle("GET", "/pk", "");
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["instruments"].size(), 3u);
    EXPECT_EQ(s.handle("GET", "/pk/toy_flow", "").body, to_json(prokno::testing::toy_flow()));
}

TEST(Service, ErrorStatuses) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    Json e = post(s, "/sessions", {{"doc_id", "nope"}}, 404);
    EXPECT_EQ(e["error_code"], "NotFound");
    EXPECT_EQ(s.handle("GET", "/nowhere", "").status, 404);
    EXPECT_EQ(s.handle("POST", "/sessions", "{not json").status, 400);

    const std::string id = post(s, "/sessions", {{"doc_id", "toy_flow"}})["session_id"];
    e = post(s, "/sessions/" + id + "/answer", {{"value", "maybe"}}, 422);
    EXPECT_EQ(e["error_code"], "DomainError");
    post(s, "/sessions/" + id + "/answer", {{"value", "no"}});
    e = post(s, "/sessions/" + id + "/answer", {{"value", "yes"}}, 409);
    EXPECT_EQ(e["error_code"], "SessionDone");
    EXPECT_EQ(post(s, "/sessions/unknown/answer", {{"value", "yes"}}, 404)["error_code"], "NotFound");
}

TEST(Service, SessionMatchesLibraryTrace) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    const auto doc = prokno::testing::toy_flow();
    SessionState lib = start_session(doc);

    Json view = post(s, "/sessions", {{"doc_id", "toy_flow"}});
    const std::string id = view["session_id"];
    EXPECT_EQ(view["status"], "active");
    EXPECT_EQ(view["question"]["id"], "Q1");
    for (const char* a : {"yes", "yes", "no"}) {
        const Json preview = post(s, "/sessions/" + id + "/whatif", {{"value", a}});
        EXPECT_EQ(preview, to_json(what_if(doc, lib, a), doc));
        view = post(s, "/sessions/" + id + "/answer", {{"value", a}});
        lib = submit_answer(doc, lib, a);
    }
    EXPECT_EQ(view["status"], "done");
    EXPECT_EQ(view["outcome"], *lib.outcome);
    EXPECT_EQ(s.handle("GET", "/sessions/" + id + "/trace", "").body, to_json(explanation_trace(doc, lib)));
}

TEST(Service, ClassifyMatchesLibrary) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    const auto doc = prokno::testing::toy_flow();
    const auto lexicon = CueLexicon::load_file(data_path("lexicons/toy_flow.lex.json"));
    const Json texts = prokno::testing::read_json("fixtures/classify_texts.json");
    for (const auto& [name, text] : texts.items()) {
        const Json got = post(s, "/classify", {{"doc_id", "toy_flow"}, {"text", text}});
        EXPECT_EQ(got.dump(), to_json(classify_text(doc, lexicon, text.get<std::string>()), doc).dump()) << name;
    }
    const Json opened = post(s, "/classify", {{"doc_id", "toy_flow"}, {"text", texts["cue_gap"]}, {"open_session", true}});
    ASSERT_TRUE(opened.contains("session_id"));
    const Json next = post(s, "/sessions/" + opened["session_id"].get<std::string>() + "/answer", {{"value", "yes"}});
    EXPECT_EQ(next["trace"]["steps"].size(), opened["trace"]["steps"].size() + 1);
}

TEST(Service, MetricsAndRecipes) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    Json samples = Json::array();
    for (const auto& line : parse_jsonl(prokno::testing::read_file(data_path("fixtures/risk_samples.jsonl")))) {
        samples.push_back(line);
    }
    const Json risk = post(s, "/metrics/risk", {{"samples", samples}});
    EXPECT_DOUBLE_EQ(risk["value"]["penalty"].get<double>(), 1.0);
    EXPECT_EQ(post(s, "/metrics/risk", {{"samples", Json::array()}}, 400)["error_code"], "EmptySampleSet");

    const Json recipe = parse_jsonl(prokno::testing::read_file(data_path("fixtures/recipes.jsonl")))[0];
    const Json verdict = post(s, "/recipes/evaluate", {{"recipe", recipe}});
    EXPECT_EQ(verdict["overall"], "flagged");
    EXPECT_EQ(post(s, "/recipes/evaluate", {{"recipe", recipe}, {"condition", "gout"}}, 400)["error_code"],
              "UnknownCondition");
    EXPECT_EQ(post(s, "/recipes/recommend", {{"recipes", Json::array()}}, 400)["error_code"], "EmptyCatalog");
}

TEST(Service, IdleSessionsAreEvicted) {
    const auto cfg = config();
    FakeClock clock;
    Service s(cfg, Catalog::load(cfg), clock.fn());
    const std::string a = post(s, "/sessions", {{"doc_id", "toy_flow"}})["session_id"];
    clock.now += std::chrono::seconds(cfg.session_idle_timeout_s / 2);
    const std::string b = post(s, "/sessions", {{"doc_id", "toy_flat"}})["session_id"];
    EXPECT_EQ(s.session_count(), 2u);
    clock.now += std::chrono::seconds(cfg.session_idle_timeout_s / 2 + 1);
    EXPECT_EQ(s.evict_idle(), 1u);
    EXPECT_EQ(post(s, "/sessions/" + a + "/answer", {{"value", "yes"}}, 404)["error_code"], "NotFound");
    post(s, "/sessions/" + b + "/answer", {{"value", 1}});
}

TEST(Service, ConcurrentSessionsStayIndependent) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    const auto doc = prokno::testing::toy_flow();
    constexpr int kThreads = 8;
    std::vector<std::string> outcomes(kThreads);
    std::vector<std::thread> threads;
    for (int t = 0; t < kThreads; ++t) {
        threads.emplace_back([&, t] {
            const Response created = s.handle("POST", "/sessions", Json{{"doc_id", "toy_flow"}}.dump());
            const std::string id = created.body["session_id"];
            Json view;
            for (int k = 0; k < 5; ++k) {
                const std::string a = k < t % 5 ? "yes" : "no";
                view = s.handle("POST", "/sessions/" + id + "/answer", Json{{"value", a}}.dump()).body;
                if (view["status"] == "done") break;
            }
            outcomes[t] = view.value("outcome", std::string{});
        });
    }
    for (auto& th : threads) th.join();
    for (int t = 0; t < kThreads; ++t) {
        SessionState lib = start_session(doc);
        for (int k = 0; k < 5 && !lib.done(); ++k) lib = submit_answer(doc, lib, k < t % 5 ? "yes" : "no");
        EXPECT_EQ(outcomes[t], *lib.outcome) << t;
    }
    EXPECT_EQ(s.session_count(), static_cast<std::size_t>(kThreads));
}

TEST(HttpServer, ServesTheApiOverLoopback) {
    const auto cfg = config();
    Service s(cfg, Catalog::load(cfg));
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread loop([&] { server.listen(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/pk");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(Json::parse(res->body), s.handle("GET", "/pk", "").body);
    res = client.Post("/sessions", Json{{"doc_id", "missing"}}.dump(), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 404);
    EXPECT_EQ(Json::parse(res->body)["error_code"], "NotFound");

    server.stop();
    loop.join();
}
