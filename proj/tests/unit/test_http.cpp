#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <gtest/gtest.h>
#include <spdlog/spdlog.h>

#include "mindtrail/http_server.hpp"
#include "mindtrail/serialize.hpp"
#include "mindtrail/validate.hpp"
#include "support.hpp"

using namespace mindtrail;

namespace {

struct Api : ::testing::Test {
    testkit::Harness h;
    std::unique_ptr<HttpServer> server;
    std::unique_ptr<httplib::Client> client;

    void start(std::string token = {}) {
        spdlog::set_level(spdlog::level::warn);
        server = std::make_unique<HttpServer>(*h.service, HttpOptions{"127.0.0.1", 0, std::move(token), 4});
        const int port = server->start();
        client = std::make_unique<httplib::Client>("127.0.0.1", port);
    }
    void SetUp() override { start(); }
    void TearDown() override { server->stop(); }

    httplib::Result post(const std::string& path, const json& body) {
        return client->Post(path, body.dump(), "application/json");
    }
    static json body(const httplib::Result& r) { return json::parse(r->body); }
};

void expect_error(const httplib::Result& r, int status, const std::string& code) {
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, status) << r->body;
    const auto j = json::parse(r->body);
    EXPECT_EQ(j["http_status"], status);
    EXPECT_EQ(j["code"], code);
    EXPECT_FALSE(j["message"].get<std::string>().empty());
    EXPECT_EQ(j["request_id"], r->get_header_value("X-Request-Id"));
}

}  // namespace

TEST_F(Api, WalkthroughCoversEveryRoute) {
    auto r = post("/sessions", {{"narrative", testkit::kJaneNarrative}, {"locale", "en"}});
    ASSERT_EQ(r->status, 201);
    const std::string id = body(r)["id"];
    const std::string base = "/sessions/" + id;
    EXPECT_EQ(body(client->Get("/sessions"))["sessions"], json::array({id}));
    EXPECT_EQ(body(client->Get(base))["state_version"], 1);

    auto sug = body(post(base + "/themes/suggest", {{"n", 2}}))["suggestions"];
    ASSERT_EQ(sug.size(), 2u);
    sug[1]["origin"] = "ai";
    EXPECT_EQ(post(base + "/themes/pin", {{"suggestion", sug[1]}})->status, 204);
    sug[0]["origin"] = "ai";
    r = post(base + "/themes", {{"suggestion", sug[0]}});
    ASSERT_EQ(r->status, 201);
    const std::string tid = body(r)["id"];
    const auto cands = body(post(base + "/themes/" + tid + "/questions/suggest", json::object()))["candidates"];
    ASSERT_EQ(cands.size(), 3u);
    r = post(base + "/themes/" + tid + "/questions", cands[0]);
    ASSERT_EQ(r->status, 201);
    const std::string qid = body(r)["id"];
    EXPECT_EQ(body(client->Get(base + "/questions/" + qid))["text"], cands[0]["text"]);
    r = client->Patch(base + "/questions/" + qid + "/answer", json{{"text", "Mornings are hard."}}.dump(),
                      "application/json");
    EXPECT_EQ(body(r)["revision"], 1);
    EXPECT_EQ(body(post(base + "/questions/" + qid + "/keywords", {{"mode", "initial"}}))["batch_index"], 0);
    EXPECT_EQ(post(base + "/questions/" + qid + "/comments", json::object())->status, 201);
    const auto snap = body(post(base + "/summary", json::object()));
    EXPECT_EQ(body(client->Get(base + "/summary/latest")), snap);
    EXPECT_EQ(post(base + "/events", {{"kind", "page_enter"}, {"payload", {{"page", "summary"}}}})->status, 204);
    EXPECT_EQ(body(post(base + "/survey", {{"phase", "pre"}, {"items", {8, 8, 8, 8}}}))["score"], 32);
    const auto metrics = body(client->Get(base + "/metrics"));
    EXPECT_EQ(metrics["theme_count"], 1);
    EXPECT_EQ(metrics["user_comment_request_count"], 1);
    const auto exported = client->Get(base + "/export");
    ASSERT_EQ(exported->status, 200);
    EXPECT_TRUE(validate_record(parse_export(exported->body)).empty());
    EXPECT_EQ(body(client->Get("/health"))["status"], "ok");
}

TEST_F(Api, WhitespaceNarrativeIs422) {
    expect_error(post("/sessions", {{"narrative", "   "}}), 422, "EmptyNarrative");
}

TEST_F(Api, UnknownThingsAre404) {
    expect_error(client->Get("/sessions/nope"), 404, "UnknownSession");
    expect_error(client->Get("/nowhere"), 404, "NotFound");
}

TEST_F(Api, BadBodiesAreRejected) {
    expect_error(client->Post("/sessions", "{oops", "application/json"), 400, "ParseError");
    expect_error(post("/sessions", {{"locale", "en"}}), 422, "InvalidRequest");
    const std::string id = body(post("/sessions", {{"narrative", "x"}}))["id"];
    expect_error(post("/sessions/" + id + "/survey", {{"phase", "pre"}, {"items", {0, 8, 8, 8}}}), 422,
                 "OutOfRangeItem");
    expect_error(post("/sessions/" + id + "/themes", {{"suggestion", 5}}), 422, "InvalidRequest");
}

TEST_F(Api, DuplicateThemeIs409) {
    const std::string id = body(post("/sessions", {{"narrative", "x"}}))["id"];
    EXPECT_EQ(post("/sessions/" + id + "/themes", {{"suggestion", {{"main_theme", "A"}}}})->status, 201);
    expect_error(post("/sessions/" + id + "/themes", {{"suggestion", {{"main_theme", " a "}}}}), 409,
                 "DuplicateTheme");
}

TEST_F(Api, BearerTokenIsEnforced) {
    server->stop();
    start("s3cret");
    expect_error(post("/sessions", {{"narrative", "x"}}), 401, "Unauthorized");
    EXPECT_EQ(client->Get("/health")->status, 200);
    client->set_bearer_token_auth("s3cret");
    EXPECT_EQ(post("/sessions", {{"narrative", "x"}})->status, 201);
}
