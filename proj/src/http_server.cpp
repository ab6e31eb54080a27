#include "mindtrail/http_server.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <thread>

#include "mindtrail/error.hpp"
#include "mindtrail/serialize.hpp"

namespace mindtrail {

namespace {

constexpr const char* kJson = "application/json";
constexpr const char* kSession = R"(/sessions/([A-Za-z0-9_-]{1,64}))";
constexpr const char* kId = R"(([A-Za-z0-9_-]{1,64}))";

json usage_json(const metrics::UsageRow& r) {
    return {{"narrative_syllables", r.narrative_syllables},
            {"total_response_syllables", r.total_response_syllables},
            {"theme_count", r.theme_count},
            {"question_count", r.question_count},
            {"revealed_keyword_count", r.revealed_keyword_count},
            {"user_comment_request_count", r.user_comment_request_count}};
}

json body_of(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseError, "request body is not valid JSON");
    if (!j.is_object()) throw Error(ErrorCode::InvalidRequest, "request body must be an object");
    return j;
}

template <typename T>
std::optional<T> opt(const json& body, const char* key) {
    if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
    return body.at(key).get<T>();
}

ThemeSuggestion suggestion_from(const json& body) {
    if (!body.contains("suggestion") || !body["suggestion"].is_object()) {
        throw Error(ErrorCode::InvalidRequest, "body needs a suggestion object");
    }
    const auto& j = body["suggestion"];
    ThemeSuggestion s;
    s.main_theme = j.at("main_theme").get<std::string>();
    s.expressions = j.value("expressions", std::vector<std::string>{});
    s.quote = j.value("quote", std::string{});
    const auto origin = parse_origin(j.value("origin", std::string("user")));
    if (!origin) throw Error(ErrorCode::InvalidRequest, "origin must be ai or user");
    s.origin = *origin;
    return s;
}

}  // namespace

struct HttpServer::Impl {
    SessionService& service;
    HttpOptions options;
    httplib::Server server;
    std::thread thread;
    int bound_port{0};
    std::atomic<std::uint64_t> next_request{1};

    Impl(SessionService& s, HttpOptions o) : service(s), options(std::move(o)) {}

    void send(httplib::Response& res, int status, const json& body) {
        res.status = status;
        res.set_content(canonical_dump(body), kJson);
    }

    void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
        const auto status = http_status_for(code);
        const auto rid = res.get_header_value("X-Request-Id");
        send(res, status,
             {{"http_status", status}, {"code", error_code_name(code)}, {"message", message}, {"request_id", rid}});
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    Handler guarded(Handler h) {
        return [this, h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_error(res, e.code(), e.what());
            } catch (const json::exception& e) {
                send_error(res, ErrorCode::InvalidRequest, std::string("bad request field: ") + e.what());
            } catch (const std::exception& e) {
                spdlog::error("unhandled error on {} {}: {}", req.method, req.path, e.what());
                send_error(res, ErrorCode::InvalidRequest, "internal error");
                res.status = 500;
            }
        };
    }

    void routes() {
        auto& s = server;
        const std::string sess = kSession;
        const std::string id = kId;

        s.Post("/sessions", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   auto session = service.create_session(body.at("narrative").template get<std::string>(),
                                                         body.value("locale", std::string{}),
                                                         opt<Timestamp>(body, "started_at"));
                   send(res, 201, session);
               }));
        s.Get("/sessions", guarded([this](const auto&, auto& res) { send(res, 200, {{"sessions", service.list_sessions()}}); }));
        s.Get(sess, guarded([this](const auto& req, auto& res) { send(res, 200, service.get_session(req.matches[1])); }));
        s.Post(sess + "/themes/suggest", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   auto out = service.suggest_themes(req.matches[1], opt<int>(body, "n"));
                   send(res, 200, {{"suggestions", out}});
               }));
        s.Post(sess + "/themes/pin", guarded([this](const auto& req, auto& res) {
                   service.pin_theme(req.matches[1], suggestion_from(body_of(req)));
                   res.status = 204;
               }));
        s.Post(sess + "/themes", guarded([this](const auto& req, auto& res) {
                   send(res, 201, service.activate_theme(req.matches[1], suggestion_from(body_of(req))));
               }));
        s.Post(sess + "/themes/" + id + "/questions/suggest", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   auto out = service.suggest_questions(req.matches[1], req.matches[2], opt<int>(body, "n"),
                                                        opt<std::string>(body, "after_question"));
                   send(res, 200, {{"candidates", out}});
               }));
        s.Post(sess + "/themes/" + id + "/questions", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   QuestionCandidate c{body.at("text").template get<std::string>(),
                                       body.at("intention").template get<std::string>()};
                   send(res, 201, service.select_question(req.matches[1], req.matches[2], std::move(c)));
               }));
        s.Get(sess + "/questions/" + id, guarded([this](const auto& req, auto& res) {
                  send(res, 200, service.get_question(req.matches[1], req.matches[2]));
              }));
        s.Patch(sess + "/questions/" + id + "/answer", guarded([this](const auto& req, auto& res) {
                    const auto body = body_of(req);
                    send(res, 200,
                         service.update_answer(req.matches[1], req.matches[2], body.at("text").template get<std::string>()));
                }));
        s.Post(sess + "/questions/" + id + "/keywords", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   const auto mode = parse_keyword_mode(body.value("mode", std::string("initial")));
                   if (!mode) throw Error(ErrorCode::InvalidRequest, "mode must be initial or more");
                   send(res, 200, service.request_keywords(req.matches[1], req.matches[2], *mode));
               }));
        s.Post(sess + "/questions/" + id + "/comments", guarded([this](const auto& req, auto& res) {
                   send(res, 201, service.request_comment(req.matches[1], req.matches[2]));
               }));
        s.Post(sess + "/summary", guarded([this](const auto& req, auto& res) {
                   send(res, 201, service.request_summary(req.matches[1]));
               }));
        s.Get(sess + "/summary/latest", guarded([this](const auto& req, auto& res) {
                  send(res, 200, service.latest_summary(req.matches[1]));
              }));
        s.Post(sess + "/events", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   service.record_event(req.matches[1], body.at("kind").template get<std::string>(),
                                        body.value("payload", std::map<std::string, std::string>{}));
                   res.status = 204;
               }));
        s.Post(sess + "/survey", guarded([this](const auto& req, auto& res) {
                   const auto body = body_of(req);
                   const int score = service.submit_survey(req.matches[1], body.at("phase").template get<std::string>(),
                                                           body.at("items").template get<std::vector<int>>());
                   send(res, 200, {{"score", score}});
               }));
        s.Get(sess + "/export", guarded([this](const auto& req, auto& res) {
                  send(res, 200, export_json(service.export_record(req.matches[1])));
              }));
        s.Get(sess + "/metrics", guarded([this](const auto& req, auto& res) {
                  send(res, 200, usage_json(service.usage(req.matches[1])));
              }));
        s.Get("/health", [this](const auto&, auto& res) { send(res, 200, {{"status", "ok"}}); });
    }

    void hooks() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
            char rid[32];
            std::snprintf(rid, sizeof rid, "req-%06llu", static_cast<unsigned long long>(next_request.fetch_add(1)));
            res.set_header("X-Request-Id", rid);
            if (!options.bearer_token.empty() && req.path != "/health" &&
                req.get_header_value("Authorization") != "Bearer " + options.bearer_token) {
                send_error(res, ErrorCode::Unauthorized, "missing or wrong bearer token");
                return httplib::Server::HandlerResponse::Handled;
            }
            return httplib::Server::HandlerResponse::Unhandled;
        });
        server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (!res.body.empty()) return;
            if (res.status == 404) {
                send_error(res, ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
            } else if (res.status == 405) {
                send_error(res, ErrorCode::NotFound, "method not allowed");
                res.status = 405;
            }
        });
        server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            spdlog::info("{} {} -> {}", req.method, req.path, res.status);
        });
        const int threads = std::max(2, options.threads);
        server.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
        server.set_payload_max_length(1 << 20);
    }
};

HttpServer::HttpServer(SessionService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
    impl_->routes();
    impl_->hooks();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
    auto& i = *impl_;
    if (i.options.port == 0) {
        i.bound_port = i.server.bind_to_any_port(i.options.host);
    } else if (i.server.bind_to_port(i.options.host, i.options.port)) {
        i.bound_port = i.options.port;
    } else {
        i.bound_port = -1;
    }
    if (i.bound_port <= 0) {
        throw Error(ErrorCode::PortInUse,
                    "cannot bind " + i.options.host + ":" + std::to_string(i.options.port));
    }
    i.thread = std::thread([&i] { i.server.listen_after_bind(); });
    i.server.wait_until_ready();
    return i.bound_port;
}

void HttpServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int HttpServer::port() const noexcept { return impl_->bound_port; }

}  // namespace mindtrail
