#include "mindtrail/trace.hpp"

#include <fstream>
#include <sstream>

#include "mindtrail/error.hpp"
#include "mindtrail/service.hpp"

namespace mindtrail::trace {

namespace {

[[noreturn]] void script_error(std::size_t step, const std::string& what) {
    throw Error(ErrorCode::ScriptError, "step " + std::to_string(step + 1) + ": " + what);
}

struct Runner {
    const json& script;
    std::uint64_t seed;
    std::shared_ptr<ManualClock> clock;
    std::shared_ptr<MemoryStore> store;
    std::unique_ptr<SessionService> service;
    std::string sid;
    std::vector<ThemeSuggestion> last_suggestions;
    std::vector<QuestionCandidate> last_candidates;
    std::string last_candidates_theme;
    std::string last_question;
    Timestamp start{0};
    Timestamp now{0};

    Runner(const json& s, std::uint64_t seed_) : script(s), seed(seed_) {
        llm::ProviderConfig cfg;
        cfg.provider = llm::ProviderConfig::Kind::mock;
        cfg.seed = seed;
        start = script.value("start_ms", Timestamp{1700000000000});
        now = start;
        clock = std::make_shared<ManualClock>(start);
        store = std::make_shared<MemoryStore>();
        ServiceOptions opts;
        opts.workers = 1;
        service = std::make_unique<SessionService>(store, std::make_shared<llm::Gateway>(cfg), clock,
                                                   std::make_shared<SeededIds>(seed), opts);
    }

    const Session session() { return service->get_session(sid); }

    std::string theme_ref(std::size_t i, const json& step) {
        const auto s = session();
        if (s.themes.empty()) script_error(i, "no theme exists yet");
        const auto ref = step.value("theme", json("last"));
        if (ref.is_string() && ref.get<std::string>() == "last") return s.themes.back().id;
        if (ref.is_number_integer()) {
            const auto k = ref.get<long long>();
            if (k < 1 || k > static_cast<long long>(s.themes.size())) {
                script_error(i, "theme " + std::to_string(k) + " does not exist");
            }
            return s.themes[k - 1].id;
        }
        if (ref.is_string() && s.find_theme(ref.get<std::string>())) return ref.get<std::string>();
        script_error(i, "unknown theme reference " + ref.dump());
    }

    std::string question_ref(std::size_t i, const json& ref) {
        if (ref.is_string() && ref.get<std::string>() == "last") {
            if (last_question.empty()) script_error(i, "no question has been selected yet");
            return last_question;
        }
        const auto s = session();
        if (ref.is_number_integer()) {
            const auto k = ref.get<long long>();
            if (k < 1 || k > static_cast<long long>(s.question_total())) {
                script_error(i, "question " + std::to_string(k) + " does not exist");
            }
            return "q" + std::to_string(k);
        }
        if (ref.is_string() && s.find_question(ref.get<std::string>())) return ref.get<std::string>();
        script_error(i, "unknown question reference " + ref.dump());
    }

    static std::size_t index_of(std::size_t i, const json& step, std::size_t size, const char* what) {
        const auto k = step.value("index", 1LL);
        if (k < 1 || static_cast<std::size_t>(k) > size) {
            script_error(i, std::string("no ") + what + " #" + std::to_string(k) + " (have " + std::to_string(size) + ")");
        }
        return static_cast<std::size_t>(k - 1);
    }

    void run_step(std::size_t i, const json& step) {
        if (!step.is_object() || !step.contains("op") || !step["op"].is_string()) script_error(i, "step needs an op");
        const auto op = step["op"].get<std::string>();
        if (step.contains("t")) {
            const auto t = start + static_cast<Timestamp>(step["t"].get<double>() * 1000.0);
            if (t < now) script_error(i, "time goes backwards");
            now = t;
        } else if (i > 0) {
            now += 1000;
        }
        clock->set(now);

        if (op == "create") {
            if (!sid.empty()) script_error(i, "session already created");
            const auto s = service->create_session(step.at("narrative").get<std::string>(),
                                                   step.value("locale", script.value("locale", std::string("ko"))), now);
            sid = s.id;
            return;
        }
        if (sid.empty()) script_error(i, "op '" + op + "' before create");

        if (op == "page_enter" || op == "page_leave") {
            service->record_event(sid, op, {{"page", step.at("page").get<std::string>()}});
        } else if (op == "suggest_themes") {
            last_suggestions = service->suggest_themes(sid, step.contains("n") ? std::optional<int>(step["n"].get<int>()) : std::nullopt);
        } else if (op == "activate") {
            ThemeSuggestion s;
            if (step.contains("custom")) {
                s.main_theme = step["custom"].get<std::string>();
                s.origin = Origin::user;
            } else if (step.contains("pinned")) {
                const auto pinned = session().pinned;
                const auto k = step["pinned"].get<long long>();
                if (k < 1 || static_cast<std::size_t>(k) > pinned.size()) script_error(i, "no pinned theme #" + std::to_string(k));
                s = pinned[k - 1];
            } else {
                s = last_suggestions[index_of(i, step, last_suggestions.size(), "theme suggestion")];
            }
            service->activate_theme(sid, s);
        } else if (op == "pin") {
            service->pin_theme(sid, last_suggestions[index_of(i, step, last_suggestions.size(), "theme suggestion")]);
        } else if (op == "suggest_questions") {
            const auto tid = theme_ref(i, step);
            std::optional<std::string> after;
            if (step.contains("after_question")) after = question_ref(i, step["after_question"]);
            last_candidates = service->suggest_questions(
                sid, tid, step.contains("n") ? std::optional<int>(step["n"].get<int>()) : std::nullopt, after);
            last_candidates_theme = tid;
        } else if (op == "select") {
            const auto& c = last_candidates[index_of(i, step, last_candidates.size(), "question candidate")];
            last_question = service->select_question(sid, last_candidates_theme, c).id;
            last_candidates.erase(last_candidates.begin() + static_cast<long>(index_of(i, step, last_candidates.size(), "")));
        } else if (op == "answer") {
            service->update_answer(sid, question_ref(i, step.value("question", json("last"))),
                                   step.at("text").get<std::string>());
        } else if (op == "keywords") {
            const auto mode = parse_keyword_mode(step.value("mode", std::string("initial")));
            if (!mode) script_error(i, "keywords mode must be initial or more");
            service->request_keywords(sid, question_ref(i, step.value("question", json("last"))), *mode);
        } else if (op == "comment") {
            service->request_comment(sid, question_ref(i, step.value("question", json("last"))));
        } else if (op == "summary") {
            service->request_summary(sid);
        } else if (op == "survey") {
            service->submit_survey(sid, step.at("phase").get<std::string>(), step.at("items").get<std::vector<int>>());
        } else {
            script_error(i, "unknown op '" + op + "'");
        }
        // Background comments finish before the clock moves on.
        service->wait_idle();
    }
};

}  // namespace

ReplayResult replay(const json& script, std::optional<std::uint64_t> seed_override) {
    if (!script.is_object() || !script.contains("steps") || !script["steps"].is_array()) {
        throw Error(ErrorCode::ScriptError, "script needs a steps array");
    }
    const auto seed = seed_override.value_or(script.value("seed", std::uint64_t{7}));
    Runner r(script, seed);
    const auto& steps = script["steps"];
    for (std::size_t i = 0; i < steps.size(); ++i) {
        try {
            r.run_step(i, steps[i]);
            r.service->wait_idle();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ScriptError) throw;
            throw Error(e.code(), "step " + std::to_string(i + 1) + ": " + e.what());
        } catch (const json::exception& e) {
            script_error(i, e.what());
        }
    }
    if (r.sid.empty()) throw Error(ErrorCode::ScriptError, "script never creates a session");
    r.service->wait_idle();
    ReplayResult out;
    out.name = script.value("name", std::string("trace"));
    out.session_id = r.sid;
    out.record = r.service->export_record(r.sid);
    out.row = r.service->usage(r.sid);
    out.timeline = metrics::phase_timeline(out.record.events);
    r.service->shutdown();
    return out;
}

ReplayResult replay_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ScriptError, "cannot read script " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto script = json::parse(ss.str(), nullptr, false);
    if (script.is_discarded()) throw Error(ErrorCode::ScriptError, "script " + path.string() + " is not valid JSON");
    return replay(script, seed_override);
}

json timeline_json(const metrics::PhaseTimeline& tl) {
    json segs = json::array();
    for (const auto& s : tl.segments) {
        segs.push_back({{"phase", to_string(s.phase)}, {"start", s.start}, {"end", s.end}});
    }
    return {{"segments", segs}, {"flagged", tl.flagged}, {"notes", tl.notes}};
}

void write_outputs(const ReplayResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::StorageCorrupt, "cannot write " + (out_dir / name).string());
        out << body;
    };
    write("export.json", canonical_dump(export_json(result.record)) + "\n");
    write("metrics.csv", metrics::render_csv({{result.name, result.row}}));
    write("timeline.json", canonical_dump(timeline_json(result.timeline)) + "\n");
}

}  // namespace mindtrail::trace
