#include "mindtrail/service.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>

#include "mindtrail/error.hpp"
#include "mindtrail/serialize.hpp"
#include "mindtrail/text.hpp"
#include "mindtrail/validate.hpp"

namespace mindtrail {

using namespace std::chrono_literals;

Timestamp SystemClock::now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

RandomIds::RandomIds() : rng_(std::random_device{}()) {}

std::string RandomIds::session_id() {
    std::lock_guard lk(mu_);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(rng_()));
    return buf;
}

std::string SeededIds::session_id() {
    return "s-" + std::to_string(seed_) + "-" + std::to_string(next_.fetch_add(1));
}

void TicketLock::lock() {
    std::unique_lock lk(mu_);
    const auto mine = next_++;
    cv_.wait(lk, [&] { return serving_ == mine; });
}

void TicketLock::unlock() {
    {
        std::lock_guard lk(mu_);
        ++serving_;
    }
    cv_.notify_all();
}

WorkerPool::WorkerPool(int threads) {
    for (int i = 0; i < std::max(1, threads); ++i) threads_.emplace_back([this] { run(); });
}

WorkerPool::~WorkerPool() { stop(); }

void WorkerPool::submit(std::function<void()> task) {
    {
        std::lock_guard lk(mu_);
        if (stopping_) return;
        queue_.push_back(std::move(task));
    }
    cv_.notify_one();
}

void WorkerPool::wait_idle() {
    std::unique_lock lk(mu_);
    idle_cv_.wait(lk, [&] { return (queue_.empty() || stopping_) && active_ == 0; });
}

void WorkerPool::stop() {
    {
        std::lock_guard lk(mu_);
        if (stopping_ && threads_.empty()) return;
        stopping_ = true;
        // Queued work is dropped; it is picked up again when the session is next loaded.
        queue_.clear();
    }
    cv_.notify_all();
    idle_cv_.notify_all();
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    threads_.clear();
}

void WorkerPool::run() {
    for (;;) {
        std::function<void()> task;
        {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [&] { return stopping_ || !queue_.empty(); });
            if (queue_.empty()) return;
            task = std::move(queue_.front());
            queue_.pop_front();
            ++active_;
        }
        try {
            task();
        } catch (const std::exception& e) {
            spdlog::error("background task failed: {}", e.what());
        }
        {
            std::lock_guard lk(mu_);
            --active_;
        }
        idle_cv_.notify_all();
    }
}

std::optional<KeywordMode> parse_keyword_mode(std::string_view s) {
    if (s == "initial") return KeywordMode::initial;
    if (s == "more") return KeywordMode::more;
    return std::nullopt;
}

namespace {

bool valid_locale(std::string_view l) {
    if (l.empty() || l.size() > 16) return false;
    for (char c : l) {
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_')) {
            return false;
        }
    }
    return true;
}

std::string fallback_comment(std::string_view locale) {
    if (locale.starts_with("ko")) {
        return "천천히 생각해 보세요. 이 질문을 읽고 가장 먼저 떠오르는 것부터 적어 보셔도 좋아요.";
    }
    return "Take your time. You could start with whatever comes to mind first when you read this question.";
}

std::string json_list(const std::vector<std::string>& items) { return canonical_dump(json(items)); }

const Question& require_question(const Session& s, const std::string& qid) {
    const auto* q = s.find_question(qid);
    if (q == nullptr) throw Error(ErrorCode::UnknownQuestion, "unknown question '" + qid + "'");
    return *q;
}

}  // namespace

SessionService::SessionService(std::shared_ptr<Store> store, std::shared_ptr<llm::Gateway> gateway,
                               std::shared_ptr<Clock> clock, std::shared_ptr<IdGenerator> ids, ServiceOptions options)
    : store_(std::move(store)),
      gateway_(std::move(gateway)),
      clock_(std::move(clock)),
      ids_(std::move(ids)),
      options_(std::move(options)),
      pipelines_(*gateway_, options_.pipeline),
      provider_slots_(std::max(1, options_.provider_slots)),
      pool_(options_.workers) {}

SessionService::~SessionService() { shutdown(); }

void SessionService::shutdown() {
    shutdown_.request_stop();
    pool_.stop();
    std::shared_lock lk(entries_mu_);
    for (auto& [id, e] : entries_) e->pending_cv.notify_all();
}

void SessionService::wait_idle() { pool_.wait_idle(); }

void SessionService::set_before_apply(std::function<void(const std::string&)> hook) {
    std::lock_guard lk(hook_mu_);
    before_apply_ = std::move(hook);
}

void SessionService::before_apply(const std::string& id) {
    std::function<void(const std::string&)> hook;
    {
        std::lock_guard lk(hook_mu_);
        hook = before_apply_;
    }
    if (hook) hook(id);
}

std::shared_ptr<SessionService::Entry> SessionService::entry(const std::string& id) {
    {
        std::shared_lock lk(entries_mu_);
        if (auto it = entries_.find(id); it != entries_.end()) return it->second;
    }
    std::vector<std::string> resume;
    std::shared_ptr<Entry> e;
    {
        std::unique_lock lk(entries_mu_);
        if (auto it = entries_.find(id); it != entries_.end()) return it->second;
        if (!valid_session_id(id)) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'");
        auto record = store_->load(id);
        auto snap = std::make_shared<Snapshot>();
        snap->session = parse_session(record.document);
        snap->events = std::move(record.events);
        e = std::make_shared<Entry>();
        e->last_ts = snap->session.created_at;
        for (const auto& ev : snap->events) e->last_ts = std::max(e->last_ts, ev.timestamp);
        for (const auto& t : snap->session.themes) {
            for (const auto& q : t.questions) {
                if (q.comments.empty()) resume.push_back(q.id);
            }
        }
        e->snap = std::move(snap);
        entries_.emplace(id, e);
    }
    // Automatic comments lost to a restart are generated again.
    if (options_.auto_comments) {
        for (const auto& qid : resume) schedule_auto_comment(id, qid);
    }
    return e;
}

std::shared_ptr<const SessionService::Snapshot> SessionService::snapshot(Entry& e) const {
    std::lock_guard lk(e.snap_mu);
    return e.snap;
}

void SessionService::mutate(Entry& e, const Mutation& fn, std::optional<std::int64_t> expected_version) {
    std::lock_guard guard(e.lock);
    const auto cur = snapshot(e);
    if (expected_version && cur->session.state_version != *expected_version) {
        throw Error(ErrorCode::StaleVersion, "session changed while generating (version " +
                                                 std::to_string(*expected_version) + " -> " +
                                                 std::to_string(cur->session.state_version) + ")");
    }
    Session s = cur->session;
    std::vector<EventRecord> events;
    const Timestamp now = std::max(clock_->now(), e.last_ts);
    fn(s, events, now);
    store_->commit(s, events);

    auto next = std::make_shared<Snapshot>();
    next->session = std::move(s);
    next->events.reserve(cur->events.size() + events.size());
    next->events = cur->events;
    next->events.insert(next->events.end(), events.begin(), events.end());
    e.last_ts = now;
    std::lock_guard lk(e.snap_mu);
    e.snap = std::move(next);
}

template <typename Fn>
auto SessionService::call_provider(std::stop_token stop, Fn&& fn) {
    std::stop_source local;
    std::stop_callback from_caller(stop, [&local] { local.request_stop(); });
    std::stop_callback from_shutdown(shutdown_.get_token(), [&local] { local.request_stop(); });
    while (!provider_slots_.try_acquire_for(50ms)) {
        if (local.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
    }
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{provider_slots_};
    if (local.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
    return fn(local.get_token());
}

void SessionService::wait_pending_auto(Entry& e, const std::optional<std::string>& question_id) {
    std::unique_lock lk(e.pending_mu);
    while (question_id ? e.pending_auto.contains(*question_id) : !e.pending_auto.empty()) {
        if (shutdown_.stop_requested()) throw Error(ErrorCode::Cancelled, "service is shutting down");
        e.pending_cv.wait_for(lk, 100ms);
    }
}

Session SessionService::create_session(const std::string& narrative, const std::string& locale,
                                       std::optional<Timestamp> started_at) {
    const std::string loc = locale.empty() ? options_.default_locale : locale;
    if (!valid_locale(loc)) throw Error(ErrorCode::InvalidRequest, "invalid locale '" + loc + "'");
    const Timestamp now = clock_->now();
    std::string id = ids_->session_id();
    while (store_->exists(id)) id = ids_->session_id();
    auto session = mindtrail::create_session(id, narrative, loc, now);
    const Timestamp entered = started_at ? std::min(*started_at, now) : now;
    std::vector<EventRecord> events{{entered, EventKind::page_enter, {{"page", "narrative"}}}};
    store_->commit(session, events);

    auto e = std::make_shared<Entry>();
    e->snap = std::make_shared<Snapshot>(Snapshot{session, events});
    e->last_ts = now;
    std::unique_lock lk(entries_mu_);
    entries_[id] = e;
    return session;
}

Session SessionService::get_session(const std::string& id) { return snapshot(*entry(id))->session; }

Question SessionService::get_question(const std::string& id, const std::string& question_id) {
    return require_question(snapshot(*entry(id))->session, question_id);
}

std::vector<ThemeSuggestion> SessionService::suggest_themes(const std::string& id, std::optional<int> n,
                                                            std::stop_token stop) {
    const int count = n.value_or(options_.pipeline.theme_count);
    if (count < 1 || count > 10) throw Error(ErrorCode::InvalidRequest, "n must be between 1 and 10");
    auto e = entry(id);
    wait_pending_auto(*e, std::nullopt);
    const auto snap = snapshot(*e);
    const auto version = snap->session.state_version;
    auto suggestions =
        call_provider(stop, [&](std::stop_token t) { return pipelines_.generate_themes(snap->session, count, t); });
    before_apply(id);
    mutate(
        *e,
        [&](Session&, std::vector<EventRecord>& ev, Timestamp now) {
            for (const auto& s : suggestions) {
                ev.push_back({now,
                              EventKind::theme_suggested,
                              {{"main_theme", s.main_theme}, {"quote", s.quote}, {"expressions", json_list(s.expressions)}}});
            }
        },
        version);
    return suggestions;
}

namespace {

// AI suggestions handed back by a client are checked again before they are stored.
void check_suggestion(const Session& s, const std::vector<EventRecord>& events, ThemeSuggestion& suggestion) {
    suggestion.main_theme = text::trim(suggestion.main_theme);
    if (suggestion.origin == Origin::user) {
        suggestion.expressions.clear();
        suggestion.quote.clear();
        return;
    }
    if (!text::is_grounded(suggestion.quote, historical_corpus(s, events))) {
        throw Error(ErrorCode::InvalidRequest, "quote is not an excerpt of the user's writing");
    }
    if (suggestion.expressions.empty()) {
        throw Error(ErrorCode::InvalidRequest, "an AI suggestion needs at least one alternative expression");
    }
    for (const auto& x : suggestion.expressions) {
        if (text::same_name(x, suggestion.main_theme) || text::normalize_ws(x).empty()) {
            throw Error(ErrorCode::InvalidRequest, "alternative expression repeats the theme or is empty");
        }
    }
}

}  // namespace

Theme SessionService::activate_theme(const std::string& id, ThemeSuggestion suggestion) {
    auto e = entry(id);
    Theme out;
    mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
        check_suggestion(s, snapshot(*e)->events, suggestion);
        out = mindtrail::activate_theme(s, std::move(suggestion), now);
        ev.push_back({now,
                      EventKind::theme_activated,
                      {{"theme_id", out.id},
                       {"main_theme", out.suggestion.main_theme},
                       {"origin", std::string(to_string(out.suggestion.origin))}}});
    });
    return out;
}

void SessionService::pin_theme(const std::string& id, ThemeSuggestion suggestion) {
    auto e = entry(id);
    mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
        check_suggestion(s, snapshot(*e)->events, suggestion);
        const auto name = suggestion.main_theme;
        mindtrail::pin_theme(s, std::move(suggestion));
        ev.push_back({now, EventKind::theme_pinned, {{"main_theme", name}}});
    });
}

std::vector<QuestionCandidate> SessionService::suggest_questions(const std::string& id, const std::string& theme_id,
                                                                 std::optional<int> n,
                                                                 const std::optional<std::string>& after_question,
                                                                 std::stop_token stop) {
    const int count = n.value_or(options_.pipeline.question_count);
    if (count < 1 || count > 10) throw Error(ErrorCode::InvalidRequest, "n must be between 1 and 10");
    auto e = entry(id);
    wait_pending_auto(*e, std::nullopt);
    const auto snap = snapshot(*e);
    const auto version = snap->session.state_version;
    auto candidates = call_provider(stop, [&](std::stop_token t) {
        return pipelines_.generate_questions(snap->session, theme_id, count, after_question, t);
    });
    before_apply(id);
    mutate(
        *e,
        [&](Session&, std::vector<EventRecord>& ev, Timestamp now) {
            for (const auto& c : candidates) {
                std::map<std::string, std::string> payload{
                    {"theme_id", theme_id}, {"text", c.text}, {"intention", c.intention}};
                if (after_question) payload["after_question"] = *after_question;
                ev.push_back({now, EventKind::question_suggested, std::move(payload)});
            }
        },
        version);
    return candidates;
}

Question SessionService::select_question(const std::string& id, const std::string& theme_id,
                                         QuestionCandidate candidate) {
    candidate.text = pipelines::normalize_question_mark(candidate.text);
    candidate.intention = text::trim(candidate.intention);
    if (candidate.intention.empty()) throw Error(ErrorCode::InvalidRequest, "intention must not be empty");
    auto e = entry(id);
    Question out;
    mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
        out = mindtrail::select_question(s, theme_id, candidate, now);
        ev.push_back({now, EventKind::question_selected, {{"theme_id", theme_id}, {"question_id", out.id}}});
    });
    if (options_.auto_comments) schedule_auto_comment(id, out.id);
    return out;
}

void SessionService::schedule_auto_comment(const std::string& id, const std::string& question_id) {
    auto e = entry(id);
    {
        std::lock_guard lk(e->pending_mu);
        if (!e->pending_auto.insert(question_id).second) return;
    }
    pool_.submit([this, id, question_id] { run_auto_comment(id, question_id); });
}

void SessionService::run_auto_comment(const std::string& id, const std::string& question_id) {
    auto e = entry(id);
    struct Done {
        Entry& e;
        const std::string& qid;
        ~Done() {
            {
                std::lock_guard lk(e.pending_mu);
                e.pending_auto.erase(qid);
            }
            e.pending_cv.notify_all();
        }
    } done{*e, question_id};

    auto apply = [&](Comment c) {
        mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
            const auto& q = require_question(s, question_id);
            if (!q.comments.empty()) return;  // already present (e.g. produced by a user request)
            c.trigger = Trigger::automatic;
            c.created_at = now;
            const auto category = std::string(to_string(c.category));
            append_comment(s, question_id, std::move(c));
            ev.push_back({now,
                          EventKind::comment_requested,
                          {{"question_id", question_id}, {"trigger", "auto"}, {"category", category}}});
        });
    };

    const auto snap = snapshot(*e);
    if (snap->session.find_question(question_id) == nullptr || !snap->session.find_question(question_id)->comments.empty()) {
        return;
    }
    Comment comment;
    try {
        comment = call_provider({}, [&](std::stop_token t) {
            return pipelines_.generate_comment(snap->session, question_id, Trigger::automatic, t);
        });
    } catch (const Error& err) {
        if (err.code() == ErrorCode::Cancelled) return;  // regenerated on next load
        spdlog::warn("automatic comment for {}/{} failed ({}); storing fallback", id, question_id,
                     error_code_name(err.code()));
        comment.text = fallback_comment(snap->session.locale);
        comment.category = CommentCategory::tip;
        comment.rationale = "fallback after " + std::string(error_code_name(err.code()));
    }
    // Applied without a staleness check: the automatic comment must exist and
    // only depends on the question, which never changes.
    apply(std::move(comment));
}

AnswerDraft SessionService::update_answer(const std::string& id, const std::string& question_id, std::string text) {
    auto e = entry(id);
    AnswerDraft out;
    mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
        out = mindtrail::update_answer(s, question_id, std::move(text), now);
        ev.push_back({now,
                      EventKind::answer_updated,
                      {{"question_id", question_id}, {"revision", std::to_string(out.revision)}, {"text", out.text}}});
    });
    return out;
}

KeywordBatch SessionService::request_keywords(const std::string& id, const std::string& question_id,
                                              KeywordMode mode, std::stop_token stop) {
    auto e = entry(id);
    wait_pending_auto(*e, std::nullopt);
    const auto snap = snapshot(*e);
    const auto& q = require_question(snap->session, question_id);

    if (mode == KeywordMode::initial && !q.keyword_batches.empty()) {
        // Toggling the keywords on again shows the first batch.
        KeywordBatch first = q.keyword_batches.front();
        mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
            reveal_keywords(s, question_id);
            ev.push_back({now,
                          EventKind::keywords_revealed,
                          {{"question_id", question_id}, {"batch_index", "0"}, {"count", std::to_string(first.keywords.size())}}});
        });
        return first;
    }
    const int count = mode == KeywordMode::initial ? options_.pipeline.initial_keywords : options_.pipeline.more_keywords;
    const auto version = snap->session.state_version;
    auto batch = call_provider(
        stop, [&](std::stop_token t) { return pipelines_.generate_keywords(snap->session, question_id, count, t); });
    before_apply(id);
    KeywordBatch out;
    mutate(
        *e,
        [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
            out = append_keyword_batch(s, question_id, batch.keywords);
            ev.push_back({now,
                          mode == KeywordMode::initial ? EventKind::keywords_revealed : EventKind::keywords_more,
                          {{"question_id", question_id},
                           {"batch_index", std::to_string(out.batch_index)},
                           {"count", std::to_string(out.keywords.size())}}});
        },
        version);
    return out;
}

Comment SessionService::request_comment(const std::string& id, const std::string& question_id, std::stop_token stop) {
    auto e = entry(id);
    wait_pending_auto(*e, std::nullopt);
    const auto snap = snapshot(*e);
    const auto& q = require_question(snap->session, question_id);
    // Without an automatic comment (disabled or lost) this request supplies it.
    const Trigger trigger = q.comments.empty() ? Trigger::automatic : Trigger::user;
    const auto version = snap->session.state_version;
    auto comment = call_provider(
        stop, [&](std::stop_token t) { return pipelines_.generate_comment(snap->session, question_id, trigger, t); });
    before_apply(id);
    Comment out;
    mutate(
        *e,
        [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
            comment.created_at = now;
            out = append_comment(s, question_id, comment);
            ev.push_back({now,
                          EventKind::comment_requested,
                          {{"question_id", question_id},
                           {"trigger", std::string(to_string(trigger))},
                           {"category", std::string(to_string(out.category))}}});
        },
        version);
    return out;
}

SummarySnapshot SessionService::request_summary(const std::string& id, std::stop_token stop) {
    auto e = entry(id);
    wait_pending_auto(*e, std::nullopt);
    const auto snap = snapshot(*e);
    const auto version = snap->session.state_version;
    auto summary = call_provider(stop, [&](std::stop_token t) { return pipelines_.generate_summary(snap->session, t); });
    before_apply(id);
    SummarySnapshot out;
    mutate(
        *e,
        [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
            out = append_summary(s, summary.text, now);
            ev.push_back({now, EventKind::summary_requested, {{"state_version", std::to_string(out.state_version)}}});
        },
        version);
    return out;
}

SummarySnapshot SessionService::latest_summary(const std::string& id) {
    const auto snap = snapshot(*entry(id));
    if (snap->session.summaries.empty()) throw Error(ErrorCode::NotFound, "no summary has been generated yet");
    return snap->session.summaries.back();
}

void SessionService::record_event(const std::string& id, const std::string& kind,
                                  const std::map<std::string, std::string>& payload) {
    const auto k = parse_event_kind(kind);
    if (!k) throw Error(ErrorCode::UnknownEventKind, "unknown event kind '" + kind + "'");
    if (*k != EventKind::page_enter && *k != EventKind::page_leave) {
        throw Error(ErrorCode::InvalidRequest, "event kind '" + kind + "' is recorded by the service itself");
    }
    auto it = payload.find("page");
    if (it == payload.end() || !parse_page(it->second)) {
        throw Error(ErrorCode::InvalidRequest, "page events need payload.page in {narrative, exploration, summary}");
    }
    auto e = entry(id);
    const std::string page = it->second;
    mutate(*e, [&](Session&, std::vector<EventRecord>& ev, Timestamp now) { ev.push_back({now, *k, {{"page", page}}}); });
}

int SessionService::submit_survey(const std::string& id, const std::string& phase, const std::vector<int>& items) {
    if (phase != "pre" && phase != "post") throw Error(ErrorCode::InvalidRequest, "phase must be pre or post");
    const int score = score_pathways(items);
    const PathwaysResponse response{items[0], items[1], items[2], items[3]};
    auto e = entry(id);
    mutate(*e, [&](Session& s, std::vector<EventRecord>& ev, Timestamp now) {
        mindtrail::submit_survey(s, phase == "post", response);
        ev.push_back({now, EventKind::survey_submitted, {{"phase", phase}, {"score", std::to_string(score)}}});
    });
    return score;
}

StoreRecord SessionService::export_record(const std::string& id) {
    const auto snap = snapshot(*entry(id));
    StoreRecord r;
    r.document = canonical_session(snap->session);
    r.checksum = sha256_hex(r.document);
    r.events = snap->events;
    return r;
}

metrics::UsageRow SessionService::usage(const std::string& id) {
    return metrics::usage_row(snapshot(*entry(id))->session);
}

std::vector<std::string> SessionService::list_sessions() const { return store_->list(); }

}  // namespace mindtrail
