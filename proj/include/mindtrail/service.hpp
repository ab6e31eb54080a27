#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <set>
#include <shared_mutex>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include "mindtrail/llm.hpp"
#include "mindtrail/metrics.hpp"
#include "mindtrail/model.hpp"
#include "mindtrail/pipelines.hpp"
#include "mindtrail/store.hpp"

namespace mindtrail {

class Clock {
public:
    virtual ~Clock() = default;
    virtual Timestamp now() = 0;
};

class SystemClock : public Clock {
public:
    Timestamp now() override;
};

/// Replay clock; only moves when told to.
class ManualClock : public Clock {
public:
    explicit ManualClock(Timestamp start = 0) : now_(start) {}
    Timestamp now() override { return now_.load(); }
    void set(Timestamp t) { now_.store(t); }
    void advance(Timestamp delta) { now_.fetch_add(delta); }

private:
    std::atomic<Timestamp> now_;
};

class IdGenerator {
public:
    virtual ~IdGenerator() = default;
    virtual std::string session_id() = 0;
};

class RandomIds : public IdGenerator {
public:
    RandomIds();
    std::string session_id() override;

private:
    std::mutex mu_;
    std::mt19937_64 rng_;
};

/// Deterministic ids for replay: s-<seed>-<counter>.
class SeededIds : public IdGenerator {
public:
    explicit SeededIds(std::uint64_t seed) : seed_(seed) {}
    std::string session_id() override;

private:
    std::uint64_t seed_;
    std::atomic<std::uint64_t> next_{1};
};

/// Strict FIFO mutex: waiters acquire in arrival order.
class TicketLock {
public:
    void lock();
    void unlock();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::uint64_t next_{0};
    std::uint64_t serving_{0};
};

/// Fixed-size worker pool for background generations.
class WorkerPool {
public:
    explicit WorkerPool(int threads);
    ~WorkerPool();

    void submit(std::function<void()> task);
    /// Blocks until the queue is empty and no task is running.
    void wait_idle();
    void stop();

private:
    void run();

    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable idle_cv_;
    std::deque<std::function<void()>> queue_;
    int active_{0};
    bool stopping_{false};
    std::vector<std::thread> threads_;
};

struct ServiceOptions {
    pipelines::Options pipeline;
    int provider_slots{4};
    int workers{4};
    bool auto_comments{true};
    std::string default_locale{"ko"};
};

enum class KeywordMode { initial, more };
std::optional<KeywordMode> parse_keyword_mode(std::string_view s);

/// Session engine: domain operations, pipelines, persistence, event log and
/// the per-session serialization discipline. Thread safe.
class SessionService {
public:
    SessionService(std::shared_ptr<Store> store, std::shared_ptr<llm::Gateway> gateway,
                   std::shared_ptr<Clock> clock, std::shared_ptr<IdGenerator> ids, ServiceOptions options = {});
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    Session create_session(const std::string& narrative, const std::string& locale,
                           std::optional<Timestamp> started_at = std::nullopt);
    Session get_session(const std::string& id);
    Question get_question(const std::string& id, const std::string& question_id);

    std::vector<ThemeSuggestion> suggest_themes(const std::string& id, std::optional<int> n,
                                                std::stop_token stop = {});
    Theme activate_theme(const std::string& id, ThemeSuggestion suggestion);
    void pin_theme(const std::string& id, ThemeSuggestion suggestion);

    std::vector<QuestionCandidate> suggest_questions(const std::string& id, const std::string& theme_id,
                                                     std::optional<int> n,
                                                     const std::optional<std::string>& after_question,
                                                     std::stop_token stop = {});
    /// Returns at once; the automatic comment is produced in the background.
    Question select_question(const std::string& id, const std::string& theme_id, QuestionCandidate candidate);
    AnswerDraft update_answer(const std::string& id, const std::string& question_id, std::string text);
    KeywordBatch request_keywords(const std::string& id, const std::string& question_id, KeywordMode mode,
                                  std::stop_token stop = {});
    Comment request_comment(const std::string& id, const std::string& question_id, std::stop_token stop = {});
    SummarySnapshot request_summary(const std::string& id, std::stop_token stop = {});
    SummarySnapshot latest_summary(const std::string& id);

    /// UI page events only (page_enter / page_leave with a valid page).
    void record_event(const std::string& id, const std::string& kind, const std::map<std::string, std::string>& payload);
    int submit_survey(const std::string& id, const std::string& phase, const std::vector<int>& items);

    StoreRecord export_record(const std::string& id);
    metrics::UsageRow usage(const std::string& id);
    std::vector<std::string> list_sessions() const;

    /// Waits for background work (automatic comments) to finish.
    void wait_idle();
    /// Cancels in-flight generations and stops the workers. Idempotent.
    void shutdown();

    /// Test hook run after a generation returns and before it is applied.
    void set_before_apply(std::function<void(const std::string& session_id)> hook);

    const llm::Gateway& gateway() const noexcept { return *gateway_; }

private:
    struct Snapshot {
        Session session;
        std::vector<EventRecord> events;
    };
    struct Entry {
        TicketLock lock;
        mutable std::mutex snap_mu;
        std::shared_ptr<const Snapshot> snap;
        Timestamp last_ts{0};
        // Questions whose automatic comment is still being generated.
        std::mutex pending_mu;
        std::condition_variable pending_cv;
        std::set<std::string> pending_auto;
    };
    using Mutation = std::function<void(Session&, std::vector<EventRecord>&, Timestamp)>;

    std::shared_ptr<Entry> entry(const std::string& id);
    std::shared_ptr<const Snapshot> snapshot(Entry& e) const;
    /// Applies `fn` under the session lock; if `expected_version` is set and
    /// differs from the current one, throws StaleVersion without applying.
    void mutate(Entry& e, const Mutation& fn, std::optional<std::int64_t> expected_version = std::nullopt);

    void schedule_auto_comment(const std::string& id, const std::string& question_id);
    void run_auto_comment(const std::string& id, const std::string& question_id);
    void wait_pending_auto(Entry& e, const std::optional<std::string>& question_id);

    template <typename Fn>
    auto call_provider(std::stop_token stop, Fn&& fn);
    void before_apply(const std::string& id);

    std::shared_ptr<Store> store_;
    std::shared_ptr<llm::Gateway> gateway_;
    std::shared_ptr<Clock> clock_;
    std::shared_ptr<IdGenerator> ids_;
    ServiceOptions options_;
    pipelines::Pipelines pipelines_;

    mutable std::shared_mutex entries_mu_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;

    std::counting_semaphore<1024> provider_slots_;
    std::stop_source shutdown_;
    std::mutex hook_mu_;
    std::function<void(const std::string&)> before_apply_;
    WorkerPool pool_;
};

}  // namespace mindtrail
