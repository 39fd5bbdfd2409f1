#pragma once

#include "coinflip/engine.hpp"
#include "coinflip/events.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinflip::service {

/// An API failure with its HTTP status class: 400 validation, 404 missing,
/// 409 terminal/expired, 429 throttled.
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, std::string code, std::string message, std::vector<FieldError> fields = {});

    int status() const noexcept { return status_; }
    const std::string& code() const noexcept { return code_; }
    const std::vector<FieldError>& fields() const noexcept { return fields_; }
    Json to_json() const;

private:
    int status_;
    std::string code_;
    std::vector<FieldError> fields_;
};

struct Question {
    std::string id;
    std::string text;
    std::string type;  // yes_no | text | number
    std::string phase; // pre | post
};

using Questionnaire = std::vector<Question>;

/// Built-in questionnaire; texts are placeholders.
Questionnaire default_questionnaire();
/// Reads a JSON array of {id, text, type, phase}.
Questionnaire load_questionnaire(const std::filesystem::path& path);
Json to_json(const Questionnaire& questionnaire);

/*
 * Append-only, line-delimited event files, one per session, under a
 * directory. Each append is a single write(2); terminal events are fsynced.
 */
class EventLog {
public:
    explicit EventLog(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const std::string& session_id) const;

    void append(const std::string& session_id, const std::vector<Event>& events, bool sync);

    /*
     * Reads one session file. A torn final line and a bet_placed that lacks
     * its flip_resolved are dropped, and the file is truncated to the last
     * consistent event so later appends stay well-formed.
     */
    std::vector<Event> recover(const std::string& session_id);

    /// Ids of every session file present.
    std::vector<std::string> session_ids() const;

private:
    std::filesystem::path dir_;
};

struct ServiceOptions {
    std::filesystem::path data_dir = "data";
    std::uint64_t master_seed = 0;
    GameConfig defaults;
    Cents max_cap_cents = 100000;
    std::int64_t min_interval_ms = 0;
    /// Accept an explicit per-session "seed" in create requests.
    bool test_mode = false;
    Questionnaire questionnaire = default_questionnaire();
    std::function<std::int64_t()> clock; // ms since epoch; system clock if empty
};

/// Live state of one session, as rebuilt from its events.
struct SessionRecord {
    std::string session_id;
    GameConfig config;
    GameState state;
    std::int64_t created_ms = 0;
    std::optional<std::int64_t> deadline_ms;
    std::optional<std::uint64_t> test_seed;
    std::optional<std::int64_t> last_bet_ms;
    bool cap_disclosed = false;
    std::optional<Cents> finished_payout;
    std::map<std::string, Json> answers;
    std::vector<FlipRecord> flips;
    std::uint64_t next_seq = 0;

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

/// Folds a session's events through the engine. Throws std::invalid_argument
/// when the events are inconsistent (bad seq, flip that does not replay, ...).
SessionRecord replay_events(const std::vector<Event>& events);

/// What a player may see: the cap is omitted until disclosed.
Json visible_state(const SessionRecord& record, std::int64_t now_ms);

/*
 * Session lifecycle over an EventLog.
 *
 * Sessions are independent; operations on one session are serialized by its
 * own mutex, and readers copy under that mutex, so they always see a prefix
 * of the log.
 */
class SessionService {
public:
    /// Scans data_dir and rebuilds every session found there.
    explicit SessionService(ServiceOptions options);
    ~SessionService();

    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    Json create_session(const Json& request);
    Json post_bet(const std::string& session_id, const Json& request);
    Json finish_session(const std::string& session_id);
    Json record_answer(const std::string& session_id, const Json& request);
    Json get_state(const std::string& session_id) const;
    std::vector<Event> list_events(const std::string& session_id) const;

    /// Snapshot of the in-memory record (for tests and tooling).
    SessionRecord record(const std::string& session_id) const;
    std::vector<std::string> session_ids() const;
    const Questionnaire& questionnaire() const { return options_.questionnaire; }
    std::int64_t now_ms() const;

private:
    struct Live;

    std::shared_ptr<Live> find(const std::string& session_id) const;
    RngStream stream_for(const SessionRecord& record) const;

    ServiceOptions options_;
    EventLog log_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Live>> sessions_;
    std::uint64_t next_index_ = 1;
};

} // namespace coinflip::service
