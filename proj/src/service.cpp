#include "coinflip/service.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace coinflip::service {

namespace fs = std::filesystem;

ServiceError::ServiceError(int status, std::string code, std::string message, std::vector<FieldError> fields)
    : std::runtime_error(std::move(message)), status_(status), code_(std::move(code)), fields_(std::move(fields))
{
}

Json ServiceError::to_json() const
{
    Json j{{"error", code_}, {"message", what()}};
    if (!fields_.empty()) {
        Json fields = Json::array();
        for (const auto& f : fields_) {
            fields.push_back({{"field", f.field}, {"message", f.message}});
        }
        j["fields"] = fields;
    }
    return j;
}

Questionnaire default_questionnaire()
{
    return {
        {"heard_of_kelly", "[placeholder] Have you heard of the Kelly criterion?", "yes_no", "pre"},
        {"finance_background", "[placeholder] Describe your finance or investing background.", "text", "pre"},
        {"expected_payout", "[placeholder] How much do you expect to win, in dollars?", "number", "pre"},
        {"believes_bias", "[placeholder] Did you believe the coin really had a 60% bias towards heads?", "yes_no",
         "post"},
        {"strategy_description", "[placeholder] How did you decide how much to bet?", "text", "post"},
    };
}

Questionnaire load_questionnaire(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open questionnaire " + path.string());
    }
    const Json j = Json::parse(in);
    Questionnaire q;
    for (const auto& item : j) {
        Question question{item.at("id").get<std::string>(), item.value("text", std::string{}),
                          item.value("type", std::string{"text"}), item.value("phase", std::string{"post"})};
        if (question.type != "yes_no" && question.type != "text" && question.type != "number") {
            throw std::runtime_error("question " + question.id + " has unknown type " + question.type);
        }
        q.push_back(std::move(question));
    }
    return q;
}

Json to_json(const Questionnaire& questionnaire)
{
    Json out = Json::array();
    for (const auto& q : questionnaire) {
        out.push_back({{"id", q.id}, {"text", q.text}, {"type", q.type}, {"phase", q.phase}});
    }
    return out;
}

// ---------------------------------------------------------------------------
// EventLog

EventLog::EventLog(fs::path dir) : dir_(std::move(dir))
{
    fs::create_directories(dir_);
}

fs::path EventLog::path_for(const std::string& session_id) const
{
    return dir_ / (session_id + ".jsonl");
}

void EventLog::append(const std::string& session_id, const std::vector<Event>& events, bool sync)
{
    std::string buffer;
    for (const auto& e : events) {
        buffer += to_line(e);
    }
    const auto path = path_for(session_id);
    const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw std::runtime_error("cannot open " + path.string() + ": " + std::strerror(errno));
    }
    const char* data = buffer.data();
    std::size_t left = buffer.size();
    while (left > 0) {
        const ssize_t n = ::write(fd, data, left);
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            const int err = errno;
            ::close(fd);
            throw std::runtime_error("write to " + path.string() + " failed: " + std::strerror(err));
        }
        data += n;
        left -= static_cast<std::size_t>(n);
    }
    if (sync) {
        ::fsync(fd);
    }
    ::close(fd);
}

std::vector<Event> EventLog::recover(const std::string& session_id)
{
    const auto path = path_for(session_id);
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    std::vector<Event> events;
    std::vector<std::size_t> ends; // byte offset just past each kept event
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            break; // torn final line
        }
        const std::string_view line(text.data() + pos, nl - pos);
        if (!line.empty()) {
            try {
                events.push_back(event_from_json(Json::parse(line)));
            }
            catch (const std::exception&) {
                break;
            }
            ends.push_back(nl + 1);
        }
        pos = nl + 1;
    }
    if (!events.empty() && events.back().kind == EventKind::bet_placed) {
        events.pop_back();
        ends.pop_back();
    }
    const std::size_t keep = ends.empty() ? 0 : ends.back();
    if (keep < text.size()) {
        fs::resize_file(path, keep);
    }
    return events;
}

std::vector<std::string> EventLog::session_ids() const
{
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir_)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
            ids.push_back(entry.path().stem().string());
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// ---------------------------------------------------------------------------
// Replay

SessionRecord replay_events(const std::vector<Event>& events)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("event replay: " + what); };
    if (events.empty() || events.front().kind != EventKind::session_created) {
        fail("log must start with session_created");
    }
    SessionRecord rec;
    const Event& created = events.front();
    rec.session_id = created.session_id;
    rec.config = config_from_json(created.payload.at("config"));
    rec.state = new_session(rec.config);
    rec.created_ms = created.ts_ms;
    if (auto it = created.payload.find("deadline_ms"); it != created.payload.end() && !it->is_null()) {
        rec.deadline_ms = it->get<std::int64_t>();
    }
    if (auto it = created.payload.find("test_seed"); it != created.payload.end()) {
        rec.test_seed = it->get<std::uint64_t>();
    }
    rec.cap_disclosed = rec.config.cap_disclosure == CapDisclosure::shown;

    std::optional<BetIntent> pending;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (e.session_id != rec.session_id) {
            fail("event " + std::to_string(i) + " belongs to another session");
        }
        if (e.seq != i) {
            fail("seq gap or reorder at event " + std::to_string(i));
        }
        if (pending && e.kind != EventKind::flip_resolved) {
            fail("bet_placed without flip_resolved at seq " + std::to_string(e.seq - 1));
        }
        switch (e.kind) {
        case EventKind::session_created:
            if (i != 0) {
                fail("duplicate session_created");
            }
            break;
        case EventKind::bet_placed:
            pending = intent_from_json(e.payload);
            rec.last_bet_ms = e.ts_ms;
            break;
        case EventKind::flip_resolved: {
            if (!pending) {
                fail("flip_resolved without bet_placed at seq " + std::to_string(e.seq));
            }
            const FlipRecord logged = flip_from_json(e.payload);
            if (logged.side != pending->side || logged.amount_cents != pending->amount_cents) {
                fail("flip does not match its bet at seq " + std::to_string(e.seq));
            }
            auto [next, record] = apply_flip(rec.state, *pending, logged.outcome, rec.config, logged.timestamp_ms);
            if (!(record == logged)) {
                fail("flip at seq " + std::to_string(e.seq) + " does not replay");
            }
            rec.state = next;
            rec.flips.push_back(record);
            pending.reset();
            break;
        }
        case EventKind::cap_reached:
            rec.cap_disclosed = true;
            break;
        case EventKind::session_finished: {
            const Cents logged = e.payload.at("payout_cents").get<Cents>();
            if (logged != payout(rec.state, rec.config)) {
                fail("payout does not match bankroll");
            }
            rec.finished_payout = logged;
            if (rec.state.status == Status::active) {
                rec.state.status = Status::finished;
            }
            break;
        }
        case EventKind::answer_recorded:
            rec.answers[e.payload.at("question_id").get<std::string>()] = e.payload.at("value");
            break;
        }
    }
    if (pending) {
        fail("log ends with an unresolved bet");
    }
    rec.next_seq = events.size();
    return rec;
}

Json visible_state(const SessionRecord& rec, std::int64_t now_ms)
{
    const auto& c = rec.config;
    Json j{{"session_id", rec.session_id},
           {"bankroll_cents", rec.state.bankroll_cents},
           {"flips_done", rec.state.flips_done},
           {"max_flips", c.max_flips},
           {"flips_remaining", std::max(0, c.max_flips - rec.state.flips_done)},
           {"status", to_string(rec.state.status)},
           {"cap_hit", rec.state.cap_hit},
           {"p_heads", c.p_heads},
           {"start_cents", c.start_cents},
           {"min_bet_cents", c.min_bet_cents},
           {"created_ms", rec.created_ms},
           {"deadline_ms", rec.deadline_ms ? Json(*rec.deadline_ms) : Json(nullptr)},
           {"expired", rec.deadline_ms.has_value() && now_ms >= *rec.deadline_ms},
           {"finished", rec.finished_payout.has_value()},
           {"seq", rec.next_seq == 0 ? 0 : rec.next_seq - 1}};
    if (rec.cap_disclosed && c.cap_cents) {
        j["cap_cents"] = *c.cap_cents;
    }
    if (rec.finished_payout) {
        j["payout_cents"] = *rec.finished_payout;
    }
    if (!rec.flips.empty()) {
        j["last_flip"] = to_json(rec.flips.back());
    }
    Json answers = Json::object();
    for (const auto& [id, value] : rec.answers) {
        answers[id] = value;
    }
    j["answers"] = answers;
    return j;
}

// ---------------------------------------------------------------------------
// SessionService

struct SessionService::Live {
    std::mutex mutex;
    SessionRecord rec;
    std::vector<Event> events;
    RngStream rng{0};
};

namespace {

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string make_session_id(std::uint64_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(index));
    return buf;
}

std::optional<std::uint64_t> index_of(const std::string& session_id)
{
    if (session_id.size() < 2 || session_id[0] != 's') {
        return std::nullopt;
    }
    std::uint64_t v = 0;
    for (std::size_t i = 1; i < session_id.size(); ++i) {
        if (session_id[i] < '0' || session_id[i] > '9') {
            return std::nullopt;
        }
        v = v * 10 + static_cast<std::uint64_t>(session_id[i] - '0');
    }
    return v;
}

ServiceError not_found(const std::string& session_id)
{
    return ServiceError(404, "not_found", "no session " + session_id);
}

ServiceError session_over(const std::string& why)
{
    return ServiceError(409, "session_over", why);
}

} // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)), log_(options_.data_dir)
{
    require_valid(options_.defaults);
    for (const auto& id : log_.session_ids()) {
        auto events = log_.recover(id);
        if (events.empty()) {
            continue;
        }
        try {
            auto live = std::make_shared<Live>();
            live->rec = replay_events(events);
            live->events = std::move(events);
            live->rng = stream_for(live->rec);
            live->rng.discard(static_cast<std::uint64_t>(live->rec.flips.size()));
            if (auto index = index_of(id)) {
                next_index_ = std::max(next_index_, *index + 1);
            }
            sessions_.emplace(id, std::move(live));
        }
        catch (const std::exception& ex) {
            std::cerr << "coinflip: skipping unreadable session log " << id << ": " << ex.what() << "\n";
        }
    }
}

SessionService::~SessionService() = default;

std::int64_t SessionService::now_ms() const
{
    if (options_.clock) {
        return options_.clock();
    }
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

RngStream SessionService::stream_for(const SessionRecord& rec) const
{
    if (rec.test_seed) {
        return derive_path_stream(*rec.test_seed, 0);
    }
    return derive_path_stream(options_.master_seed, fnv1a(rec.session_id));
}

std::shared_ptr<SessionService::Live> SessionService::find(const std::string& session_id) const
{
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw not_found(session_id);
    }
    return it->second;
}

Json SessionService::create_session(const Json& request)
{
    if (!request.is_null() && !request.is_object()) {
        throw ServiceError(400, "invalid_request", "request body must be an object");
    }
    Json overrides = request.is_object() ? request : Json::object();
    std::optional<std::uint64_t> test_seed;
    if (auto it = overrides.find("seed"); it != overrides.end()) {
        if (!options_.test_mode) {
            throw ServiceError(400, "invalid_request", "explicit seeds are only accepted in test mode",
                               {{"seed", "not allowed"}});
        }
        if (!it->is_number_unsigned() && !it->is_number_integer()) {
            throw ServiceError(400, "invalid_request", "seed must be an integer", {{"seed", "must be an integer"}});
        }
        test_seed = it->get<std::uint64_t>();
        overrides.erase(it);
    }

    std::vector<FieldError> errors;
    GameConfig config = apply_overrides(options_.defaults, overrides, errors);
    auto more = check_config(config);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!config.cap_cents) {
        errors.push_back({"cap_cents", "uncapped sessions are not offered"});
    }
    else if (*config.cap_cents > options_.max_cap_cents) {
        errors.push_back({"cap_cents", "exceeds server maximum " + std::to_string(options_.max_cap_cents)});
    }
    if (!errors.empty()) {
        throw ServiceError(400, "invalid_config", "invalid session config", std::move(errors));
    }

    const std::int64_t now = now_ms();
    auto live = std::make_shared<Live>();
    std::unique_lock lock(sessions_mutex_);
    std::string id = make_session_id(next_index_++);
    while (sessions_.count(id) != 0 || fs::exists(log_.path_for(id))) {
        id = make_session_id(next_index_++);
    }

    Event created;
    created.session_id = id;
    created.seq = 0;
    created.ts_ms = now;
    created.kind = EventKind::session_created;
    created.payload = {{"config", to_json(config)},
                       {"deadline_ms", config.session_seconds > 0
                                           ? Json(now + std::int64_t{config.session_seconds} * 1000)
                                           : Json(nullptr)}};
    if (test_seed) {
        created.payload["test_seed"] = *test_seed;
    }
    log_.append(id, {created}, true);

    live->events = {created};
    live->rec = replay_events(live->events);
    live->rng = stream_for(live->rec);
    sessions_.emplace(id, live);
    lock.unlock();

    std::lock_guard session_lock(live->mutex);
    return visible_state(live->rec, now);
}

Json SessionService::post_bet(const std::string& session_id, const Json& request)
{
    auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    SessionRecord& rec = live->rec;
    const std::int64_t now = now_ms();

    if (rec.finished_payout) {
        throw session_over("session already finished");
    }
    if (rec.deadline_ms && now >= *rec.deadline_ms) {
        throw session_over("session time is up");
    }
    if (rec.state.status != Status::active) {
        throw session_over("session is " + std::string(to_string(rec.state.status)));
    }

    BetIntent intent;
    try {
        intent = intent_from_json(request);
    }
    catch (const std::exception& ex) {
        throw ServiceError(400, "invalid_request", std::string("bet needs side and amount_cents: ") + ex.what());
    }
    if (options_.min_interval_ms > 0 && rec.last_bet_ms && now - *rec.last_bet_ms < options_.min_interval_ms) {
        throw ServiceError(429, "too_soon", "minimum time between bets is " +
                                                std::to_string(options_.min_interval_ms) + " ms");
    }
    if (auto violation = validate_bet(rec.state, intent, rec.config)) {
        const int status = *violation == BetViolation::session_over ? 409 : 400;
        throw ServiceError(status, std::string(to_string(*violation)), "bet rejected",
                           {{"amount_cents", std::string(to_string(*violation))}});
    }

    RngStream rng = live->rng;
    auto [next, flip] = place_bet(rec.state, intent, rng, rec.config, now);

    std::vector<Event> batch;
    auto push = [&](EventKind kind, Json payload) {
        batch.push_back(Event{session_id, rec.next_seq + batch.size(), now, kind, std::move(payload)});
    };
    push(EventKind::bet_placed, to_json(intent));
    push(EventKind::flip_resolved, to_json(flip));
    const bool cap_now = rec.config.cap_cents && !rec.state.cap_hit && next.cap_hit;
    if (cap_now) {
        push(EventKind::cap_reached, {{"cap_cents", *rec.config.cap_cents}, {"bankroll_cents", next.bankroll_cents}});
    }
    log_.append(session_id, batch, next.status != Status::active);

    // Commit only after the log write succeeded.
    live->rng = rng;
    rec.state = next;
    rec.flips.push_back(flip);
    rec.last_bet_ms = now;
    rec.cap_disclosed = rec.cap_disclosed || cap_now;
    rec.next_seq += batch.size();
    live->events.insert(live->events.end(), batch.begin(), batch.end());

    Json response{{"outcome", to_string(flip.outcome)},
                  {"won", flip.won},
                  {"bankroll_after_cents", flip.bankroll_after_cents},
                  {"seq", batch[1].seq},
                  {"flip", to_json(flip)},
                  {"cap_reached_now", cap_now},
                  {"state", visible_state(rec, now)}};
    if (rec.cap_disclosed && rec.config.cap_cents) {
        response["cap_cents"] = *rec.config.cap_cents;
    }
    return response;
}

Json SessionService::finish_session(const std::string& session_id)
{
    auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    SessionRecord& rec = live->rec;
    if (!rec.finished_payout) {
        const Cents amount = payout(rec.state, rec.config);
        Event e{session_id, rec.next_seq, now_ms(), EventKind::session_finished,
                Json{{"payout_cents", amount}, {"bankroll_cents", rec.state.bankroll_cents}}};
        log_.append(session_id, {e}, true);
        live->events.push_back(e);
        rec.finished_payout = amount;
        if (rec.state.status == Status::active) {
            rec.state.status = Status::finished;
        }
        rec.next_seq += 1;
    }
    return Json{{"session_id", session_id},
                {"payout_cents", *rec.finished_payout},
                {"bankroll_cents", rec.state.bankroll_cents},
                {"status", to_string(rec.state.status)}};
}

Json SessionService::record_answer(const std::string& session_id, const Json& request)
{
    auto live = find(session_id);
    if (!request.is_object() || !request.contains("question_id") || !request["question_id"].is_string() ||
        !request.contains("value")) {
        throw ServiceError(400, "invalid_request", "answer needs question_id and value");
    }
    const auto question_id = request["question_id"].get<std::string>();
    const auto& value = request["value"];
    const auto& questions = options_.questionnaire;
    auto q = std::find_if(questions.begin(), questions.end(), [&](const Question& x) { return x.id == question_id; });
    if (q == questions.end()) {
        throw ServiceError(400, "unknown_question", "no question " + question_id,
                           {{"question_id", "not in questionnaire"}});
    }
    const bool ok = q->type == "number" ? value.is_number()
                    : q->type == "yes_no"
                        ? (value.is_boolean() || (value.is_string() && (value == "yes" || value == "no")))
                        : value.is_string();
    if (!ok) {
        throw ServiceError(400, "invalid_answer", "answer does not match question type " + q->type,
                           {{"value", "expected " + q->type}});
    }

    std::lock_guard lock(live->mutex);
    SessionRecord& rec = live->rec;
    Event e{session_id, rec.next_seq, now_ms(), EventKind::answer_recorded,
            Json{{"question_id", question_id}, {"value", value}}};
    log_.append(session_id, {e}, false);
    live->events.push_back(e);
    rec.answers[question_id] = value;
    rec.next_seq += 1;
    return Json{{"ok", true}, {"question_id", question_id}, {"seq", e.seq}};
}

Json SessionService::get_state(const std::string& session_id) const
{
    auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    return visible_state(live->rec, now_ms());
}

std::vector<Event> SessionService::list_events(const std::string& session_id) const
{
    auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    return live->events;
}

SessionRecord SessionService::record(const std::string& session_id) const
{
    auto live = find(session_id);
    std::lock_guard lock(live->mutex);
    return live->rec;
}

std::vector<std::string> SessionService::session_ids() const
{
    std::shared_lock lock(sessions_mutex_);
    std::vector<std::string> ids;
    for (const auto& [id, _] : sessions_) {
        ids.push_back(id);
    }
    return ids;
}

} // namespace coinflip::service
