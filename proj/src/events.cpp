#include "coinflip/events.hpp"

#include <array>
#include <stdexcept>

namespace coinflip {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 6> kind_names{{
    {EventKind::session_created, "session_created"},
    {EventKind::bet_placed, "bet_placed"},
    {EventKind::flip_resolved, "flip_resolved"},
    {EventKind::cap_reached, "cap_reached"},
    {EventKind::session_finished, "session_finished"},
    {EventKind::answer_recorded, "answer_recorded"},
}};

} // namespace

std::string_view to_string(EventKind kind)
{
    for (const auto& [k, name] : kind_names) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

EventKind parse_event_kind(std::string_view text)
{
    for (const auto& [k, name] : kind_names) {
        if (name == text) {
            return k;
        }
    }
    throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
}

Json to_json(const GameConfig& c)
{
    return Json{{"p_heads", c.p_heads},
                {"start_cents", c.start_cents},
                {"cap_cents", c.cap_cents ? Json(*c.cap_cents) : Json(nullptr)},
                {"max_flips", c.max_flips},
                {"session_seconds", c.session_seconds},
                {"min_bet_cents", c.min_bet_cents},
                {"cap_disclosure", to_string(c.cap_disclosure)}};
}

Json to_json(const BetIntent& intent)
{
    return Json{{"side", to_string(intent.side)}, {"amount_cents", intent.amount_cents}};
}

Json to_json(const FlipRecord& r)
{
    return Json{{"seq", r.seq},
                {"side", to_string(r.side)},
                {"amount_cents", r.amount_cents},
                {"outcome", to_string(r.outcome)},
                {"won", r.won},
                {"bankroll_after_cents", r.bankroll_after_cents},
                {"timestamp_ms", r.timestamp_ms}};
}

Json to_json(const GameState& s)
{
    return Json{{"bankroll_cents", s.bankroll_cents},
                {"flips_done", s.flips_done},
                {"status", to_string(s.status)},
                {"cap_hit", s.cap_hit},
                {"seq", s.seq}};
}

Json to_json(const Event& e)
{
    return Json{{"session_id", e.session_id},
                {"seq", e.seq},
                {"ts_ms", e.ts_ms},
                {"kind", to_string(e.kind)},
                {"payload", e.payload}};
}

GameConfig apply_overrides(GameConfig c, const Json& overrides, std::vector<FieldError>& errors)
{
    if (overrides.is_null()) {
        return c;
    }
    if (!overrides.is_object()) {
        errors.push_back({"config", "must be an object"});
        return c;
    }
    for (const auto& [key, value] : overrides.items()) {
        auto need_int = [&]() -> bool {
            if (!value.is_number_integer()) {
                errors.push_back({key, "must be an integer"});
                return false;
            }
            return true;
        };
        if (key == "p_heads") {
            if (value.is_number()) {
                c.p_heads = value.get<double>();
            }
            else {
                errors.push_back({key, "must be a number"});
            }
        }
        else if (key == "start_cents") {
            if (need_int()) {
                c.start_cents = value.get<Cents>();
            }
        }
        else if (key == "cap_cents") {
            if (value.is_null()) {
                c.cap_cents.reset();
            }
            else if (need_int()) {
                c.cap_cents = value.get<Cents>();
            }
        }
        else if (key == "max_flips") {
            if (need_int()) {
                c.max_flips = value.get<std::int32_t>();
            }
        }
        else if (key == "session_seconds") {
            if (need_int()) {
                c.session_seconds = value.get<std::int32_t>();
            }
        }
        else if (key == "min_bet_cents") {
            if (need_int()) {
                c.min_bet_cents = value.get<Cents>();
            }
        }
        else if (key == "cap_disclosure") {
            try {
                c.cap_disclosure = parse_cap_disclosure(value.get<std::string>());
            }
            catch (const std::exception&) {
                errors.push_back({key, "must be \"hidden\" or \"shown\""});
            }
        }
        else {
            errors.push_back({key, "unknown field"});
        }
    }
    return c;
}

GameConfig config_from_json(const Json& j)
{
    std::vector<FieldError> errors;
    GameConfig c = apply_overrides(GameConfig{}, j, errors);
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
    return c;
}

BetIntent intent_from_json(const Json& j)
{
    const Json& amount = j.at("amount_cents");
    if (!amount.is_number_integer()) {
        throw std::invalid_argument("amount_cents must be a whole number of cents");
    }
    return BetIntent{parse_side(j.at("side").get<std::string>()), amount.get<Cents>()};
}

FlipRecord flip_from_json(const Json& j)
{
    FlipRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.side = parse_side(j.at("side").get<std::string>());
    r.amount_cents = j.at("amount_cents").get<Cents>();
    r.outcome = parse_side(j.at("outcome").get<std::string>());
    r.won = j.at("won").get<bool>();
    r.bankroll_after_cents = j.at("bankroll_after_cents").get<Cents>();
    r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
    return r;
}

Event event_from_json(const Json& j)
{
    Event e;
    e.session_id = j.at("session_id").get<std::string>();
    e.seq = j.at("seq").get<std::uint64_t>();
    e.ts_ms = j.at("ts_ms").get<std::int64_t>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.payload = j.value("payload", Json::object());
    return e;
}

std::string to_line(const Event& event)
{
    return to_json(event).dump() + "\n";
}

std::vector<Event> read_events(std::istream& in)
{
    std::vector<Event> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            events.push_back(event_from_json(Json::parse(line)));
        }
        catch (const std::exception& ex) {
            throw std::invalid_argument("event line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return events;
}

} // namespace coinflip
