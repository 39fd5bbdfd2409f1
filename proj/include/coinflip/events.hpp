#pragma once

#include "coinflip/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace coinflip {

using Json = nlohmann::json;

enum class EventKind { session_created, bet_placed, flip_resolved, cap_reached, session_finished, answer_recorded };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

/*
 * One line of a session's event log.
 *
 * Payloads by kind:
 *   session_created   {"config": GameConfig, "deadline_ms": int|null, "test_seed"?: uint}
 *   bet_placed        {"side": "heads"|"tails", "amount_cents": int}
 *   flip_resolved     FlipRecord
 *   cap_reached       {"cap_cents": int, "bankroll_cents": int}
 *   session_finished  {"payout_cents": int, "bankroll_cents": int}
 *   answer_recorded   {"question_id": string, "value": any}
 */
struct Event {
    std::string session_id;
    std::uint64_t seq = 0;
    std::int64_t ts_ms = 0;
    EventKind kind = EventKind::session_created;
    Json payload = Json::object();

    friend bool operator==(const Event&, const Event&) = default;
};

Json to_json(const GameConfig& config);
Json to_json(const BetIntent& intent);
Json to_json(const FlipRecord& record);
Json to_json(const GameState& state);
Json to_json(const Event& event);

/// Applies the fields present in `overrides` onto `base`. Unknown keys and
/// wrongly typed values are reported per field; no invariant checking.
GameConfig apply_overrides(GameConfig base, const Json& overrides, std::vector<FieldError>& errors);

GameConfig config_from_json(const Json& j);
BetIntent intent_from_json(const Json& j);
FlipRecord flip_from_json(const Json& j);
Event event_from_json(const Json& j);

/// Compact single-line serialization followed by '\n'.
std::string to_line(const Event& event);

/// Reads a line-delimited event file. Blank lines are skipped; a malformed
/// line throws std::invalid_argument naming its line number.
std::vector<Event> read_events(std::istream& in);

} // namespace coinflip
