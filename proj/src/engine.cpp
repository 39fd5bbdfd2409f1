#include "coinflip/engine.hpp"

#include <algorithm>
#include <cmath>

namespace coinflip {

std::string_view to_string(Side side)
{
    return side == Side::heads ? "heads" : "tails";
}

std::string_view to_string(Status status)
{
    switch (status) {
    case Status::active:
        return "active";
    case Status::finished:
        return "finished";
    case Status::ruined:
        return "ruined";
    }
    return "?";
}

std::string_view to_string(CapDisclosure disclosure)
{
    return disclosure == CapDisclosure::hidden ? "hidden" : "shown";
}

std::string_view to_string(BetViolation violation)
{
    switch (violation) {
    case BetViolation::below_minimum:
        return "below_minimum";
    case BetViolation::exceeds_bankroll:
        return "exceeds_bankroll";
    case BetViolation::session_over:
        return "session_over";
    }
    return "?";
}

Side parse_side(std::string_view text)
{
    if (text == "heads" || text == "H" || text == "h") {
        return Side::heads;
    }
    if (text == "tails" || text == "T" || text == "t") {
        return Side::tails;
    }
    throw std::invalid_argument("unknown side '" + std::string(text) + "'");
}

Status parse_status(std::string_view text)
{
    for (auto s : {Status::active, Status::finished, Status::ruined}) {
        if (to_string(s) == text) {
            return s;
        }
    }
    throw std::invalid_argument("unknown status '" + std::string(text) + "'");
}

CapDisclosure parse_cap_disclosure(std::string_view text)
{
    if (text == "hidden") {
        return CapDisclosure::hidden;
    }
    if (text == "shown") {
        return CapDisclosure::shown;
    }
    throw std::invalid_argument("unknown cap disclosure '" + std::string(text) + "'");
}

namespace {

std::string join_errors(const std::vector<FieldError>& errors)
{
    std::string out = "invalid game config:";
    for (const auto& e : errors) {
        out += " " + e.field + ": " + e.message + ";";
    }
    return out;
}

} // namespace

ConfigError::ConfigError(std::vector<FieldError> errors)
    : std::invalid_argument(join_errors(errors)), errors_(std::move(errors))
{
}

std::vector<FieldError> check_config(const GameConfig& c)
{
    std::vector<FieldError> errors;
    if (!(c.p_heads >= 0.0 && c.p_heads <= 1.0)) {
        errors.push_back({"p_heads", "must lie in [0, 1]"});
    }
    if (c.start_cents <= 0) {
        errors.push_back({"start_cents", "must be positive"});
    }
    if (c.cap_cents && *c.cap_cents <= 0) {
        errors.push_back({"cap_cents", "must be positive"});
    }
    if (c.max_flips < 0) {
        errors.push_back({"max_flips", "must be non-negative"});
    }
    if (c.session_seconds < 0) {
        errors.push_back({"session_seconds", "must be non-negative"});
    }
    if (c.min_bet_cents < 1) {
        errors.push_back({"min_bet_cents", "must be at least 1"});
    }
    else if (c.min_bet_cents > c.start_cents) {
        errors.push_back({"min_bet_cents", "must not exceed start_cents"});
    }
    if (c.cap_cents && *c.cap_cents > 0 && *c.cap_cents < c.start_cents) {
        errors.push_back({"cap_cents", "must be at least start_cents"});
    }
    return errors;
}

void require_valid(const GameConfig& config)
{
    auto errors = check_config(config);
    if (!errors.empty()) {
        throw ConfigError(std::move(errors));
    }
}

BetRejected::BetRejected(BetViolation violation)
    : std::runtime_error("bet rejected: " + std::string(to_string(violation))), violation_(violation)
{
}

GameState new_session(const GameConfig& config)
{
    require_valid(config);
    GameState state;
    state.bankroll_cents = config.start_cents;
    // A zero-flip game has nothing to play.
    state.status = config.max_flips == 0 ? Status::finished : Status::active;
    state.cap_hit = config.cap_cents && state.bankroll_cents >= *config.cap_cents;
    return state;
}

std::optional<BetViolation> validate_bet(const GameState& state, const BetIntent& intent, const GameConfig& config)
{
    if (state.status != Status::active || state.flips_done >= config.max_flips) {
        return BetViolation::session_over;
    }
    if (intent.amount_cents < config.min_bet_cents) {
        return BetViolation::below_minimum;
    }
    if (intent.amount_cents > state.bankroll_cents) {
        return BetViolation::exceeds_bankroll;
    }
    return std::nullopt;
}

std::pair<GameState, FlipRecord> apply_flip(const GameState& state, const BetIntent& intent, Side outcome,
                                            const GameConfig& config, std::int64_t timestamp_ms)
{
    if (auto violation = validate_bet(state, intent, config)) {
        throw BetRejected(*violation);
    }
    GameState next = state;
    const bool won = intent.side == outcome;
    next.bankroll_cents += won ? intent.amount_cents : -intent.amount_cents;
    next.flips_done += 1;
    next.seq += 1;
    if (config.cap_cents && next.bankroll_cents >= *config.cap_cents) {
        next.cap_hit = true;
    }
    if (next.flips_done >= config.max_flips) {
        next.status = Status::finished;
    }
    else if (next.bankroll_cents < config.min_bet_cents) {
        next.status = Status::ruined;
    }

    FlipRecord record;
    record.seq = next.seq;
    record.side = intent.side;
    record.amount_cents = intent.amount_cents;
    record.outcome = outcome;
    record.won = won;
    record.bankroll_after_cents = next.bankroll_cents;
    record.timestamp_ms = timestamp_ms;
    return {next, record};
}

std::pair<GameState, FlipRecord> place_bet(const GameState& state, const BetIntent& intent, RngStream& rng,
                                           const GameConfig& config, std::int64_t timestamp_ms)
{
    if (auto violation = validate_bet(state, intent, config)) {
        throw BetRejected(*violation);
    }
    const Side outcome = rng.bernoulli(config.p_heads) ? Side::heads : Side::tails;
    return apply_flip(state, intent, outcome, config, timestamp_ms);
}

Cents payout(const GameState& state, const GameConfig& config)
{
    if (config.cap_cents) {
        return std::min(state.bankroll_cents, *config.cap_cents);
    }
    return state.bankroll_cents;
}

GameState replay(const GameConfig& config, const std::vector<FlipRecord>& records)
{
    GameState state = new_session(config);
    for (const auto& r : records) {
        auto [next, recomputed] = apply_flip(state, {r.side, r.amount_cents}, r.outcome, config, r.timestamp_ms);
        if (!(recomputed == r)) {
            throw std::invalid_argument("flip record " + std::to_string(r.seq) + " does not replay");
        }
        state = next;
    }
    return state;
}

Session::Session(GameConfig config, std::uint64_t master_seed, std::uint64_t stream_index)
    : config_(std::move(config)), state_(new_session(config_)), rng_(derive_path_stream(master_seed, stream_index))
{
}

const FlipRecord& Session::bet(const BetIntent& intent, std::int64_t timestamp_ms)
{
    auto [next, record] = place_bet(state_, intent, rng_, config_, timestamp_ms);
    state_ = next;
    records_.push_back(record);
    return records_.back();
}

} // namespace coinflip
