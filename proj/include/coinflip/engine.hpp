#pragma once

#include "coinflip/rng.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace coinflip {

using Cents = std::int64_t;

enum class Side { heads, tails };
enum class Status { active, finished, ruined };
enum class CapDisclosure { hidden, shown };

std::string_view to_string(Side side);
std::string_view to_string(Status status);
std::string_view to_string(CapDisclosure disclosure);
Side parse_side(std::string_view text);
Status parse_status(std::string_view text);
CapDisclosure parse_cap_disclosure(std::string_view text);

/// The rule set of one game. Defaults are the 60% coin, $25 stake, $250 cap,
/// 300 flips, 30 minutes and a one-cent minimum bet.
struct GameConfig {
    double p_heads = 0.6;
    Cents start_cents = 2500;
    std::optional<Cents> cap_cents = 25000;
    std::int32_t max_flips = 300;
    std::int32_t session_seconds = 1800; // 0 = untimed
    Cents min_bet_cents = 1;
    CapDisclosure cap_disclosure = CapDisclosure::hidden;

    friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

struct FieldError {
    std::string field;
    std::string message;
};

/// Raised for a GameConfig that violates its invariants; carries one entry
/// per offending field.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<FieldError> errors);
    const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

/// Every violated invariant of `config`; empty when valid.
std::vector<FieldError> check_config(const GameConfig& config);

/// Throws ConfigError unless check_config(config) is empty.
void require_valid(const GameConfig& config);

struct GameState {
    Cents bankroll_cents = 0;
    std::int32_t flips_done = 0;
    Status status = Status::active;
    bool cap_hit = false;
    std::uint64_t seq = 0; // one step per applied flip

    friend bool operator==(const GameState&, const GameState&) = default;
};

struct BetIntent {
    Side side = Side::heads;
    Cents amount_cents = 0;

    friend bool operator==(const BetIntent&, const BetIntent&) = default;
};

struct FlipRecord {
    std::uint64_t seq = 0;
    Side side = Side::heads;
    Cents amount_cents = 0;
    Side outcome = Side::heads;
    bool won = false;
    Cents bankroll_after_cents = 0;
    std::int64_t timestamp_ms = 0;

    Cents bankroll_before_cents() const { return won ? bankroll_after_cents - amount_cents : bankroll_after_cents + amount_cents; }

    friend bool operator==(const FlipRecord&, const FlipRecord&) = default;
};

enum class BetViolation { below_minimum, exceeds_bankroll, session_over };

std::string_view to_string(BetViolation violation);

class BetRejected : public std::runtime_error {
public:
    explicit BetRejected(BetViolation violation);
    BetViolation violation() const noexcept { return violation_; }

private:
    BetViolation violation_;
};

/// Initial state of a session. Throws ConfigError on an invalid config.
GameState new_session(const GameConfig& config);

/// nullopt when the bet is acceptable; never mutates anything.
std::optional<BetViolation> validate_bet(const GameState& state, const BetIntent& intent, const GameConfig& config);

/*
 * Resolves one flip with a known outcome. Pure: no randomness, no clock.
 *
 * The cap only latches `cap_hit`; it does not end the session. Ruin is a
 * bankroll below the minimum bet with flips still remaining.
 * Throws BetRejected (state untouched) if validate_bet fails.
 */
std::pair<GameState, FlipRecord> apply_flip(const GameState& state, const BetIntent& intent, Side outcome,
                                            const GameConfig& config, std::int64_t timestamp_ms = 0);

/// Draws the outcome from `rng` (exactly one draw) and applies it. The draw is
/// only taken once the bet has been validated.
std::pair<GameState, FlipRecord> place_bet(const GameState& state, const BetIntent& intent, RngStream& rng,
                                           const GameConfig& config, std::int64_t timestamp_ms = 0);

/// Amount owed at settlement: the bankroll, bounded by the cap if any.
Cents payout(const GameState& state, const GameConfig& config);

/// Folds apply_flip over `records` starting from new_session(config).
/// Throws std::invalid_argument if a record disagrees with the recomputation.
GameState replay(const GameConfig& config, const std::vector<FlipRecord>& records);

/*
 * A seeded game: config, live state, the coin stream and the ledger.
 *
 * Identical (config, master_seed) pairs driven by identical bet sequences
 * produce identical ledgers.
 */
class Session {
public:
    Session(GameConfig config, std::uint64_t master_seed, std::uint64_t stream_index = 0);

    const GameConfig& config() const { return config_; }
    const GameState& state() const { return state_; }
    const std::vector<FlipRecord>& records() const { return records_; }

    std::optional<BetViolation> validate(const BetIntent& intent) const { return validate_bet(state_, intent, config_); }
    const FlipRecord& bet(const BetIntent& intent, std::int64_t timestamp_ms = 0);
    Cents payout() const { return coinflip::payout(state_, config_); }

private:
    GameConfig config_;
    GameState state_;
    RngStream rng_;
    std::vector<FlipRecord> records_;
};

} // namespace coinflip
