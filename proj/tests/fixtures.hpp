#pragma once

// Synthetic session ledgers shared by the unit and acceptance tests.

#include "coinflip/behavior.hpp"
#include "coinflip/strategies.hpp"

#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace coinflip::fixtures {

struct Step {
    Side side;
    Cents amount;
    Side outcome;
};

inline GameConfig open_config(Cents start = 10000)
{
    GameConfig config;
    config.start_cents = start;
    config.cap_cents.reset();
    config.max_flips = 1000;
    return config;
}

/// Ledger with the given bets and forced outcomes on an uncapped game.
inline behavior::SessionLedger ledger_of(const std::vector<Step>& steps, Cents start = 10000,
                                         std::string id = "fixture")
{
    behavior::SessionLedger ledger;
    ledger.session_id = std::move(id);
    ledger.config = open_config(start);
    GameState state = new_session(ledger.config);
    for (const auto& s : steps) {
        auto [next, record] = apply_flip(state, {s.side, s.amount}, s.outcome, ledger.config);
        state = next;
        ledger.records.push_back(record);
    }
    return ledger;
}

/// Plays `spec` to the end of a seeded session.
inline behavior::SessionLedger play(const StrategySpec& spec, std::uint64_t seed,
                                    const GameConfig& config = GameConfig{})
{
    Session session(config, seed);
    Strategy strategy(spec);
    std::optional<FlipRecord> last;
    while (session.state().status == Status::active) {
        const auto bet =
            strategy.next_bet(make_view(session.state(), config, last), config.p_heads, config.min_bet_cents);
        if (!bet) {
            break;
        }
        last = session.bet(*bet);
        strategy.observe(static_cast<double>(last->amount_cents), last->won);
    }
    return behavior::SessionLedger{"play-" + std::to_string(seed), config, session.records(), {}};
}

/// Doubling martingale on a deep bankroll, so the doubling is not clamped early.
inline behavior::SessionLedger doubling_session(std::uint64_t seed)
{
    GameConfig config;
    config.start_cents = 100000;
    config.cap_cents.reset();
    return play(strategy::Martingale{100, 2.0}, seed, config);
}

/// `flips` 1-dollar bets, the first `tails` of them on tails, optionally
/// followed by one winning full-bankroll bet.
inline behavior::SessionLedger cohort_member(int flips, int tails, bool all_in, int index)
{
    std::vector<Step> steps;
    for (int i = 0; i < flips; ++i) {
        const Side side = i < tails ? Side::tails : Side::heads;
        steps.push_back({side, 100, i % 2 == 0 ? Side::heads : Side::tails});
    }
    behavior::SessionLedger ledger = ledger_of(steps, 10000, "c" + std::to_string(index));
    if (all_in) {
        const GameState state = replay(ledger.config, ledger.records);
        ledger.records.push_back(
            apply_flip(state, {Side::heads, state.bankroll_cents}, Side::heads, ledger.config).second);
    }
    return ledger;
}

/*
 * 61 sessions: 18 with an all-in bet, 41 with any tails bet, 29 with more
 * than 5 tails bets, 13 with a tails share above 25%. 46 answer the bias
 * question, 30 of them yes.
 */
inline std::vector<behavior::SessionLedger> cohort_61()
{
    std::vector<behavior::SessionLedger> ledgers;
    int index = 0;
    // (sessions, flips, tails bets)
    const std::vector<std::tuple<int, int, int>> groups{{13, 20, 6}, {16, 40, 6}, {12, 40, 3}, {20, 30, 0}};
    for (const auto& [count, flips, tails] : groups) {
        for (int k = 0; k < count; ++k) {
            ledgers.push_back(cohort_member(flips, tails, index < 18, index));
            if (index % 4 != 3) {
                ledgers.back().answers.emplace_back(behavior::bias_question_id, index % 4 == 0 ? "no" : "yes");
            }
            ++index;
        }
    }
    return ledgers;
}

} // namespace coinflip::fixtures
