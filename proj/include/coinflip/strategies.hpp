#pragma once

#include "coinflip/engine.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace coinflip {

/// Optimal even-money fraction 2p - 1, clamped to [0, 1].
double kelly_fraction(double p);

/*
 * Smallest g in [0, f_start] with bankroll * (1 + g)^flips_remaining >= cap,
 * by bisection to 1e-6. Returns 0 when the cap is already reached and f_start
 * when even f_start cannot get there in time.
 */
double glide_fraction(double bankroll, double known_cap, int flips_remaining, double f_start);

namespace strategy {

struct Kelly {
    friend bool operator==(const Kelly&, const Kelly&) = default;
};
struct Fractional {
    double f = 0.2;
    friend bool operator==(const Fractional&, const Fractional&) = default;
};
struct ConstantAmount {
    Cents c = 100;
    friend bool operator==(const ConstantAmount&, const ConstantAmount&) = default;
};
enum class MartingaleMode { reset_on_win, halve_on_win };
struct Martingale {
    Cents base = 100;
    double factor = 2.0;
    MartingaleMode mode = MartingaleMode::reset_on_win;
    friend bool operator==(const Martingale&, const Martingale&) = default;
};
struct AllIn {
    Side side = Side::heads;
    friend bool operator==(const AllIn&, const AllIn&) = default;
};
/// Bets f_start until the cap is known, then the glide fraction.
struct Glide {
    double f_start = 0.2;
    friend bool operator==(const Glide&, const Glide&) = default;
};

} // namespace strategy

using StrategySpec = std::variant<strategy::Kelly, strategy::Fractional, strategy::ConstantAmount, strategy::Martingale,
                                  strategy::AllIn, strategy::Glide>;

/// Throws std::invalid_argument if a parameter is out of range.
void require_valid(const StrategySpec& spec);

/// Parses the CLI vocabulary, e.g. "kelly", "fractional:f=0.15",
/// "constant:c=100", "martingale:base=25,factor=2,mode=halve_on_win",
/// "allin:side=tails", "glide:f=0.2".
StrategySpec parse_strategy(std::string_view text);
std::string to_string(const StrategySpec& spec);

/// Fixed betting fraction of `spec` at coin bias p, if it is a constant
/// proportion policy (kelly or fractional).
std::optional<double> fixed_fraction(const StrategySpec& spec, double p);

/// What a player can see when deciding the next bet.
struct StateView {
    Cents bankroll_cents = 0;
    std::int32_t flips_done = 0;
    std::int32_t flips_remaining = 0;
    std::optional<FlipRecord> last_record;
    std::optional<Cents> known_cap_cents;
};

/// Builds the view for `state`; the cap is known when shown or already hit.
StateView make_view(const GameState& state, const GameConfig& config, const std::optional<FlipRecord>& last);

/// Per-path memory. Only martingale and all_in read it.
struct StrategyRunState {
    std::optional<double> last_amount;
    bool last_won = false;
    bool all_in_fired = false;

    friend bool operator==(const StrategyRunState&, const StrategyRunState&) = default;
};

/*
 * A betting policy bound to its run-state.
 *
 * next_bet sizes the bet in whole cents: floor the policy amount, raise it to
 * min_bet if it floors below, never exceed the bankroll. It returns nullopt
 * (stop) on ruin or once all_in has fired. next_bet_real is the
 * granularity-free twin used for real-valued simulation: no flooring and no
 * minimum bet, stopping only at zero wealth.
 *
 * Call observe() after every resolved flip.
 */
class Strategy {
public:
    explicit Strategy(StrategySpec spec);

    const StrategySpec& spec() const { return spec_; }
    const StrategyRunState& run_state() const { return run_; }
    void restore(const StrategyRunState& run) { run_ = run; }

    std::optional<BetIntent> next_bet(const StateView& view, double p_heads, Cents min_bet_cents) const;

    struct RealBet {
        Side side;
        double amount;
    };
    std::optional<RealBet> next_bet_real(double bankroll, int flips_remaining, std::optional<double> known_cap,
                                         double p_heads) const;

    void observe(double amount, bool won);

private:
    /// Unrounded amount the policy wants to stake (same unit as bankroll).
    double desired_amount(double bankroll, int flips_remaining, std::optional<double> known_cap, double p_heads) const;
    Side side() const;

    StrategySpec spec_;
    StrategyRunState run_;
};

} // namespace coinflip
