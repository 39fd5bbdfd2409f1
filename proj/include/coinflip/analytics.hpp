#pragma once

#include "coinflip/engine.hpp"

#include <optional>
#include <string>
#include <vector>

/// Closed-form and exact (lattice/dynamic-programming) quantities for the
/// fixed-fraction coin game. Everything here is in real-valued dollars.
namespace coinflip::analytics {

struct GameParams {
    double p = 0.6;
    double f = 0.2;
    int n = 300;
    double w0 = 25.0;
    std::optional<double> cap = 250.0;
};

/// Expected simple return of one flip: f(2p - 1).
double per_flip_edge(double f, double p);

/// Mean terminal wealth without a cap: w0 (1 + f(2p-1))^n.
double uncapped_ev(double w0, double f, double p, int n);

/// Expected log growth per flip: p ln(1+f) + (1-p) ln(1-f).
double log_growth(double f, double p);

/// Sure amount with the same log utility as the gamble: w0 exp(n g).
double certainty_equivalent(double w0, double f, double p, int n);

/// Wealth after `heads` wins and `tails` losses.
double wealth_after(double w0, double f, int heads, int tails);

/// Wealth at the median outcome h = round(p n).
double median_wealth(double w0, double f, double p, int n);

/// Per-flip mean over per-flip standard deviation; f cancels.
double return_risk_ratio(double f, double p);

/// Same ratio for an asset with the given mean return and volatility.
double return_risk_ratio_from_moments(double mean_return, double volatility);

/// Probability that a single all-in bet on `side` loses everything.
double all_in_ruin(double p, Side side);

struct WealthAtom {
    double wealth = 0.0;
    double probability = 0.0;
    int heads = 0;
    int tails = 0;
    bool absorbed = false; // stopped at the cap

    double payout(std::optional<double> cap) const { return cap && wealth > *cap ? *cap : wealth; }
};

struct ExactOptions {
    bool stop_at_cap = true;
    /// Require wealth strictly above the cap instead of at-or-above.
    bool strict_exceed = false;
};

struct ExactDistribution {
    GameParams params;
    ExactOptions options;
    std::vector<WealthAtom> atoms;
    double p_cap = 0.0;
    double expected_payout = 0.0;

    double total_mass() const;
    double mean_wealth() const;
};

/*
 * Exact terminal-wealth distribution of the fixed-fraction policy.
 *
 * Wealth after h wins and t losses is w0 (1+f)^h (1-f)^t, so the reachable
 * states form the (h, t) lattice. A forward pass pushes probability mass n
 * levels deep; with stop_at_cap a winning flip that lifts wealth to the cap
 * moves its mass to an absorbed atom. Without stop_at_cap, p_cap is the mass
 * of terminal atoms at or above the cap.
 *
 * Throws std::invalid_argument unless 0 < f < 1 (f >= 1 ruins on the first
 * loss), 0 <= p <= 1, n >= 0 and w0 > 0.
 */
ExactDistribution exact_capped_distribution(const GameParams& params, ExactOptions options = {});

/*
 * Backward dynamic program for the bet schedule that maximises
 * P(wealth reaches cap within n flips), on a wealth grid of
 * `wealth_step_cents` and a heads-bet grid of `bet_step_cents`.
 *
 * value(k, i) is the success probability with k flips left at wealth
 * i * wealth_step; best_bet(k, i) is the smallest grid bet achieving it.
 * Wealth at or above the cap is absorbing with value 1.
 */
class CapPolicy {
public:
    Cents wealth_step_cents() const { return wealth_step_; }
    Cents bet_step_cents() const { return bet_step_; }
    Cents cap_cents() const { return cap_index_ * wealth_step_; }
    int flips() const { return static_cast<int>(value_.size()) - 1; }

    double value(int flips_left, Cents wealth_cents) const;
    Cents best_bet(int flips_left, Cents wealth_cents) const;
    double success_probability() const { return success_; }

private:
    friend CapPolicy optimal_cap_policy(double, double, int, double, Cents, Cents, Cents);
    friend double fixed_fraction_on_grid(double, double, int, double, Cents, Cents, double);

    std::int64_t index_of(Cents wealth_cents) const;

    Cents wealth_step_ = 0;
    Cents bet_step_ = 0;
    std::int64_t cap_index_ = 0;
    std::vector<std::vector<double>> value_;      // [flips_left][wealth index]
    std::vector<std::vector<std::int32_t>> bet_;  // [flips_left][wealth index], in wealth-grid units
    double success_ = 0.0;
};

/// Throws std::invalid_argument when the grids cannot express the game:
/// non-positive steps, bet step not a multiple of the wealth step or below
/// `min_bet_cents`, stake or cap off the wealth grid, or n outside [0, 300].
CapPolicy optimal_cap_policy(double w0, double p, int n, double cap, Cents wealth_step_cents = 25,
                             Cents bet_step_cents = 25, Cents min_bet_cents = 1);

/// Success probability of betting floor(f w / bet_step) bet-steps at every
/// node, evaluated on the same grid as optimal_cap_policy.
double fixed_fraction_on_grid(double w0, double p, int n, double cap, Cents wealth_step_cents, Cents bet_step_cents,
                              double f);

/// One line of the table of quoted constants.
struct QuotedConstant {
    std::string name;
    double computed = 0.0;
    std::string quoted;
    double low = 0.0;
    double high = 0.0;

    bool pass() const { return computed >= low && computed <= high; }
};

std::vector<QuotedConstant> quoted_constants();

} // namespace coinflip::analytics
