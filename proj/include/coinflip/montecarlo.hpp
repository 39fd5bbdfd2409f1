#pragma once

#include "coinflip/analytics.hpp"
#include "coinflip/engine.hpp"
#include "coinflip/strategies.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace coinflip::montecarlo {

/// cents: every path runs through the engine in whole cents.
/// real: the same coin stream drives real-valued wealth with no minimum bet.
enum class Rounding { cents, real };

std::string_view to_string(Rounding rounding);
Rounding parse_rounding(std::string_view text);

struct BatchSpec {
    StrategySpec strategy = strategy::Kelly{};
    GameConfig config;
    std::int64_t n_paths = 100000;
    std::uint64_t master_seed = 42;
    bool stop_at_cap = true;
    bool strict_exceed = false;
    Rounding rounding = Rounding::cents;
};

struct SummaryStats {
    BatchSpec spec;
    std::int64_t n_paths = 0;
    double p_cap = 0.0;
    double p_cap_se = 0.0;
    double expected_payout = 0.0; // dollars
    double payout_se = 0.0;
    double ruin_rate = 0.0;
    std::array<double, 5> payout_quantiles{}; // 5, 25, 50, 75, 95 percent
    double mean_flips = 0.0;
};

inline constexpr std::array<double, 5> quantile_levels{0.05, 0.25, 0.50, 0.75, 0.95};

/// Outcome of one simulated path.
struct PathResult {
    double payout = 0.0; // dollars
    bool reached_cap = false;
    bool ruined = false;
    std::int32_t flips = 0;
};

/// Path `index` of `spec`, using derive_path_stream(master_seed, index).
PathResult simulate_path(const BatchSpec& spec, std::int64_t index);

/*
 * Runs every path of `spec` and aggregates.
 *
 * Paths are grouped into fixed blocks whose partial sums are merged in block
 * order, so the result is bit-identical for any `threads` (0 = hardware
 * concurrency).
 */
SummaryStats run_batch(const BatchSpec& spec, unsigned threads = 0);

struct OracleReport {
    double mc_p_cap = 0.0;
    double exact_p_cap = 0.0;
    double p_cap_se = 0.0;
    double z_p_cap = 0.0;
    double mc_payout = 0.0;
    double exact_payout = 0.0;
    double payout_se = 0.0;
    double z_payout = 0.0;

    bool flagged() const;
};

/// z-scores of a real-rounding fixed-fraction batch against the exact
/// distribution for the same game. Throws std::invalid_argument when the two
/// do not describe the same (w0, f, p, n, cap, stop rule).
OracleReport compare_to_oracle(const SummaryStats& stats, const analytics::ExactDistribution& exact);

/// Game parameters of a fixed-fraction batch in analytics units.
analytics::GameParams game_params(const BatchSpec& spec);

} // namespace coinflip::montecarlo
