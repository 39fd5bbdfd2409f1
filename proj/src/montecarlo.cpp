#include "coinflip/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace coinflip::montecarlo {

std::string_view to_string(Rounding rounding)
{
    return rounding == Rounding::cents ? "cents" : "real";
}

Rounding parse_rounding(std::string_view text)
{
    if (text == "cents") {
        return Rounding::cents;
    }
    if (text == "real") {
        return Rounding::real;
    }
    throw std::invalid_argument("unknown rounding '" + std::string(text) + "'");
}

namespace {

bool reaches(double wealth, double cap, bool strict)
{
    return strict ? wealth > cap : wealth >= cap;
}

PathResult simulate_cents(const BatchSpec& spec, std::int64_t index)
{
    const GameConfig& config = spec.config;
    GameState state = new_session(config);
    RngStream rng = derive_path_stream(spec.master_seed, static_cast<std::uint64_t>(index));
    Strategy strategy(spec.strategy);
    std::optional<FlipRecord> last;
    const bool capped = config.cap_cents.has_value();
    const double cap = capped ? static_cast<double>(*config.cap_cents) : 0.0;

    PathResult result;
    if (spec.stop_at_cap && capped && reaches(static_cast<double>(state.bankroll_cents), cap, spec.strict_exceed)) {
        result.reached_cap = true;
    }
    while (!result.reached_cap && state.status == Status::active) {
        const auto bet = strategy.next_bet(make_view(state, config, last), config.p_heads, config.min_bet_cents);
        if (!bet) {
            break;
        }
        auto [next, record] = place_bet(state, *bet, rng, config);
        state = next;
        last = record;
        strategy.observe(static_cast<double>(record.amount_cents), record.won);
        if (spec.stop_at_cap && capped && record.won &&
            reaches(static_cast<double>(state.bankroll_cents), cap, spec.strict_exceed)) {
            result.reached_cap = true;
        }
    }
    result.flips = state.flips_done;
    if (result.reached_cap) {
        result.payout = cap / 100.0;
    }
    else {
        result.payout = static_cast<double>(payout(state, config)) / 100.0;
        result.reached_cap = capped && reaches(static_cast<double>(state.bankroll_cents), cap, spec.strict_exceed);
        result.ruined = state.bankroll_cents < config.min_bet_cents;
    }
    return result;
}

PathResult simulate_real(const BatchSpec& spec, std::int64_t index)
{
    const GameConfig& config = spec.config;
    require_valid(config);
    RngStream rng = derive_path_stream(spec.master_seed, static_cast<std::uint64_t>(index));
    Strategy strategy(spec.strategy);
    const auto cap = config.cap_cents ? std::optional<double>(static_cast<double>(*config.cap_cents)) : std::nullopt;
    const bool cap_shown = config.cap_disclosure == CapDisclosure::shown;

    // wealth in cents, unrounded
    double wealth = static_cast<double>(config.start_cents);
    bool cap_seen = cap && wealth >= *cap;
    PathResult result;
    if (spec.stop_at_cap && cap && reaches(wealth, *cap, spec.strict_exceed)) {
        result.reached_cap = true;
    }
    while (!result.reached_cap && result.flips < config.max_flips) {
        const std::optional<double> known_cap = (cap_shown || cap_seen) ? cap : std::nullopt;
        const auto bet = strategy.next_bet_real(wealth, config.max_flips - result.flips, known_cap, config.p_heads);
        if (!bet) {
            break;
        }
        const Side outcome = rng.bernoulli(config.p_heads) ? Side::heads : Side::tails;
        const bool won = outcome == bet->side;
        wealth += won ? bet->amount : -bet->amount;
        wealth = std::max(wealth, 0.0);
        ++result.flips;
        strategy.observe(bet->amount, won);
        if (cap && wealth >= *cap) {
            cap_seen = true;
        }
        if (spec.stop_at_cap && cap && won && reaches(wealth, *cap, spec.strict_exceed)) {
            result.reached_cap = true;
        }
        if (wealth <= 0.0) {
            break;
        }
    }
    if (result.reached_cap) {
        result.payout = *cap / 100.0;
    }
    else {
        result.payout = (cap ? std::min(wealth, *cap) : wealth) / 100.0;
        result.reached_cap = cap && reaches(wealth, *cap, spec.strict_exceed);
        result.ruined = wealth <= 0.0;
    }
    return result;
}

struct BlockSums {
    double payout = 0.0;
    double payout_sq = 0.0;
    std::int64_t cap_hits = 0;
    std::int64_t ruins = 0;
    std::int64_t flips = 0;
};

constexpr std::int64_t block_size = 4096;

double quantile(const std::vector<double>& sorted, double level)
{
    // linear interpolation between order statistics
    const double pos = level * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

PathResult simulate_path(const BatchSpec& spec, std::int64_t index)
{
    return spec.rounding == Rounding::cents ? simulate_cents(spec, index) : simulate_real(spec, index);
}

SummaryStats run_batch(const BatchSpec& spec, unsigned threads)
{
    require_valid(spec.config);
    require_valid(spec.strategy);
    if (spec.n_paths < 1) {
        throw std::invalid_argument("n_paths must be at least 1");
    }
    const std::int64_t n = spec.n_paths;
    const std::int64_t n_blocks = (n + block_size - 1) / block_size;
    std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
    std::vector<double> payouts(static_cast<std::size_t>(n));

    std::atomic<std::int64_t> next_block{0};
    auto worker = [&] {
        for (std::int64_t b = next_block++; b < n_blocks; b = next_block++) {
            BlockSums sums;
            const std::int64_t end = std::min(n, (b + 1) * block_size);
            for (std::int64_t i = b * block_size; i < end; ++i) {
                const PathResult r = simulate_path(spec, i);
                payouts[static_cast<std::size_t>(i)] = r.payout;
                sums.payout += r.payout;
                sums.payout_sq += r.payout * r.payout;
                sums.cap_hits += r.reached_cap ? 1 : 0;
                sums.ruins += r.ruined ? 1 : 0;
                sums.flips += r.flips;
            }
            blocks[static_cast<std::size_t>(b)] = sums;
        }
    };

    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::int64_t>(threads, n_blocks));
    if (threads <= 1) {
        worker();
    }
    else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }

    BlockSums total;
    for (const auto& b : blocks) {
        total.payout += b.payout;
        total.payout_sq += b.payout_sq;
        total.cap_hits += b.cap_hits;
        total.ruins += b.ruins;
        total.flips += b.flips;
    }

    SummaryStats stats;
    stats.spec = spec;
    stats.n_paths = n;
    const auto count = static_cast<double>(n);
    stats.p_cap = static_cast<double>(total.cap_hits) / count;
    stats.p_cap_se = std::sqrt(stats.p_cap * (1.0 - stats.p_cap) / count);
    stats.expected_payout = total.payout / count;
    if (n > 1) {
        const double var = std::max(0.0, (total.payout_sq - count * stats.expected_payout * stats.expected_payout) /
                                             (count - 1.0));
        stats.payout_se = std::sqrt(var / count);
    }
    stats.ruin_rate = static_cast<double>(total.ruins) / count;
    stats.mean_flips = static_cast<double>(total.flips) / count;

    std::sort(payouts.begin(), payouts.end());
    for (std::size_t k = 0; k < quantile_levels.size(); ++k) {
        stats.payout_quantiles[k] = quantile(payouts, quantile_levels[k]);
    }
    return stats;
}

analytics::GameParams game_params(const BatchSpec& spec)
{
    const auto f = fixed_fraction(spec.strategy, spec.config.p_heads);
    if (!f) {
        throw std::invalid_argument("strategy " + coinflip::to_string(spec.strategy) + " is not a fixed-fraction policy");
    }
    analytics::GameParams params;
    params.p = spec.config.p_heads;
    params.f = *f;
    params.n = spec.config.max_flips;
    params.w0 = static_cast<double>(spec.config.start_cents) / 100.0;
    params.cap = spec.config.cap_cents ? std::optional<double>(static_cast<double>(*spec.config.cap_cents) / 100.0)
                                       : std::nullopt;
    return params;
}

bool OracleReport::flagged() const
{
    return !(std::abs(z_p_cap) <= 3.0) || !(std::abs(z_payout) <= 3.0);
}

namespace {

double z_score(double observed, double expected, double se)
{
    const double diff = observed - expected;
    if (se > 0.0) {
        return diff / se;
    }
    return std::abs(diff) < 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

} // namespace

OracleReport compare_to_oracle(const SummaryStats& stats, const analytics::ExactDistribution& exact)
{
    const BatchSpec& spec = stats.spec;
    if (spec.rounding != Rounding::real) {
        throw std::invalid_argument("oracle comparison needs a real-rounding batch");
    }
    const analytics::GameParams mc = game_params(spec);
    const analytics::GameParams& ex = exact.params;
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
    std::string mismatch;
    if (!close(mc.p, ex.p)) {
        mismatch += " p";
    }
    if (!close(mc.f, ex.f)) {
        mismatch += " f";
    }
    if (mc.n != ex.n) {
        mismatch += " n";
    }
    if (!close(mc.w0, ex.w0)) {
        mismatch += " w0";
    }
    if (mc.cap.has_value() != ex.cap.has_value() || (mc.cap && !close(*mc.cap, *ex.cap))) {
        mismatch += " cap";
    }
    if (spec.stop_at_cap != exact.options.stop_at_cap || spec.strict_exceed != exact.options.strict_exceed) {
        mismatch += " stop-rule";
    }
    if (!mismatch.empty()) {
        throw std::invalid_argument("batch and exact distribution differ in:" + mismatch);
    }

    OracleReport report;
    report.mc_p_cap = stats.p_cap;
    report.exact_p_cap = exact.p_cap;
    // Binomial SE under the exact probability, so a batch that saw no
    // misses still gets a meaningful score.
    report.p_cap_se = std::sqrt(exact.p_cap * (1.0 - exact.p_cap) / static_cast<double>(stats.n_paths));
    report.z_p_cap = z_score(stats.p_cap, exact.p_cap, report.p_cap_se);
    report.mc_payout = stats.expected_payout;
    report.exact_payout = exact.expected_payout;
    report.payout_se = stats.payout_se;
    report.z_payout = z_score(stats.expected_payout, exact.expected_payout, stats.payout_se);
    return report;
}

} // namespace coinflip::montecarlo
