#include "coinflip/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coinflip::analytics {

double per_flip_edge(double f, double p)
{
    return f * (2.0 * p - 1.0);
}

double uncapped_ev(double w0, double f, double p, int n)
{
    return w0 * std::pow(1.0 + per_flip_edge(f, p), n);
}

double log_growth(double f, double p)
{
    return p * std::log1p(f) + (1.0 - p) * std::log1p(-f);
}

double certainty_equivalent(double w0, double f, double p, int n)
{
    return w0 * std::exp(n * log_growth(f, p));
}

double wealth_after(double w0, double f, int heads, int tails)
{
    return w0 * std::pow(1.0 + f, heads) * std::pow(1.0 - f, tails);
}

double median_wealth(double w0, double f, double p, int n)
{
    const int heads = static_cast<int>(std::lround(p * n));
    return wealth_after(w0, f, heads, n - heads);
}

double return_risk_ratio(double f, double p)
{
    // mean f(2p-1), sd 2f sqrt(p(1-p))
    (void)f;
    return (2.0 * p - 1.0) / (2.0 * std::sqrt(p * (1.0 - p)));
}

double return_risk_ratio_from_moments(double mean_return, double volatility)
{
    return mean_return / volatility;
}

double all_in_ruin(double p, Side side)
{
    return side == Side::heads ? 1.0 - p : p;
}

double ExactDistribution::total_mass() const
{
    // Neumaier summation
    double sum = 0.0;
    double c = 0.0;
    for (const auto& a : atoms) {
        const double t = sum + a.probability;
        c += std::abs(sum) >= std::abs(a.probability) ? (sum - t) + a.probability : (a.probability - t) + sum;
        sum = t;
    }
    return sum + c;
}

double ExactDistribution::mean_wealth() const
{
    double mean = 0.0;
    for (const auto& a : atoms) {
        mean += a.wealth * a.probability;
    }
    return mean;
}

ExactDistribution exact_capped_distribution(const GameParams& params, ExactOptions options)
{
    if (!(params.f > 0.0)) {
        throw std::invalid_argument("exact distribution needs a positive betting fraction");
    }
    if (params.f >= 1.0) {
        throw std::invalid_argument("exact distribution rejects f >= 1: the first loss ruins, nothing to compute");
    }
    if (!(params.p >= 0.0 && params.p <= 1.0)) {
        throw std::invalid_argument("p must lie in [0, 1]");
    }
    if (params.n < 0) {
        throw std::invalid_argument("n must be non-negative");
    }
    if (!(params.w0 > 0.0)) {
        throw std::invalid_argument("w0 must be positive");
    }
    if (params.cap && !(*params.cap > 0.0)) {
        throw std::invalid_argument("cap must be positive");
    }

    ExactDistribution dist;
    dist.params = params;
    dist.options = options;

    const auto& cap = params.cap;
    auto at_cap = [&](double wealth) {
        return cap && (options.strict_exceed ? wealth > *cap : wealth >= *cap);
    };
    const bool stop = options.stop_at_cap && cap.has_value();

    const int n = params.n;
    std::vector<double> up(n + 1), down(n + 1);
    for (int k = 0; k <= n; ++k) {
        up[k] = std::pow(1.0 + params.f, k);
        down[k] = std::pow(1.0 - params.f, k);
    }
    auto wealth = [&](int h, int t) { return params.w0 * up[h] * down[t]; };

    if (stop && at_cap(params.w0)) {
        dist.atoms.push_back({params.w0, 1.0, 0, 0, true});
    }
    else {
        const double p = params.p;
        const double q = 1.0 - params.p;
        // active[h] is the unabsorbed mass at (h, level - h)
        std::vector<double> active{1.0};
        std::vector<double> next;
        for (int level = 0; level < n; ++level) {
            next.assign(level + 2, 0.0);
            for (int h = 0; h <= level; ++h) {
                const double mass = active[h];
                if (mass == 0.0) {
                    continue;
                }
                const int t = level - h;
                const double won = mass * p;
                if (stop && at_cap(wealth(h + 1, t))) {
                    if (won > 0.0) {
                        dist.atoms.push_back({wealth(h + 1, t), won, h + 1, t, true});
                    }
                }
                else {
                    next[h + 1] += won;
                }
                next[h] += mass * q;
            }
            active.swap(next);
        }
        for (int h = 0; h <= n; ++h) {
            if (active[h] > 0.0) {
                dist.atoms.push_back({wealth(h, n - h), active[h], h, n - h, false});
            }
        }
    }

    for (const auto& a : dist.atoms) {
        if (a.absorbed || (!stop && at_cap(a.wealth))) {
            dist.p_cap += a.probability;
        }
        dist.expected_payout += a.payout(cap) * a.probability;
    }
    return dist;
}

std::int64_t CapPolicy::index_of(Cents wealth_cents) const
{
    if (wealth_cents < 0 || wealth_cents % wealth_step_ != 0) {
        throw std::invalid_argument("wealth " + std::to_string(wealth_cents) + " is not on the policy grid");
    }
    return std::min<std::int64_t>(wealth_cents / wealth_step_, cap_index_);
}

double CapPolicy::value(int flips_left, Cents wealth_cents) const
{
    return value_.at(static_cast<std::size_t>(flips_left)).at(static_cast<std::size_t>(index_of(wealth_cents)));
}

Cents CapPolicy::best_bet(int flips_left, Cents wealth_cents) const
{
    return bet_.at(static_cast<std::size_t>(flips_left)).at(static_cast<std::size_t>(index_of(wealth_cents))) *
           wealth_step_;
}

namespace {

struct Grid {
    std::int64_t start_index;
    std::int64_t cap_index;
    std::int64_t bet_unit; // bet step in wealth-grid units
};

Cents dollars_to_cents(double dollars)
{
    return static_cast<Cents>(std::llround(dollars * 100.0));
}

Grid check_grid(double w0, double p, int n, double cap, Cents wealth_step, Cents bet_step, Cents min_bet)
{
    if (wealth_step <= 0 || bet_step <= 0) {
        throw std::invalid_argument("grid steps must be positive");
    }
    if (bet_step % wealth_step != 0) {
        throw std::invalid_argument("bet step must be a multiple of the wealth step");
    }
    if (bet_step < min_bet) {
        throw std::invalid_argument("bet grid is finer than the minimum bet");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("p must lie in [0, 1]");
    }
    if (n < 0 || n > 300) {
        throw std::invalid_argument("flips must lie in [0, 300]");
    }
    const Cents w0_cents = dollars_to_cents(w0);
    const Cents cap_cents = dollars_to_cents(cap);
    if (w0_cents <= 0 || cap_cents <= 0) {
        throw std::invalid_argument("stake and cap must be positive");
    }
    if (w0_cents % wealth_step != 0 || cap_cents % wealth_step != 0) {
        throw std::invalid_argument("stake and cap must lie on the wealth grid");
    }
    if (w0_cents < cap_cents && bet_step > w0_cents) {
        throw std::invalid_argument("bet grid too coarse: no bet fits the starting stake");
    }
    return {std::min(w0_cents, cap_cents) / wealth_step, cap_cents / wealth_step, bet_step / wealth_step};
}

} // namespace

CapPolicy optimal_cap_policy(double w0, double p, int n, double cap, Cents wealth_step_cents, Cents bet_step_cents,
                             Cents min_bet_cents)
{
    const Grid grid = check_grid(w0, p, n, cap, wealth_step_cents, bet_step_cents, min_bet_cents);
    const std::int64_t m = grid.cap_index;
    const std::int64_t unit = grid.bet_unit;
    const double q = 1.0 - p;

    CapPolicy policy;
    policy.wealth_step_ = wealth_step_cents;
    policy.bet_step_ = bet_step_cents;
    policy.cap_index_ = m;
    policy.value_.assign(n + 1, std::vector<double>(m + 1, 0.0));
    policy.bet_.assign(n + 1, std::vector<std::int32_t>(m + 1, 0));
    policy.value_[0][m] = 1.0;

    for (int k = 1; k <= n; ++k) {
        const auto& prev = policy.value_[k - 1];
        auto& cur = policy.value_[k];
        auto& bets = policy.bet_[k];
        cur[m] = 1.0;
        for (std::int64_t i = 1; i < m; ++i) {
            // Bets past the smallest one reaching the cap only add downside.
            const std::int64_t gap_units = (m - i + unit - 1) / unit;
            const std::int64_t max_units = std::min(i / unit, gap_units);
            double best = prev[i];
            std::int64_t best_bet = 0;
            for (std::int64_t j = 1; j <= max_units; ++j) {
                const std::int64_t b = j * unit;
                const double v = p * prev[std::min(i + b, m)] + q * prev[i - b];
                if (v > best) {
                    best = v;
                    best_bet = b;
                }
            }
            cur[i] = best;
            bets[i] = static_cast<std::int32_t>(best_bet);
        }
    }
    policy.success_ = policy.value_[n][grid.start_index];
    return policy;
}

double fixed_fraction_on_grid(double w0, double p, int n, double cap, Cents wealth_step_cents, Cents bet_step_cents,
                              double f)
{
    const Grid grid = check_grid(w0, p, n, cap, wealth_step_cents, bet_step_cents, 1);
    const std::int64_t m = grid.cap_index;
    const std::int64_t unit = grid.bet_unit;
    const double q = 1.0 - p;
    std::vector<double> prev(m + 1, 0.0), cur(m + 1, 0.0);
    prev[m] = 1.0;
    for (int k = 1; k <= n; ++k) {
        cur[m] = 1.0;
        for (std::int64_t i = 0; i < m; ++i) {
            const auto units = static_cast<std::int64_t>(std::floor(f * static_cast<double>(i) / unit + 1e-9));
            const std::int64_t b = std::min(units * unit, i);
            cur[i] = p * prev[std::min(i + b, m)] + q * prev[i - b];
        }
        std::swap(prev, cur);
    }
    return prev[grid.start_index];
}

} // namespace coinflip::analytics
