#include "coinflip/strategies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

namespace coinflip {

double kelly_fraction(double p)
{
    return std::clamp(2.0 * p - 1.0, 0.0, 1.0);
}

double glide_fraction(double bankroll, double known_cap, int flips_remaining, double f_start)
{
    if (bankroll >= known_cap) {
        return 0.0;
    }
    if (flips_remaining < 1 || bankroll <= 0.0) {
        return f_start;
    }
    const double needed = std::log(known_cap / bankroll);
    auto reaches = [&](double g) { return flips_remaining * std::log1p(g) >= needed; };
    if (!reaches(f_start)) {
        return f_start;
    }
    double lo = 0.0;
    double hi = f_start;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        if (reaches(mid)) {
            hi = mid;
        }
        else {
            lo = mid;
        }
    }
    return hi;
}

namespace {

using namespace strategy;

std::map<std::string, std::string, std::less<>> parse_params(std::string_view text)
{
    std::map<std::string, std::string, std::less<>> params;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw std::invalid_argument("strategy parameter '" + std::string(item) + "' is not key=value");
        }
        params.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    return params;
}

double to_double(const std::string& key, const std::string& value)
{
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &used);
    }
    catch (const std::exception&) {
        used = 0;
    }
    if (used != value.size() || value.empty()) {
        throw std::invalid_argument("strategy parameter " + key + "='" + value + "' is not a number");
    }
    return out;
}

Cents to_cents(const std::string& key, const std::string& value)
{
    Cents out = 0;
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("strategy parameter " + key + "='" + value + "' is not whole cents");
    }
    return out;
}

template <typename T>
T take(std::map<std::string, std::string, std::less<>>& params, const std::string& key, T fallback,
       T (*convert)(const std::string&, const std::string&))
{
    auto it = params.find(key);
    if (it == params.end()) {
        return fallback;
    }
    T value = convert(key, it->second);
    params.erase(it);
    return value;
}

std::string format_number(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

} // namespace

void require_valid(const StrategySpec& spec)
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("invalid strategy: " + what); };
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Fractional>) {
                if (!(s.f > 0.0 && s.f <= 1.0)) {
                    fail("fractional f must lie in (0, 1]");
                }
            }
            else if constexpr (std::is_same_v<T, ConstantAmount>) {
                if (s.c < 1) {
                    fail("constant c must be at least 1 cent");
                }
            }
            else if constexpr (std::is_same_v<T, Martingale>) {
                if (s.base < 1) {
                    fail("martingale base must be at least 1 cent");
                }
                if (!(s.factor > 1.0)) {
                    fail("martingale factor must exceed 1");
                }
            }
            else if constexpr (std::is_same_v<T, Glide>) {
                if (!(s.f_start > 0.0 && s.f_start <= 1.0)) {
                    fail("glide f must lie in (0, 1]");
                }
            }
        },
        spec);
}

StrategySpec parse_strategy(std::string_view text)
{
    const auto colon = text.find(':');
    const std::string name(text.substr(0, colon));
    auto params = parse_params(colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1));

    StrategySpec spec;
    if (name == "kelly") {
        spec = Kelly{};
    }
    else if (name == "fractional") {
        spec = Fractional{take(params, "f", 0.2, &to_double)};
    }
    else if (name == "constant") {
        spec = ConstantAmount{take(params, "c", Cents{100}, &to_cents)};
    }
    else if (name == "martingale") {
        Martingale m;
        m.base = take(params, "base", m.base, &to_cents);
        m.factor = take(params, "factor", m.factor, &to_double);
        if (auto it = params.find("mode"); it != params.end()) {
            if (it->second == "reset_on_win") {
                m.mode = MartingaleMode::reset_on_win;
            }
            else if (it->second == "halve_on_win") {
                m.mode = MartingaleMode::halve_on_win;
            }
            else {
                throw std::invalid_argument("unknown martingale mode '" + it->second + "'");
            }
            params.erase(it);
        }
        spec = m;
    }
    else if (name == "allin") {
        AllIn a;
        if (auto it = params.find("side"); it != params.end()) {
            a.side = parse_side(it->second);
            params.erase(it);
        }
        spec = a;
    }
    else if (name == "glide") {
        spec = Glide{take(params, "f", 0.2, &to_double)};
    }
    else {
        throw std::invalid_argument("unknown strategy '" + name + "'");
    }
    if (!params.empty()) {
        throw std::invalid_argument("unknown parameter '" + params.begin()->first + "' for strategy " + name);
    }
    require_valid(spec);
    return spec;
}

std::string to_string(const StrategySpec& spec)
{
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Kelly>) {
                return "kelly";
            }
            else if constexpr (std::is_same_v<T, Fractional>) {
                return "fractional:f=" + format_number(s.f);
            }
            else if constexpr (std::is_same_v<T, ConstantAmount>) {
                return "constant:c=" + std::to_string(s.c);
            }
            else if constexpr (std::is_same_v<T, Martingale>) {
                return "martingale:base=" + std::to_string(s.base) + ",factor=" + format_number(s.factor) +
                       ",mode=" + (s.mode == MartingaleMode::reset_on_win ? "reset_on_win" : "halve_on_win");
            }
            else if constexpr (std::is_same_v<T, AllIn>) {
                return "allin:side=" + std::string(coinflip::to_string(s.side));
            }
            else {
                return "glide:f=" + format_number(s.f_start);
            }
        },
        spec);
}

std::optional<double> fixed_fraction(const StrategySpec& spec, double p)
{
    if (std::holds_alternative<Kelly>(spec)) {
        return kelly_fraction(p);
    }
    if (const auto* frac = std::get_if<Fractional>(&spec)) {
        return frac->f;
    }
    return std::nullopt;
}

StateView make_view(const GameState& state, const GameConfig& config, const std::optional<FlipRecord>& last)
{
    StateView view;
    view.bankroll_cents = state.bankroll_cents;
    view.flips_done = state.flips_done;
    view.flips_remaining = std::max(0, config.max_flips - state.flips_done);
    view.last_record = last;
    if (config.cap_cents && (config.cap_disclosure == CapDisclosure::shown || state.cap_hit)) {
        view.known_cap_cents = config.cap_cents;
    }
    return view;
}

Strategy::Strategy(StrategySpec spec) : spec_(std::move(spec))
{
    require_valid(spec_);
}

Side Strategy::side() const
{
    if (const auto* a = std::get_if<AllIn>(&spec_)) {
        return a->side;
    }
    return Side::heads;
}

double Strategy::desired_amount(double bankroll, int flips_remaining, std::optional<double> known_cap,
                                double p_heads) const
{
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Kelly>) {
                return kelly_fraction(p_heads) * bankroll;
            }
            else if constexpr (std::is_same_v<T, Fractional>) {
                return s.f * bankroll;
            }
            else if constexpr (std::is_same_v<T, ConstantAmount>) {
                return static_cast<double>(s.c);
            }
            else if constexpr (std::is_same_v<T, Martingale>) {
                const double base = static_cast<double>(s.base);
                if (!run_.last_amount) {
                    return base;
                }
                if (!run_.last_won) {
                    return *run_.last_amount * s.factor;
                }
                if (s.mode == MartingaleMode::reset_on_win) {
                    return base;
                }
                return std::max(base, *run_.last_amount / 2.0);
            }
            else if constexpr (std::is_same_v<T, AllIn>) {
                return bankroll;
            }
            else {
                if (!known_cap || flips_remaining < 1) {
                    return s.f_start * bankroll;
                }
                return glide_fraction(bankroll, *known_cap, flips_remaining, s.f_start) * bankroll;
            }
        },
        spec_);
}

std::optional<BetIntent> Strategy::next_bet(const StateView& view, double p_heads, Cents min_bet_cents) const
{
    if (view.bankroll_cents < min_bet_cents || run_.all_in_fired) {
        return std::nullopt;
    }
    std::optional<double> cap;
    if (view.known_cap_cents) {
        cap = static_cast<double>(*view.known_cap_cents);
    }
    const double wanted = desired_amount(static_cast<double>(view.bankroll_cents), view.flips_remaining, cap, p_heads);
    // Tolerate representation error in f * bankroll before flooring.
    const double floored = std::floor(wanted + 1e-6);
    Cents amount = floored >= static_cast<double>(view.bankroll_cents) ? view.bankroll_cents
                                                                        : static_cast<Cents>(floored);
    amount = std::clamp(amount, min_bet_cents, view.bankroll_cents);
    return BetIntent{side(), amount};
}

std::optional<Strategy::RealBet> Strategy::next_bet_real(double bankroll, int flips_remaining,
                                                         std::optional<double> known_cap, double p_heads) const
{
    if (bankroll <= 0.0 || run_.all_in_fired) {
        return std::nullopt;
    }
    const double wanted = desired_amount(bankroll, flips_remaining, known_cap, p_heads);
    return RealBet{side(), std::clamp(wanted, 0.0, bankroll)};
}

void Strategy::observe(double amount, bool won)
{
    run_.last_amount = amount;
    run_.last_won = won;
    if (std::holds_alternative<AllIn>(spec_)) {
        run_.all_in_fired = true;
    }
}

} // namespace coinflip
