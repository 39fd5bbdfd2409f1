#include "coinflip/analytics.hpp"
#include "coinflip/strategies.hpp"

#include <cmath>

namespace coinflip::analytics {

std::vector<QuotedConstant> quoted_constants()
{
    constexpr double p = 0.6;
    const double kelly = kelly_fraction(p);

    GameConfig config;
    Strategy opener(strategy::Kelly{});
    const auto opening = opener.next_bet(make_view(new_session(config), config, std::nullopt), p, 1);
    const double opening_dollars = opening ? static_cast<double>(opening->amount_cents) / 100.0 : 0.0;

    const double g = log_growth(kelly, p);
    const double ce = certainty_equivalent(25.0, kelly, p, 300);
    const double median = median_wealth(25.0, kelly, p, 300);

    std::vector<QuotedConstant> rows;
    rows.push_back({"kelly_fraction(0.6)", kelly, "20% ($5 of $25)", 0.2 - 1e-12, 0.2 + 1e-12});
    rows.push_back({"kelly opening bet on $25 ($)", opening_dollars, "$5 on heads", 5.0, 5.0});
    rows.push_back({"per_flip_edge(0.2, 0.6)", per_flip_edge(kelly, p), "4%", 0.04 - 1e-12, 0.04 + 1e-12});
    rows.push_back({"uncapped_ev(25, 0.2, 0.6, 300) ($)", uncapped_ev(25.0, kelly, p, 300), "$3,220,637",
                    3220637.0 - 5.0, 3220637.0 + 5.0});
    rows.push_back({"log_growth(0.2, 0.6)", g, "0.0201", 0.0201 - 1e-4, 0.0201 + 1e-4});
    rows.push_back({"exp(log_growth)", std::exp(g), "1.02034", 1.02034 - 1e-5, 1.02034 + 1e-5});
    rows.push_back({"certainty_equivalent(25, 0.2, 0.6, 300) ($)", ce, "$10,504", 10504.0 - 5.0, 10504.0 + 5.0});
    rows.push_back({"median_wealth(25, 0.2, 0.6, 300) ($)", median, "$10,504", 10504.0 - 5.0, 10504.0 + 5.0});
    rows.push_back({"|CE - median| / median", std::abs(ce - median) / median, "CE is the median", 0.0, 1e-9});
    rows.push_back({"return_risk_ratio(0.2, 0.6)", return_risk_ratio(kelly, p), "0.204", 0.204 - 5e-4, 0.204 + 5e-4});
    rows.push_back({"equities return/risk (5% / 15%)", return_risk_ratio_from_moments(0.05, 0.15), "about 0.33",
                    0.333 - 1e-3, 0.333 + 1e-3});
    rows.push_back({"all_in_ruin(0.6, heads)", all_in_ruin(p, Side::heads), "40%", 0.4 - 1e-12, 0.4 + 1e-12});
    rows.push_back({"all_in_ruin(0.6, tails)", all_in_ruin(p, Side::tails), "60%", 0.6 - 1e-12, 0.6 + 1e-12});
    rows.push_back({"max-win envelope 25*1.2^300 ($)", wealth_after(25.0, kelly, 300, 0), "about $14 trillion trillion",
                    1.3e25, 1.5e25});
    rows.push_back({"210 heads / 90 tails wealth ($)", wealth_after(25.0, kelly, 210, 90), "about $2 billion", 1.8e9,
                    2.2e9});
    return rows;
}

} // namespace coinflip::analytics
