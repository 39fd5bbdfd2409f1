#include "coinflip/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace coinflip::behavior {

std::optional<Json> SessionLedger::answer(const std::string& question_id) const
{
    for (auto it = answers.rbegin(); it != answers.rend(); ++it) {
        if (it->first == question_id) {
            return it->second;
        }
    }
    return std::nullopt;
}

void require_consistent(const SessionLedger& ledger)
{
    for (std::size_t i = 1; i < ledger.records.size(); ++i) {
        if (ledger.records[i].seq <= ledger.records[i - 1].seq) {
            throw std::invalid_argument("session " + ledger.session_id + ": flip seq not strictly increasing");
        }
    }
    replay(ledger.config, ledger.records);
}

BetFractionStats bet_fraction_stats(const SessionLedger& ledger)
{
    if (ledger.records.empty()) {
        throw std::invalid_argument("session " + ledger.session_id + " has no flips");
    }
    BetFractionStats stats;
    double sum = 0.0;
    std::vector<double> fractions;
    fractions.reserve(ledger.records.size());
    for (const auto& r : ledger.records) {
        const Cents before = r.bankroll_before_cents();
        const double fraction = before > 0 ? static_cast<double>(r.amount_cents) / static_cast<double>(before) : 0.0;
        fractions.push_back(fraction);
        sum += fraction;
        stats.max = std::max(stats.max, fraction);
        if (r.amount_cents == before) {
            ++stats.all_in_flips;
        }
    }
    const auto n = static_cast<double>(fractions.size());
    stats.mean = sum / n;
    double ss = 0.0;
    for (double x : fractions) {
        ss += (x - stats.mean) * (x - stats.mean);
    }
    stats.std = std::sqrt(ss / n);
    return stats;
}

TailsStats tails_stats(const SessionLedger& ledger, int streak_k)
{
    if (streak_k < 1) {
        throw std::invalid_argument("streak length must be at least 1");
    }
    TailsStats stats;
    stats.streak_k = streak_k;
    const auto& records = ledger.records;
    stats.flips = static_cast<int>(records.size());
    int tails_after_streak = 0;
    int heads_run = 0; // consecutive heads outcomes immediately before flip i
    for (const auto& r : records) {
        const bool tails_bet = r.side == Side::tails;
        stats.tails_count += tails_bet ? 1 : 0;
        if (heads_run >= streak_k) {
            ++stats.streak_windows;
            tails_after_streak += tails_bet ? 1 : 0;
        }
        heads_run = r.outcome == Side::heads ? heads_run + 1 : 0;
    }
    if (stats.flips > 0) {
        stats.tails_share = static_cast<double>(stats.tails_count) / stats.flips;
    }
    if (stats.streak_windows > 0) {
        stats.post_streak_tails_rate = static_cast<double>(tails_after_streak) / stats.streak_windows;
        stats.streak_lift = *stats.post_streak_tails_rate - stats.tails_share;
    }
    return stats;
}

namespace {

struct ConditionalMeans {
    double after_loss = 0.0;
    int n_loss = 0;
    double after_win = 0.0;
    int n_win = 0;

    void add(double ratio, bool previous_won)
    {
        if (previous_won) {
            after_win += ratio;
            ++n_win;
        }
        else {
            after_loss += ratio;
            ++n_loss;
        }
    }
    double score() const { return after_loss / n_loss - after_win / n_win; }
};

} // namespace

std::optional<MartingaleScore> martingale_score(const SessionLedger& ledger)
{
    const auto& records = ledger.records;
    if (records.size() < 3) {
        return std::nullopt;
    }
    ConditionalMeans amounts;
    ConditionalMeans fractions;
    for (std::size_t t = 1; t < records.size(); ++t) {
        const auto& prev = records[t - 1];
        const auto& cur = records[t];
        const double amount_ratio = static_cast<double>(cur.amount_cents) / static_cast<double>(prev.amount_cents);
        const double prev_fraction =
            static_cast<double>(prev.amount_cents) / static_cast<double>(prev.bankroll_before_cents());
        const double cur_fraction =
            static_cast<double>(cur.amount_cents) / static_cast<double>(cur.bankroll_before_cents());
        amounts.add(amount_ratio, prev.won);
        fractions.add(cur_fraction / prev_fraction, prev.won);
    }
    if (amounts.n_loss == 0 || amounts.n_win == 0) {
        return std::nullopt;
    }
    MartingaleScore score;
    score.amount_score = amounts.score();
    score.fraction_score = fractions.score();
    score.score =
        std::abs(score.fraction_score) < std::abs(score.amount_score) ? score.fraction_score : score.amount_score;
    return score;
}

std::optional<bool> as_yes_no(const Json& value)
{
    if (value.is_boolean()) {
        return value.get<bool>();
    }
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s == "yes" || s == "true" || s == "y") {
            return true;
        }
        if (s == "no" || s == "false" || s == "n") {
            return false;
        }
    }
    return std::nullopt;
}

SessionMetrics session_metrics(const SessionLedger& ledger, int streak_k, double martingale_threshold)
{
    SessionMetrics m;
    m.session_id = ledger.session_id;
    m.flips = static_cast<int>(ledger.records.size());
    if (!ledger.records.empty()) {
        m.fractions = bet_fraction_stats(ledger);
    }
    m.tails = tails_stats(ledger, streak_k);
    m.martingale = martingale_score(ledger);
    m.martingale_flagged = m.martingale && m.martingale->score >= martingale_threshold;
    if (auto a = ledger.answer(bias_question_id)) {
        m.believes_bias = as_yes_no(*a);
    }
    return m;
}

CohortStats cohort_report(const std::vector<SessionLedger>& ledgers, int streak_k, double martingale_threshold)
{
    if (ledgers.empty()) {
        throw std::invalid_argument("cohort report needs at least one session");
    }
    CohortStats c;
    c.n_sessions = static_cast<int>(ledgers.size());
    c.streak_k = streak_k;
    double fraction_sum = 0.0;
    int fraction_n = 0;
    double lift_sum = 0.0;
    int lift_n = 0;
    int belief_yes = 0;
    int belief_n = 0;
    for (const auto& ledger : ledgers) {
        const SessionMetrics m = session_metrics(ledger, streak_k, martingale_threshold);
        if (m.fractions) {
            fraction_sum += m.fractions->mean;
            ++fraction_n;
            c.all_in_count += m.fractions->all_in_flips > 0 ? 1 : 0;
        }
        c.tails_any_count += m.tails.tails_count > 0 ? 1 : 0;
        c.tails_gt5_count += m.tails.tails_count > 5 ? 1 : 0;
        c.tails_share_gt25_count += m.tails.tails_share > 0.25 ? 1 : 0;
        if (m.tails.streak_lift) {
            lift_sum += *m.tails.streak_lift;
            ++lift_n;
        }
        c.martingale_flagged_count += m.martingale_flagged ? 1 : 0;
        if (m.believes_bias) {
            belief_yes += *m.believes_bias ? 1 : 0;
            ++belief_n;
        }
    }
    if (fraction_n > 0) {
        c.mean_bet_fraction = fraction_sum / fraction_n;
    }
    if (lift_n > 0) {
        c.mean_streak_lift = lift_sum / lift_n;
    }
    if (belief_n > 0) {
        c.belief_in_bias_share = static_cast<double>(belief_yes) / belief_n;
    }
    return c;
}

std::vector<SessionLedger> ledgers_from_events(const std::vector<Event>& events)
{
    std::vector<SessionLedger> ledgers;
    std::map<std::string, std::size_t> index;
    auto ledger_for = [&](const std::string& id) -> SessionLedger& {
        auto [it, inserted] = index.emplace(id, ledgers.size());
        if (inserted) {
            ledgers.push_back(SessionLedger{id, GameConfig{}, {}, {}});
        }
        return ledgers[it->second];
    };
    for (const auto& e : events) {
        SessionLedger& ledger = ledger_for(e.session_id);
        switch (e.kind) {
        case EventKind::session_created:
            ledger.config = config_from_json(e.payload.at("config"));
            break;
        case EventKind::flip_resolved:
            ledger.records.push_back(flip_from_json(e.payload));
            break;
        case EventKind::answer_recorded:
            ledger.answers.emplace_back(e.payload.at("question_id").get<std::string>(), e.payload.at("value"));
            break;
        default:
            break;
        }
    }
    return ledgers;
}

} // namespace coinflip::behavior
