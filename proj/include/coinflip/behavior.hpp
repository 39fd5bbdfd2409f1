#pragma once

#include "coinflip/engine.hpp"
#include "coinflip/events.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

/// Behavioral metrics over recorded betting sessions.
namespace coinflip::behavior {

inline constexpr int default_streak_k = 3;
inline constexpr double default_martingale_threshold = 0.5;
inline constexpr const char* bias_question_id = "believes_bias";

struct SessionLedger {
    std::string session_id;
    GameConfig config;
    std::vector<FlipRecord> records;
    std::vector<std::pair<std::string, Json>> answers; // in recording order

    /// Last recorded value for `question_id`.
    std::optional<Json> answer(const std::string& question_id) const;
};

/// Throws std::invalid_argument if seq is not strictly increasing or the
/// records do not replay from the config.
void require_consistent(const SessionLedger& ledger);

/// Bet size as a fraction of the bankroll before each flip.
struct BetFractionStats {
    double mean = 0.0;
    double std = 0.0; // population standard deviation; the erraticism measure
    double max = 0.0;
    int all_in_flips = 0;
};

/// Throws std::invalid_argument on an empty ledger.
BetFractionStats bet_fraction_stats(const SessionLedger& ledger);

struct TailsStats {
    int flips = 0;
    int tails_count = 0;
    double tails_share = 0.0;
    int streak_k = default_streak_k;
    int streak_windows = 0; // bets preceded by >= k straight heads outcomes
    std::optional<double> post_streak_tails_rate;
    std::optional<double> streak_lift;
};

TailsStats tails_stats(const SessionLedger& ledger, int streak_k = default_streak_k);

/*
 * Response of bet size to the previous result.
 *
 * On each scale (absolute amount, and fraction of bankroll) the score is
 *   mean(size_t / size_{t-1} | flip t-1 lost) - mean(size_t / size_{t-1} | flip t-1 won).
 * The reported score is the scale with the smaller magnitude: a player who
 * stakes a constant amount or a constant fraction shows ~0 on one of the two,
 * while a doubler shows a large positive lift on both.
 */
struct MartingaleScore {
    double score = 0.0;
    double amount_score = 0.0;
    double fraction_score = 0.0;
};

/// nullopt with fewer than 3 flips or if either conditional set is empty.
std::optional<MartingaleScore> martingale_score(const SessionLedger& ledger);

/// Per-session metrics as reported by `analyze`.
struct SessionMetrics {
    std::string session_id;
    int flips = 0;
    std::optional<BetFractionStats> fractions;
    TailsStats tails;
    std::optional<MartingaleScore> martingale;
    bool martingale_flagged = false;
    std::optional<bool> believes_bias;
};

SessionMetrics session_metrics(const SessionLedger& ledger, int streak_k = default_streak_k,
                               double martingale_threshold = default_martingale_threshold);

struct CohortStats {
    int n_sessions = 0;
    int streak_k = default_streak_k;
    double mean_bet_fraction = 0.0; // mean of per-session means
    int all_in_count = 0;           // sessions with at least one all-in flip
    int tails_any_count = 0;
    int tails_gt5_count = 0;
    int tails_share_gt25_count = 0;
    std::optional<double> mean_streak_lift;
    int martingale_flagged_count = 0;
    std::optional<double> belief_in_bias_share;
};

/// Throws std::invalid_argument on an empty cohort.
CohortStats cohort_report(const std::vector<SessionLedger>& ledgers, int streak_k = default_streak_k,
                          double martingale_threshold = default_martingale_threshold);

/// Groups an event stream into one ledger per session (first-seen order).
std::vector<SessionLedger> ledgers_from_events(const std::vector<Event>& events);

/// Interprets an answer as yes/no, if it is one.
std::optional<bool> as_yes_no(const Json& value);

} // namespace coinflip::behavior
