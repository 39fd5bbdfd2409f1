// Acceptance run: one PASS/FAIL line per criterion and sub-check.
// Exit status is non-zero if any line failed.

#include "coinflip/analytics.hpp"
#include "coinflip/behavior.hpp"
#include "coinflip/montecarlo.hpp"
#include "coinflip/service.hpp"

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <string>

using namespace coinflip;
namespace fs = std::filesystem;

namespace {

int failures = 0;
int passes = 0;

void line(bool ok, const std::string& criterion, const std::string& check, const std::string& detail = "")
{
    std::printf("%s  [%s] %s%s%s\n", ok ? "PASS" : "FAIL", criterion.c_str(), check.c_str(),
                detail.empty() ? "" : "  ", detail.c_str());
    std::fflush(stdout);
    (ok ? passes : failures) += 1;
}

void info(const std::string& criterion, const std::string& text)
{
    std::printf("INFO  [%s] %s\n", criterion.c_str(), text.c_str());
    std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* format, Args... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const std::vector<double> fractions{0.05, 0.10, 0.15, 0.20, 0.40};

analytics::GameParams standard_game(double f)
{
    return analytics::GameParams{0.6, f, 300, 25.0, 250.0};
}

bool same_bits(double a, double b)
{
    return std::memcmp(&a, &b, sizeof a) == 0;
}

bool same_bits(const montecarlo::SummaryStats& a, const montecarlo::SummaryStats& b)
{
    bool same = a.n_paths == b.n_paths && same_bits(a.p_cap, b.p_cap) && same_bits(a.p_cap_se, b.p_cap_se) &&
                same_bits(a.expected_payout, b.expected_payout) && same_bits(a.payout_se, b.payout_se) &&
                same_bits(a.ruin_rate, b.ruin_rate) && same_bits(a.mean_flips, b.mean_flips);
    for (std::size_t k = 0; k < a.payout_quantiles.size(); ++k) {
        same = same && same_bits(a.payout_quantiles[k], b.payout_quantiles[k]);
    }
    return same;
}

// ---------------------------------------------------------------------------

void constants_table()
{
    const std::string c = "constants-table";
    Stopwatch clock;
    const auto rows = analytics::quoted_constants();
    const double elapsed = clock.seconds();
    for (const auto& row : rows) {
        line(row.pass(), c, row.name,
             fmt("computed=%.10g quoted=\"%s\" range=[%.10g, %.10g]", row.computed, row.quoted.c_str(), row.low,
                 row.high));
    }
    line(elapsed < 1.0, c, "runtime < 1 s", fmt("%.4f s", elapsed));
}

void exact_cap_hit()
{
    const std::string c = "exact-cap-hit";
    Stopwatch clock;
    for (double f : fractions) {
        const auto d = analytics::exact_capped_distribution(standard_game(f));
        const bool near_kelly = f >= 0.1 && f <= 0.2;
        const double lo = near_kelly ? 0.93 : 0.67;
        const double hi = near_kelly ? 0.97 : 0.73;
        line(d.p_cap >= lo && d.p_cap <= hi, c, fmt("p_cap f=%.2f in [%.2f, %.2f]", f, lo, hi),
             fmt("p_cap=%.6f", d.p_cap));
        if (near_kelly) {
            line(d.expected_payout >= 230.0 && d.expected_payout <= 240.0, c,
                 fmt("expected_payout f=%.2f in [$230, $240]", f), fmt("expected_payout=$%.4f", d.expected_payout));
            info(c, fmt("f=%.2f p_cap * cap = $%.4f (payout counting capped paths only)", f, d.p_cap * 250.0));
        }
        line(std::abs(d.total_mass() - 1.0) <= 1e-12, c, fmt("mass f=%.2f sums to 1", f),
             fmt("|mass-1|=%.3g", std::abs(d.total_mass() - 1.0)));
    }
    const double elapsed = clock.seconds();
    line(elapsed < 10.0, c, "runtime < 10 s", fmt("%.3f s", elapsed));
}

void montecarlo_vs_oracle()
{
    const std::string c = "mc-vs-oracle";
    Stopwatch clock;
    for (double f : fractions) {
        montecarlo::BatchSpec spec;
        spec.strategy = strategy::Fractional{f};
        spec.n_paths = 100000;
        spec.master_seed = 42;
        spec.stop_at_cap = true;
        spec.rounding = montecarlo::Rounding::real;

        const auto sequential = montecarlo::run_batch(spec, 1);
        const auto exact = analytics::exact_capped_distribution(montecarlo::game_params(spec));
        const auto report = montecarlo::compare_to_oracle(sequential, exact);
        line(std::abs(report.z_p_cap) <= 3.0, c, fmt("f=%.2f p_cap within 3 SE", f),
             fmt("mc=%.5f exact=%.5f se=%.5f z=%+.2f", report.mc_p_cap, report.exact_p_cap, report.p_cap_se,
                 report.z_p_cap));
        line(std::abs(report.z_payout) <= 3.0, c, fmt("f=%.2f expected_payout within 3 SE", f),
             fmt("mc=%.4f exact=%.4f se=%.4f z=%+.2f", report.mc_payout, report.exact_payout, report.payout_se,
                 report.z_payout));

        const auto rerun = montecarlo::run_batch(spec, 1);
        line(same_bits(sequential, rerun), c, fmt("f=%.2f rerun with same seed is bit-identical", f));
        const auto parallel = montecarlo::run_batch(spec, 4);
        line(same_bits(sequential, parallel), c, fmt("f=%.2f 4 threads equal 1 thread", f));
    }
    const double elapsed = clock.seconds();
    line(elapsed < 120.0, c, "runtime < 2 min", fmt("%.2f s", elapsed));
}

void kelly_ruin()
{
    const std::string c = "kelly-ruin";
    montecarlo::BatchSpec spec;
    spec.strategy = strategy::Kelly{};
    spec.n_paths = 100000;
    spec.master_seed = 42;
    spec.stop_at_cap = false;
    spec.rounding = montecarlo::Rounding::cents;
    const auto stats = montecarlo::run_batch(spec);
    line(stats.ruin_rate <= 0.001, c, "ruin_rate <= 0.001 (whole cents, play all 300 flips)",
         fmt("ruin_rate=%.5f over %lld paths", stats.ruin_rate, static_cast<long long>(stats.n_paths)));
    spec.stop_at_cap = true;
    const auto stopped = montecarlo::run_batch(spec);
    line(stopped.ruin_rate <= 0.001, c, "ruin_rate <= 0.001 (whole cents, stop at cap)",
         fmt("ruin_rate=%.5f", stopped.ruin_rate));
}

void identities()
{
    const std::string c = "identities";

    std::mt19937_64 gen(20240601);
    double worst_ce = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int n = 10 * std::uniform_int_distribution<int>(1, 30)(gen);
        const int heads = std::uniform_int_distribution<int>(0, n)(gen);
        const double p = static_cast<double>(heads) / n;
        const double f = std::uniform_real_distribution<double>(0.01, 0.9)(gen);
        const double ce = analytics::certainty_equivalent(25.0, f, p, n);
        const double med = analytics::median_wealth(25.0, f, p, n);
        worst_ce = std::max(worst_ce, std::abs(ce - med) / std::max(med, 1e-300));
    }
    line(worst_ce <= 1e-9, c, "CE equals median at 20 random (f, p, n) with p*n whole",
         fmt("max relative gap %.3g", worst_ce));

    double worst_mass = 0.0;
    for (double f : {0.01, 0.05, 0.1, 0.15, 0.2, 0.4, 0.7, 0.95}) {
        for (bool stop : {true, false}) {
            const auto d = analytics::exact_capped_distribution(standard_game(f), {stop, false});
            worst_mass = std::max(worst_mass, std::abs(d.total_mass() - 1.0));
        }
        const auto open = analytics::exact_capped_distribution({0.6, f, 300, 25.0, std::nullopt});
        worst_mass = std::max(worst_mass, std::abs(open.total_mass() - 1.0));
    }
    line(worst_mass <= 1e-12, c, "exact distribution mass is 1 +- 1e-12", fmt("max |mass-1| %.3g", worst_mass));

    double worst_rr = 0.0;
    for (double p : {0.55, 0.6, 0.75}) {
        const double oracle = (2 * p - 1) / (2 * std::sqrt(p * (1 - p)));
        for (double f : {0.01, 0.05, 0.2, 0.5, 0.99}) {
            worst_rr = std::max(worst_rr, std::abs(analytics::return_risk_ratio(f, p) - oracle));
        }
    }
    line(worst_rr <= 1e-12, c, "return_risk_ratio does not depend on f", fmt("max deviation %.3g", worst_rr));

    for (double p : {0.55, 0.6, 0.75}) {
        // golden-section search on (0, 1)
        double a = 1e-9;
        double b = 1.0 - 1e-9;
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 200; ++it) {
            const double x1 = b - r * (b - a);
            const double x2 = a + r * (b - a);
            if (analytics::log_growth(x1, p) < analytics::log_growth(x2, p)) {
                a = x1;
            }
            else {
                b = x2;
            }
        }
        const double argmax = (a + b) / 2;
        line(std::abs(argmax - (2 * p - 1)) <= 1e-4, c, fmt("log_growth argmax is 2p-1 at p=%.2f", p),
             fmt("argmax=%.7f", argmax));
    }

    Stopwatch clock;
    const analytics::CapPolicy policy = analytics::optimal_cap_policy(25.0, 0.6, 300, 250.0, 25, 25);
    info(c, fmt("optimal cap policy on a 25c grid: success %.6f (%.2f s)", policy.success_probability(),
                clock.seconds()));
    for (double f : fractions) {
        const double on_grid = analytics::fixed_fraction_on_grid(25.0, 0.6, 300, 250.0, 25, 25, f);
        line(policy.success_probability() >= on_grid, c, fmt("optimal policy >= fixed f=%.2f on the same grid", f),
             fmt("policy=%.6f fixed=%.6f", policy.success_probability(), on_grid));
    }
    bool boundaries = true;
    for (int k = 0; k <= policy.flips(); ++k) {
        boundaries = boundaries && policy.value(k, 25000) == 1.0;
    }
    for (Cents w = 0; w < 25000; w += 25) {
        boundaries = boundaries && policy.value(0, w) == 0.0;
    }
    line(boundaries, c, "policy value is exactly 1 at the cap and exactly 0 with no flips left");
}

void behavior_fixtures()
{
    const std::string c = "behavior";
    const auto doubling = behavior::martingale_score(fixtures::doubling_session(9));
    line(doubling && doubling->score >= 1.0, c, "doubling martingale scores >= 1.0",
         doubling ? fmt("score=%.4f", doubling->score) : "no score");

    double worst = 0.0;
    int scored = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = behavior::martingale_score(fixtures::play(strategy::Kelly{}, 1000 + seed));
        if (s) {
            worst = std::max(worst, std::abs(s->score));
            ++scored;
        }
    }
    line(scored == 100 && worst <= 0.3, c, "100 seeded Kelly sessions score within |0.3|",
         fmt("scored=%d max|score|=%.4f", scored, worst));

    const auto constant = behavior::martingale_score(fixtures::play(strategy::ConstantAmount{100}, 5));
    line(constant && constant->score == 0.0, c, "constant-amount session scores exactly 0",
         constant ? fmt("score=%.17g", constant->score) : "no score");

    const auto cohort = behavior::cohort_report(fixtures::cohort_61());
    line(cohort.n_sessions == 61 && cohort.all_in_count == 18 && cohort.tails_any_count == 41 &&
             cohort.tails_gt5_count == 29 && cohort.tails_share_gt25_count == 13,
         c, "61-session fixture round-trips 18/41/29/13",
         fmt("n=%d all_in=%d tails_any=%d tails_gt5=%d tails_share_gt25=%d", cohort.n_sessions, cohort.all_in_count,
             cohort.tails_any_count, cohort.tails_gt5_count, cohort.tails_share_gt25_count));
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / fmt("coinflip-acceptance-%08x%08x", rd(), rd());
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

service::ServiceOptions service_options(const fs::path& dir, const std::shared_ptr<std::atomic<std::int64_t>>& now)
{
    service::ServiceOptions o;
    o.data_dir = dir;
    o.master_seed = 2024;
    o.test_mode = true;
    o.clock = [now] { return now->load(); };
    return o;
}

int error_status(const std::function<void()>& call, std::string* code = nullptr)
{
    try {
        call();
    }
    catch (const service::ServiceError& e) {
        if (code) {
            *code = e.code();
        }
        return e.status();
    }
    return 200;
}

void service_contract()
{
    const std::string c = "service";
    TempDir dir;
    auto now = std::make_shared<std::atomic<std::int64_t>>(1'700'000'000'000);
    std::map<std::string, service::SessionRecord> live_records;
    std::string scripted;
    {
        service::SessionService svc(service_options(dir.path, now));

        scripted = svc.create_session(Json::object())["session_id"];
        int accepted = 0;
        for (int i = 0; i < 300; ++i) {
            const Cents bankroll = svc.record(scripted).state.bankroll_cents;
            const Cents amount = std::clamp<Cents>(1 + (i * 37) % 60, 1, bankroll);
            const char* side = i % 7 == 3 ? "tails" : "heads";
            svc.post_bet(scripted, Json{{"side", side}, {"amount_cents", amount}});
            now->fetch_add(2000);
            ++accepted;
        }
        const auto record = svc.record(scripted);
        const auto replayed = service::replay_events(svc.list_events(scripted));
        line(accepted == 300 && record.state.flips_done == 300, c, "300 scripted bets accepted",
             fmt("flips_done=%d status=%s", record.state.flips_done, std::string(to_string(record.state.status)).c_str()));
        line(replayed == record, c, "event-log replay equals live state after 300 bets",
             fmt("events=%zu bankroll=%lld", svc.list_events(scripted).size(),
                 static_cast<long long>(record.state.bankroll_cents)));
        line(service::visible_state(replayed, svc.now_ms()) == svc.get_state(scripted), c,
             "replayed visible state equals get_state");

        const std::string timed = svc.create_session(Json::object())["session_id"];
        svc.post_bet(timed, Json{{"side", "heads"}, {"amount_cents", 100}});
        now->fetch_add(1800 * 1000);
        std::string code;
        const int status = error_status([&] { svc.post_bet(timed, Json{{"side", "heads"}, {"amount_cents", 100}}); },
                                        &code);
        line(status == 409 && code == "session_over", c, "bet after deadline is a 409 session_over",
             fmt("status=%d code=%s", status, code.c_str()));
        line(svc.record(timed).state.flips_done == 1, c, "rejected late bet consumes no flip");

        const Json first = svc.finish_session(timed);
        const Json second = svc.finish_session(timed);
        const auto events = svc.list_events(timed);
        const auto finished = std::count_if(events.begin(), events.end(), [](const Event& e) {
            return e.kind == EventKind::session_finished;
        });
        line(first == second && finished == 1, c, "double finish returns the same payout with one terminal event",
             fmt("payout=%lld finished_events=%lld", first["payout_cents"].get<long long>(),
                 static_cast<long long>(finished)));

        for (int s = 0; s < 5; ++s) {
            const std::string id = svc.create_session(Json::object())["session_id"];
            for (int i = 0; i < 3 * s + 1; ++i) {
                svc.post_bet(id, Json{{"side", "heads"}, {"amount_cents", 25}});
            }
            if (s == 2) {
                svc.record_answer(id, Json{{"question_id", "believes_bias"}, {"value", "yes"}});
            }
            if (s == 4) {
                svc.finish_session(id);
            }
        }
        for (const auto& id : svc.session_ids()) {
            live_records[id] = svc.record(id);
        }
    }

    // simulate a crash mid-write on two sessions: a torn line and a bet with no flip
    // damage two sessions that are still open for play
    std::vector<std::string> ids;
    for (const auto& [id, rec] : live_records) {
        if (rec.state.status == Status::active && !rec.finished_payout && ids.size() < 2) {
            ids.push_back(id);
        }
    }
    {
        std::ofstream torn(dir.path / (ids[0] + ".jsonl"), std::ios::app);
        torn << R"({"session_id":")" << ids[0] << R"(","seq":)" << live_records[ids[0]].next_seq
             << R"(,"kind":"bet_pla)";
    }
    {
        const auto& rec = live_records[ids[1]];
        std::ofstream out(dir.path / (ids[1] + ".jsonl"), std::ios::app);
        out << to_line(Event{ids[1], rec.next_seq, 0, EventKind::bet_placed, to_json(BetIntent{Side::heads, 10})});
    }

    service::SessionService recovered(service_options(dir.path, now));
    bool all_match = recovered.session_ids().size() == live_records.size();
    for (const auto& [id, rec] : live_records) {
        all_match = all_match && recovered.record(id) == rec;
    }
    line(all_match, c, "crash-recovery scan rebuilds every session",
         fmt("sessions=%zu (one torn line, one dangling bet)", live_records.size()));

    bool appendable = true;
    for (const auto& id : {ids[0], ids[1]}) {
        recovered.post_bet(id, Json{{"side", "heads"}, {"amount_cents", 1}});
        appendable = appendable && recovered.record(id).state.flips_done == live_records[id].state.flips_done + 1 &&
                     service::replay_events(recovered.list_events(id)) == recovered.record(id);
    }
    service::SessionService reread(service_options(dir.path, now));
    for (const auto& id : {ids[0], ids[1]}) {
        appendable = appendable && reread.record(id) == recovered.record(id);
    }
    line(appendable, c, "repaired logs accept new events and replay cleanly");
    info(c, "built and run without the web client");
}

} // namespace

int main()
{
    struct Suite {
        const char* name;
        const char* title;
        void (*run)();
    };
    const std::vector<Suite> suites{
        {"constants-table", "closed-form constants table", constants_table},
        {"exact-cap-hit", "cap-hit probabilities and payouts from the exact lattice", exact_cap_hit},
        {"mc-vs-oracle", "Monte Carlo agrees with the exact lattice, reproducibly", montecarlo_vs_oracle},
        {"kelly-ruin", "Kelly play is almost never ruined", kelly_ruin},
        {"identities", "identity and property suites", identities},
        {"behavior", "behavioral metrics on synthetic fixtures", behavior_fixtures},
        {"service", "event-sourced service contract", service_contract},
    };
    Stopwatch total;
    std::vector<std::pair<const Suite*, int>> outcome;
    for (const auto& suite : suites) {
        const int before = failures;
        try {
            suite.run();
        }
        catch (const std::exception& ex) {
            line(false, suite.name, "suite raised an exception", ex.what());
        }
        outcome.emplace_back(&suite, failures - before);
    }
    std::printf("\nCriteria:\n");
    for (const auto& [suite, failed] : outcome) {
        std::printf("%s  %-16s %s%s\n", failed == 0 ? "PASS" : "FAIL", suite->name, suite->title,
                    failed == 0 ? "" : fmt("  (%d failed check%s)", failed, failed == 1 ? "" : "s").c_str());
    }
    std::printf("\n%d checks passed, %d failed (%.1f s)\n", passes, failures, total.seconds());
    return failures == 0 ? 0 : 1;
}
