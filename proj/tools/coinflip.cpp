// coinflip: command-line front end for the biased-coin betting laboratory.

#include "coinflip/analytics.hpp"
#include "coinflip/behavior.hpp"
#include "coinflip/events.hpp"
#include "coinflip/http_server.hpp"
#include "coinflip/montecarlo.hpp"
#include "coinflip/service.hpp"
#include "coinflip/strategies.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

using namespace coinflip;

namespace {

enum class Format { table, csv, structured };

/// Rows of pre-formatted cells plus the structured form of the same data.
struct Report {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    Json structured;
};

std::string num(double x, int precision = 6)
{
    std::ostringstream os;
    os << std::setprecision(precision) << x;
    return os.str();
}

std::string fixed(double x, int decimals)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << x;
    return os.str();
}

std::string csv_cell(const std::string& cell)
{
    if (cell.find_first_of(",\"\n") == std::string::npos) {
        return cell;
    }
    std::string out = "\"";
    for (char ch : cell) {
        out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return out + "\"";
}

void emit(const Report& report, Format format, std::ostream& out)
{
    if (format == Format::structured) {
        out << report.structured.dump(2) << "\n";
        return;
    }
    if (format == Format::csv) {
        for (std::size_t i = 0; i < report.headers.size(); ++i) {
            out << (i ? "," : "") << csv_cell(report.headers[i]);
        }
        out << "\n";
        for (const auto& row : report.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                out << (i ? "," : "") << csv_cell(row[i]);
            }
            out << "\n";
        }
        return;
    }
    std::vector<std::size_t> width(report.headers.size());
    for (std::size_t i = 0; i < width.size(); ++i) {
        width[i] = report.headers[i].size();
        for (const auto& row : report.rows) {
            width[i] = std::max(width[i], row[i].size());
        }
    }
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << cells[i];
        }
        out << "\n";
    };
    line(report.headers);
    std::vector<std::string> rule;
    for (auto w : width) {
        rule.emplace_back(w, '-');
    }
    line(rule);
    for (const auto& row : report.rows) {
        line(row);
    }
}

void emit_to(const Report& report, Format format, const std::string& path)
{
    if (path.empty()) {
        emit(report, format, std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    emit(report, format, out);
}

const std::map<std::string, Format> format_names{
    {"table", Format::table}, {"csv", Format::csv}, {"structured", Format::structured}};

void add_format(CLI::App* cmd, Format& format)
{
    cmd->add_option("--format", format, "Output format")
        ->transform(CLI::CheckedTransformer(format_names, CLI::ignore_case))
        ->option_text("table|csv|structured [table]");
}

// ---------------------------------------------------------------------------

Report constants_table()
{
    Report r;
    r.headers = {"quantity", "computed", "quoted", "accepted range", "status"};
    r.structured = Json::array();
    for (const auto& c : analytics::quoted_constants()) {
        const std::string range = c.low == c.high ? num(c.low, 10) : "[" + num(c.low, 10) + ", " + num(c.high, 10) + "]";
        r.rows.push_back({c.name, num(c.computed, 10), c.quoted, range, c.pass() ? "ok" : "MISMATCH"});
        r.structured.push_back({{"quantity", c.name},
                                {"computed", c.computed},
                                {"quoted", c.quoted},
                                {"low", c.low},
                                {"high", c.high},
                                {"pass", c.pass()}});
    }
    return r;
}

Report exact_report(const analytics::ExactDistribution& d, bool with_atoms)
{
    Report r;
    r.structured = {{"p", d.params.p},
                    {"f", d.params.f},
                    {"n", d.params.n},
                    {"w0", d.params.w0},
                    {"cap", d.params.cap ? Json(*d.params.cap) : Json(nullptr)},
                    {"stop_at_cap", d.options.stop_at_cap},
                    {"strict_exceed", d.options.strict_exceed},
                    {"p_cap", d.p_cap},
                    {"expected_payout", d.expected_payout},
                    {"total_mass", d.total_mass()},
                    {"n_atoms", d.atoms.size()}};
    if (with_atoms) {
        r.headers = {"heads", "tails", "wealth", "probability", "absorbed"};
        Json atoms = Json::array();
        for (const auto& a : d.atoms) {
            r.rows.push_back({std::to_string(a.heads), std::to_string(a.tails), num(a.wealth, 10),
                              num(a.probability, 10), a.absorbed ? "yes" : "no"});
            atoms.push_back({{"heads", a.heads},
                             {"tails", a.tails},
                             {"wealth", a.wealth},
                             {"probability", a.probability},
                             {"absorbed", a.absorbed}});
        }
        r.structured["atoms"] = atoms;
    }
    else {
        r.headers = {"quantity", "value"};
        for (const char* key : {"p", "f", "n", "w0", "cap", "stop_at_cap", "p_cap", "expected_payout", "total_mass",
                                "n_atoms"}) {
            r.rows.push_back({key, r.structured[key].dump()});
        }
    }
    return r;
}

Report simulate_report(const montecarlo::SummaryStats& s, const std::optional<montecarlo::OracleReport>& oracle)
{
    Report r;
    r.headers = {"quantity", "value"};
    Json quantiles = Json::object();
    for (std::size_t k = 0; k < montecarlo::quantile_levels.size(); ++k) {
        quantiles["q" + std::to_string(static_cast<int>(montecarlo::quantile_levels[k] * 100))] =
            s.payout_quantiles[k];
    }
    r.structured = {{"strategy", to_string(s.spec.strategy)},
                    {"config", to_json(s.spec.config)},
                    {"n_paths", s.n_paths},
                    {"master_seed", s.spec.master_seed},
                    {"stop_at_cap", s.spec.stop_at_cap},
                    {"rounding", montecarlo::to_string(s.spec.rounding)},
                    {"p_cap", s.p_cap},
                    {"p_cap_se", s.p_cap_se},
                    {"expected_payout", s.expected_payout},
                    {"payout_se", s.payout_se},
                    {"ruin_rate", s.ruin_rate},
                    {"payout_quantiles", quantiles},
                    {"mean_flips", s.mean_flips}};
    r.rows = {{"strategy", to_string(s.spec.strategy)},
              {"paths", std::to_string(s.n_paths)},
              {"seed", std::to_string(s.spec.master_seed)},
              {"stop_at_cap", s.spec.stop_at_cap ? "true" : "false"},
              {"rounding", std::string(montecarlo::to_string(s.spec.rounding))},
              {"p_cap", fixed(s.p_cap, 5) + " ± " + fixed(s.p_cap_se, 5)},
              {"expected_payout ($)", fixed(s.expected_payout, 3) + " ± " + fixed(s.payout_se, 3)},
              {"ruin_rate", fixed(s.ruin_rate, 5)},
              {"mean_flips", fixed(s.mean_flips, 2)}};
    for (std::size_t k = 0; k < montecarlo::quantile_levels.size(); ++k) {
        r.rows.push_back({"payout q" + std::to_string(static_cast<int>(montecarlo::quantile_levels[k] * 100)),
                          fixed(s.payout_quantiles[k], 2)});
    }
    if (oracle) {
        r.structured["oracle"] = {{"exact_p_cap", oracle->exact_p_cap},
                                  {"z_p_cap", oracle->z_p_cap},
                                  {"exact_payout", oracle->exact_payout},
                                  {"z_payout", oracle->z_payout},
                                  {"flagged", oracle->flagged()}};
        r.rows.push_back({"exact p_cap", fixed(oracle->exact_p_cap, 5) + " (z " + fixed(oracle->z_p_cap, 2) + ")"});
        r.rows.push_back(
            {"exact payout ($)", fixed(oracle->exact_payout, 3) + " (z " + fixed(oracle->z_payout, 2) + ")"});
        r.rows.push_back({"oracle flag", oracle->flagged() ? "|z| > 3" : "ok"});
    }
    return r;
}

Json optional_json(const std::optional<double>& x)
{
    return x ? Json(*x) : Json(nullptr);
}

std::string optional_cell(const std::optional<double>& x)
{
    return x ? num(*x, 4) : "-";
}

Report analyze_report(const std::vector<behavior::SessionLedger>& ledgers, bool cohort, int streak_k,
                      double threshold)
{
    Report r;
    if (cohort) {
        const auto c = behavior::cohort_report(ledgers, streak_k, threshold);
        r.structured = {{"n_sessions", c.n_sessions},
                        {"streak_k", c.streak_k},
                        {"mean_bet_fraction", c.mean_bet_fraction},
                        {"all_in_count", c.all_in_count},
                        {"tails_any_count", c.tails_any_count},
                        {"tails_gt5_count", c.tails_gt5_count},
                        {"tails_share_gt25_count", c.tails_share_gt25_count},
                        {"mean_streak_lift", optional_json(c.mean_streak_lift)},
                        {"martingale_flagged_count", c.martingale_flagged_count},
                        {"belief_in_bias_share", optional_json(c.belief_in_bias_share)}};
        r.headers = {"metric", "value"};
        for (const auto& [key, value] : r.structured.items()) {
            r.rows.push_back({key, value.dump()});
        }
        return r;
    }
    r.headers = {"session", "flips", "mean_frac", "std_frac", "max_frac", "all_in", "tails", "tails_share",
                 "lift(k=" + std::to_string(streak_k) + ")", "martingale", "flagged"};
    r.structured = Json::array();
    for (const auto& ledger : ledgers) {
        const auto m = behavior::session_metrics(ledger, streak_k, threshold);
        std::optional<double> mscore;
        if (m.martingale) {
            mscore = m.martingale->score;
        }
        r.rows.push_back({m.session_id, std::to_string(m.flips), m.fractions ? num(m.fractions->mean, 4) : "-",
                          m.fractions ? num(m.fractions->std, 4) : "-", m.fractions ? num(m.fractions->max, 4) : "-",
                          m.fractions ? std::to_string(m.fractions->all_in_flips) : "-",
                          std::to_string(m.tails.tails_count), num(m.tails.tails_share, 4),
                          optional_cell(m.tails.streak_lift), optional_cell(mscore),
                          m.martingale_flagged ? "yes" : "no"});
        Json j{{"session_id", m.session_id},
               {"flips", m.flips},
               {"streak_k", streak_k},
               {"tails_count", m.tails.tails_count},
               {"tails_share", m.tails.tails_share},
               {"post_streak_tails_rate", optional_json(m.tails.post_streak_tails_rate)},
               {"streak_lift", optional_json(m.tails.streak_lift)},
               {"martingale_score", optional_json(mscore)},
               {"martingale_flagged", m.martingale_flagged}};
        if (m.fractions) {
            j["bet_fraction"] = {{"mean", m.fractions->mean},
                                 {"std", m.fractions->std},
                                 {"max", m.fractions->max},
                                 {"all_in_flips", m.fractions->all_in_flips}};
        }
        r.structured.push_back(j);
    }
    return r;
}

Report policy_report(const analytics::CapPolicy& policy, double w0, int n)
{
    Report r;
    r.headers = {"quantity", "value"};
    const auto w0_cents = static_cast<Cents>(std::llround(w0 * 100.0));
    r.structured = {{"success_probability", policy.success_probability()},
                    {"wealth_step_cents", policy.wealth_step_cents()},
                    {"bet_step_cents", policy.bet_step_cents()},
                    {"cap_cents", policy.cap_cents()},
                    {"flips", n},
                    {"opening_bet_cents", policy.best_bet(n, std::min(w0_cents, policy.cap_cents()))}};
    for (const auto& [key, value] : r.structured.items()) {
        r.rows.push_back({key, value.dump()});
    }
    return r;
}

service::HttpServer* running_server = nullptr;

void on_signal(int)
{
    if (running_server) {
        running_server->stop();
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Biased-coin betting laboratory: engine, analytics, simulation, behavior analysis and game server"};
    app.require_subcommand(1);

    // analytics
    Format analytics_format = Format::table;
    std::string table_name = "paper";
    auto* analytics_cmd = app.add_subcommand("analytics", "Closed-form constants of the 60% coin game");
    analytics_cmd->add_option("--table", table_name, "Table to print")->check(CLI::IsMember({"paper"}));
    add_format(analytics_cmd, analytics_format);

    // exact
    Format exact_format = Format::table;
    analytics::GameParams exact_params;
    double exact_cap = 250.0;
    bool exact_uncapped = false;
    analytics::ExactOptions exact_options;
    bool exact_atoms = false;
    auto* exact_cmd = app.add_subcommand("exact", "Exact terminal-wealth distribution of a fixed-fraction policy");
    exact_cmd->add_option("--f", exact_params.f, "Betting fraction")->capture_default_str();
    exact_cmd->add_option("--p", exact_params.p, "Heads probability")->capture_default_str();
    exact_cmd->add_option("--n", exact_params.n, "Flips")->capture_default_str();
    exact_cmd->add_option("--w0", exact_params.w0, "Starting wealth ($)")->capture_default_str();
    exact_cmd->add_option("--cap", exact_cap, "Payout cap ($)")->capture_default_str();
    exact_cmd->add_flag("--no-cap", exact_uncapped, "Remove the cap");
    exact_cmd->add_flag("--stop-at-cap,!--no-stop-at-cap", exact_options.stop_at_cap, "Absorb paths at the cap");
    exact_cmd->add_flag("--strict", exact_options.strict_exceed, "Require wealth strictly above the cap");
    exact_cmd->add_flag("--atoms", exact_atoms, "List every atom");
    add_format(exact_cmd, exact_format);

    // simulate
    Format sim_format = Format::table;
    std::string sim_strategy = "kelly";
    montecarlo::BatchSpec batch;
    std::string sim_rounding = "cents";
    std::string sim_out;
    unsigned sim_threads = 0;
    bool sim_uncapped = false;
    Cents sim_cap = 25000;
    bool sim_cap_shown = false;
    bool sim_compare = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Seeded Monte Carlo batch of a betting strategy");
    sim_cmd->add_option("--strategy", sim_strategy,
                        "kelly | fractional:f=0.15 | constant:c=100 | martingale:base=25,factor=2 | "
                        "allin:side=heads | glide:f=0.2")
        ->capture_default_str();
    sim_cmd->add_option("--paths", batch.n_paths, "Number of paths")->capture_default_str();
    sim_cmd->add_option("--seed", batch.master_seed, "Master seed")->capture_default_str();
    sim_cmd->add_flag("--stop-at-cap,!--no-stop-at-cap", batch.stop_at_cap, "End a path on reaching the cap");
    sim_cmd->add_flag("--strict", batch.strict_exceed, "Require wealth strictly above the cap");
    sim_cmd->add_option("--rounding", sim_rounding, "cents | real")->check(CLI::IsMember({"cents", "real"}));
    sim_cmd->add_option("--threads", sim_threads, "Worker threads (0 = all cores)");
    sim_cmd->add_option("--p", batch.config.p_heads, "Heads probability")->capture_default_str();
    sim_cmd->add_option("--start-cents", batch.config.start_cents, "Starting bankroll")->capture_default_str();
    sim_cmd->add_option("--cap-cents", sim_cap, "Payout cap")->capture_default_str();
    sim_cmd->add_flag("--no-cap", sim_uncapped, "Remove the cap");
    sim_cmd->add_flag("--cap-shown", sim_cap_shown, "Disclose the cap from the start");
    sim_cmd->add_option("--max-flips", batch.config.max_flips, "Flip budget")->capture_default_str();
    sim_cmd->add_option("--min-bet-cents", batch.config.min_bet_cents, "Minimum bet")->capture_default_str();
    sim_cmd->add_flag("--compare-exact", sim_compare, "Score against the exact distribution (real rounding)");
    sim_cmd->add_option("--out", sim_out, "Write the report to this file (structured unless --format is given)");
    add_format(sim_cmd, sim_format);

    // analyze
    Format analyze_format = Format::table;
    std::string events_file;
    int streak_k = behavior::default_streak_k;
    double threshold = behavior::default_martingale_threshold;
    bool cohort = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Behavioral metrics over recorded session events");
    analyze_cmd->add_option("events-file", events_file, "Line-delimited event log")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--streak-k", streak_k, "Heads run length before a tails bet")->capture_default_str();
    analyze_cmd->add_option("--martingale-threshold", threshold, "Flag sessions scoring at least this")
        ->capture_default_str();
    analyze_cmd->add_flag("--cohort", cohort, "Aggregate over all sessions");
    add_format(analyze_cmd, analyze_format);

    // policy
    Format policy_format = Format::table;
    double policy_w0 = 25.0;
    double policy_p = 0.6;
    int policy_n = 300;
    double policy_cap = 250.0;
    Cents wealth_step = 25;
    Cents bet_step = 25;
    auto* policy_cmd = app.add_subcommand("policy", "Bet schedule maximising the chance of reaching the cap");
    policy_cmd->add_option("--w0", policy_w0, "Starting wealth ($)")->capture_default_str();
    policy_cmd->add_option("--p", policy_p, "Heads probability")->capture_default_str();
    policy_cmd->add_option("--n", policy_n, "Flips")->capture_default_str();
    policy_cmd->add_option("--cap", policy_cap, "Cap ($)")->capture_default_str();
    policy_cmd->add_option("--wealth-step", wealth_step, "Wealth grid (cents)")->capture_default_str();
    policy_cmd->add_option("--bet-step", bet_step, "Bet grid (cents)")->capture_default_str();
    add_format(policy_cmd, policy_format);

    // serve
    service::ServiceOptions serve_options;
    std::string host = "0.0.0.0";
    int port = 8080;
    std::string data_dir = "data";
    int session_minutes = 30;
    std::string static_dir;
    std::string questionnaire_file;
    auto* serve_cmd = app.add_subcommand("serve", "Run the game server");
    serve_cmd->add_option("--host", host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--port", port, "Listen port")->capture_default_str();
    serve_cmd->add_option("--data-dir", data_dir, "Event log directory")->capture_default_str();
    serve_cmd->add_option("--session-minutes", session_minutes, "Session length (0 = untimed)")->capture_default_str();
    serve_cmd->add_option("--max-flips", serve_options.defaults.max_flips, "Flips per session")->capture_default_str();
    serve_cmd->add_option("--min-interval-ms", serve_options.min_interval_ms, "Minimum time between bets")
        ->capture_default_str();
    serve_cmd->add_option("--master-seed", serve_options.master_seed, "Server master seed")->capture_default_str();
    serve_cmd->add_option("--max-cap-cents", serve_options.max_cap_cents, "Highest cap a session may request")
        ->capture_default_str();
    serve_cmd->add_option("--questionnaire", questionnaire_file, "Questionnaire JSON")->check(CLI::ExistingFile);
    serve_cmd->add_option("--static-dir", static_dir, "Serve the web client from this directory")
        ->check(CLI::ExistingDirectory);
    serve_cmd->add_flag("--test-mode", serve_options.test_mode, "Accept explicit per-session seeds");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analytics_cmd->parsed()) {
            emit(constants_table(), analytics_format, std::cout);
        }
        else if (exact_cmd->parsed()) {
            exact_params.cap = exact_uncapped ? std::nullopt : std::optional<double>(exact_cap);
            emit(exact_report(analytics::exact_capped_distribution(exact_params, exact_options), exact_atoms),
                 exact_format, std::cout);
        }
        else if (sim_cmd->parsed()) {
            batch.strategy = parse_strategy(sim_strategy);
            batch.rounding = montecarlo::parse_rounding(sim_rounding);
            batch.config.cap_cents = sim_cap;
            if (sim_uncapped) {
                batch.config.cap_cents.reset();
            }
            if (sim_cap_shown) {
                batch.config.cap_disclosure = CapDisclosure::shown;
            }
            const auto stats = montecarlo::run_batch(batch, sim_threads);
            std::optional<montecarlo::OracleReport> oracle;
            if (sim_compare) {
                auto params = montecarlo::game_params(batch);
                const auto exact =
                    analytics::exact_capped_distribution(params, {batch.stop_at_cap, batch.strict_exceed});
                oracle = montecarlo::compare_to_oracle(stats, exact);
            }
            // a report file is structured unless a format was asked for
            const bool explicit_format = sim_cmd->count("--format") > 0;
            const Format format = !sim_out.empty() && !explicit_format ? Format::structured : sim_format;
            emit_to(simulate_report(stats, oracle), format, sim_out);
        }
        else if (analyze_cmd->parsed()) {
            std::ifstream in(events_file);
            const auto ledgers = behavior::ledgers_from_events(read_events(in));
            if (ledgers.empty()) {
                throw std::runtime_error("no sessions in " + events_file);
            }
            emit(analyze_report(ledgers, cohort, streak_k, threshold), analyze_format, std::cout);
        }
        else if (policy_cmd->parsed()) {
            const auto policy =
                analytics::optimal_cap_policy(policy_w0, policy_p, policy_n, policy_cap, wealth_step, bet_step);
            emit(policy_report(policy, policy_w0, policy_n), policy_format, std::cout);
        }
        else if (serve_cmd->parsed()) {
            serve_options.data_dir = data_dir;
            serve_options.defaults.session_seconds = session_minutes * 60;
            if (!questionnaire_file.empty()) {
                serve_options.questionnaire = service::load_questionnaire(questionnaire_file);
            }
            service::SessionService svc(serve_options);
            service::HttpServer server(svc, static_dir.empty() ? std::nullopt
                                                               : std::optional<std::filesystem::path>(static_dir));
            const int bound = server.bind(host, port);
            if (bound < 0) {
                throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
            }
            std::cerr << "coinflip: serving on " << host << ":" << bound << " (" << svc.session_ids().size()
                      << " sessions recovered from " << data_dir << ")\n";
            running_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            server.serve();
            running_server = nullptr;
        }
    }
    catch (const std::exception& ex) {
        std::cerr << "coinflip: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
