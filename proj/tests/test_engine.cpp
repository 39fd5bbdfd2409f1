#include "coinflip/engine.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

using namespace coinflip;

TEST_CASE("new_session")
{
    SUBCASE("defaults")
    {
        GameConfig config;
        const GameState s = new_session(config);
        CHECK(s.bankroll_cents == 2500);
        CHECK(s.flips_done == 0);
        CHECK(s.status == Status::active);
        CHECK_FALSE(s.cap_hit);
        CHECK(config.cap_cents == 25000);
        CHECK(config.max_flips == 300);
        CHECK(config.session_seconds == 1800);
    }
    SUBCASE("one-cent game is admitted")
    {
        GameConfig config;
        config.start_cents = 1;
        config.min_bet_cents = 1;
        CHECK(new_session(config).bankroll_cents == 1);
    }
    SUBCASE("cap below stake is rejected with a field diagnosis")
    {
        GameConfig config;
        config.cap_cents = 2499;
        try {
            new_session(config);
            FAIL("expected ConfigError");
        }
        catch (const ConfigError& err) {
            REQUIRE(err.errors().size() == 1);
            CHECK(err.errors()[0].field == "cap_cents");
        }
    }
    SUBCASE("several violations are all reported")
    {
        GameConfig config;
        config.p_heads = 1.5;
        config.min_bet_cents = 0;
        config.max_flips = -1;
        CHECK(check_config(config).size() == 3);
    }
    SUBCASE("uncapped config is valid")
    {
        GameConfig config;
        config.cap_cents.reset();
        CHECK(check_config(config).empty());
    }
}

TEST_CASE("validate_bet")
{
    GameConfig config;
    GameState s = new_session(config);
    CHECK_FALSE(validate_bet(s, {Side::heads, 500}, config).has_value());
    CHECK(validate_bet(s, {Side::heads, 0}, config) == BetViolation::below_minimum);
    s.bankroll_cents = 100;
    CHECK(validate_bet(s, {Side::heads, 101}, config) == BetViolation::exceeds_bankroll);
    CHECK_FALSE(validate_bet(s, {Side::tails, 100}, config).has_value());
    s.status = Status::ruined;
    CHECK(validate_bet(s, {Side::heads, 1}, config) == BetViolation::session_over);
    s.status = Status::active;
    s.flips_done = config.max_flips;
    CHECK(validate_bet(s, {Side::heads, 1}, config) == BetViolation::session_over);
}

TEST_CASE("apply_flip")
{
    GameConfig config;
    const GameState start = new_session(config);

    SUBCASE("winning a fifth of wealth gives 1.2x")
    {
        auto [s, r] = apply_flip(start, {Side::heads, 500}, Side::heads, config);
        CHECK(s.bankroll_cents == 3000);
        CHECK(s.flips_done == 1);
        CHECK(r.won);
        CHECK(r.bankroll_after_cents == 3000);
        CHECK(r.bankroll_before_cents() == 2500);
    }
    SUBCASE("all-in loss ruins")
    {
        auto [s, r] = apply_flip(start, {Side::heads, 2500}, Side::tails, config);
        CHECK(s.bankroll_cents == 0);
        CHECK(s.status == Status::ruined);
        CHECK_FALSE(r.won);
    }
    SUBCASE("crossing the cap latches cap_hit without ending the session")
    {
        GameState s = start;
        s.bankroll_cents = 24000;
        auto [next, r] = apply_flip(s, {Side::heads, 2000}, Side::heads, config);
        CHECK(next.bankroll_cents == 26000);
        CHECK(next.cap_hit);
        CHECK(next.status == Status::active);
        auto [after, r2] = apply_flip(next, {Side::heads, 20000}, Side::tails, config);
        CHECK(after.bankroll_cents == 6000);
        CHECK(after.cap_hit);
    }
    SUBCASE("tails bet wins on tails")
    {
        auto [s, r] = apply_flip(start, {Side::tails, 100}, Side::tails, config);
        CHECK(r.won);
        CHECK(s.bankroll_cents == 2600);
    }
    SUBCASE("last flip finishes")
    {
        GameConfig short_game = config;
        short_game.max_flips = 1;
        auto [s, r] = apply_flip(new_session(short_game), {Side::heads, 100}, Side::tails, short_game);
        CHECK(s.status == Status::finished);
    }
    SUBCASE("precondition breach leaves state untouched")
    {
        GameState s = start;
        CHECK_THROWS_AS(apply_flip(s, {Side::heads, 2501}, Side::heads, config), BetRejected);
        CHECK(s == start);
    }
}

TEST_CASE("place_bet")
{
    GameConfig config;
    SUBCASE("certain heads always wins a heads bet")
    {
        config.p_heads = 1.0;
        config.cap_cents.reset();
        Session session(config, 1);
        for (int i = 0; i < 50; ++i) {
            CHECK(session.bet({Side::heads, 1}).won);
        }
    }
    SUBCASE("same seed and bets give identical ledgers")
    {
        auto run = [&](std::uint64_t seed) {
            Session session(config, seed);
            while (session.state().status == Status::active) {
                const Cents amount = std::max<Cents>(1, session.state().bankroll_cents / 5);
                session.bet({Side::heads, amount});
            }
            return session.records();
        };
        CHECK(run(99) == run(99));
        CHECK(run(99) != run(100));
    }
    SUBCASE("invalid bet consumes no draw")
    {
        Session a(config, 5);
        Session b(config, 5);
        CHECK_THROWS_AS(a.bet({Side::heads, 0}), BetRejected);
        CHECK(a.bet({Side::heads, 100}) == b.bet({Side::heads, 100}));
    }
}

TEST_CASE("payout")
{
    GameConfig config;
    GameState s = new_session(config);
    s.bankroll_cents = 31000;
    CHECK(payout(s, config) == 25000);
    s.bankroll_cents = 0;
    CHECK(payout(s, config) == 0);
    config.cap_cents.reset();
    s.bankroll_cents = 31000;
    CHECK(payout(s, config) == 31000);
}

TEST_CASE("engine properties over random bet sequences")
{
    // conservation, non-negativity, cap monotonicity, termination and replay
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 200; ++trial) {
        GameConfig config;
        config.max_flips = 1 + trial % 300;
        config.p_heads = 0.3 + 0.005 * (trial % 100);
        Session session(config, static_cast<std::uint64_t>(trial));
        bool seen_cap = false;
        int steps = 0;
        while (session.state().status == Status::active) {
            const Cents before = session.state().bankroll_cents;
            const Cents amount = std::uniform_int_distribution<Cents>(1, before)(gen);
            const Side side = gen() % 4 == 0 ? Side::tails : Side::heads;
            const FlipRecord& r = session.bet({side, amount});
            REQUIRE(std::llabs(r.bankroll_after_cents - before) == amount);
            REQUIRE(session.state().bankroll_cents >= 0);
            REQUIRE(r.won == (r.side == r.outcome));
            if (seen_cap) {
                REQUIRE(session.state().cap_hit);
            }
            seen_cap = session.state().cap_hit;
            ++steps;
        }
        CHECK(steps <= config.max_flips);
        CHECK(replay(config, session.records()) == session.state());
    }
}

TEST_CASE("replay rejects a tampered record")
{
    GameConfig config;
    Session session(config, 3);
    session.bet({Side::heads, 500});
    session.bet({Side::heads, 500});
    auto records = session.records();
    records[1].bankroll_after_cents += 1;
    CHECK_THROWS_AS(replay(config, records), std::invalid_argument);
}

TEST_CASE("zero-flip game is already over")
{
    GameConfig config;
    config.max_flips = 0;
    const GameState s = new_session(config);
    CHECK(s.status == Status::finished);
    CHECK(validate_bet(s, {Side::heads, 1}, config) == BetViolation::session_over);
}
