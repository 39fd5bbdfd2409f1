#include "coinflip/rng.hpp"

#include <doctest.h>

#include <vector>

using namespace coinflip;

TEST_CASE("xoshiro256** matches reference outputs")
{
    // Reference values from an independent Python port of SplitMix64 + xoshiro256**.
    RngStream rng(0);
    CHECK(rng.next() == 0x99ec5f36cb75f2b4ULL);
    CHECK(rng.next() == 0xbf6e1f784956452aULL);
    CHECK(rng.next() == 0x1a5f849d4933e6e0ULL);

    RngStream path0 = derive_path_stream(42, 0);
    CHECK(path0.next() == 0xc5860a625adf8456ULL);
    CHECK(path0.next() == 0x39395c219e746052ULL);
    CHECK(path0.next() == 0xad4dc7562d3061d6ULL);

    RngStream path7 = derive_path_stream(42, 7);
    CHECK(path7.next() == 0x460ae4977938c6ecULL);
    CHECK(path7.next() == 0x6eac4d305a650947ULL);
}

TEST_CASE("derived streams are deterministic and distinct")
{
    auto draws = [](RngStream rng) {
        std::vector<std::uint64_t> out;
        for (int i = 0; i < 100; ++i) {
            out.push_back(rng.next());
        }
        return out;
    };
    CHECK(draws(derive_path_stream(42, 0)) == draws(derive_path_stream(42, 0)));
    CHECK(draws(derive_path_stream(42, 0)) != draws(derive_path_stream(42, 1)));
    CHECK(draws(derive_path_stream(42, 0)) != draws(derive_path_stream(43, 0)));
}

TEST_CASE("uniform draws lie in [0, 1) and discard skips")
{
    RngStream a(9);
    for (int i = 0; i < 10000; ++i) {
        const double u = a.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
    RngStream b(5);
    RngStream c(5);
    b.discard(17);
    for (int i = 0; i < 17; ++i) {
        c.next();
    }
    CHECK(b == c);
}

TEST_CASE("bernoulli degenerate probabilities")
{
    RngStream rng(3);
    for (int i = 0; i < 1000; ++i) {
        CHECK(rng.bernoulli(1.0));
        CHECK_FALSE(rng.bernoulli(0.0));
    }
}

TEST_CASE("first draw across path streams is Bernoulli(0.6)")
{
    int heads = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        RngStream rng = derive_path_stream(42, i);
        heads += rng.bernoulli(0.6) ? 1 : 0;
    }
    CHECK(std::abs(heads / 10000.0 - 0.6) <= 0.015);
}

TEST_CASE("long single stream heads rate")
{
    RngStream rng = derive_path_stream(2024, 0);
    int heads = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        heads += rng.bernoulli(0.6) ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(heads) / n - 0.6) <= 0.005);
}
