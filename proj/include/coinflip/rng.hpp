#pragma once

#include <cstdint>
#include <limits>

namespace coinflip {

/// SplitMix64 (Steele, Lea & Flood). Used only to expand seeds.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();

private:
    std::uint64_t state_;
};

/// Finalizer of SplitMix64 applied to a single word.
std::uint64_t mix64(std::uint64_t x);

/*
 * Coin-flip random stream: xoshiro256** 1.0 (Blackman & Vigna).
 *
 * The generator is fully specified by its 256-bit state, uses only 64-bit
 * unsigned arithmetic and therefore produces the same sequence on every
 * platform and compiler. Uniform doubles take the top 53 bits of each output.
 *
 * Satisfies UniformRandomBitGenerator so it can also feed <random>.
 */
class RngStream {
public:
    using result_type = std::uint64_t;

    /// Seeds the four state words from SplitMix64(seed).
    explicit RngStream(std::uint64_t seed);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return next(); }
    std::uint64_t next();

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// One Bernoulli(p) trial; consumes exactly one draw. p >= 1 is always true.
    bool bernoulli(double p) { return uniform() < p; }

    /// Advances the stream by n draws.
    void discard(std::uint64_t n);

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    std::uint64_t s_[4];
};

/*
 * Stream for simulation path (or live session) `path_index` under
 * `master_seed`.
 *
 * The two inputs are combined as
 *     key = mix64(master_seed) ^ mix64(path_index ^ 0xD1B54A32D192ED03)
 * and the result seeds RngStream. Distinct indices give unrelated keys, and
 * SplitMix64 expansion decorrelates neighbouring keys.
 */
RngStream derive_path_stream(std::uint64_t master_seed, std::uint64_t path_index);

} // namespace coinflip
