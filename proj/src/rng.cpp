#include "coinflip/rng.hpp"

namespace coinflip {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

std::uint64_t SplitMix64::next()
{
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
}

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed)
{
    SplitMix64 sm(seed);
    for (auto& word : s_) {
        word = sm.next();
    }
}

std::uint64_t RngStream::next()
{
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform()
{
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

void RngStream::discard(std::uint64_t n)
{
    for (std::uint64_t i = 0; i < n; ++i) {
        next();
    }
}

RngStream derive_path_stream(std::uint64_t master_seed, std::uint64_t path_index)
{
    const std::uint64_t key = mix64(master_seed) ^ mix64(path_index ^ 0xD1B54A32D192ED03ULL);
    return RngStream(key);
}

} // namespace coinflip
