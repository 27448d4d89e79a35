#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string_view>

namespace persistlab {

/// SplitMix64 finalizer; used only to expand seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a, for turning stream-domain labels into seed material.
constexpr std::uint64_t hash_label(std::string_view label)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator; cheap to
/// seed, which matters because Monte Carlo drivers create one per sample.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed)
    {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
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

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

/// Identifies one independent random stream: (master seed, domain label,
/// up to three integer coordinates such as n and sample index). Streams
/// with distinct keys are statistically independent, so Monte Carlo
/// results do not depend on how samples are partitioned across workers.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t domain = 0;
    std::uint64_t a = 0, b = 0, c = 0;

    std::uint64_t mix() const
    {
        std::uint64_t s = seed ^ 0x6a09e667f3bcc909ULL;
        std::uint64_t h = splitmix64(s);
        for (std::uint64_t part : {domain, a, b, c}) {
            s ^= part + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
            h ^= splitmix64(s);
        }
        return h;
    }
};

/// A standard-normal stream owned by one caller.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}
    explicit RngStream(const StreamKey& key) : engine_(key.mix()) {}

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    Xoshiro256& engine() { return engine_; }

private:
    Xoshiro256 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace persistlab
