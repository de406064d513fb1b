#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>

// Counter-based splittable RNG (Philox 4x32-10). Each logical stream is
// identified by a 64-bit stream id hashed from a path of integers, so
// simulation fields can draw independently and in parallel while staying
// bit-reproducible for a given seed.

namespace lagr {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) {
        key_[0] = static_cast<std::uint32_t>(seed);
        key_[1] = static_cast<std::uint32_t>(seed >> 32);
        stream_ = stream;
        block_ = 0;
        pos_ = 4;
        have_normal_ = false;
    }

    // Stream id from a path of integers, e.g. {setting, replicate, field}.
    static RngStream from_path(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = detail::splitmix64(seed ^ 0x8f1bbcdc5a1bbcdcULL);
        for (std::uint64_t part : path) h = detail::splitmix64(h ^ part);
        return RngStream(seed, h);
    }

    std::uint32_t next_u32() {
        if (pos_ >= 4) refill();
        return out_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
    double uniform() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Standard normal via Box-Muller (deterministic across platforms).
    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return cached_normal_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_normal_ = r * std::sin(theta);
        have_normal_ = true;
        return r * std::cos(theta);
    }

    // Uniform integer in [0, bound) by rejection (unbiased).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

private:
    static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b, std::uint32_t* lo) {
        const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
        *lo = static_cast<std::uint32_t>(prod);
        return static_cast<std::uint32_t>(prod >> 32);
    }

    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(block_);
        std::uint32_t c1 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = key_[0];
        std::uint32_t k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t lo0, lo1;
            const std::uint32_t hi0 = mulhi(0xD2511F53u, c0, &lo0);
            const std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2, &lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out_ = {c0, c1, c2, c3};
        ++block_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_;
    std::array<std::uint32_t, 4> out_{};
    int pos_;
    bool have_normal_;
    double cached_normal_ = 0.0;
};

}  // namespace lagr
