// Counter-based pseudo-random generator. Every draw is a pure function of
// (seed, stream, counter), so substreams keyed by (model, t) are independent
// and reproducible regardless of call order or threading.

#pragma once

#include <cstdint>
#include <string_view>

#include "esalloc/mathx.hpp"

namespace esalloc {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t hash_name(std::string_view s) {
    // FNV-1a
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream1 = 0,
                        std::uint64_t stream2 = 0) {
        key_ = mix64(seed + 0x9E3779B97F4A7C15ull);
        key_ = mix64(key_ ^ mix64(stream1 + 0xD1B54A32D192ED03ull));
        key_ = mix64(key_ ^ mix64(stream2 + 0x8CB92BA72F3D8DD7ull));
    }

    std::uint64_t next_u64() {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ull);
    }

    /// Uniform in [0,1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0,1), both endpoints excluded.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via the inverse cdf.
    double next_gaussian() { return normal_icdf(next_open()); }

    double uniform(double a, double b) { return a + (b - a) * next_double(); }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

} // namespace esalloc
