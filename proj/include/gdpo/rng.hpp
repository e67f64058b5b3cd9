#pragma once

#include <cstdint>

namespace gdpo {

/// SplitMix64 stream. Substreams are derived by hashing (seed, lane ids)
/// through the same mixer, so per-question sampling streams depend only on
/// their ids, never on scheduling order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(mix(seed)) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) via rejection-free Lemire reduction.
    std::uint64_t next_below(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// Independent child stream keyed by up to three lane ids.
    static RngStream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) {
        std::uint64_t s = mix(seed ^ 0xA0761D6478BD642FULL);
        s = mix(s ^ a ^ 0xE7037ED1A0B428DBULL);
        s = mix(s ^ b ^ 0x8EBC6AF09C88C6E3ULL);
        s = mix(s ^ c ^ 0x589965CC75374CC3ULL);
        return RngStream(s);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace gdpo
