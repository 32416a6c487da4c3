#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rescue {

/// 64-bit FNV-1a. Used for substream labels and snapshot/scenario hashes.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic random stream. Each subsystem draws from its own substream
/// derived from (seed, label), so adding draws in one subsystem never shifts
/// another. Only the engine's raw 64-bit output is used; library
/// distributions are implementation-defined and would break replay across
/// standard libraries.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view label) {
        const std::uint64_t tag = fnv1a64(label);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
        engine_.seed(seq);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace rescue
