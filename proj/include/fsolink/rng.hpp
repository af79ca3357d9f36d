#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace fsolink {

// Deterministic, implementation-independent randomness. Packet simulation
// derives one stream per (seed, packet, purpose) tuple so results are
// bit-identical regardless of scheduling or worker count; std:: distributions
// are avoided because their output is not pinned by the standard.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Stable stream seed for a (base seed, index, purpose) tuple.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                 std::uint64_t purpose) {
    std::uint64_t s = base;
    (void)splitmix64(s);
    s ^= 0xD1B54A32D192ED03ull * (index + 1);
    (void)splitmix64(s);
    s ^= 0x8CB92BA72F3D8DD7ull * (purpose + 1);
    return splitmix64(s);
}

/// xoshiro256++ with splitmix64 state expansion.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0, 1); never returns 0 so log() stays finite.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal via the trigonometric Box-Muller transform (fixed
    /// two-uniform consumption keeps streams alignment-stable).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fsolink
