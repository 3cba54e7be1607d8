#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace rarecast::num {

/// Splittable deterministic random stream (SplitMix64 core).
///
/// A stream is identified by a 64-bit value fixed at construction. split()
/// derives a child from (identity, key) only — never from how many draws the
/// parent has made — so the same named child can be re-derived at any time.
/// Copying a stream replays its remaining draws, which the model layer uses
/// to re-draw dropout masks during the backward pass.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : identity_(mix(seed)), state_(identity_) {}

    RngStream split(std::uint64_t key) const {
        return RngStream(mix(identity_ ^ mix(key + 0x9E3779B97F4A7C15ULL)), 0);
    }
    RngStream split(std::string_view name) const { return split(hash_name(name)); }

    static std::uint64_t hash_name(std::string_view name) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a 64
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        return h;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]: keeps the log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Bernoulli draw: true with probability p. Always consumes one uniform.
    bool below(double p) { return uniform() < p; }

    /// Unbiased uniform integer in [0, n); n must be positive.
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    std::uint64_t identity() const { return identity_; }

private:
    RngStream(std::uint64_t identity, int) : identity_(identity), state_(identity) {}

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t identity_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::vector<T>& items, RngStream& rng) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.index(i + 1));
        std::swap(items[i], items[j]);
    }
}

}  // namespace rarecast::num
