#pragma once

// Deterministic RNG helpers. std::uniform_*_distribution and std::shuffle
// are implementation-defined, so everything that must reproduce bit-for-bit
// across toolchains goes through these instead.

#include <cstdint>
#include <string_view>
#include <vector>

namespace vmc {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// Small deterministic generator (splitmix64 stream).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n), n > 0. Modulo bias is irrelevant at our scales.
    uint64_t next_below(uint64_t n) { return next_u64() % n; }

    int next_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(next_below(static_cast<uint64_t>(hi - lo + 1)));
    }

    double next_unit() { // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    template <typename T>
    void shuffle(std::vector<T>& v) { // Fisher-Yates, fixed order of draws
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = next_below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t state_;
};

// One master seed drives the whole run; per-component seeds are derived from
// it by hashing a component tag and an index into the stream.
inline uint64_t derive_seed(uint64_t master, std::string_view tag, uint64_t index = 0) {
    uint64_t s = master ^ fnv1a64(tag) ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    return splitmix64(s);
}

} // namespace vmc
