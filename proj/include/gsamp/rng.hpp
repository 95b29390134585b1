#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace gsamp {

/// splitmix64 finalizer (Steele, Lea & Flood). Used to expand seeds and to
/// derive independent per-stream seeds from (base, label...) tuples.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derive a stream seed from a base seed and up to two stream labels
/// (e.g. estimator-name hash and trial index). Each label is folded in with
/// a golden-ratio multiple and passed through the splitmix64 finalizer, so
/// streams with different labels are decorrelated and the mapping is
/// platform-independent.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = base;
    s = s * 0x9e3779b97f4a7c15ULL + (a + 1);
    (void)splitmix64_next(s);
    s = s * 0x9e3779b97f4a7c15ULL + (b + 1);
    return splitmix64_next(s);
}

/// FNV-1a 64-bit hash, used to turn estimator names into stream labels.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// xoshiro256++ (Blackman & Vigna), a 64-bit xorshift-family generator with
/// fixed cross-platform output. State is expanded from the seed via
/// splitmix64 as its authors recommend.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next() {
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

    /// Uniform double strictly inside (0, 1): 53-bit mantissa midpoint trick,
    /// so downstream log()/tan() calls never see 0 or 1 exactly.
    double uniform01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Identity string recorded in run metadata.
    static std::string name() { return "xoshiro256++ (seeded via splitmix64)"; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
};

} // namespace gsamp
