#pragma once

#include <cstdint>
#include <cstring>
#include <utility>

#include "bmtd/tag_id.hpp"

namespace bmtd {

// MurmurHash3 x64 128-bit finalization mix.
inline std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

struct Hash128 {
    std::uint64_t h1;
    std::uint64_t h2;
};

// MurmurHash3 x64_128 over arbitrary bytes with a 64-bit seed.
Hash128 murmur3_128(const void* data, std::size_t len, std::uint64_t seed);

inline Hash128 hash_id(const TagId& id, std::uint64_t seed) {
    return murmur3_128(id.bytes.data(), id.bytes.size(), seed);
}

// splitmix64 step; also used as a counter-based seed derivation primitive.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and up to four indices.
// Used for (trial, phase, round) seed trees so that concurrent trials and
// multi-reader runs consume identical randomness.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a = 0, std::uint64_t b = 0,
                                 std::uint64_t c = 0, std::uint64_t d = 0) {
    std::uint64_t s = base;
    s = fmix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
    s = fmix64(s ^ (b + 0xbf58476d1ce4e5b9ULL));
    s = fmix64(s ^ (c + 0x94d049bb133111ebULL));
    s = fmix64(s ^ (d + 0xd6e8feb86659fd93ULL));
    return s;
}

// Minimal deterministic generator. Not std::uniform_int_distribution on
// purpose: bounded draws must be bit-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = -n % n;  // 2^64 mod n
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double next_unit() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// k pseudo-random positions in [0, range) per id, via double hashing of one
// 128-bit keyed digest. Deterministic in (id, seed, i, range).
struct HashFamily {
    std::uint32_t k = 1;
    std::uint64_t seed = 0;
    std::uint64_t range = 1;

    friend bool operator==(const HashFamily&, const HashFamily&) = default;

    // i in [1, k]
    std::uint64_t index(const TagId& id, std::uint32_t i) const {
        Hash128 h = hash_id(id, seed);
        const std::uint64_t step = h.h2 | 1ULL;
        return (h.h1 + static_cast<std::uint64_t>(i) * step) % range;
    }

    // All k positions into out[0..k).
    template <typename OutIt>
    void indices(const TagId& id, OutIt out) const {
        Hash128 h = hash_id(id, seed);
        const std::uint64_t step = h.h2 | 1ULL;
        std::uint64_t pos = h.h1;
        for (std::uint32_t i = 0; i < k; ++i) {
            pos += step;
            *out++ = pos % range;
        }
    }
};

}  // namespace bmtd
