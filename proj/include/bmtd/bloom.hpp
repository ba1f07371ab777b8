#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bmtd/hash.hpp"
#include "bmtd/tag_id.hpp"

namespace bmtd {

// Fixed-length bit array plus the hash family that addresses it.
// Storage is packed 64-bit words, bit i at word i/64, bit i%64.
// Immutable by convention once built; safe to share across threads.
class BloomVector {
public:
    BloomVector() = default;
    BloomVector(std::uint64_t length, HashFamily family);

    std::uint64_t length() const { return length_; }
    const HashFamily& family() const { return family_; }
    const std::vector<std::uint64_t>& words() const { return words_; }

    bool test(std::uint64_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1ULL;
    }
    void set(std::uint64_t i) { words_[i >> 6] |= 1ULL << (i & 63); }

    std::uint64_t popcount() const;

    friend bool operator==(const BloomVector&, const BloomVector&) = default;

    // Wire format: l:u32 | k:u16 | seed:u64 (all little-endian), then packed
    // words as little-endian bytes. Bit-exact across platforms.
    std::vector<std::uint8_t> serialize() const;
    static BloomVector deserialize(std::span<const std::uint8_t> data);

private:
    std::uint64_t length_ = 0;
    HashFamily family_{};
    std::vector<std::uint64_t> words_;
};

// Builds a filter over `ids` with l bits, k hash functions and the given seed.
// No false negatives: every inserted id passes contains().
BloomVector build_filter(std::span<const TagId> ids, std::uint64_t l, std::uint32_t k,
                         std::uint64_t seed);

bool contains(const BloomVector& filter, const TagId& id);

// (1 - e^{-nk/l})^k, clamped to [0,1]. The exponential approximation form;
// downstream sizing formulas are derived from it.
double fpr_theoretical(std::uint64_t n, std::uint64_t l, std::uint32_t k);

// Interprets per-slot channel occupancy as a filter: bit i set iff slot i was
// nonempty. The family describes the round that produced the frame; its range
// must equal the frame length.
BloomVector encode_frame(const std::vector<bool>& slot_occupancy, const HashFamily& family);

}  // namespace bmtd
