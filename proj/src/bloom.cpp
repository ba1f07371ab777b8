#include "bmtd/bloom.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace bmtd {

BloomVector::BloomVector(std::uint64_t length, HashFamily family)
    : length_(length), family_(family), words_((length + 63) / 64, 0) {
    if (length == 0) throw std::invalid_argument("BloomVector: length must be >= 1");
    if (family_.range != length)
        throw std::invalid_argument("BloomVector: family range must equal bit length");
}

std::uint64_t BloomVector::popcount() const {
    std::uint64_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::uint64_t>(std::popcount(w));
    return n;
}

std::vector<std::uint8_t> BloomVector::serialize() const {
    std::vector<std::uint8_t> out;
    out.reserve(14 + words_.size() * 8);
    auto put = [&out](std::uint64_t v, int nbytes) {
        for (int i = 0; i < nbytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put(length_, 4);
    put(family_.k, 2);
    put(family_.seed, 8);
    for (std::uint64_t w : words_) put(w, 8);
    return out;
}

BloomVector BloomVector::deserialize(std::span<const std::uint8_t> data) {
    if (data.size() < 14) throw std::invalid_argument("BloomVector: truncated header");
    auto get = [&data](std::size_t off, int nbytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < nbytes; ++i)
            v |= static_cast<std::uint64_t>(data[off + i]) << (8 * i);
        return v;
    };
    const auto l = get(0, 4);
    const auto k = static_cast<std::uint32_t>(get(4, 2));
    const auto seed = get(6, 8);
    const std::size_t nwords = (l + 63) / 64;
    if (data.size() != 14 + nwords * 8)
        throw std::invalid_argument("BloomVector: payload size mismatch");
    BloomVector bv(l, HashFamily{k, seed, l});
    for (std::size_t i = 0; i < nwords; ++i) bv.words_[i] = get(14 + i * 8, 8);
    return bv;
}

BloomVector build_filter(std::span<const TagId> ids, std::uint64_t l, std::uint32_t k,
                         std::uint64_t seed) {
    if (l == 0 || k == 0) throw std::invalid_argument("build_filter: l and k must be >= 1");
    BloomVector bv(l, HashFamily{k, seed, l});
    for (const TagId& id : ids) {
        Hash128 h = hash_id(id, seed);
        const std::uint64_t step = h.h2 | 1ULL;
        std::uint64_t pos = h.h1;
        for (std::uint32_t i = 0; i < k; ++i) {
            pos += step;
            bv.set(pos % l);
        }
    }
    return bv;
}

bool contains(const BloomVector& filter, const TagId& id) {
    const HashFamily& fam = filter.family();
    Hash128 h = hash_id(id, fam.seed);
    const std::uint64_t step = h.h2 | 1ULL;
    std::uint64_t pos = h.h1;
    for (std::uint32_t i = 0; i < fam.k; ++i) {
        pos += step;
        if (!filter.test(pos % fam.range)) return false;
    }
    return true;
}

double fpr_theoretical(std::uint64_t n, std::uint64_t l, std::uint32_t k) {
    if (l == 0 || k == 0) throw std::invalid_argument("fpr_theoretical: l and k must be >= 1");
    if (n == 0) return 0.0;
    const double occ = -std::expm1(-static_cast<double>(n) * k / static_cast<double>(l));
    const double p = std::pow(occ, static_cast<double>(k));
    return std::clamp(p, 0.0, 1.0);
}

BloomVector encode_frame(const std::vector<bool>& slot_occupancy, const HashFamily& family) {
    if (slot_occupancy.size() != family.range)
        throw std::invalid_argument("encode_frame: occupancy length must equal family range");
    BloomVector bv(family.range, family);
    for (std::uint64_t i = 0; i < slot_occupancy.size(); ++i)
        if (slot_occupancy[i]) bv.set(i);
    return bv;
}

}  // namespace bmtd
