#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

namespace bmtd {

// 96-bit opaque tag identifier (EPC-sized). Equality is bytewise.
struct TagId {
    std::array<std::uint8_t, 12> bytes{};

    friend bool operator==(const TagId&, const TagId&) = default;
    friend auto operator<=>(const TagId&, const TagId&) = default;
};

inline TagId make_tag_id(std::uint64_t hi, std::uint32_t lo) {
    TagId id;
    for (int i = 0; i < 8; ++i) id.bytes[i] = static_cast<std::uint8_t>(hi >> (8 * i));
    for (int i = 0; i < 4; ++i) id.bytes[8 + i] = static_cast<std::uint8_t>(lo >> (8 * i));
    return id;
}

std::string to_hex(const TagId& id);

// Deterministic population of `count` distinct ids derived from a label and seed.
std::vector<TagId> make_population(std::uint64_t seed, std::uint32_t label, std::size_t count);

struct TagIdHash {
    std::size_t operator()(const TagId& id) const noexcept {
        std::uint64_t hi;
        std::uint32_t lo;
        std::memcpy(&hi, id.bytes.data(), 8);
        std::memcpy(&lo, id.bytes.data() + 8, 4);
        return static_cast<std::size_t>(hi * 0x9e3779b97f4a7c15ULL ^ lo);
    }
};

}  // namespace bmtd
