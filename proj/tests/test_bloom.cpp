#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "bmtd/bloom.hpp"
#include "bmtd/hash.hpp"

using namespace bmtd;

TEST_CASE("empty id set gives an all-zero vector") {
    std::vector<TagId> none;
    BloomVector bv = build_filter(none, 8, 2, 42);
    CHECK(bv.length() == 8);
    CHECK(bv.popcount() == 0);
}

TEST_CASE("two ids set at most 2k bits and both pass membership") {
    std::vector<TagId> ids{make_tag_id(1, 1), make_tag_id(2, 2)};
    BloomVector bv = build_filter(ids, 6, 2, 7);
    CHECK(bv.popcount() <= 4);
    CHECK(contains(bv, ids[0]));
    CHECK(contains(bv, ids[1]));
}

TEST_CASE("invalid sizes are rejected") {
    std::vector<TagId> ids{make_tag_id(1, 1)};
    CHECK_THROWS_AS(build_filter(ids, 0, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_filter(ids, 16, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(fpr_theoretical(1, 0, 1), std::invalid_argument);
}

TEST_CASE("no false negatives across seeds and parameters") {
    for (std::uint64_t seed : {1ULL, 99ULL, 0xdeadULL}) {
        auto ids = make_population(seed, 0, 500);
        BloomVector bv = build_filter(ids, 2048, 4, seed);
        for (const TagId& id : ids) CHECK(contains(bv, id));
    }
}

TEST_CASE("deterministic construction") {
    auto ids = make_population(5, 0, 100);
    BloomVector a = build_filter(ids, 1024, 3, 77);
    BloomVector b = build_filter(ids, 1024, 3, 77);
    CHECK(a == b);
    BloomVector c = build_filter(ids, 1024, 3, 78);
    CHECK_FALSE(a == c);
}

TEST_CASE("occupancy matches the exponential fill model") {
    // 1000 ids, l=2885, k=2: fill fraction 1-e^(-2000/2885) = 0.5005 +- 0.03
    double acc = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        auto ids = make_population(1000 + s, 0, 1000);
        BloomVector bv = build_filter(ids, 2885, 2, 555 + s);
        acc += static_cast<double>(bv.popcount()) / 2885.0;
    }
    CHECK(acc / seeds == doctest::Approx(0.5005).epsilon(0.03 / 0.5005));
}

TEST_CASE("fpr_theoretical golden values") {
    CHECK(fpr_theoretical(0, 100, 3) == 0.0);
    // n=1000, k=2, l=2885: (1-e^(-0.6932))^2
    CHECK(fpr_theoretical(1000, 2885, 2) == doctest::Approx(0.2500).epsilon(1e-3));
    // design point l = nk/ln2 gives 2^-k
    for (std::uint32_t k = 1; k <= 6; ++k) {
        const auto l = static_cast<std::uint64_t>(std::ceil(1000.0 * k / std::log(2.0)));
        CHECK(fpr_theoretical(1000, l, k) ==
              doctest::Approx(std::pow(2.0, -static_cast<double>(k))).epsilon(0.01));
    }
}

TEST_CASE("empirical non-member rate near 2^-k at the design point") {
    const std::uint64_t n = 2000;
    const std::uint32_t k = 3;
    const auto l = static_cast<std::uint64_t>(std::ceil(n * k / std::log(2.0)));
    auto members = make_population(11, 0, n);
    BloomVector bv = build_filter(members, l, k, 321);
    auto probes = make_population(12, 1, 100000);
    std::uint64_t fp = 0;
    for (const TagId& id : probes)
        if (contains(bv, id)) ++fp;
    const double rate = static_cast<double>(fp) / static_cast<double>(probes.size());
    CHECK(rate == doctest::Approx(0.125).epsilon(0.01 / 0.125));
}

TEST_CASE("empirical fpr within 3 binomial sigma of the formula") {
    struct Setting { std::uint64_t n, l; std::uint32_t k; };
    const Setting settings[] = {
        {500, 1000, 1}, {500, 2000, 2}, {1000, 4000, 3}, {2000, 4000, 2},
        {300, 1500, 4}, {1500, 6000, 2},
    };
    const std::size_t probes = 20000;
    for (const auto& s : settings) {
        auto members = make_population(s.n * 31 + s.k, 0, s.n);
        BloomVector bv = build_filter(members, s.l, s.k, s.n + s.k);
        auto outsiders = make_population(s.n * 37 + s.k, 1, probes);
        std::uint64_t fp = 0;
        for (const TagId& id : outsiders)
            if (contains(bv, id)) ++fp;
        const double p = fpr_theoretical(s.n, s.l, s.k);
        const double sigma = std::sqrt(p * (1.0 - p) * probes);
        CHECK(std::abs(static_cast<double>(fp) - p * probes) <= 3.0 * sigma + 1.0);
    }
}

TEST_CASE("air-formed frame equals the directly built filter") {
    auto responders = make_population(17, 0, 300);
    const HashFamily fam{2, 9090, 700};
    std::vector<bool> occ(fam.range, false);
    std::uint64_t pos[8];
    for (const TagId& id : responders) {
        fam.indices(id, pos);
        for (std::uint32_t i = 0; i < fam.k; ++i) occ[pos[i]] = true;
    }
    BloomVector air = encode_frame(occ, fam);
    BloomVector direct = build_filter(responders, fam.range, fam.k, fam.seed);
    CHECK(air == direct);
}

TEST_CASE("encode_frame validates the occupancy length") {
    std::vector<bool> occ(10, false);
    CHECK_THROWS_AS(encode_frame(occ, HashFamily{1, 0, 11}), std::invalid_argument);
}

TEST_CASE("all-empty frame encodes to zero vector, responder frame bounded by N") {
    const HashFamily fam{1, 4, 64};
    std::vector<bool> occ(64, false);
    CHECK(encode_frame(occ, fam).popcount() == 0);

    auto responders = make_population(3, 0, 40);
    std::vector<bool> occ2(fam.range, false);
    std::uint64_t pos[1];
    for (const TagId& id : responders) {
        fam.indices(id, pos);
        occ2[pos[0]] = true;
    }
    CHECK(encode_frame(occ2, fam).popcount() <= 40);
}

TEST_CASE("serialization round-trips and is bit-exact") {
    auto ids = make_population(23, 0, 64);
    BloomVector bv = build_filter(ids, 200, 3, 0x1122334455667788ULL);
    auto bytes = bv.serialize();
    CHECK(bytes.size() == 14 + ((200 + 63) / 64) * 8);
    // header: l little-endian
    CHECK(bytes[0] == 200);
    CHECK(bytes[1] == 0);
    CHECK(bytes[4] == 3);  // k
    CHECK(bytes[6] == 0x88);  // seed LSB
    BloomVector back = BloomVector::deserialize(bytes);
    CHECK(back == bv);
}

TEST_CASE("serialization golden bytes for a pinned filter") {
    // Single id, fixed seed: the exact wire bytes must never change.
    std::vector<TagId> ids{make_tag_id(0x0123456789abcdefULL, 0x11223344u)};
    BloomVector bv = build_filter(ids, 64, 2, 5);
    auto bytes = bv.serialize();
    REQUIRE(bytes.size() == 22);
    const std::uint8_t header[14] = {64, 0, 0, 0, 2, 0, 5, 0, 0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 14; ++i) CHECK(bytes[i] == header[i]);
    // payload: recompute positions from the hash contract itself
    Hash128 h = hash_id(ids[0], 5);
    const std::uint64_t step = h.h2 | 1ULL;
    std::uint64_t expect = 0;
    expect |= 1ULL << ((h.h1 + 1 * step) % 64);
    expect |= 1ULL << ((h.h1 + 2 * step) % 64);
    std::uint64_t got = 0;
    for (int i = 0; i < 8; ++i) got |= static_cast<std::uint64_t>(bytes[14 + i]) << (8 * i);
    CHECK(got == expect);
}

TEST_CASE("hash family indices are in range and deterministic") {
    const HashFamily fam{5, 77, 997};
    auto ids = make_population(3, 0, 50);
    std::uint64_t a[5], b[5];
    for (const TagId& id : ids) {
        fam.indices(id, a);
        fam.indices(id, b);
        for (int i = 0; i < 5; ++i) {
            CHECK(a[i] < fam.range);
            CHECK(a[i] == b[i]);
            CHECK(a[i] == fam.index(id, static_cast<std::uint32_t>(i + 1)));
        }
    }
}

TEST_CASE("hash positions are uniform (chi-square, desk scale)") {
    const std::uint64_t range = 64;
    const HashFamily fam{1, 2024, range};
    auto ids = make_population(31, 0, 64000);
    std::vector<std::uint64_t> counts(range, 0);
    std::uint64_t pos[1];
    for (const TagId& id : ids) {
        fam.indices(id, pos);
        counts[pos[0]]++;
    }
    const double expected = static_cast<double>(ids.size()) / range;
    double chi2 = 0.0;
    for (std::uint64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        chi2 += d * d / expected;
    }
    // 63 dof: 0.999 quantile is ~103.4
    CHECK(chi2 < 103.4);
}
