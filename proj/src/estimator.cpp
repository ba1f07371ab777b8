#include "bmtd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "bmtd/hash.hpp"

namespace bmtd {

EstimatorMode estimator_mode_from_string(const std::string& s) {
    if (s == "oracle" || s == "oracle-with-error") return EstimatorMode::oracle_with_error;
    if (s == "src" || s == "src-accurate") return EstimatorMode::src_accurate;
    throw std::invalid_argument("unknown estimator mode: " + s);
}

const char* to_string(EstimatorMode m) {
    return m == EstimatorMode::oracle_with_error ? "oracle-with-error" : "src-accurate";
}

std::uint64_t src_frame_length(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("src_frame_length: epsilon must be in (0,1)");
    const double denom = 1.0 - std::pow(0.04, epsilon);
    return static_cast<std::uint64_t>(std::ceil(65.0 / (denom * denom)));
}

EstimateReport estimate(std::span<const TagState> population, std::span<const TagId> expected_ids,
                        double epsilon, EstimatorMode mode, std::uint64_t seed, double n_hat) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw std::invalid_argument("estimate: epsilon must be in [0,1)");
    const auto e_count = static_cast<std::uint64_t>(expected_ids.size());

    EstimateReport rep;
    rep.epsilon = epsilon;

    if (mode == EstimatorMode::oracle_with_error) {
        std::uint64_t u_true = 0;
        for (const TagState& t : population)
            if (t.kind == TagKind::unexpected) ++u_true;
        Rng rng(derive_seed(seed, 0x6f7261636cULL));
        const double delta = epsilon == 0.0 ? 0.0 : (2.0 * rng.next_unit() - 1.0) * epsilon;
        rep.u_hat = static_cast<double>(u_true) * (1.0 + delta);
        return rep;
    }

    if (epsilon == 0.0) throw std::invalid_argument("estimate: src mode needs epsilon > 0");
    const std::uint64_t l_est = src_frame_length(epsilon);
    const double total_present = static_cast<double>(population.size());
    if (n_hat <= 0.0) n_hat = 0.5 * total_present;  // guaranteed rough-phase bound
    const double p_pe = std::min(1.0, 1.6 * static_cast<double>(l_est) / std::max(1.0, n_hat));
    rep.overhead_slots = static_cast<double>(l_est);

    const std::uint64_t frame_seed = derive_seed(seed, 0x737263ULL);
    auto tag_response = [&](const TagId& id) -> std::int64_t {
        // participation and slot from one keyed digest; -1 = silent this frame
        Hash128 h = hash_id(id, frame_seed);
        const double unit = static_cast<double>(h.h1 >> 11) * 0x1.0p-53;
        if (unit >= p_pe) return -1;
        return static_cast<std::int64_t>(h.h2 % l_est);
    };

    std::vector<bool> occ(l_est, false);
    for (const TagState& t : population) {
        const std::int64_t slot = tag_response(t.id);
        if (slot >= 0) occ[static_cast<std::uint64_t>(slot)] = true;
    }

    // Fast detection: a stored id that should have responded but whose slot
    // is empty cannot be present.
    std::unordered_set<TagId, TagIdHash> present;
    for (const TagState& t : population)
        if (t.kind == TagKind::expected_present) present.insert(t.id);
    std::uint64_t first_exposed = l_est;
    for (const TagId& id : expected_ids) {
        const std::int64_t slot = tag_response(id);
        if (slot < 0 || occ[static_cast<std::uint64_t>(slot)]) continue;
        if (present.contains(id))
            throw std::logic_error("estimate: present expected tag exposed as missing");
        first_exposed = std::min(first_exposed, static_cast<std::uint64_t>(slot));
    }
    if (first_exposed < l_est) {
        rep.early_detection = true;
        rep.detection_slot = first_exposed + 1;
    }

    std::uint64_t empties = 0;
    for (bool b : occ)
        if (!b) ++empties;
    // balls-in-bins inversion on the empty-slot count
    const double z0 = std::max<double>(1, empties) / static_cast<double>(l_est);
    const double per_slot = p_pe / static_cast<double>(l_est);
    const double total_est = std::log(z0) / std::log1p(-per_slot);
    rep.u_hat = total_est - static_cast<double>(e_count);
    if (rep.u_hat < 0.0) {
        rep.u_hat = 0.0;
        rep.clamped = true;
    }
    return rep;
}

double fast_detect_prob(std::uint64_t e_count, std::uint64_t u_count, std::uint64_t m,
                        std::uint64_t l_est, double p_pe) {
    if (!(p_pe >= 0.0 && p_pe <= 1.0))
        throw std::invalid_argument("fast_detect_prob: p_pe must be in [0,1]");
    if (m == 0 || l_est == 0) return 0.0;
    const double per_slot = p_pe / static_cast<double>(l_est);
    const double log_miss = std::log1p(-per_slot);
    const double exposed = -std::expm1(static_cast<double>(m) * log_miss);
    const double masked = std::exp(static_cast<double>(u_count + e_count - m) * log_miss);
    return exposed * masked;
}

double fast_detect_event_prob(std::uint64_t e_count, std::uint64_t u_count, std::uint64_t m,
                              std::uint64_t l_est, double p_pe) {
    const double q = fast_detect_prob(e_count, u_count, m, l_est, p_pe);
    return -std::expm1(static_cast<double>(l_est) * std::log1p(-q));
}

std::vector<SensitivityPoint> sensitivity_scan(const Scenario& sc,
                                               std::span<const double> error_grid) {
    sc.validate();
    const std::uint32_t x_exact = expected_optimal_x(sc);
    const double etd_exact = expected_detection_time(sc, x_exact);

    std::vector<SensitivityPoint> points;
    points.reserve(error_grid.size());
    for (double ratio : error_grid) {
        if (!(ratio > 0.0)) throw std::invalid_argument("sensitivity_scan: ratios must be > 0");
        Scenario assumed = sc;
        assumed.u_count = static_cast<std::uint64_t>(
            std::llround(ratio * static_cast<double>(sc.u_count)));
        const std::uint32_t x_hat = expected_optimal_x(assumed);
        points.push_back(SensitivityPoint{ratio, expected_detection_time(sc, x_hat) / etd_exact});
    }
    return points;
}

}  // namespace bmtd
