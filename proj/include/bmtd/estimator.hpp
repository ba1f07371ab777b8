#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bmtd/optimizer.hpp"
#include "bmtd/protocol.hpp"

namespace bmtd {

enum class EstimatorMode { oracle_with_error, src_accurate };

EstimatorMode estimator_mode_from_string(const std::string& s);
const char* to_string(EstimatorMode m);

struct EstimateReport {
    double u_hat = 0.0;           // estimated |U|, clamped at 0
    double epsilon = 0.0;
    double overhead_slots = 0.0;  // estimation frame cost
    bool early_detection = false; // missing event already exposed during estimation
    std::uint64_t detection_slot = 0;  // 1-based slot of first exposure
    bool clamped = false;         // raw estimate fell below |E|
};

// Accurate-phase frame length: 65 / (1 - 0.04^epsilon)^2, ceiled.
std::uint64_t src_frame_length(double epsilon);

// |U| estimation before tuning.
//  - oracle_with_error: |U|(1+delta), delta ~ U[-eps, eps]; no channel cost.
//  - src_accurate: one slotted frame of L_est slots with persistence
//    p_pe = min(1, 1.6 L_est / n_hat); total population from the empty-slot
//    count, minus |E|. The frame doubles as a fast missing-event detector:
//    a stored id that hashes to participation but whose slot reads empty is
//    exposed. n_hat <= 0 selects the guaranteed rough bound 0.5 * (present
//    population).
EstimateReport estimate(std::span<const TagState> population, std::span<const TagId> expected_ids,
                        double epsilon, EstimatorMode mode, std::uint64_t seed,
                        double n_hat = 0.0);

// Per-slot probability that the estimation frame exposes a missing tag:
// (1-(1-p/L)^m) (1-p/L)^{|U|+|E|-m}.
double fast_detect_prob(std::uint64_t e_count, std::uint64_t u_count, std::uint64_t m,
                        std::uint64_t l_est, double p_pe);

// 1 - (1-q_pre)^{L_est}: probability the whole frame exposes the event.
double fast_detect_event_prob(std::uint64_t e_count, std::uint64_t u_count, std::uint64_t m,
                              std::uint64_t l_est, double p_pe);

struct SensitivityPoint {
    double ratio;       // assumed/actual |U|
    double normalized;  // E[T_D] tuned with the error, over E[T_D] tuned exactly
};

// Detection-time sensitivity to |U| estimation error: tune with ratio*|U|,
// evaluate under the actual |U|.
std::vector<SensitivityPoint> sensitivity_scan(const Scenario& sc,
                                               std::span<const double> error_grid);

}  // namespace bmtd
