#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace bmtd {

// One experiment point: population sizes, detection requirement, channel
// timing. u_count may be an estimate when fed to the tuner.
struct Scenario {
    std::uint64_t e_count = 1;   // |E|, monitored tags
    std::uint64_t u_count = 0;   // |U|, unexpected tags (possibly estimated)
    std::uint64_t m = 0;         // actual missing count (simulation only)
    std::uint64_t big_m = 1;     // detection threshold M
    double alpha = 0.9;          // required reliability
    double t_r = 1.0;            // reader->tag per-bit time
    double t_t = 1.0;            // tag->reader per-bit time

    void validate() const;  // throws std::invalid_argument

    Scenario hardened() const {  // m = M, the hardest tunable case
        Scenario s = *this;
        s.m = big_m;
        return s;
    }
};

struct Phase1Round {
    std::uint32_t k = 0;      // hash functions this round
    std::uint64_t l = 0;      // filter bits this round
    std::uint64_t seed = 0;   // filled in per execution
};

enum class Strategy { worst_case, expected_time };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// Complete tuned parameter set for one protocol execution.
struct ProtocolParams {
    std::uint32_t x = 0;                    // total Phase 1 hash budget
    std::vector<Phase1Round> phase1_rounds; // empty when x == 0
    std::uint32_t y = 1;                    // total Phase 2 hash budget
    std::uint32_t w_rounds = 1;             // W
    std::uint32_t r_per_round = 1;          // R_w
    std::uint64_t f_w = 1;                  // Phase 2 frame length
    double n_star_expected = 0.0;           // E[N*] used for sizing
};

struct TimeModel {
    double t1 = 0.0;    // Phase 1 time, bit-slots
    double t2 = 0.0;    // Phase 2 worst-case time, bit-slots
    double e_td = 0.0;  // expected detection time, bit-slots
};

// Minimum total Phase 2 hash count meeting the reliability target:
// ceil(ln(1-alpha) / (M ln 1/2)), floored at one.
std::uint32_t optimal_y(std::uint64_t big_m, double alpha);

// Frame length per Phase 2 round: ceil(-n_star r_w / ln(1-(1-alpha)^{1/(M y)})).
std::uint64_t phase2_frame(double n_star, std::uint32_t r_w, std::uint64_t big_m,
                           std::uint32_t y, double alpha);

// Unexpected-population threshold below which Phase 1 is skipped.
double u0_threshold(const Scenario& sc);

// E[N*] = |E| - m + |U| (1/2)^x, with the scenario's own m.
double expected_active(const Scenario& sc, std::uint32_t x);

// Worst-case execution time (all W rounds run), at m=M.
double worst_case_time(const Scenario& sc, std::uint32_t x);

// Integer Phase 1 budget minimizing worst-case time. Zero iff |U| <= U_0;
// otherwise at least 1 (Phase 1 runs), real optimum rounded by comparing
// worst_case_time at floor/ceil.
std::uint32_t worst_case_x(const Scenario& sc);

// Per-slot probability that a missing event is exposed in a Phase 2 slot,
// at m=M: (1 - A^{M/n_star}) * A with A = 1-(1-alpha)^{1/(y M)}.
double slot_detect_prob(const Scenario& sc, double n_star, std::uint32_t y);

// Scenario-wide lower bound on slot_detect_prob (n_star at its maximum).
double slot_detect_prob_min(const Scenario& sc, std::uint32_t y);

// Mean of the first-success slot of a geometric(q) truncated at f slots:
// sum_{z=1..f} z (1-q)^{z-1} q, in closed form. Misses contribute zero.
double truncated_detection_slot_mean(double q, double f);

// Expected detection time at Phase 1 budget x, m=M: Phase 1 cost plus the
// truncated-geometric slot mean averaged over the binomial law of |U_r|.
double expected_detection_time(const Scenario& sc, std::uint32_t x);

// Exhaustive integer search of expected_detection_time over [0, ceil(2 x0)],
// x0 = t_t ln2 / (t_r |E| q_min); grid extended once if the argmin lands on
// the upper boundary. Ties break toward smaller x.
std::uint32_t expected_optimal_x(const Scenario& sc);

// Full parameter derivation: y*, then x per strategy, single Phase 1 round
// (J=1, k_1=x), W=y* rounds of R_w=1 hash, frame from E[N*] at m=M.
ProtocolParams tune(const Scenario& sc, Strategy strategy);

TimeModel time_model(const Scenario& sc, std::uint32_t x);

// Flat key/value optimizer report (External Interfaces).
struct OptimizerReport {
    Scenario scenario;
    std::uint32_t y = 1;
    double u0 = 0.0;
    std::uint32_t x_worst = 0;
    std::uint32_t x_expected = 0;
    std::uint64_t f_w_worst = 1;
    std::uint64_t f_w_expected = 1;
    double en_star_worst = 0.0;
    double en_star_expected = 0.0;
    double et_worst = 0.0;        // worst-case E[T] at x_worst
    double et_expected = 0.0;     // worst-case E[T] at x_expected
    double etd_worst = 0.0;       // E[T_D] at x_worst
    double etd_expected = 0.0;    // E[T_D] at x_expected
};

OptimizerReport make_report(const Scenario& sc);
nlohmann::json to_json(const OptimizerReport& r);

}  // namespace bmtd
