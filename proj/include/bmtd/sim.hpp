#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmtd/estimator.hpp"
#include "bmtd/optimizer.hpp"
#include "bmtd/protocol.hpp"

#include "json.hpp"

namespace bmtd {

struct TrialOptions {
    bool include_estimation = false;
    EstimatorMode estimator_mode = EstimatorMode::src_accurate;
    double epsilon = 0.1;
    Strategy strategy = Strategy::expected_time;
    // observed-reliability floor passed to the engine; <0 uses scenario alpha,
    // 0 disables the enforcement loop (formula-validation runs)
    double enforcement_alpha = -1.0;
    std::vector<std::vector<std::uint32_t>> coverage;  // empty = single reader
};

struct TrialResult {
    bool detected = false;
    bool early_detection = false;   // exposed during the estimation frame
    double detection_time = 0.0;    // bit-slots; full execution time if undetected
    double t1 = 0.0;                // Phase 1 time actually spent
    std::uint64_t detection_slot = 0;  // Phase 2 slot (0 if none / est-detected)
    std::uint32_t j_used = 0;
    std::uint32_t w_used = 0;
    std::uint64_t survivors = 0;    // |U_r| after Phase 1
    double u_hat = -1.0;            // estimate fed to the tuner (-1 = none)

    friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

// One simulated execution: samples the missing set, instantiates the
// population, optionally estimates |U| (re-tuning from the estimate), then
// runs both phases. Fully deterministic in (scenario, params, seed, opts).
TrialResult run_trial(const Scenario& sc, const ProtocolParams& params, std::uint64_t seed,
                      const TrialOptions& opts = {}, std::vector<RoundLog>* logs = nullptr);

struct ExperimentConfig {
    std::vector<std::uint64_t> e_grid{1000};
    std::vector<std::uint64_t> u_grid{10000};
    std::vector<std::uint64_t> m_grid{100};
    std::vector<std::uint64_t> bigm_grid{1};
    std::vector<double> alpha_grid{0.9};
    std::vector<Strategy> strategies{Strategy::expected_time};
    std::uint32_t trials = 100;
    std::uint64_t base_seed = 1;
    bool include_estimation = false;
    EstimatorMode estimator_mode = EstimatorMode::src_accurate;
    double epsilon = 0.1;
    std::uint32_t reader_count = 1;
    double reader_overlap = 0.0;  // fraction of tags seen by both neighbours
    double t_r = 1.0;
    double t_t = 1.0;
    std::uint32_t threads = 1;

    void validate() const;
};

struct ResultRow {
    Scenario scenario;
    Strategy strategy = Strategy::expected_time;
    double reliability = 0.0;       // detecting fraction of trials
    double mean_time = 0.0;
    double std_time = 0.0;
    double mean_survivors = 0.0;
    double analytic_etd = 0.0;      // Theorem-2 value at the tuned x
};

struct ExperimentResult {
    std::vector<ResultRow> rows;

    std::string to_csv() const;     // fixed column schema
    nlohmann::json to_json() const;
};

// Cartesian grid x strategies, `trials` runs per cell with per-trial derived
// seeds. Deterministic in (config); independent of thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Same, with per-round reader frames OR-merged before decoding. reader_count
// taken from the config; equals run_experiment bit-exactly by construction.
ExperimentResult run_multi_reader(const ExperimentConfig& config);

// Splits [0, n_tags) into `readers` contiguous blocks, each extended by
// overlap_frac of the block size into its right neighbour (wrapping).
std::vector<std::vector<std::uint32_t>> make_coverage(std::uint32_t n_tags,
                                                      std::uint32_t readers,
                                                      double overlap_frac);

// Throws invalid_argument when some tag is covered by no reader.
void validate_coverage(const std::vector<std::vector<std::uint32_t>>& coverage,
                       std::uint32_t n_tags);

}  // namespace bmtd
