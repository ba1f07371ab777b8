#include "bmtd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "bmtd/hash.hpp"

namespace bmtd {

namespace {

// m distinct indices from [0, n) by partial Fisher-Yates.
std::vector<std::uint32_t> sample_missing(std::uint64_t n, std::uint64_t m, Rng& rng) {
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t j = i + rng.below(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

}  // namespace

TrialResult run_trial(const Scenario& sc, const ProtocolParams& params, std::uint64_t seed,
                      const TrialOptions& opts, std::vector<RoundLog>* trace) {
    sc.validate();
    TrialResult res;

    const std::vector<TagId> expected = make_population(seed, 0, sc.e_count);
    const std::vector<TagId> unexpected = make_population(seed, 1, sc.u_count);

    Rng rng(derive_seed(seed, 2));
    std::vector<std::uint32_t> missing_idx = sample_missing(sc.e_count, sc.m, rng);
    std::vector<bool> is_missing(sc.e_count, false);
    for (std::uint32_t i : missing_idx) is_missing[i] = true;

    std::vector<TagState> tags;
    tags.reserve(sc.e_count - sc.m + sc.u_count);
    for (std::uint64_t i = 0; i < sc.e_count; ++i)
        if (!is_missing[i]) tags.push_back(TagState{expected[i], TagKind::expected_present, true});
    for (const TagId& id : unexpected) tags.push_back(TagState{id, TagKind::unexpected, true});

    ProtocolParams active_params = params;
    double est_time = 0.0;
    if (opts.include_estimation) {
        const EstimateReport est = estimate(tags, expected, opts.epsilon, opts.estimator_mode,
                                            derive_seed(seed, 3));
        res.u_hat = est.u_hat;
        if (est.early_detection) {
            res.detected = true;
            res.early_detection = true;
            res.detection_time = static_cast<double>(est.detection_slot) * sc.t_t;
            return res;
        }
        est_time = est.overhead_slots * sc.t_t;
        Scenario assumed = sc;
        assumed.u_count = static_cast<std::uint64_t>(std::llround(std::max(0.0, est.u_hat)));
        active_params = tune(assumed, opts.strategy);
    }

    std::vector<RoundLog> local_logs;
    std::vector<RoundLog>& logs = trace ? *trace : local_logs;
    const double alpha_floor = opts.enforcement_alpha < 0.0 ? sc.alpha : opts.enforcement_alpha;
    DetectionOutcome out = run_protocol(expected, tags, active_params, derive_seed(seed, 4),
                                        sc.t_r, sc.t_t, alpha_floor, sc.big_m, opts.coverage,
                                        &logs);

    res.detected = out.detected;
    res.detection_slot = out.detection_slot;
    res.j_used = out.j_used;
    res.w_used = out.w_used;
    res.survivors = out.survivors;
    for (const RoundLog& log : logs)
        if (log.phase == 1) res.t1 += log.elapsed_bits;
    res.detection_time = est_time + out.total_time;
    return res;
}

void ExperimentConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (e_grid.empty() || u_grid.empty() || m_grid.empty() || bigm_grid.empty() ||
        alpha_grid.empty() || strategies.empty())
        throw std::invalid_argument("config: grids must be non-empty");
    if (reader_count < 1) throw std::invalid_argument("config: reader_count must be >= 1");
    if (!(reader_overlap >= 0.0 && reader_overlap < 1.0))
        throw std::invalid_argument("config: reader_overlap must be in [0,1)");
}

std::vector<std::vector<std::uint32_t>> make_coverage(std::uint32_t n_tags,
                                                      std::uint32_t readers,
                                                      double overlap_frac) {
    std::vector<std::vector<std::uint32_t>> cov(readers);
    if (readers == 1) {
        cov[0].resize(n_tags);
        std::iota(cov[0].begin(), cov[0].end(), 0u);
        return cov;
    }
    const std::uint32_t block = (n_tags + readers - 1) / readers;
    const auto extra = static_cast<std::uint32_t>(std::llround(overlap_frac * block));
    for (std::uint32_t r = 0; r < readers; ++r) {
        const std::uint32_t lo = r * block;
        const std::uint32_t hi = std::min<std::uint32_t>(n_tags, (r + 1) * block + extra);
        for (std::uint32_t i = lo; i < hi && i < n_tags; ++i) cov[r].push_back(i);
        if (r + 1 == readers && extra > 0)  // wrap the last reader's extension
            for (std::uint32_t i = 0; i < std::min(extra, n_tags); ++i) cov[r].push_back(i);
    }
    return cov;
}

void validate_coverage(const std::vector<std::vector<std::uint32_t>>& coverage,
                       std::uint32_t n_tags) {
    std::vector<bool> seen(n_tags, false);
    for (const auto& c : coverage)
        for (std::uint32_t i : c) {
            if (i >= n_tags) throw std::invalid_argument("coverage: tag index out of range");
            seen[i] = true;
        }
    for (std::uint32_t i = 0; i < n_tags; ++i)
        if (!seen[i]) throw std::invalid_argument("coverage: tag " + std::to_string(i) +
                                                  " not covered by any reader");
}

namespace {

ExperimentResult run_grid(const ExperimentConfig& config, bool multi_reader) {
    config.validate();
    ExperimentResult result;
    std::uint64_t row_index = 0;
    for (std::uint64_t e : config.e_grid)
        for (std::uint64_t u : config.u_grid)
            for (std::uint64_t m : config.m_grid)
                for (std::uint64_t big_m : config.bigm_grid)
                    for (double alpha : config.alpha_grid)
                        for (Strategy strategy : config.strategies) {
                            Scenario sc{e, u, m, big_m, alpha, config.t_r, config.t_t};
                            sc.validate();

                            TrialOptions opts;
                            opts.include_estimation = config.include_estimation;
                            opts.estimator_mode = config.estimator_mode;
                            opts.epsilon = config.epsilon;
                            opts.strategy = strategy;
                            if (multi_reader && config.reader_count > 1) {
                                const auto n_tags =
                                    static_cast<std::uint32_t>(e - m + u);
                                opts.coverage = make_coverage(n_tags, config.reader_count,
                                                              config.reader_overlap);
                                validate_coverage(opts.coverage, n_tags);
                            }

                            const ProtocolParams params = tune(sc, strategy);
                            std::vector<TrialResult> trials(config.trials);
                            auto worker = [&](std::uint32_t begin, std::uint32_t end) {
                                for (std::uint32_t t = begin; t < end; ++t)
                                    trials[t] = run_trial(
                                        sc, params,
                                        derive_seed(config.base_seed, row_index, t), opts);
                            };
                            const std::uint32_t nthreads =
                                std::max<std::uint32_t>(1, config.threads);
                            if (nthreads == 1 || config.trials < 2 * nthreads) {
                                worker(0, config.trials);
                            } else {
                                std::vector<std::thread> pool;
                                const std::uint32_t chunk =
                                    (config.trials + nthreads - 1) / nthreads;
                                for (std::uint32_t i = 0; i < nthreads; ++i) {
                                    const std::uint32_t b = i * chunk;
                                    const std::uint32_t
                                        en = std::min(config.trials, b + chunk);
                                    if (b < en) pool.emplace_back(worker, b, en);
                                }
                                for (auto& th : pool) th.join();
                            }

                            ResultRow row;
                            row.scenario = sc;
                            row.strategy = strategy;
                            double sum = 0.0, sum2 = 0.0, surv = 0.0;
                            std::uint32_t detected = 0;
                            for (const TrialResult& tr : trials) {
                                sum += tr.detection_time;
                                sum2 += tr.detection_time * tr.detection_time;
                                surv += static_cast<double>(tr.survivors);
                                if (tr.detected) ++detected;
                            }
                            const double n = config.trials;
                            row.reliability = detected / n;
                            row.mean_time = sum / n;
                            row.std_time =
                                std::sqrt(std::max(0.0, sum2 / n - row.mean_time * row.mean_time));
                            row.mean_survivors = surv / n;
                            row.analytic_etd = expected_detection_time(sc, params.x);
                            result.rows.push_back(row);
                            ++row_index;
                        }
    return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    return run_grid(config, false);
}

ExperimentResult run_multi_reader(const ExperimentConfig& config) {
    return run_grid(config, true);
}

std::string ExperimentResult::to_csv() const {
    std::ostringstream os;
    os << "e_count,u_count,m,big_m,alpha,strategy,reliability,mean_time,std_time,analytic_etd\n";
    os.precision(10);
    for (const ResultRow& r : rows) {
        os << r.scenario.e_count << ',' << r.scenario.u_count << ',' << r.scenario.m << ','
           << r.scenario.big_m << ',' << r.scenario.alpha << ',' << to_string(r.strategy) << ','
           << r.reliability << ',' << r.mean_time << ',' << r.std_time << ','
           << r.analytic_etd << '\n';
    }
    return os.str();
}

nlohmann::json ExperimentResult::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const ResultRow& r : rows) {
        arr.push_back(nlohmann::json{
            {"e_count", r.scenario.e_count},
            {"u_count", r.scenario.u_count},
            {"m", r.scenario.m},
            {"big_m", r.scenario.big_m},
            {"alpha", r.scenario.alpha},
            {"strategy", to_string(r.strategy)},
            {"reliability", r.reliability},
            {"mean_time", r.mean_time},
            {"std_time", r.std_time},
            {"mean_survivors", r.mean_survivors},
            {"analytic_etd", r.analytic_etd},
        });
    }
    return arr;
}

}  // namespace bmtd
