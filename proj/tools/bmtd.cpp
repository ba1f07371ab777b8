// Command-line front-end: optimizer reports, single simulations, experiment
// sweeps and per-round trace output.
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 saturation error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bmtd/estimator.hpp"
#include "bmtd/optimizer.hpp"
#include "bmtd/protocol.hpp"
#include "bmtd/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSaturation = 4;

struct CommonOpts {
    // scenario scalars
    std::uint64_t e_count = 1000;
    std::uint64_t u_count = 10000;
    std::uint64_t m = 100;
    std::uint64_t big_m = 1;
    double alpha = 0.9;
    double t_r = 1.0;
    double t_t = 1.0;
    // experiment
    std::uint32_t trials = 100;
    std::uint64_t base_seed = 1;
    std::vector<std::string> strategies{"expected-time"};
    bool include_estimation = false;
    std::string estimator_mode = "src-accurate";
    double epsilon = 0.1;
    std::uint32_t reader_count = 1;
    double reader_overlap = 0.0;
    std::uint32_t threads = 1;
    // sweep grids (fall back to the scalars when empty)
    std::vector<std::uint64_t> e_grid, u_grid, m_grid, bigm_grid;
    std::vector<double> alpha_grid;
    // io
    std::string output;
    int schema_version = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->set_config("--config", "", "Config file (key=value, [scenario]/[experiment] sections)");
    cmd->allow_config_extras(false);

    auto* sc = cmd->add_option_group("scenario");
    sc->add_option("--scenario.e_count", o.e_count, "expected tag count |E|");
    sc->add_option("--scenario.u_count", o.u_count, "unexpected tag count |U|");
    sc->add_option("--scenario.m", o.m, "actual missing count");
    sc->add_option("--scenario.big_m", o.big_m, "detection threshold M");
    sc->add_option("--scenario.alpha", o.alpha, "required reliability");
    sc->add_option("--scenario.t_r", o.t_r, "reader->tag per-bit time");
    sc->add_option("--scenario.t_t", o.t_t, "tag->reader per-bit time");

    auto* ex = cmd->add_option_group("experiment");
    ex->add_option("--experiment.trials", o.trials, "trials per grid point");
    ex->add_option("--experiment.base_seed", o.base_seed, "root seed");
    ex->add_option("--experiment.strategy", o.strategies,
                   "worst-case and/or expected-time");
    ex->add_option("--experiment.include_estimation", o.include_estimation,
                   "estimate |U| per trial and charge its slots");
    ex->add_option("--experiment.estimator_mode", o.estimator_mode,
                   "oracle-with-error | src-accurate");
    ex->add_option("--experiment.epsilon", o.epsilon, "estimator confidence range");
    ex->add_option("--experiment.reader_count", o.reader_count, "number of readers");
    ex->add_option("--experiment.reader_overlap", o.reader_overlap,
                   "coverage overlap fraction");
    ex->add_option("--experiment.threads", o.threads, "worker threads");

    auto* sw = cmd->add_option_group("sweep");
    sw->add_option("--sweep.e_grid", o.e_grid, "|E| grid");
    sw->add_option("--sweep.u_grid", o.u_grid, "|U| grid");
    sw->add_option("--sweep.m_grid", o.m_grid, "missing-count grid");
    sw->add_option("--sweep.big_m_grid", o.bigm_grid, "threshold grid");
    sw->add_option("--sweep.alpha_grid", o.alpha_grid, "reliability grid");

    cmd->add_option("--schema_version", o.schema_version, "config schema version")
        ->check(CLI::IsMember({1}));
    cmd->add_option("-o,--out", o.output, "output path (default stdout)");
}

bmtd::Scenario scenario_of(const CommonOpts& o) {
    bmtd::Scenario sc{o.e_count, o.u_count, o.m, o.big_m, o.alpha, o.t_r, o.t_t};
    sc.validate();
    return sc;
}

bmtd::ExperimentConfig config_of(const CommonOpts& o) {
    bmtd::ExperimentConfig cfg;
    cfg.e_grid = o.e_grid.empty() ? std::vector<std::uint64_t>{o.e_count} : o.e_grid;
    cfg.u_grid = o.u_grid.empty() ? std::vector<std::uint64_t>{o.u_count} : o.u_grid;
    cfg.m_grid = o.m_grid.empty() ? std::vector<std::uint64_t>{o.m} : o.m_grid;
    cfg.bigm_grid = o.bigm_grid.empty() ? std::vector<std::uint64_t>{o.big_m} : o.bigm_grid;
    cfg.alpha_grid = o.alpha_grid.empty() ? std::vector<double>{o.alpha} : o.alpha_grid;
    cfg.strategies.clear();
    for (const std::string& s : o.strategies)
        cfg.strategies.push_back(bmtd::strategy_from_string(s));
    cfg.trials = o.trials;
    cfg.base_seed = o.base_seed;
    cfg.include_estimation = o.include_estimation;
    cfg.estimator_mode = bmtd::estimator_mode_from_string(o.estimator_mode);
    cfg.epsilon = o.epsilon;
    cfg.reader_count = o.reader_count;
    cfg.reader_overlap = o.reader_overlap;
    cfg.t_r = o.t_r;
    cfg.t_t = o.t_t;
    cfg.threads = o.threads;
    cfg.validate();
    return cfg;
}

void write_output(const CommonOpts& o, const std::string& text) {
    if (o.output.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(o.output, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + o.output);
    out << text;
    if (!out.flush()) throw std::ios_base::failure("write failed: " + o.output);
}

int cmd_optimize(const CommonOpts& o) {
    const bmtd::OptimizerReport rep = bmtd::make_report(scenario_of(o));
    write_output(o, bmtd::to_json(rep).dump(2));
    return kExitOk;
}

int cmd_simulate(const CommonOpts& o) {
    bmtd::ExperimentConfig cfg = config_of(o);
    const bmtd::ExperimentResult res =
        cfg.reader_count > 1 ? bmtd::run_multi_reader(cfg) : bmtd::run_experiment(cfg);
    write_output(o, res.to_json().dump(2));
    return kExitOk;
}

int cmd_sweep(const CommonOpts& o) {
    bmtd::ExperimentConfig cfg = config_of(o);
    const bmtd::ExperimentResult res =
        cfg.reader_count > 1 ? bmtd::run_multi_reader(cfg) : bmtd::run_experiment(cfg);
    write_output(o, res.to_csv());
    return kExitOk;
}

nlohmann::json log_record(const bmtd::RoundLog& log) {
    nlohmann::json j{
        {"record", "round"},
        {"phase", log.phase},
        {"round", log.round_index},
        {"filter_length", log.filter_length},
        {"ones_count", log.ones_count},
        {"elapsed_bits", log.elapsed_bits},
    };
    if (log.phase == 1) {
        j["deactivated"] = log.deactivated;
    } else {
        nlohmann::json hits = nlohmann::json::array();
        for (const bmtd::MissingHit& h : log.missing_found)
            hits.push_back({{"id", bmtd::to_hex(h.id)}, {"slot", h.slot}});
        j["missing_found"] = hits;
    }
    return j;
}

int cmd_trace(const CommonOpts& o) {
    const bmtd::Scenario sc = scenario_of(o);
    const bmtd::Strategy strategy = bmtd::strategy_from_string(o.strategies.front());
    const bmtd::ProtocolParams params = bmtd::tune(sc, strategy);

    bmtd::TrialOptions topts;
    topts.include_estimation = o.include_estimation;
    topts.estimator_mode = bmtd::estimator_mode_from_string(o.estimator_mode);
    topts.epsilon = o.epsilon;
    topts.strategy = strategy;

    std::vector<bmtd::RoundLog> logs;
    const bmtd::TrialResult tr =
        bmtd::run_trial(sc, params, bmtd::derive_seed(o.base_seed, 0, 0), topts, &logs);

    std::string out;
    nlohmann::json header{
        {"record", "params"},
        {"x", params.x},
        {"y", params.y},
        {"w_rounds", params.w_rounds},
        {"r_per_round", params.r_per_round},
        {"f_w", params.f_w},
        {"n_star_expected", params.n_star_expected},
        {"strategy", bmtd::to_string(strategy)},
    };
    out += header.dump() + "\n";
    for (const bmtd::RoundLog& log : logs) out += log_record(log).dump() + "\n";
    nlohmann::json footer{
        {"record", "outcome"},
        {"detected", tr.detected},
        {"early_detection", tr.early_detection},
        {"detection_time", tr.detection_time},
        {"detection_slot", tr.detection_slot},
        {"rounds_phase1", tr.j_used},
        {"rounds_phase2", tr.w_used},
        {"survivors", tr.survivors},
    };
    bool any_p2 = false;
    for (const bmtd::RoundLog& log : logs) any_p2 |= log.phase == 2;
    if (any_p2)
        footer["observed_reliability"] =
            bmtd::observed_reliability(logs, sc.big_m, params.f_w);
    out += footer.dump() + "\n";
    write_output(o, out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-phase Bloom-filter missing-tag detection: optimizer, simulator, sweeps"};
    app.require_subcommand(1);

    CommonOpts opt_optimize, opt_simulate, opt_sweep, opt_trace;
    auto* c_optimize = app.add_subcommand("optimize", "Tuned-parameter report for one scenario");
    add_common(c_optimize, opt_optimize);
    auto* c_simulate = app.add_subcommand("simulate", "Monte Carlo run, JSON summary");
    add_common(c_simulate, opt_simulate);
    auto* c_sweep = app.add_subcommand("sweep", "Grid experiment, CSV output");
    add_common(c_sweep, opt_sweep);
    auto* c_trace = app.add_subcommand("trace", "Single trial, line-delimited round log");
    add_common(c_trace, opt_trace);

    try {
        app.parse(argc, argv);
        if (c_optimize->parsed()) return cmd_optimize(opt_optimize);
        if (c_simulate->parsed()) return cmd_simulate(opt_simulate);
        if (c_sweep->parsed()) return cmd_sweep(opt_sweep);
        if (c_trace->parsed()) return cmd_trace(opt_trace);
        return kExitConfig;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const bmtd::SaturationError& e) {
        std::cerr << "saturation: " << e.what() << "\n";
        return kExitSaturation;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
