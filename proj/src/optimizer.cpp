#include "bmtd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmtd {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// ln(1 - (1-alpha)^{1/(M y)}), the recurring frame-sizing log term (< 0).
double ln_gap(std::uint64_t big_m, std::uint32_t y, double alpha) {
    const double g = std::pow(1.0 - alpha, 1.0 / (static_cast<double>(big_m) * y));
    return std::log1p(-g);
}

}  // namespace

void Scenario::validate() const {
    if (e_count < 1) throw std::invalid_argument("scenario: |E| must be >= 1");
    if (big_m < 1) throw std::invalid_argument("scenario: M must be >= 1");
    if (big_m > e_count) throw std::invalid_argument("scenario: M cannot exceed |E|");
    if (m > e_count) throw std::invalid_argument("scenario: m cannot exceed |E|");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scenario: alpha must be in (0,1)");
    if (!(t_r > 0.0) || !(t_t > 0.0)) throw std::invalid_argument("scenario: t_r, t_t must be > 0");
}

const char* to_string(Strategy s) {
    return s == Strategy::worst_case ? "worst-case" : "expected-time";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "worst-case" || s == "worst") return Strategy::worst_case;
    if (s == "expected-time" || s == "expected") return Strategy::expected_time;
    throw std::invalid_argument("unknown strategy: " + s);
}

std::uint32_t optimal_y(std::uint64_t big_m, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("optimal_y: alpha must be in (0,1)");
    if (big_m < 1) throw std::invalid_argument("optimal_y: M must be >= 1");
    const double y = std::log(1.0 - alpha) / (static_cast<double>(big_m) * std::log(0.5));
    return static_cast<std::uint32_t>(std::max(1.0, std::ceil(y)));
}

std::uint64_t phase2_frame(double n_star, std::uint32_t r_w, std::uint64_t big_m,
                           std::uint32_t y, double alpha) {
    if (n_star < 1.0) return 1;
    const double f = -n_star * r_w / ln_gap(big_m, y, alpha);
    return static_cast<std::uint64_t>(std::max(1.0, std::ceil(f)));
}

double u0_threshold(const Scenario& sc) {
    sc.validate();
    const std::uint32_t y = optimal_y(sc.big_m, sc.alpha);
    return static_cast<double>(sc.e_count) * sc.t_r * ln_gap(sc.big_m, y, sc.alpha) /
           (-sc.t_t * y * kLn2 * kLn2);
}

double expected_active(const Scenario& sc, std::uint32_t x) {
    return static_cast<double>(sc.e_count) - static_cast<double>(sc.m) +
           static_cast<double>(sc.u_count) * std::pow(0.5, static_cast<double>(x));
}

double worst_case_time(const Scenario& sc, std::uint32_t x) {
    const std::uint32_t y = optimal_y(sc.big_m, sc.alpha);
    const double en = expected_active(sc.hardened(), x);
    const double t1 = static_cast<double>(sc.e_count) * sc.t_r * x / kLn2;
    const double t2 = -sc.t_t * y * en / ln_gap(sc.big_m, y, sc.alpha);
    return t1 + t2;
}

std::uint32_t worst_case_x(const Scenario& sc) {
    sc.validate();
    if (sc.u_count == 0) return 0;
    const double u0 = u0_threshold(sc);
    if (static_cast<double>(sc.u_count) <= u0) return 0;

    const std::uint32_t y = optimal_y(sc.big_m, sc.alpha);
    const double ratio = (-sc.t_r * static_cast<double>(sc.e_count) * ln_gap(sc.big_m, y, sc.alpha)) /
                         (sc.t_t * y * static_cast<double>(sc.u_count) * kLn2 * kLn2);
    const double x_real = std::log(ratio) / -kLn2;

    // Phase 1 runs in this branch, so candidates are positive integers.
    const auto lo = static_cast<std::uint32_t>(std::max(1.0, std::floor(x_real)));
    const auto hi = static_cast<std::uint32_t>(std::max(1.0, std::ceil(x_real)));
    return worst_case_time(sc, lo) <= worst_case_time(sc, hi) ? lo : hi;
}

double slot_detect_prob(const Scenario& sc, double n_star, std::uint32_t y) {
    if (sc.big_m == 0) return 0.0;
    const double lg = ln_gap(sc.big_m, y, sc.alpha);  // ln A, A = 1-(1-alpha)^{1/(yM)}
    const double first = -std::expm1(lg * static_cast<double>(sc.big_m) / n_star);  // 1-A^{M/N*}
    return first * std::exp(lg);
}

double slot_detect_prob_min(const Scenario& sc, std::uint32_t y) {
    const double n_max = static_cast<double>(sc.e_count - sc.big_m + sc.u_count);
    const double first = -std::expm1(std::log(0.5) * static_cast<double>(sc.big_m) /
                                     std::max(1.0, n_max));
    return first * std::exp(ln_gap(sc.big_m, y, sc.alpha));
}

double truncated_detection_slot_mean(double q, double f) {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return 1.0;
    // (1 - (1-q)^f - f q (1-q)^f) / q with (1-q)^f computed in log space
    const double tail = std::exp(f * std::log1p(-q));
    return (1.0 - tail - f * q * tail) / q;
}

double expected_detection_time(const Scenario& sc, std::uint32_t x) {
    sc.validate();
    const Scenario hc = sc.hardened();
    const std::uint32_t y = optimal_y(hc.big_m, hc.alpha);
    const double lg = ln_gap(hc.big_m, y, hc.alpha);
    const double t1 = static_cast<double>(hc.e_count) * hc.t_r * x / kLn2;

    const double base = static_cast<double>(hc.e_count) - static_cast<double>(hc.big_m);
    auto ez_at = [&](double nstar) {
        if (nstar < 1.0) nstar = 1.0;
        const double q = slot_detect_prob(hc, nstar, y);
        const double f = -nstar * y / lg;
        return truncated_detection_slot_mean(q, f);
    };

    const auto u_total = hc.u_count;
    const double p = std::pow(0.5, static_cast<double>(x));
    double ez = 0.0;
    if (u_total == 0 || p >= 1.0 || p <= 0.0) {
        const double u_mass = (p >= 1.0) ? static_cast<double>(u_total) : 0.0;
        ez = ez_at(base + u_mass);
    } else {
        // Binomial |U_r| ~ B(|U|, p), truncated at +-8 sigma with tail mass
        // folded into the endpoints (error < 1e-12).
        const double mean = static_cast<double>(u_total) * p;
        const double sd = std::sqrt(static_cast<double>(u_total) * p * (1.0 - p));
        const auto lo = static_cast<std::uint64_t>(std::max(0.0, std::floor(mean - 8.0 * sd)));
        const auto hi = std::min(u_total, static_cast<std::uint64_t>(std::ceil(mean + 8.0 * sd)));
        const double lu = std::lgamma(static_cast<double>(u_total) + 1.0);
        const double lp = std::log(p);
        const double lq = std::log1p(-p);
        double mass = 0.0;
        for (std::uint64_t u = lo; u <= hi; ++u) {
            const double du = static_cast<double>(u);
            const double lw = lu - std::lgamma(du + 1.0) -
                              std::lgamma(static_cast<double>(u_total - u) + 1.0) +
                              du * lp + static_cast<double>(u_total - u) * lq;
            const double w = std::exp(lw);
            mass += w;
            ez += w * ez_at(base + du);
        }
        // fold what the window cut off back into the endpoints
        const double missing = 1.0 - mass;
        if (missing > 0.0)
            ez += missing * 0.5 * (ez_at(base + static_cast<double>(lo)) +
                                   ez_at(base + static_cast<double>(hi)));
    }
    return t1 + hc.t_t * ez;
}

std::uint32_t expected_optimal_x(const Scenario& sc) {
    sc.validate();
    if (sc.u_count == 0) return 0;
    const std::uint32_t y = optimal_y(sc.big_m, sc.alpha);
    const double qmin = slot_detect_prob_min(sc, y);
    const double x0 = sc.t_t * kLn2 / (sc.t_r * static_cast<double>(sc.e_count) * qmin);
    auto hi = static_cast<std::uint32_t>(std::ceil(2.0 * x0));

    auto search = [&](std::uint32_t upper) {
        std::uint32_t best_x = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t x = 0; x <= upper; ++x) {
            const double v = expected_detection_time(sc, x);
            if (v < best) {
                best = v;
                best_x = x;
            }
        }
        return best_x;
    };

    std::uint32_t best = search(hi);
    if (best == hi && hi > 0) best = search(2 * hi);  // boundary hit: extend once
    return best;
}

ProtocolParams tune(const Scenario& sc, Strategy strategy) {
    sc.validate();
    ProtocolParams p;
    p.y = optimal_y(sc.big_m, sc.alpha);
    p.x = strategy == Strategy::worst_case ? worst_case_x(sc) : expected_optimal_x(sc);
    if (p.x > 0) {
        // single Phase 1 round: J=1, k_1 = x
        const auto l = static_cast<std::uint64_t>(
            std::ceil(static_cast<double>(sc.e_count) * p.x / kLn2));
        p.phase1_rounds.push_back(Phase1Round{p.x, l, 0});
    }
    p.w_rounds = p.y;  // R_w = 1 maximizes early-termination granularity
    p.r_per_round = 1;
    p.n_star_expected = expected_active(sc.hardened(), p.x);
    p.f_w = phase2_frame(p.n_star_expected, p.r_per_round, sc.big_m, p.y, sc.alpha);
    return p;
}

TimeModel time_model(const Scenario& sc, std::uint32_t x) {
    TimeModel tm;
    const std::uint32_t y = optimal_y(sc.big_m, sc.alpha);
    tm.t1 = static_cast<double>(sc.e_count) * sc.t_r * x / kLn2;
    tm.t2 = -sc.t_t * y * expected_active(sc.hardened(), x) / ln_gap(sc.big_m, y, sc.alpha);
    tm.e_td = expected_detection_time(sc, x);
    return tm;
}

OptimizerReport make_report(const Scenario& sc) {
    sc.validate();
    OptimizerReport r;
    r.scenario = sc;
    r.y = optimal_y(sc.big_m, sc.alpha);
    r.u0 = u0_threshold(sc);
    r.x_worst = worst_case_x(sc);
    r.x_expected = expected_optimal_x(sc);
    const Scenario hc = sc.hardened();
    r.en_star_worst = expected_active(hc, r.x_worst);
    r.en_star_expected = expected_active(hc, r.x_expected);
    r.f_w_worst = phase2_frame(r.en_star_worst, 1, sc.big_m, r.y, sc.alpha);
    r.f_w_expected = phase2_frame(r.en_star_expected, 1, sc.big_m, r.y, sc.alpha);
    r.et_worst = worst_case_time(sc, r.x_worst);
    r.et_expected = worst_case_time(sc, r.x_expected);
    r.etd_worst = expected_detection_time(sc, r.x_worst);
    r.etd_expected = expected_detection_time(sc, r.x_expected);
    return r;
}

nlohmann::json to_json(const OptimizerReport& r) {
    return nlohmann::json{
        {"e_count", r.scenario.e_count},
        {"u_count", r.scenario.u_count},
        {"m", r.scenario.m},
        {"big_m", r.scenario.big_m},
        {"alpha", r.scenario.alpha},
        {"t_r", r.scenario.t_r},
        {"t_t", r.scenario.t_t},
        {"y_star", r.y},
        {"u0", r.u0},
        {"x_worst", r.x_worst},
        {"x_expected", r.x_expected},
        {"f_w_worst", r.f_w_worst},
        {"f_w_expected", r.f_w_expected},
        {"en_star_worst", r.en_star_worst},
        {"en_star_expected", r.en_star_expected},
        {"et_worst", r.et_worst},
        {"et_expected", r.et_expected},
        {"etd_worst", r.etd_worst},
        {"etd_expected", r.etd_expected},
    };
}

}  // namespace bmtd
