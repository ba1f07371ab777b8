#include "bmtd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "bmtd/hash.hpp"

namespace bmtd {

namespace {

using IdSet = std::unordered_set<TagId, TagIdHash>;

// Occupancy of one frame from the covered active responders.
void fill_occupancy(const std::vector<TagState>& tags,
                    std::span<const std::uint32_t> covered, const HashFamily& fam,
                    std::vector<bool>& occ) {
    occ.assign(fam.range, false);
    std::uint64_t pos[64];
    auto respond = [&](const TagState& t) {
        if (!t.active) return;
        fam.indices(t.id, pos);
        for (std::uint32_t i = 0; i < fam.k; ++i) occ[pos[i]] = true;
    };
    if (covered.empty()) {
        for (const TagState& t : tags) respond(t);
    } else {
        for (std::uint32_t idx : covered) respond(tags[idx]);
    }
}

}  // namespace

std::vector<RoundLog> run_phase1(std::span<const TagId> expected_ids,
                                 std::vector<TagState>& tags,
                                 std::span<const Phase1Round> rounds, double t_r) {
    std::vector<RoundLog> logs;
    logs.reserve(rounds.size());
    for (std::uint32_t j = 0; j < rounds.size(); ++j) {
        const Phase1Round& r = rounds[j];
        BloomVector filter = build_filter(expected_ids, r.l, r.k, r.seed);
        RoundLog log;
        log.phase = 1;
        log.round_index = j;
        log.filter_length = r.l;
        log.ones_count = filter.popcount();
        log.elapsed_bits = static_cast<double>(r.l) * t_r;
        for (TagState& t : tags) {
            if (!t.active) continue;
            if (!contains(filter, t.id)) {
                if (t.kind == TagKind::expected_present)
                    throw std::logic_error("phase 1: expected tag failed its own filter");
                t.active = false;
                ++log.deactivated;
            }
        }
        logs.push_back(std::move(log));
    }
    return logs;
}

DetectionOutcome run_phase2(std::span<const TagId> expected_ids,
                            const std::vector<TagState>& tags, const Phase2Options& opt,
                            std::vector<RoundLog>* logs) {
    if (opt.f_w < 1) throw std::invalid_argument("phase 2: f_w must be >= 1");
    if (opt.w_rounds < 1 || opt.r_per_round < 1)
        throw std::invalid_argument("phase 2: W and R_w must be >= 1");
    if (opt.r_per_round > 64) throw std::invalid_argument("phase 2: R_w too large");

    DetectionOutcome out;
    for (const TagState& t : tags)
        if (t.active && t.kind == TagKind::unexpected) ++out.survivors;

    IdSet present_expected;
    for (const TagState& t : tags)
        if (t.active && t.kind == TagKind::expected_present) present_expected.insert(t.id);

    const std::uint64_t round_cap = 10ULL * opt.w_rounds;
    std::vector<bool> occ;
    std::vector<bool> reader_occ;
    std::vector<std::vector<bool>> frames;
    double log_phat = 0.0;  // log of prod (s1/f_w)^M so far
    std::uint64_t pos[64];

    std::uint32_t w = 0;
    while (true) {
        const bool scheduled = w < opt.w_rounds;
        if (!scheduled) {
            // all scheduled rounds ran without detection: top up until the
            // observed reliability clears alpha
            const double phat_sys = 1.0 - std::exp(log_phat);
            if (phat_sys >= opt.alpha) break;
            if (w >= round_cap)
                throw SaturationError("phase 2: reliability enforcement saturated after " +
                                      std::to_string(w) + " rounds");
        }
        const HashFamily fam{opt.r_per_round, derive_seed(opt.base_seed, 2, w), opt.f_w};

        if (opt.coverage.empty()) {
            fill_occupancy(tags, {}, fam, occ);
        } else {
            frames.clear();
            for (const auto& covered : opt.coverage) {
                fill_occupancy(tags, covered, fam, reader_occ);
                frames.push_back(reader_occ);
            }
            occ = merge_reader_frames(frames);
        }
        BloomVector air = encode_frame(occ, fam);

        RoundLog log;
        log.phase = 2;
        log.round_index = w;
        log.filter_length = opt.f_w;
        log.ones_count = air.popcount();
        log.elapsed_bits = static_cast<double>(opt.f_w) * opt.t_t;

        std::uint64_t best_slot = opt.f_w;  // min '0' position over failing ids
        for (const TagId& id : expected_ids) {
            fam.indices(id, pos);
            std::uint64_t first_zero = opt.f_w;
            for (std::uint32_t i = 0; i < fam.k; ++i)
                if (!air.test(pos[i])) first_zero = std::min(first_zero, pos[i]);
            if (first_zero == opt.f_w) continue;  // all bits set: regarded present
            if (present_expected.contains(id))
                throw std::logic_error("phase 2: present expected tag reported missing");
            log.missing_found.push_back(MissingHit{id, first_zero});
            best_slot = std::min(best_slot, first_zero);
        }

        const bool hit = !log.missing_found.empty();
        log_phat += static_cast<double>(opt.big_m) *
                    (log.ones_count == 0
                         ? -std::numeric_limits<double>::infinity()
                         : std::log(static_cast<double>(log.ones_count) /
                                    static_cast<double>(opt.f_w)));
        if (logs) logs->push_back(std::move(log));
        ++w;

        if (hit) {
            out.detected = true;
            out.detection_slot = static_cast<std::uint64_t>(w - 1) * opt.f_w + best_slot + 1;
            out.total_time = (static_cast<double>(w - 1) * opt.f_w +
                              static_cast<double>(best_slot + 1)) * opt.t_t;
            out.w_used = w;
            return out;
        }
    }
    out.w_used = w;
    out.total_time = static_cast<double>(w) * static_cast<double>(opt.f_w) * opt.t_t;
    return out;
}

double observed_reliability(std::span<const RoundLog> logs, std::uint64_t big_m,
                            std::uint64_t f_w) {
    double log_prod = 0.0;
    bool any = false;
    for (const RoundLog& log : logs) {
        if (log.phase != 2) continue;
        any = true;
        if (log.ones_count == 0) return 1.0;  // empty filter cannot alias
        log_prod += static_cast<double>(big_m) *
                    std::log(static_cast<double>(log.ones_count) / static_cast<double>(f_w));
    }
    if (!any) throw std::invalid_argument("observed_reliability: no phase 2 rounds logged");
    return 1.0 - std::exp(log_prod);
}

std::vector<bool> merge_reader_frames(const std::vector<std::vector<bool>>& frames) {
    if (frames.empty()) throw std::invalid_argument("merge_reader_frames: no frames");
    std::vector<bool> out = frames.front();
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (frames[i].size() != out.size())
            throw std::invalid_argument("merge_reader_frames: frame length mismatch");
        for (std::size_t b = 0; b < out.size(); ++b)
            if (frames[i][b]) out[b] = true;
    }
    return out;
}

DetectionOutcome run_protocol(std::span<const TagId> expected_ids,
                              std::vector<TagState>& tags, const ProtocolParams& params,
                              std::uint64_t run_seed, double t_r, double t_t, double alpha,
                              std::uint64_t big_m,
                              const std::vector<std::vector<std::uint32_t>>& coverage,
                              std::vector<RoundLog>* logs) {
    std::vector<Phase1Round> rounds(params.phase1_rounds.begin(), params.phase1_rounds.end());
    for (std::uint32_t j = 0; j < rounds.size(); ++j)
        rounds[j].seed = derive_seed(run_seed, 1, j);

    auto p1_logs = run_phase1(expected_ids, tags, rounds, t_r);
    double t1 = 0.0;
    for (const RoundLog& log : p1_logs) t1 += log.elapsed_bits;
    if (logs) logs->insert(logs->end(), p1_logs.begin(), p1_logs.end());

    Phase2Options opt;
    opt.w_rounds = params.w_rounds;
    opt.r_per_round = params.r_per_round;
    opt.f_w = params.f_w;
    opt.base_seed = run_seed;
    opt.alpha = alpha;
    opt.big_m = big_m;
    opt.t_t = t_t;
    opt.coverage = coverage;

    DetectionOutcome out = run_phase2(expected_ids, tags, opt, logs);
    out.j_used = static_cast<std::uint32_t>(rounds.size());
    out.total_time += t1;
    return out;
}

}  // namespace bmtd
