#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "bmtd/bloom.hpp"
#include "bmtd/optimizer.hpp"
#include "bmtd/tag_id.hpp"

namespace bmtd {

enum class TagKind : std::uint8_t { expected_present, unexpected };

// Channel-side tag state. Missing expected tags are never instantiated;
// a deactivated tag stays silent for the rest of the execution.
struct TagState {
    TagId id;
    TagKind kind = TagKind::unexpected;
    bool active = true;
};

struct MissingHit {
    TagId id;
    std::uint64_t slot = 0;  // first '0' mapped position within the frame
};

struct RoundLog {
    int phase = 1;
    std::uint32_t round_index = 0;
    std::uint64_t filter_length = 0;
    std::uint64_t ones_count = 0;   // s1
    std::uint64_t deactivated = 0;  // phase 1 only
    std::vector<MissingHit> missing_found;  // phase 2 only
    double elapsed_bits = 0.0;      // l_j*t_r (phase 1) or f_w*t_t (phase 2)
};

struct DetectionOutcome {
    bool detected = false;
    // 1-based Phase 2 slot of first detection (0 when not detected):
    // completed prior frames plus the first '0' slot a missing tag maps to.
    std::uint64_t detection_slot = 0;
    std::uint32_t j_used = 0;
    std::uint32_t w_used = 0;
    double total_time = 0.0;        // bit-slots, t_r/t_t weighted
    std::uint64_t survivors = 0;    // |U_r| entering / after Phase 1
};

// Degenerate saturated frames keep observed reliability at zero; the
// enforcement loop aborts after 10*W total rounds.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reader->tag deactivation rounds. Expected-present tags always survive;
// each surviving unexpected tag passed every round's membership test.
// Returns per-round logs; tag states are updated in place.
std::vector<RoundLog> run_phase1(std::span<const TagId> expected_ids,
                                 std::vector<TagState>& tags,
                                 std::span<const Phase1Round> rounds, double t_r = 1.0);

struct Phase2Options {
    std::uint32_t w_rounds = 1;
    std::uint32_t r_per_round = 1;
    std::uint64_t f_w = 1;
    std::uint64_t base_seed = 0;     // round w uses derive_seed(base_seed, 2, w)
    double alpha = 0.9;              // observed-reliability floor; 0 disables extra rounds
    std::uint64_t big_m = 1;
    double t_t = 1.0;
    // per-reader tag indices; empty = single reader over all tags
    std::vector<std::vector<std::uint32_t>> coverage;
};

// Tag->reader membership-testing rounds with early termination and the
// observed-reliability enforcement loop. A reported missing id is always
// genuinely absent (asserted): aliasing can only mask, never fabricate.
DetectionOutcome run_phase2(std::span<const TagId> expected_ids,
                            const std::vector<TagState>& tags, const Phase2Options& opt,
                            std::vector<RoundLog>* logs = nullptr);

// 1 - prod over phase-2 rounds of (s1/f_w)^M.
double observed_reliability(std::span<const RoundLog> logs, std::uint64_t big_m,
                            std::uint64_t f_w);

// Bitwise OR of equal-length frames; absorbs duplicate readings.
std::vector<bool> merge_reader_frames(const std::vector<std::vector<bool>>& frames);

// Full execution: Phase 1 then Phase 2 with seeds derived from run_seed.
DetectionOutcome run_protocol(std::span<const TagId> expected_ids,
                              std::vector<TagState>& tags, const ProtocolParams& params,
                              std::uint64_t run_seed, double t_r, double t_t, double alpha,
                              std::uint64_t big_m,
                              const std::vector<std::vector<std::uint32_t>>& coverage = {},
                              std::vector<RoundLog>* logs = nullptr);

}  // namespace bmtd
