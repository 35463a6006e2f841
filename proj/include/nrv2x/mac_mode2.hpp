#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/resource_pool.hpp"
#include "nrv2x/rng.hpp"
#include "nrv2x/traffic.hpp"

namespace nrv2x {

/// Abstract two-stage sidelink control information: everything a sensing or
/// receiving UE learns from a decoded transmission.
struct ControlMessage {
    UeId source = 0;
    int priority = 4;       // 1..8, 1 highest
    int mcs = 0;
    int rri_ms = 0;         // reservation period for the next TB, 0 = none
    CastType cast = CastType::Broadcast;
    int harq_option = 1;    // groupcast feedback option
    bool harq_feedback = false;
    std::uint64_t tb_id = 0;
    int attempt = 0;        // 0 = initial transmission
    int zone = 0;           // TX zone id (groupcast option 1)
    double range_m = 0.0;   // required communication range (option 1)
    UeId dest = 0;          // unicast peer / group id
    /// Resource of this transmission first, then the reserved resources for
    /// the following retransmissions of this TB (all within the 32-slot
    /// window of this message's slot). Pool-slot ordinals.
    std::vector<SlotResource> resources;
};

/// One row of a UE's sensing memory: a decoded 1st-stage SCI plus the RSRP
/// it was measured at. Slots are absolute.
struct SensedResource {
    Slot slot = 0;  // absolute slot of the (current or reserved) resource
    int subchannel = 0;
    int num_subchannels = 1;
};

struct SensedEntry {
    Slot slot = 0;           // absolute slot the SCI was received in
    std::vector<SensedResource> resources;
    int rri_ms = 0;
    int priority = 4;
    double rsrp_dbm = -999.0;
};

/// Candidate resource inside a selection window: one pool slot and a
/// starting sub-channel for an L_PSSCH-wide allocation.
struct Candidate {
    Slot abs_slot = 0;
    Slot pool_slot = 0;
    int subchannel = 0;
    int num_subchannels = 1;

    SlotResource as_resource() const { return {pool_slot, subchannel, num_subchannels}; }
};

struct EmptyWindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SelectionWindow {
    Slot trigger = 0;  // slot n
    int t1_slots = 0;
    int t2_slots = 0;
};

struct Step1Input {
    SelectionWindow window;
    int l_pssch = 1;
    int own_priority = 4;
    int rri_tx_ms = 0;             // the UE's own RRI (0 = dynamic scheme)
    int reselection_counter = 0;   // bounds the j-projection when rri_tx > 0
    std::vector<Slot> own_tx_slots;  // absolute slots the UE transmitted in
};

struct Step1Result {
    std::vector<Candidate> candidates;  // every (slot, start) in the window
    std::vector<uint8_t> available;     // parallel to candidates
    /// Best (numerically lowest) priority among the sensed reservations that
    /// exclude the candidate; 0 when none (e.g. half-duplex exclusion only).
    std::vector<int> conflict_priority;
    int threshold_bump_db = 0;   // total RSRP-threshold raise applied
    bool half_duplex_skipped = false;  // step (a) dropped to meet the X% floor

    int available_count() const {
        int c = 0;
        for (uint8_t a : available) c += a;
        return c;
    }
    std::vector<Candidate> available_candidates() const {
        std::vector<Candidate> out;
        for (size_t i = 0; i < candidates.size(); ++i)
            if (available[i]) out.push_back(candidates[i]);
        return out;
    }
};

/// Step 1 of the mode-2 resource selection: enumerate the candidates in
/// [n+T1, n+T2], exclude (a) slots masked by the UE's own half-duplex
/// transmissions projected over every permitted RRI, and (b) resources
/// reserved by sensed SCIs above the RSRP threshold; iterate raising the
/// thresholds by 3 dB until at least X% of the candidates remain. When the
/// half-duplex exclusions alone would leave fewer than X%, they are skipped
/// so the floor is always met.
Step1Result step1_exclude(const Step1Input& in, const std::vector<SensedEntry>& sensing,
                          const ResourcePool& pool);

/// Step 2: uniform draw of the first resource, then chained draws
/// constrained to within 31 slots of a previously selected resource
/// (falling back to the unconstrained set when no chained candidate
/// exists). Respects the minimum HARQ gap t_GAP between consecutive
/// selections and never returns same-slot frequency overlaps. May return
/// fewer than n when the hard constraints exhaust the feasible set.
std::vector<Candidate> step2_select(const std::vector<Candidate>& available, int n,
                                    const std::vector<Candidate>& preselected,
                                    int t_gap_slots, RngStream& rng);

/// Reselection counter draw: uniform in [5C, 15C] with C = 1 for RRI >= 100
/// ms and C = 100/max(20, RRI) otherwise.
int reselection_counter(int rri_ms, RngStream& rng);

/// Interval the counter is drawn from (exposed for tests).
std::pair<int, int> reselection_counter_range(int rri_ms);

enum class CycleEnd { Keep, Reselect };

struct GrantState {
    std::vector<Candidate> resources;  // selected for the current TB cycle
    int rri_ms = 0;                    // 0 = dynamic
    int reselection_counter = 0;
    double keep_probability = 0.0;     // P in [0, 0.8]
    int priority = 4;
};

/// Counter bookkeeping after a TB and all its (re)transmissions: decrement;
/// at zero, keep the grant with probability P (counter redrawn) or signal
/// reselection.
CycleEnd on_tb_cycle_end(GrantState& grant, RngStream& rng);

/// Indices of `pending` resources that step 1 now excludes (re-evaluation).
std::vector<size_t> excluded_pending(const std::vector<Candidate>& pending,
                                     const Step1Result& s1);

/// Indices of `pending` resources that must be freed under pre-emption: the
/// resource is now excluded by a sensed reservation whose priority is higher
/// than ours and, when the pool configures a threshold, higher than it.
std::vector<size_t> preempted_pending(const std::vector<Candidate>& pending,
                                      const Step1Result& s1, int own_priority,
                                      int pool_priority_threshold);

enum class HarqDecision { Retransmit, Done, Drop };

struct HarqFeedbackEvent {
    UeId from = 0;
    bool ack = false;
};

struct HarqProcess {
    int attempts_done = 1;  // transmissions already on air
    int n_total = 1;        // selected resources for this TB
    CastType cast = CastType::Broadcast;
    int groupcast_option = 1;
    std::set<UeId> group;   // intended receivers (groupcast option 2 / unicast peer)
    std::set<UeId> acked;   // accumulated ACKs
    bool feedback_enabled = false;  // false = blind (re)transmissions
};

/// HARQ state step at a feedback occasion. Silence (no events) follows the
/// cast-type rules: unicast and groupcast option 2 treat it as missing, the
/// NACK-only option treats it as success.
HarqDecision harq_step(HarqProcess& process, const std::vector<HarqFeedbackEvent>& events);

/// NACK-only feedback gate: reply only when the SCI was decoded, the TB was
/// not, and the zone-derived TX distance is within the required range.
bool option1_should_nack(bool sci_decoded, bool tb_decoded, int tx_zone_id, double range_m,
                         const Vec2& rx_pos, int zone_side_m);

/// T2min in slots: {1,5,10,20} ms scaled by 2^mu, picked by priority.
int t2min_slots(int mu, int priority, const std::vector<int>& t2min_ms_by_priority);

}  // namespace nrv2x
