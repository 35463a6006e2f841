#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/numerology.hpp"

namespace nrv2x {

/// One candidate/selected sidelink resource: a pool slot plus L_PSSCH
/// contiguous sub-channels.
struct SlotResource {
    Slot pool_slot = 0;     // ordinal among the pool's sidelink slots
    int subchannel = 0;     // first sub-channel
    int num_subchannels = 1;

    bool freq_overlaps(const SlotResource& o) const {
        return subchannel < o.subchannel + o.num_subchannels &&
               o.subchannel < subchannel + num_subchannels;
    }
    bool operator==(const SlotResource& o) const {
        return pool_slot == o.pool_slot && subchannel == o.subchannel &&
               num_subchannels == o.num_subchannels;
    }
};

enum class PsfchOption {
    PssschSubchannels,   // F = L_PSSCH * M_set * Q, PRB sets of all occupied sub-channels
    StartingSubchannel,  // F = M_set * Q, PRB set of the starting sub-channel only
};

struct PsfchConfig {
    int period = 0;          // N in {0(disabled),1,2,4} pool slots
    int min_gap = 3;         // K in {2,3} pool slots
    int bearer_offset = -1;  // bearer pool slots satisfy (slot mod N) == offset; -1 -> N-1
    std::vector<uint8_t> prb_bitmap;  // over the pool's L*M_sub PRBs; empty -> derived
    int cs_pairs = 1;        // Q in {1,2,3,6}
    PsfchOption option = PsfchOption::PssschSubchannels;

    bool enabled() const { return period > 0; }
    int offset() const { return bearer_offset >= 0 ? bearer_offset : period - 1; }
};

struct PscchConfig {
    int symbols = 2;  // {2,3}
    int prbs = 10;    // M_PSCCH in {10,12,15,20,25}, < M_sub
};

/// PSFCH index resolved to physical resources. Shift 0 carries NACK,
/// shift 1 carries ACK within the cyclic-shift pair.
struct PsfchResource {
    int prb = 0;      // index into the pool-wide PRB grid
    int cs_pair = 0;  // cyclic-shift pair index in [0, Q)
    int shift = 0;    // 0 = NACK, 1 = ACK
    bool operator==(const PsfchResource& o) const {
        return prb == o.prb && cs_pair == o.cs_pair && shift == o.shift;
    }
};

/// The shared medium definition: sub-channel/slot grid, PSCCH/PSFCH layout,
/// permitted reservation intervals and the mode-2 threshold knobs.
struct ResourcePool {
    Numerology numerology;
    int num_subchannels = 1;            // L
    int subchannel_prbs = 10;           // M_sub
    std::vector<uint8_t> slot_bitmap;   // length 10..160, repeats inside the 10240 ms period
    int sl_symbol_start = 0;
    int sl_symbol_count = 14;           // [7,14]
    PscchConfig pscch;
    PsfchConfig psfch;
    std::vector<int> rri_list_ms;       // up to 16 values from {0,[1..99],100,200,...,1000}
    std::vector<std::vector<double>> rsrp_threshold_dbm;  // [own priority-1][sensed priority-1]
    std::vector<int> x_percent_by_priority;               // 8 entries, each in {20,35,50}
    int n_max = 1;                      // <= 32
    int max_n_sci = 2;                  // {2,3}
    int t_gap_slots = 0;                // 0 -> K + 1 + T_proc,1
    bool sps_enabled = true;
    bool preemption_enabled = false;
    int preemption_priority_threshold = 0;  // 0 -> not configured
    int t0_ms = 1100;                   // sensing window span, {1100, 100}

    std::int64_t period_slots() const { return numerology.ms_to_slots(10240); }
    int total_prbs() const { return num_subchannels * subchannel_prbs; }

    int effective_t_gap() const {
        if (!psfch.enabled()) return 0;
        return t_gap_slots > 0 ? t_gap_slots : psfch.min_gap + 1 + t_proc1_slots(numerology.mu);
    }

    /// PRB indices usable for PSFCH in a PSFCH symbol, in increasing order.
    std::vector<int> psfch_usable_prbs() const {
        std::vector<int> out;
        if (psfch.prb_bitmap.empty()) {
            out.resize(static_cast<size_t>(total_prbs()));
            for (int i = 0; i < total_prbs(); ++i) out[static_cast<size_t>(i)] = i;
        } else {
            for (int i = 0; i < static_cast<int>(psfch.prb_bitmap.size()); ++i)
                if (psfch.prb_bitmap[static_cast<size_t>(i)]) out.push_back(i);
        }
        return out;
    }

    int psfch_m() const { return static_cast<int>(psfch_usable_prbs().size()); }
    int psfch_m_set() const { return psfch_m() / (psfch.period * num_subchannels); }

    void validate() const;
};

/// Maps an absolute slot to its ordinal among the pool's sidelink slots,
/// or nullopt when the slot is not part of the pool. The bitmap repeats
/// inside each 10240 ms period and restarts at period boundaries.
std::optional<Slot> pool_slot_index(Slot absolute_slot, const ResourcePool& pool);

/// Absolute slot of the pool slot with the given ordinal.
Slot absolute_slot_of_pool_index(Slot pool_index, const ResourcePool& pool);

/// True when the pool slot carries a PSFCH symbol.
bool is_psfch_bearer(Slot pool_slot, const ResourcePool& pool);

/// Pool slot carrying the HARQ feedback for a PSSCH at pool slot n: the
/// first PSFCH-bearing pool slot at least K pool slots after n.
Slot psfch_slot_for(Slot pssch_pool_slot, const ResourcePool& pool);

/// Position of a PSSCH pool slot inside the window of N PSSCH slots
/// associated with its PSFCH bearer, in [0, N).
int psfch_slot_in_window(Slot pssch_pool_slot, const ResourcePool& pool);

/// Resolves the PSFCH index i = (T_ID + R_ID) mod F to a PRB and cyclic
/// shift (zero-based arithmetic). R_ID is 0 for unicast and groupcast
/// NACK-only; the member index in [0, X) for groupcast ACK/NACK.
PsfchResource psfch_resource(std::uint32_t tx_id, std::uint32_t rx_group_id,
                             const SlotResource& pssch, const ResourcePool& pool, bool ack);

/// PSFCHs available for one transmission (F): how many receivers can be
/// multiplexed. Groupcast ACK/NACK requires group size <= PRBs available.
int psfch_capacity(const SlotResource& pssch, const ResourcePool& pool);
int psfch_prbs_for(const SlotResource& pssch, const ResourcePool& pool);

/// 12-bit zone identifier of the side x side square containing `pos`;
/// the 64 x 64 zone grid repeats over the plane.
int zone_id(const Vec2& pos, int zone_side_m);

/// Distance from `rx` to the center of the nearest zone with the given id.
double zone_distance(const Vec2& rx, int id, int zone_side_m);

}  // namespace nrv2x
