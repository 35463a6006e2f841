#pragma once

#include <optional>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/rng.hpp"

namespace nrv2x {

enum class SyncMode { GnssBased, GnbBased, Disabled };
enum class SyncRefKind { Gnss, Gnb, SyncRefUe, InternalClock };

/// A synchronization reference a UE can hear: GNSS/gNB availability or a
/// SyncRef UE with its announced SLSS ID and in-coverage indicator.
struct SyncCandidate {
    SyncRefKind kind = SyncRefKind::SyncRefUe;
    UeId ue = 0;          // SyncRef UE only
    int slss_id = 0;      // SyncRef UE only, [0, 671]
    bool i_ic = false;    // in-coverage indicator
    double rsrp_dbm = 0;  // SyncRef UE (and gNB cell) measurement
};

/// Priority level 1..8 of a candidate under the configured hierarchy.
int priority_level(const SyncCandidate& candidate, SyncMode mode);

struct SyncSelection {
    SyncRefKind kind = SyncRefKind::InternalClock;
    UeId ref_ue = 0;
    int level = 8;
    int ref_slss_id = 0;
    bool ref_i_ic = false;
    double rsrp_dbm = -1e9;
};

/// Picks the reference: lowest level number wins, ties by highest RSRP.
/// SyncRef UE candidates below the RSRP threshold are not admitted. With
/// GNSS-based synchronization, levels 4-6 may be disabled. Falls back to the
/// internal clock (level 8).
SyncSelection select_reference(const std::vector<SyncCandidate>& candidates,
                               double syncref_rsrp_threshold_dbm, SyncMode mode,
                               bool disable_levels_4_to_6 = false);

/// S-SSB transmission trigger. A network-configured UE follows the
/// configuration unconditionally; otherwise a UE with sidelink data becomes
/// a SyncRef when its reference's RSRP is below the threshold (references
/// without an RSRP, e.g. GNSS, always trigger) or when it runs on its own
/// internal clock.
bool should_transmit_sssb(std::optional<bool> network_configured_tx, bool has_sl_data,
                          std::optional<double> ref_rsrp_dbm, double threshold_dbm,
                          bool internal_clock);

struct SlssIdentity {
    int slss_id = 0;
    bool i_ic = false;
};

/// SLSS ID and in-coverage indicator a new SyncRef UE announces, derived
/// from its selected reference: (0,1) for GNSS, a network-assigned id with
/// i_ic=1 for gNB; following a SyncRef UE keeps its id when that reference
/// was in coverage, adds 336 when it was an out-of-coverage relay with an
/// in-coverage id, and keeps out-of-coverage ids as is. The internal clock
/// draws uniformly from [336, 671] excluding 336 and 337.
SlssIdentity derive_slss_id(SyncRefKind ref_kind, int ref_slss_id, bool ref_i_ic,
                            int network_assigned_id, RngStream& rng);

/// S-SSB period: fixed 160 ms.
inline constexpr int kSssbPeriodMs = 160;

}  // namespace nrv2x
