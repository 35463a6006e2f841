#include "nrv2x/sync.hpp"

#include <algorithm>
#include <stdexcept>

namespace nrv2x {

namespace {

// SyncRef UE subgroup by announced identity: 0 = direct GNSS, 1 = one hop
// from GNSS, 2 = direct gNB, 3 = one hop from gNB, 4 = everything else.
int syncref_group(int slss_id, bool i_ic) {
    if (slss_id == 0) return i_ic ? 0 : 1;
    if (slss_id <= 335) return i_ic ? 2 : 3;
    return 4;
}

}  // namespace

int priority_level(const SyncCandidate& c, SyncMode mode) {
    if (mode == SyncMode::Disabled) return 8;
    const bool gnss_first = mode == SyncMode::GnssBased;
    switch (c.kind) {
        case SyncRefKind::Gnss: return gnss_first ? 1 : 4;
        case SyncRefKind::Gnb: return gnss_first ? 4 : 1;
        case SyncRefKind::InternalClock: return 8;
        case SyncRefKind::SyncRefUe: break;
    }
    switch (syncref_group(c.slss_id, c.i_ic)) {
        case 0: return gnss_first ? 2 : 5;
        case 1: return gnss_first ? 3 : 6;
        case 2: return gnss_first ? 5 : 2;
        case 3: return gnss_first ? 6 : 3;
        default: return 7;
    }
}

SyncSelection select_reference(const std::vector<SyncCandidate>& candidates,
                               double syncref_rsrp_threshold_dbm, SyncMode mode,
                               bool disable_levels_4_to_6) {
    SyncSelection best;  // defaults to internal clock, level 8
    for (const SyncCandidate& c : candidates) {
        if (c.kind == SyncRefKind::SyncRefUe && !(c.rsrp_dbm > syncref_rsrp_threshold_dbm))
            continue;
        const int level = priority_level(c, mode);
        if (disable_levels_4_to_6 && mode == SyncMode::GnssBased && level >= 4 && level <= 6)
            continue;
        const bool better =
            level < best.level || (level == best.level && c.rsrp_dbm > best.rsrp_dbm);
        if (better) {
            best.kind = c.kind;
            best.ref_ue = c.ue;
            best.level = level;
            best.ref_slss_id = c.slss_id;
            best.ref_i_ic = c.i_ic;
            best.rsrp_dbm = c.rsrp_dbm;
        }
    }
    return best;
}

bool should_transmit_sssb(std::optional<bool> network_configured_tx, bool has_sl_data,
                          std::optional<double> ref_rsrp_dbm, double threshold_dbm,
                          bool internal_clock) {
    if (network_configured_tx) return *network_configured_tx;
    if (!has_sl_data) return false;
    if (internal_clock) return true;
    if (!ref_rsrp_dbm) return true;  // reference without an RSRP measurement (GNSS)
    return *ref_rsrp_dbm < threshold_dbm;
}

SlssIdentity derive_slss_id(SyncRefKind ref_kind, int ref_slss_id, bool ref_i_ic,
                            int network_assigned_id, RngStream& rng) {
    switch (ref_kind) {
        case SyncRefKind::Gnss: return {0, true};
        case SyncRefKind::Gnb:
            if (network_assigned_id < 1 || network_assigned_id > 335)
                throw std::invalid_argument("derive_slss_id: gNB-assigned id must be in [1,335]");
            return {network_assigned_id, true};
        case SyncRefKind::SyncRefUe:
            if (ref_slss_id >= 336) return {ref_slss_id, false};
            if (ref_i_ic) return {ref_slss_id, false};
            return {ref_slss_id + 336, false};
        case SyncRefKind::InternalClock: {
            int id = 336 + static_cast<int>(rng.uniform_int(2, 335));
            return {id, false};
        }
    }
    return {0, false};
}

}  // namespace nrv2x
