#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/rng.hpp"

namespace nrv2x {

struct PrbSpan {
    int start = 0;
    int count = 0;

    int end() const { return start + count; }
    int overlap(const PrbSpan& o) const {
        const int lo = std::max(start, o.start);
        const int hi = std::min(end(), o.end());
        return std::max(0, hi - lo);
    }
};

/// Thermal noise with the configured receiver noise figure; bandwidth is
/// PRB count x 12 subcarriers x SCS.
struct NoiseModel {
    double noise_figure_db = 9.0;
    double thermal_dbm_hz = kThermalNoiseDbmHz;

    double noise_dbm(int prbs, int scs_khz) const {
        const double bw_hz = static_cast<double>(prbs) * 12.0 * scs_khz * 1000.0;
        return thermal_dbm_hz + 10.0 * std::log10(bw_hz) + noise_figure_db;
    }
};

/// One received signal component in a slot: who, where, how strong.
struct RxContribution {
    PrbSpan span;
    double power_dbm = 0.0;
};

inline double rx_power_dbm(double tx_power_dbm, double total_loss_db) {
    return tx_power_dbm - total_loss_db;
}

/// Linear-domain S / (N + sum I). Interferer power is pro-rated by the
/// fraction of the interferer's PRBs overlapping the target span.
double sinr_db(const RxContribution& target, const std::vector<RxContribution>& interferers,
               const NoiseModel& noise, int scs_khz);

/// Total received power + noise over a measurement span (sub-channel RSSI).
double rssi_dbm(const std::vector<RxContribution>& contributions, const PrbSpan& span,
                const NoiseModel& noise, int scs_khz);

enum class DecodeKind { Sci, Tb };

/// SINR-threshold link-to-system mapping: deterministic threshold test by
/// default, optional logistic soft error mode.
struct DecodeModel {
    std::vector<double> tb_threshold_db;  // per MCS index
    double sci_threshold_db = 0.0;
    bool soft = false;
    double soft_slope_db = 1.0;
};

bool decode(const DecodeModel& model, DecodeKind kind, double sinr_db_value, int mcs,
            RngStream* rng = nullptr);

/// Capacity abstraction for fitting one packet (one TB) into sub-channels:
/// bits per (PRB x slot) from the MCS spectral efficiency and the number of
/// data symbols, with the PSCCH resource elements and the 2nd-stage SCI cost
/// subtracted.
struct LinkAbstraction {
    std::vector<double> spectral_efficiency;  // per MCS index
    int data_symbols = 9;
    int sci2_bits = 64;
    double impl_margin_db = 3.0;
    double sci_margin_db = 3.0;
};

/// Default MCS set spanning QPSK to 64-QAM spectral efficiencies.
LinkAbstraction default_link_abstraction();

/// Decode thresholds from the Shannon bound of each MCS plus the
/// implementation margin; SCI threshold sits sci_margin below the lowest.
DecodeModel make_decode_model(const LinkAbstraction& la);

std::int64_t capacity_bits(const LinkAbstraction& la, int mcs, int l_pssch, int m_sub,
                           int pscch_prbs, int pscch_symbols);

struct McsFit {
    int mcs = 0;
    int l_pssch = 1;
};

/// Lowest-index MCS that fits the TB within max_l sub-channels, and the
/// smallest sub-channel count for that MCS.
std::optional<McsFit> fit_tb(const LinkAbstraction& la, std::int64_t tb_bits, int max_l,
                             int m_sub, int pscch_prbs, int pscch_symbols, int min_mcs = 0);

/// A UE's intents in one slot, fed to the half-duplex arbiter.
struct PsfchDuty {
    int priority = 4;   // priority of the associated PSSCH
    std::uint64_t key = 0;
};

struct SlotIntents {
    bool pssch_tx = false;
    std::vector<PsfchDuty> psfch_tx;
    std::vector<PsfchDuty> psfch_rx;  // feedback the UE expects to receive
};

struct AllowedActions {
    bool can_receive_pssch = true;          // sense + receive data this slot
    bool psfch_rx_allowed = true;           // may listen to the PSFCH symbol
    std::vector<size_t> psfch_tx_selected;  // indices into intents.psfch_tx
};

/// Slot-level half duplex: a UE transmitting PSSCH receives nothing that
/// slot. Simultaneous PSFCH TX vs RX is resolved by the priority of the
/// associated PSSCH (ties transmit); at most max_simultaneous_psfch PSFCHs
/// are sent, highest priority first.
AllowedActions half_duplex_filter(const SlotIntents& intents, int max_simultaneous_psfch);

}  // namespace nrv2x
