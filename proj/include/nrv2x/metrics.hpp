#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/traffic.hpp"

namespace nrv2x {

/// Per-receiver outcome of one packet.
struct RxOutcome {
    UeId rx = 0;
    bool delivered = false;       // TB decoded within the PDB
    bool late = false;            // decoded only after the PDB
    Slot delivered_slot = -1;     // first decode slot (valid when delivered or late)
    double dist_first_tx_m = 0.0; // TX-RX distance at the first attempt
    double dist_delivery_m = 0.0; // distance at the decode slot
    bool intended = false;        // member of the intended receiver set
};

/// The raw material of every metric: one generated packet and what happened
/// to it at each receiver of interest.
struct PacketRecord {
    std::uint64_t packet_id = 0;
    UeId tx = 0;
    Slot generation_slot = 0;
    Slot first_tx_slot = -1;  // -1: never transmitted
    int size_bytes = 0;
    int pdb_slots = 0;
    CastType cast = CastType::Broadcast;
    std::vector<RxOutcome> outcomes;
};

struct PrrBin {
    long successes = 0;  // sum of X over packets
    long receivers = 0;  // sum of Y over packets
    std::optional<double> ratio() const {
        if (receivers == 0) return std::nullopt;
        return static_cast<double>(successes) / static_cast<double>(receivers);
    }
};

inline constexpr int kPrrBinCount = 26;
inline constexpr double kPrrBinWidthM = 20.0;

/// PRR type 1 over 20 m distance-at-first-TX bins, aggregated as
/// sum(X)/sum(Y) across packets.
std::array<PrrBin, kPrrBinCount> prr_type1_bins(const std::vector<PacketRecord>& records);

/// Per-packet PRR values over the (0, b] baseline range (for the CDF), plus
/// the aggregate ratio.
struct PrrAggregate {
    std::vector<double> per_packet;  // X/Y of packets with Y > 0
    PrrBin total;
};
PrrAggregate prr_type1_range(const std::vector<PacketRecord>& records, double range_m);

/// PRR type 2 over the intended receiver set (S/Z).
PrrAggregate prr_type2(const std::vector<PacketRecord>& records);

/// Packet inter-reception times per (tx, rx) pair. Type 1 requires both
/// successive receptions within (0, D]; type 2 restricts to intended
/// receivers, without a distance gate.
struct PirResult {
    std::vector<double> intervals_s;
    double mean_s = 0.0;
};
PirResult pir(const std::vector<PacketRecord>& records, int type, double distance_m,
              double slot_duration_s);

/// Throughput per flow (flow = transmitting UE): delivered bits over the
/// generation-to-delivery time, floored at one slot.
struct ThroughputResult {
    std::map<UeId, double> mean_bps_per_flow;
    double mean_bps = 0.0;  // over all delivered packets
    long delivered = 0;
};
ThroughputResult throughput(const std::vector<PacketRecord>& records, double slot_duration_s);

/// Quantile sketch stored in the summary instead of raw interval lists.
struct Deciles {
    std::array<double, 11> q{};  // min, p10..p90, max
    long count = 0;
};
Deciles deciles(std::vector<double> values);

struct MetricsSummary {
    long packets_generated = 0;
    long packets_transmitted = 0;
    long tx_attempts = 0;
    long receptions_traced = 0;
    long congestion_drops = 0;
    long pdb_drops = 0;
    long reselections = 0;
    long reevaluation_replacements = 0;
    long preemption_releases = 0;
    std::array<PrrBin, kPrrBinCount> prr_bins{};
    PrrBin prr_baseline_total;
    std::vector<double> prr_baseline_cdf;  // P(PRR <= k/100), 101 points
    double prr_baseline_m = 0.0;
    PrrBin prr_type2_total;
    std::map<double, Deciles> pir_type1_s;  // keyed by D
    std::map<double, double> pir_type1_mean_s;
    Deciles pir_type2_s;
    double pir_type2_mean_s = 0.0;
    double throughput_mean_bps = 0.0;
    long throughput_delivered = 0;
    double mean_cbr = 0.0;
    double mean_cr = 0.0;
    long cbr_samples = 0;
};

struct MetricsInputs {
    std::vector<double> pir_distances_m;
    double prr_baseline_m = 320.0;
    double slot_duration_s = 0.001;
};

/// Pure function of the packet records and CBR samples.
MetricsSummary summarize(const std::vector<PacketRecord>& records,
                         const std::vector<std::pair<double, double>>& cbr_cr_samples,
                         const MetricsInputs& inputs);

std::string summary_to_json(const MetricsSummary& s, const std::string& config_echo_json,
                            std::uint64_t seed);

}  // namespace nrv2x
