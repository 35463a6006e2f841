#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nrv2x/channel.hpp"
#include "nrv2x/congestion.hpp"
#include "nrv2x/core.hpp"
#include "nrv2x/power.hpp"
#include "nrv2x/radio.hpp"
#include "nrv2x/resource_pool.hpp"
#include "nrv2x/scenario.hpp"
#include "nrv2x/sync.hpp"
#include "nrv2x/traffic.hpp"

namespace nrv2x {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ReevaluationPolicy { Disabled, AtT3, EverySlot };

struct Mode2Config {
    double keep_probability = 0.0;     // P in [0, 0.8]
    int num_transmissions = 1;         // N <= pool.n_max
    std::optional<int> t2_ms;          // empty -> T2 = PDB
    std::vector<int> t2min_ms;         // 8 entries from {1,5,10,20}
    ReevaluationPolicy reevaluation = ReevaluationPolicy::AtT3;
    bool preferred_rri_from_traffic = true;  // pick the list RRI nearest the traffic period
};

struct TrafficConfig {
    TrafficModel model = TrafficModel::P1;
    int priority = 4;
    CastType cast = CastType::Broadcast;
    int groupcast_option = 1;
    int groupcast_k_nearest = 3;
    double groupcast_range_m = 320.0;
    bool harq_feedback = false;  // per-TB HARQ feedback flag (requires PSFCH)
};

struct CongestionConfig {
    bool enabled = false;
    CongestionTable table = CongestionTable::permissive();
    bool window_scaled = false;     // CBR window 100 * 2^mu instead of 100 slots
    bool cr_window_scaled = false;  // CR window 1000 * 2^mu instead of 1000 slots
    int rssi_threshold_index = 10;  // threshold = (-112 + 2n) dBm
    int b_split = 0;                // future part of the CR window (a = window-1-b)
    int processing_capability = 1;  // 1 or 2 -> N_proc
    EnforceLimits enforce;

    int cbr_window_slots(int mu) const { return window_scaled ? 100 * (1 << mu) : 100; }
    int cr_window_slots(int mu) const { return cr_window_scaled ? 1000 * (1 << mu) : 1000; }
    int n_proc_slots(int mu) const {
        if (mu == 0) return 2;
        return processing_capability == 1 ? (1 << mu) : 2 * (1 << mu);
    }
};

struct SyncConfig {
    SyncMode mode = SyncMode::Disabled;
    double syncref_rsrp_threshold_dbm = -110.0;
    double sssb_trigger_threshold_dbm = -110.0;
    std::optional<bool> network_configured_tx;  // empty = not configured
    bool disable_levels_4_to_6 = false;
    bool require_common_reference = false;  // decode gate on shared timing root
    double sssb_decode_threshold_db = 0.0;  // SINR threshold for S-SSB reception
};

struct GnbConfig {
    std::vector<Vec3> anchors;     // x, y, antenna height
    double tx_power_dbm = 49.0;
    double coverage_rsrp_dbm = -110.0;
};

struct RadioConfig {
    NoiseModel noise;
    LinkAbstraction link;
    bool soft_decode = false;
    double soft_slope_db = 1.0;
    int max_simultaneous_psfch = 2;
};

struct EngineConfig {
    int threads = 1;
    double max_interest_range_m = 520.0;  // per-RX rows traced within this range
    int cbr_sample_period_slots = 10;
    double rsrp_ema_coefficient = 0.5;
};

struct MetricsConfig {
    std::vector<double> pir_distances_m = {320.0};
    std::optional<double> prr_baseline_m;  // empty -> 320 highway / 150 urban
};

struct SimConfig {
    RoadLayout layout;
    DropParams dropping;
    int mu = 0;
    CyclicPrefix cp = CyclicPrefix::Normal;
    double carrier_ghz = 6.0;
    ResourcePool pool;  // pool.numerology filled from mu/cp
    TrafficConfig traffic;
    Mode2Config mode2;
    PowerConfig power;
    CongestionConfig congestion;
    SyncConfig sync;
    GnbConfig gnb;
    RadioConfig radio;
    ChannelModel channel;  // scenario/carrier filled from the top-level fields
    int zone_side_m = 5;
    std::uint64_t seed = 1;
    double duration_s = 1.0;
    double warmup_s = 0.0;
    EngineConfig engine;
    MetricsConfig metrics;

    Numerology numerology() const { return Numerology{mu, cp}; }
    double prr_baseline_m() const {
        if (metrics.prr_baseline_m) return *metrics.prr_baseline_m;
        return layout.kind == RoadLayout::Kind::Highway ? 320.0 : 150.0;
    }

    void validate() const;  // throws ConfigError naming the offending key
};

/// Parses and validates a configuration file (JSON). Parse failures and
/// out-of-range fields throw ConfigError with the offending key path.
SimConfig load_config(const std::string& path);

/// Parses a configuration from a JSON string (used for echo round-trips).
SimConfig parse_config_text(const std::string& text);

/// Serializes the full effective configuration (echoed into summary.json).
std::string config_to_json(const SimConfig& cfg);

/// Built-in baseline: highway option A, P1 traffic, L=5 x 10-PRB pool.
SimConfig default_config();

}  // namespace nrv2x
