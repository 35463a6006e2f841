#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/rng.hpp"

namespace nrv2x {

enum class TrafficModel { P1, P2, P3, A1, A2 };

TrafficModel traffic_model_from_string(const std::string& s);
std::string to_string(TrafficModel m);

enum class CastType { Broadcast, Groupcast, Unicast };

struct GroupcastInfo {
    int harq_option = 1;          // 1 = NACK-only, 2 = ACK/NACK
    std::vector<UeId> members;    // intended receivers
    double range_m = 320.0;       // required communication range (option 1)
};

/// One application packet: what the MAC receives from the upper layer.
struct PacketDescriptor {
    std::uint64_t packet_id = 0;
    UeId source = 0;
    Slot generation_slot = 0;
    int payload_bytes = 0;
    int pdb_ms = 0;
    int priority = 4;  // 1..8, 1 highest
    CastType cast = CastType::Broadcast;
    GroupcastInfo group;      // groupcast only
    UeId unicast_peer = 0;    // unicast only
};

struct Arrival {
    double inter_arrival_ms = 0.0;
    int payload_bytes = 0;
    int pdb_ms = 0;
};

/// Per-UE packet arrival process for the five data traffic models.
/// P1 cycles a five-element size pattern from a random start and randomizes
/// the 100 ms phase; P2/P3 are periodic with random sizes; A1/A2 add an
/// exponential component to the period.
class TrafficGenerator {
  public:
    TrafficGenerator(TrafficModel model, RngStream rng);

    /// Inter-arrival time, payload and PDB of the next packet.
    Arrival next(/*in-out state held internally*/);

    /// First-arrival offset in ms (the randomized phase for periodic models).
    double initial_phase_ms() const { return phase_ms_; }

    TrafficModel model() const { return model_; }

  private:
    TrafficModel model_;
    RngStream rng_;
    int p1_cursor_ = 0;
    double phase_ms_ = 0.0;
};

/// Nominal period in ms (the deterministic part of the inter-arrival time).
double traffic_period_ms(TrafficModel m);

/// Latency requirement (PDB) of the model in ms.
int traffic_pdb_ms(TrafficModel m);

}  // namespace nrv2x
