#include "nrv2x/traffic.hpp"

namespace nrv2x {

namespace {
constexpr std::array<int, 5> kP1Pattern = {300, 190, 190, 190, 190};
}

TrafficModel traffic_model_from_string(const std::string& s) {
    if (s == "P1") return TrafficModel::P1;
    if (s == "P2") return TrafficModel::P2;
    if (s == "P3") return TrafficModel::P3;
    if (s == "A1") return TrafficModel::A1;
    if (s == "A2") return TrafficModel::A2;
    throw std::invalid_argument("traffic.model: allowed {P1,P2,P3,A1,A2}, given " + s);
}

std::string to_string(TrafficModel m) {
    switch (m) {
        case TrafficModel::P1: return "P1";
        case TrafficModel::P2: return "P2";
        case TrafficModel::P3: return "P3";
        case TrafficModel::A1: return "A1";
        case TrafficModel::A2: return "A2";
    }
    return "?";
}

double traffic_period_ms(TrafficModel m) {
    switch (m) {
        case TrafficModel::P1: return 100.0;
        case TrafficModel::P2: return 10.0;
        case TrafficModel::P3: return 30.0;
        case TrafficModel::A1: return 50.0;
        case TrafficModel::A2: return 10.0;
    }
    return 0.0;
}

int traffic_pdb_ms(TrafficModel m) {
    switch (m) {
        case TrafficModel::P1: return 100;
        case TrafficModel::P2: return 10;
        case TrafficModel::P3: return 30;
        case TrafficModel::A1: return 50;
        case TrafficModel::A2: return 10;
    }
    return 0;
}

TrafficGenerator::TrafficGenerator(TrafficModel model, RngStream rng)
    : model_(model), rng_(rng) {
    if (model_ == TrafficModel::P1)
        p1_cursor_ = static_cast<int>(rng_.uniform_int(0, static_cast<int>(kP1Pattern.size()) - 1));
    // Periodic models start at a random point of their period so UEs are not
    // slot-aligned; aperiodic models draw their first gap like any other.
    phase_ms_ = rng_.uniform(0.0, traffic_period_ms(model_));
}

Arrival TrafficGenerator::next() {
    Arrival a;
    a.pdb_ms = traffic_pdb_ms(model_);
    switch (model_) {
        case TrafficModel::P1:
            a.inter_arrival_ms = 100.0;
            a.payload_bytes = kP1Pattern[static_cast<size_t>(p1_cursor_)];
            p1_cursor_ = (p1_cursor_ + 1) % static_cast<int>(kP1Pattern.size());
            break;
        case TrafficModel::P2:
            a.inter_arrival_ms = 10.0;
            a.payload_bytes = rng_.uniform() < 0.2 ? 1200 : 800;
            break;
        case TrafficModel::P3:
            a.inter_arrival_ms = 30.0;
            a.payload_bytes = 30000 + 10000 * static_cast<int>(rng_.uniform_int(0, 3));
            break;
        case TrafficModel::A1:
            a.inter_arrival_ms = 50.0 + rng_.exponential(50.0);
            a.payload_bytes = 200 + 200 * static_cast<int>(rng_.uniform_int(0, 9));
            break;
        case TrafficModel::A2:
            a.inter_arrival_ms = 10.0 + rng_.exponential(10.0);
            a.payload_bytes = 10000 + 4000 * static_cast<int>(rng_.uniform_int(0, 5));
            break;
    }
    return a;
}

}  // namespace nrv2x
