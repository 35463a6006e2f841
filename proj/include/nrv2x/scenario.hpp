#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nrv2x/core.hpp"
#include "nrv2x/rng.hpp"

namespace nrv2x {

enum class DropOption { A, B, C };

/// Vehicle types: 1 = passenger car with bumper antenna, 2 = passenger car
/// with roof antenna, 3 = truck/bus.
struct VehicleDims {
    double length_m;
    double width_m;
    double height_m;
    double antenna_m;
};

inline VehicleDims vehicle_dims(int type) {
    switch (type) {
        case 1: return {5.0, 2.0, 1.6, 0.75};
        case 2: return {5.0, 2.0, 1.6, 1.6};
        case 3: return {13.0, 2.6, 3.0, 3.0};
        default: throw std::invalid_argument("vehicle type: allowed {1,2,3}");
    }
}

/// Highway: one straight multi-lane road with wrap-around.
/// Urban grid: blocks_x x blocks_y city blocks; streets run along both axes
/// with lanes_per_direction lanes each way. Street centerlines sit at integer
/// multiples of the block size.
struct RoadLayout {
    enum class Kind { Highway, UrbanGrid } kind = Kind::Highway;

    // highway
    double highway_length_m = 2000.0;
    double highway_lane_width_m = 4.0;

    // urban grid
    int blocks_x = 3;
    int blocks_y = 3;
    double block_dx_m = 433.0;
    double block_dy_m = 250.0;
    double urban_lane_width_m = 3.5;
    int lanes_per_direction = 2;

    void validate() const {
        if (kind == Kind::UrbanGrid && (blocks_x < 3 || blocks_y < 3))
            throw std::invalid_argument("layout: urban grid requires at least 3x3 blocks");
        if (kind == Kind::Highway && highway_length_m < 0.0)
            throw std::invalid_argument("layout: highway length must be non-negative");
    }

    double urban_road_half_width() const { return lanes_per_direction * urban_lane_width_m; }
    double grid_span_x() const { return blocks_x * block_dx_m; }
    double grid_span_y() const { return blocks_y * block_dy_m; }

    /// Urban NLOS predicate input: true when both positions lie inside one
    /// street's rectangle (centerline +- road half-width, extended through
    /// intersections). Highway positions always share the street.
    bool same_street(const Vec2& a, const Vec2& b) const;
};

/// Street-relative vehicle state plus derived world position. Streets are
/// axis-aligned: axis 0 runs along x (horizontal), axis 1 along y.
struct Vehicle {
    UeId id = 0;
    int type = 2;
    int axis = 0;        // highway: always 0
    int street = 0;      // index of the street along the other axis
    int lane = 0;        // lane within the street (highway: 0..5)
    double pos_m = 0.0;  // longitudinal position of the vehicle center
    int heading = +1;    // +1 or -1 along the axis
    double speed_mps = 0.0;
    Vec2 xy;             // derived world position

    double antenna_height() const { return vehicle_dims(type).antenna_m; }
    double body_height() const { return vehicle_dims(type).height_m; }
    double length() const { return vehicle_dims(type).length_m; }
    double width() const { return vehicle_dims(type).width_m; }
};

struct DropParams {
    DropOption option = DropOption::A;
    bool highway_low_speed = false;  // option A: 70 km/h instead of 140 km/h
    double min_gap_m = 2.0;
    /// Caps the number of dropped vehicles (0 = road capacity only). Excess
    /// vehicles are removed uniformly at random so lane statistics stay
    /// unbiased.
    int max_vehicles = 0;
};

/// Drops vehicles lane by lane: bumper-to-bumper gaps i.i.d. exponential with
/// mean = lane speed * 2 s, clamped to min_gap. Option C inserts clusters of
/// six type-3 vehicles with exactly min_gap gaps. Throws when option C is
/// combined with an urban layout.
std::vector<Vehicle> drop_vehicles(const RoadLayout& layout, const DropParams& params,
                                   RngStream& rng);

/// Advances every vehicle by dt at its fixed lane speed. Highway wraps
/// around; urban option A turns at intersections with probabilities
/// 0.5/0.25/0.25 (straight/left/right), option B never turns.
void advance_mobility(std::vector<Vehicle>& vehicles, const RoadLayout& layout,
                      DropOption option, double dt_s, RngStream& rng);

/// Height of the tallest vehicle whose 2D footprint intersects the open
/// TX-RX segment, if any (geometric NLOSv detection).
std::optional<double> tallest_blocker(const std::vector<Vehicle>& vehicles, size_t tx_idx,
                                      size_t rx_idx);

/// Speed profile (km/h) of the Table XIII dropping options; exposed for
/// tests. Highway lanes 0..2 head +x, 3..5 head -x.
double lane_speed_kmh(const RoadLayout& layout, DropOption option, bool low_speed, int axis,
                      int lane);

}  // namespace nrv2x
