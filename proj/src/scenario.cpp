#include "nrv2x/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace nrv2x {

namespace {

constexpr double kKmhToMps = 1.0 / 3.6;

double wrap_position(double pos, double span) {
    if (span <= 0.0) return pos;
    double w = std::fmod(pos, span);
    if (w < 0.0) w += span;
    return w;
}

// Lateral lane offset from the street centerline. Lanes [0, lpd) head +1 on
// the negative side, lanes [lpd, 2*lpd) head -1 on the positive side.
double urban_lane_offset(const RoadLayout& layout, int lane) {
    const int lpd = layout.lanes_per_direction;
    const double w = layout.urban_lane_width_m;
    if (lane < lpd) return -(lane + 0.5) * w;
    return (lane - lpd + 0.5) * w;
}

int urban_lane_heading(const RoadLayout& layout, int lane) {
    return lane < layout.lanes_per_direction ? +1 : -1;
}

void update_world_position(Vehicle& v, const RoadLayout& layout) {
    if (layout.kind == RoadLayout::Kind::Highway) {
        v.xy = {v.pos_m, (v.lane + 0.5) * layout.highway_lane_width_m};
        return;
    }
    const double center = v.axis == 0 ? v.street * layout.block_dy_m : v.street * layout.block_dx_m;
    const double off = urban_lane_offset(layout, v.lane);
    if (v.axis == 0)
        v.xy = {v.pos_m, center + off};
    else
        v.xy = {center + off, v.pos_m};
}

struct LaneRef {
    int axis;
    int street;
    int lane;
    double span;
};

std::vector<LaneRef> enumerate_lanes(const RoadLayout& layout) {
    std::vector<LaneRef> lanes;
    if (layout.kind == RoadLayout::Kind::Highway) {
        for (int l = 0; l < 6; ++l) lanes.push_back({0, 0, l, layout.highway_length_m});
        return lanes;
    }
    const int per_street = 2 * layout.lanes_per_direction;
    for (int j = 0; j <= layout.blocks_y; ++j)
        for (int l = 0; l < per_street; ++l) lanes.push_back({0, j, l, layout.grid_span_x()});
    for (int i = 0; i <= layout.blocks_x; ++i)
        for (int l = 0; l < per_street; ++l) lanes.push_back({1, i, l, layout.grid_span_y()});
    return lanes;
}

// Intersection exclusion boxes along a vertical street (urban option B:
// no vehicles dropped at the crossings in the north-south direction).
bool overlaps_intersection(const RoadLayout& layout, double rear, double front) {
    const double hw = layout.urban_road_half_width();
    for (int j = 0; j <= layout.blocks_y; ++j) {
        const double c = j * layout.block_dy_m;
        if (rear < c + hw && front > c - hw) return true;
    }
    return false;
}

int draw_type(DropOption option, RngStream& rng) {
    switch (option) {
        case DropOption::A: return 2;
        case DropOption::B: {
            const double u = rng.uniform();
            if (u < 0.2) return 1;
            if (u < 0.8) return 2;
            return 3;
        }
        case DropOption::C: return 2;  // clusters handled separately
    }
    return 2;
}

}  // namespace

bool RoadLayout::same_street(const Vec2& a, const Vec2& b) const {
    if (kind == Kind::Highway) return true;
    const double hw = urban_road_half_width();
    for (int j = 0; j <= blocks_y; ++j) {
        const double c = j * block_dy_m;
        if (std::abs(a.y - c) <= hw && std::abs(b.y - c) <= hw) return true;
    }
    for (int i = 0; i <= blocks_x; ++i) {
        const double c = i * block_dx_m;
        if (std::abs(a.x - c) <= hw && std::abs(b.x - c) <= hw) return true;
    }
    return false;
}

double lane_speed_kmh(const RoadLayout& layout, DropOption option, bool low_speed, int axis,
                      int lane) {
    if (layout.kind == RoadLayout::Kind::Highway) {
        switch (option) {
            case DropOption::A: return low_speed ? 70.0 : 140.0;
            case DropOption::B: {
                static constexpr double speeds[6] = {80.0, 100.0, 140.0, 40.0, 30.0, 20.0};
                return speeds[lane];
            }
            case DropOption::C: return 140.0;
        }
    }
    if (option == DropOption::A) return 60.0;
    // Urban option B: east-west streets carry traffic, north-south lanes are
    // stationary.
    if (axis == 0) {
        static constexpr double speeds[4] = {60.0, 50.0, 25.0, 15.0};
        return speeds[std::min(lane, 3)];
    }
    return 0.0;
}

std::vector<Vehicle> drop_vehicles(const RoadLayout& layout, const DropParams& params,
                                   RngStream& rng) {
    layout.validate();
    if (params.option == DropOption::C && layout.kind != RoadLayout::Kind::Highway)
        throw std::invalid_argument("drop_vehicles: option C is highway-only");

    std::vector<Vehicle> out;
    UeId next_id = 0;

    for (const LaneRef& lane : enumerate_lanes(layout)) {
        const double speed_kmh =
            lane_speed_kmh(layout, params.option, params.highway_low_speed, lane.axis, lane.lane);
        const double speed = speed_kmh * kKmhToMps;
        const double mean_gap = speed * 2.0;
        const int heading = layout.kind == RoadLayout::Kind::Highway
                                ? (lane.lane < 3 ? +1 : -1)
                                : urban_lane_heading(layout, lane.lane);
        const bool exclusion = layout.kind == RoadLayout::Kind::UrbanGrid &&
                               params.option == DropOption::B && lane.axis == 1;

        double front = 0.0;  // front bumper of the previous vehicle
        bool first = true;
        while (true) {
            double gap = mean_gap > 0.0 ? rng.exponential(mean_gap) : 0.0;
            gap = std::max(gap, params.min_gap_m);

            int cluster = 1;
            int type;
            if (params.option == DropOption::C) {
                // One cluster of six type-3 vehicles per twelve type-2
                // singles keeps the 67/33 per-vehicle mix.
                if (rng.uniform() < 1.0 / 13.0) {
                    cluster = 6;
                    type = 3;
                } else {
                    type = 2;
                }
            } else {
                type = draw_type(params.option, rng);
            }

            bool lane_full = false;
            for (int k = 0; k < cluster; ++k) {
                const VehicleDims dims = vehicle_dims(type);
                double rear = first ? gap : front + gap;
                if (k > 0) rear = front + params.min_gap_m;  // fixed in-cluster gap
                double veh_front = rear + dims.length_m;
                if (exclusion) {
                    while (veh_front <= lane.span &&
                           overlaps_intersection(layout, rear, veh_front)) {
                        rear += 1.0;
                        veh_front = rear + dims.length_m;
                    }
                }
                if (veh_front > lane.span) {
                    lane_full = true;
                    break;
                }
                Vehicle v;
                v.id = next_id++;
                v.type = type;
                v.axis = lane.axis;
                v.street = lane.street;
                v.lane = lane.lane;
                v.pos_m = rear + dims.length_m / 2.0;
                v.heading = heading;
                v.speed_mps = speed;
                update_world_position(v, layout);
                out.push_back(v);
                front = veh_front;
                first = false;
            }
            if (lane_full) break;
        }
    }

    if (params.max_vehicles > 0 && static_cast<int>(out.size()) > params.max_vehicles) {
        // Thin uniformly at random, then renumber to keep ids dense.
        std::vector<size_t> idx(out.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        idx.resize(static_cast<size_t>(params.max_vehicles));
        std::sort(idx.begin(), idx.end());
        std::vector<Vehicle> kept;
        kept.reserve(idx.size());
        for (size_t i : idx) kept.push_back(out[i]);
        out = std::move(kept);
        for (size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<UeId>(i);
    }
    return out;
}

void advance_mobility(std::vector<Vehicle>& vehicles, const RoadLayout& layout,
                      DropOption option, double dt_s, RngStream& rng) {
    for (Vehicle& v : vehicles) {
        if (v.speed_mps <= 0.0) continue;
        if (layout.kind == RoadLayout::Kind::Highway) {
            v.pos_m = wrap_position(v.pos_m + v.heading * v.speed_mps * dt_s, layout.highway_length_m);
            update_world_position(v, layout);
            continue;
        }

        double remaining = v.speed_mps * dt_s;
        while (remaining > 1e-12) {
            const double block = v.axis == 0 ? layout.block_dx_m : layout.block_dy_m;
            const double span = v.axis == 0 ? layout.grid_span_x() : layout.grid_span_y();
            // Next intersection center strictly ahead.
            double next_cross;
            if (v.heading > 0) {
                next_cross = (std::floor(v.pos_m / block + 1e-9) + 1.0) * block;
            } else {
                next_cross = (std::ceil(v.pos_m / block - 1e-9) - 1.0) * block;
            }
            const double dist_to_cross = std::abs(next_cross - v.pos_m);
            if (option != DropOption::A || remaining < dist_to_cross) {
                v.pos_m = wrap_position(v.pos_m + v.heading * remaining, span);
                remaining = 0.0;
                break;
            }

            // Reach the intersection, then go straight / turn left / turn
            // right with probability 0.5 / 0.25 / 0.25.
            v.pos_m = next_cross;
            remaining -= dist_to_cross;
            const double u = rng.uniform();
            if (u < 0.5) {
                v.pos_m = wrap_position(v.pos_m + v.heading * 1e-9, span);
                continue;  // straight through
            }
            const bool left = u < 0.75;
            // Heading vectors: axis 0 heading h -> (h,0); axis 1 -> (0,h).
            // Left turn rotates +90 degrees, right turn -90 degrees.
            int new_heading;
            if (v.axis == 0)
                new_heading = left ? v.heading : -v.heading;   // (h,0) -> (0,+-h)
            else
                new_heading = left ? -v.heading : v.heading;   // (0,h) -> (-+h,0)

            const double old_center_coord =
                v.axis == 0 ? v.street * layout.block_dy_m : v.street * layout.block_dx_m;
            const int cross_index = static_cast<int>(std::lround(next_cross / block));
            v.axis = 1 - v.axis;
            v.street = cross_index;
            v.lane = (v.lane % layout.lanes_per_direction) +
                     (new_heading > 0 ? 0 : layout.lanes_per_direction);
            v.heading = new_heading;
            v.pos_m = old_center_coord;
            const double new_span = v.axis == 0 ? layout.grid_span_x() : layout.grid_span_y();
            v.pos_m = wrap_position(v.pos_m + v.heading * 1e-9, new_span);
        }
        update_world_position(v, layout);
    }
}

std::optional<double> tallest_blocker(const std::vector<Vehicle>& vehicles, size_t tx_idx,
                                      size_t rx_idx) {
    const Vec2 a = vehicles[tx_idx].xy;
    const Vec2 b = vehicles[rx_idx].xy;
    std::optional<double> tallest;
    for (size_t i = 0; i < vehicles.size(); ++i) {
        if (i == tx_idx || i == rx_idx) continue;
        const Vehicle& v = vehicles[i];
        const double hx = v.axis == 0 ? v.length() / 2.0 : v.width() / 2.0;
        const double hy = v.axis == 0 ? v.width() / 2.0 : v.length() / 2.0;
        // Slab test of segment a->b against the axis-aligned footprint.
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        double t0 = 0.0, t1 = 1.0;
        bool miss = false;
        const double lo[2] = {v.xy.x - hx, v.xy.y - hy};
        const double hi[2] = {v.xy.x + hx, v.xy.y + hy};
        const double o[2] = {a.x, a.y};
        const double d[2] = {dx, dy};
        for (int ax = 0; ax < 2 && !miss; ++ax) {
            if (std::abs(d[ax]) < 1e-12) {
                if (o[ax] < lo[ax] || o[ax] > hi[ax]) miss = true;
            } else {
                double ta = (lo[ax] - o[ax]) / d[ax];
                double tb = (hi[ax] - o[ax]) / d[ax];
                if (ta > tb) std::swap(ta, tb);
                t0 = std::max(t0, ta);
                t1 = std::min(t1, tb);
                if (t0 > t1) miss = true;
            }
        }
        if (!miss && (!tallest || v.body_height() > *tallest)) tallest = v.body_height();
    }
    return tallest;
}

}  // namespace nrv2x
