#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace nrv2x {

using Slot = std::int64_t;
using UeId = std::uint32_t;

inline constexpr double kSpeedOfLightMps = 299792458.0;
inline constexpr double kThermalNoiseDbmHz = -174.0;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) {
    if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(lin);
}
inline double dbm_to_mw(double dbm) { return db_to_linear(dbm); }
inline double mw_to_dbm(double mw) { return linear_to_db(mw); }

inline double distance_3d(const Vec2& a, double ha, const Vec2& b, double hb) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = ha - hb;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// One-based message priority, 1 = highest (3GPP convention). Comparisons
/// throughout the codebase use higher_priority(a, b) rather than operator<
/// so the direction is stated once.
inline bool higher_priority(int a, int b) { return a < b; }

}  // namespace nrv2x
