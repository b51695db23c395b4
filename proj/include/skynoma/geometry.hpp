#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "skynoma/config.hpp"
#include "skynoma/errors.hpp"
#include "skynoma/numerics.hpp"

namespace skynoma {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double horizontal_distance(const Vec3& a, const Vec3& b) { return std::hypot(a.x - b.x, a.y - b.y); }
inline double distance(const Vec3& a, const Vec3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

/// A line in the plane, given by the foot of its perpendicular from the origin.
struct Line {
    double perp_distance = 0.0;
    double angle = 0.0;  // direction of the normal, [0, 2π)

    Vec2 foot() const { return {perp_distance * std::cos(angle), perp_distance * std::sin(angle)}; }
    Vec2 direction() const { return {-std::sin(angle), std::cos(angle)}; }
    Vec2 at(double t) const {
        const Vec2 f = foot();
        const Vec2 d = direction();
        return {f.x + t * d.x, f.y + t * d.y};
    }
    /// Signed distance of p from the line.
    double offset(const Vec2& p) const {
        return p.x * std::cos(angle) + p.y * std::sin(angle) - perp_distance;
    }
};

/// The fixed line through the origin along the x-axis.
inline Line x_axis_line() { return {0.0, 0.5 * std::numbers::pi}; }

struct Vehicle {
    Vec2 position;
    std::size_t line = 0;  // index into CoxField::lines
};

struct CoxField {
    std::vector<Line> lines;  // lines[0] is the fixed line
    std::vector<Vehicle> vehicles;
};

struct UavField {
    std::vector<Vec3> positions;
};

inline std::vector<Line> sample_plp(double lambda_l, double window_radius, RngStream& rng) {
    if (lambda_l < 0.0 || !(window_radius > 0.0))
        throw std::invalid_argument("sample_plp: need lambda_L >= 0 and window_radius > 0");
    const auto count = rng.poisson(2.0 * std::numbers::pi * lambda_l * window_radius);
    std::vector<Line> lines;
    lines.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double rho = rng.uniform(0.0, window_radius);
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        lines.push_back({rho, phi});
    }
    return lines;
}

/// Poisson points on `line` with parameter t uniform in [-extent, extent]
/// measured from the line's foot point.
inline std::vector<Vec2> sample_ppp_on_line(const Line& line, double lambda_v, double extent, RngStream& rng) {
    if (lambda_v < 0.0 || !(extent > 0.0))
        throw std::invalid_argument("sample_ppp_on_line: need lambda_V >= 0 and extent > 0");
    const auto count = rng.poisson(lambda_v * 2.0 * extent);
    std::vector<Vec2> points;
    points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) points.push_back(line.at(rng.uniform(-extent, extent)));
    return points;
}

inline CoxField sample_cox(double lambda_l, double lambda_v, double window_radius, const Line& fixed_line,
                           RngStream& rng) {
    CoxField field;
    field.lines.push_back(fixed_line);
    for (const Line& l : sample_plp(lambda_l, window_radius, rng)) field.lines.push_back(l);
    for (std::size_t i = 0; i < field.lines.size(); ++i) {
        for (const Vec2& p : sample_ppp_on_line(field.lines[i], lambda_v, window_radius, rng))
            field.vehicles.push_back({p, i});
    }
    return field;
}

/// Exactly n points uniform on the disk of radius `radius` at altitude `height`.
inline UavField sample_bpp_disk(int n, double radius, double height, RngStream& rng) {
    if (n < 0 || !(radius > 0.0)) throw std::invalid_argument("sample_bpp_disk: need N_U >= 0 and L > 0");
    UavField field;
    field.positions.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double r = radius * std::sqrt(rng.uniform());
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        field.positions.push_back({r * std::cos(phi), r * std::sin(phi), height});
    }
    return field;
}

enum class NodeKind { vehicle, rsu, ntfp, uav };

inline bool is_airborne(NodeKind k) { return k == NodeKind::ntfp || k == NodeKind::uav; }

struct Node {
    Vec3 position;
    NodeKind kind = NodeKind::vehicle;
};

struct Deployment {
    Node source;
    Node relay;
    Node d1;
    Node d2;
    Platform platform = Platform::ntfp;
    RelayRole role = RelayRole::relay;
    double h_ntfp = 500.0;
    double h_rsu = 10.0;
    double h_vehicle = 0.0;
};

inline NodeKind platform_kind(Platform p) { return p == Platform::ntfp ? NodeKind::ntfp : NodeKind::rsu; }

/// Places S, R, D1, D2 on the fixed line (x-axis) with S at the origin and
/// both destinations on the positive side; R sits above the S-D1 midpoint.
inline Deployment build_deployment(const SystemConfig& cfg) {
    const auto& g = cfg.geometry;
    std::vector<std::string> errs;
    if (!(g.dist_sd1 > 0.0)) errs.push_back("geometry.dist_sd1: distance must be > 0");
    if (!(g.dist_sd2 > 0.0)) errs.push_back("geometry.dist_sd2: distance must be > 0");
    if (g.h_ntfp < 0.0) errs.push_back("geometry.h_ntfp: height must be >= 0");
    if (g.h_rsu < 0.0) errs.push_back("geometry.h_rsu: height must be >= 0");
    if (g.h_vehicle < 0.0) errs.push_back("geometry.h_vehicle: height must be >= 0");
    if (!errs.empty()) throw InvalidConfig(std::move(errs));

    Deployment d;
    d.platform = cfg.platform;
    d.role = cfg.role;
    d.h_ntfp = g.h_ntfp;
    d.h_rsu = g.h_rsu;
    d.h_vehicle = g.h_vehicle;
    const double h_platform = cfg.platform == Platform::ntfp ? g.h_ntfp : g.h_rsu;
    const NodeKind pk = platform_kind(cfg.platform);

    d.d1 = {{g.dist_sd1, 0.0, g.h_vehicle}, NodeKind::vehicle};
    d.d2 = {{g.dist_sd2, 0.0, g.h_vehicle}, NodeKind::vehicle};
    if (cfg.role == RelayRole::relay) {
        d.source = {{0.0, 0.0, g.h_vehicle}, NodeKind::vehicle};
        d.relay = {{0.5 * g.dist_sd1, 0.0, h_platform}, pk};
    } else {
        d.source = {{0.0, 0.0, h_platform}, pk};
        d.relay = {{0.5 * g.dist_sd1, 0.0, g.h_vehicle}, NodeKind::vehicle};
    }
    return d;
}

}  // namespace skynoma
