#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "skynoma/geometry.hpp"

using namespace skynoma;

TEST(Line, FootDirectionAndOffset) {
    const Line l{3.0, 0.5 * std::numbers::pi};
    EXPECT_NEAR(l.foot().x, 0.0, 1e-15);
    EXPECT_NEAR(l.foot().y, 3.0, 1e-15);
    for (double t : {-5.0, 0.0, 2.5}) EXPECT_NEAR(l.offset(l.at(t)), 0.0, 1e-12);
    EXPECT_NEAR(l.offset({0.0, 0.0}), -3.0, 1e-15);
    const Line axis = x_axis_line();
    EXPECT_NEAR(axis.at(7.0).x, -7.0, 1e-12);
    EXPECT_NEAR(axis.at(7.0).y, 0.0, 1e-12);
}

TEST(Distances, HorizontalAndThreeDimensional) {
    const Vec3 a{0, 0, 0}, b{3, 4, 12};
    EXPECT_DOUBLE_EQ(horizontal_distance(a, b), 5.0);
    EXPECT_DOUBLE_EQ(distance(a, b), 13.0);
}

TEST(Sampling, LineCountMatchesIntensity) {
    RngStream rng(5, 0);
    const double lambda_l = 1e-3, W = 2000.0;
    const int n = 4000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto lines = sample_plp(lambda_l, W, rng);
        for (const Line& l : lines) {
            EXPECT_GE(l.perp_distance, 0.0);
            EXPECT_LE(l.perp_distance, W);
        }
        total += static_cast<double>(lines.size());
    }
    const double mean = 2.0 * std::numbers::pi * lambda_l * W;
    EXPECT_NEAR(total / n, mean, 5.0 * std::sqrt(mean / n));
}

TEST(Sampling, PointsOnLineStayOnLineWithinExtent) {
    RngStream rng(6, 0);
    const Line l{10.0, 1.0};
    double total = 0.0;
    const int n = 3000;
    for (int i = 0; i < n; ++i) {
        const auto pts = sample_ppp_on_line(l, 1e-2, 500.0, rng);
        for (const Vec2& p : pts) {
            EXPECT_NEAR(l.offset(p), 0.0, 1e-9);
            const Vec2 f = l.foot();
            EXPECT_LE(std::hypot(p.x - f.x, p.y - f.y), 500.0 + 1e-9);
        }
        total += static_cast<double>(pts.size());
    }
    EXPECT_NEAR(total / n, 10.0, 5.0 * std::sqrt(10.0 / n));
}

TEST(Sampling, CoxFieldKeepsFixedLineFirst) {
    RngStream rng(7, 0);
    const CoxField f = sample_cox(1e-3, 5e-3, 1000.0, x_axis_line(), rng);
    ASSERT_FALSE(f.lines.empty());
    EXPECT_EQ(f.lines[0].perp_distance, 0.0);
    for (const Vehicle& v : f.vehicles) {
        ASSERT_LT(v.line, f.lines.size());
        EXPECT_NEAR(f.lines[v.line].offset(v.position), 0.0, 1e-9);
    }
}

TEST(Sampling, BinomialDiskRadialLaw) {
    RngStream rng(8, 0);
    const double L = 100.0;
    const UavField u = sample_bpp_disk(20000, L, 150.0, rng);
    ASSERT_EQ(u.positions.size(), 20000u);
    int inside_half = 0;
    for (const Vec3& p : u.positions) {
        const double r = std::hypot(p.x, p.y);
        EXPECT_LE(r, L);
        EXPECT_EQ(p.z, 150.0);
        inside_half += r < 0.5 * L;
    }
    // P(r < L/2) = 1/4 for a uniform disk.
    EXPECT_NEAR(inside_half / 20000.0, 0.25, 5.0 * std::sqrt(0.25 * 0.75 / 20000.0));
    EXPECT_TRUE(sample_bpp_disk(0, L, 0.0, rng).positions.empty());
    EXPECT_THROW(sample_bpp_disk(-1, L, 0.0, rng), std::invalid_argument);
}

TEST(Deployment, RelayRolePlacesPlatformAboveMidpoint) {
    SystemConfig c;
    c.geometry.dist_sd1 = 200.0;
    c.geometry.dist_sd2 = 260.0;
    const Deployment d = build_deployment(c);
    EXPECT_EQ(d.source.kind, NodeKind::vehicle);
    EXPECT_EQ(d.relay.kind, NodeKind::ntfp);
    EXPECT_DOUBLE_EQ(d.relay.position.x, 100.0);
    EXPECT_DOUBLE_EQ(d.relay.position.z, 500.0);
    EXPECT_DOUBLE_EQ(horizontal_distance(d.source.position, d.d1.position), 200.0);
    EXPECT_DOUBLE_EQ(horizontal_distance(d.source.position, d.d2.position), 260.0);
    c.platform = Platform::rsu;
    EXPECT_DOUBLE_EQ(build_deployment(c).relay.position.z, 10.0);
    EXPECT_EQ(build_deployment(c).relay.kind, NodeKind::rsu);
}

TEST(Deployment, SourceRoleLiftsTransmitter) {
    SystemConfig c;
    c.role = RelayRole::source;
    const Deployment d = build_deployment(c);
    EXPECT_EQ(d.source.kind, NodeKind::ntfp);
    EXPECT_DOUBLE_EQ(d.source.position.z, 500.0);
    EXPECT_EQ(d.relay.kind, NodeKind::vehicle);
    EXPECT_FALSE(is_airborne(NodeKind::rsu));
    EXPECT_TRUE(is_airborne(NodeKind::uav));
}

TEST(Deployment, InvalidDistancesNamed) {
    SystemConfig c;
    c.geometry.dist_sd1 = 0.0;
    try {
        build_deployment(c);
        FAIL();
    } catch (const InvalidConfig& e) {
        EXPECT_NE(std::string(e.what()).find("geometry.dist_sd1"), std::string::npos);
    }
}
