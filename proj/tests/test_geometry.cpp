#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace surftrap;
using testing_support::published_linear;

namespace {

SplineBoundary optimized_like(const LayoutParams& p) {
    const std::vector<Eigen::Vector2d> internal{{634.0, 56.0}, {607.0, 25.8}};
    return SplineBoundary::from_internal(p, internal);
}

double x_extent(const PolygonElectrode& e, double z, bool upper) {
    // Horizontal extent of a strip polygon at height z via its rail profiles.
    double lo = INFINITY, hi = -INFINITY;
    const auto& v = e.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        if ((a.z - z) * (b.z - z) > 0 || a.z == b.z) continue;
        const double x = a.x + (z - a.z) / (b.z - a.z) * (b.x - a.x);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    return upper ? hi : lo;
}

}  // namespace

TEST(Geometry, CentralCrossSectionPattern) {
    const auto& L = published_linear();
    const auto& p = L.params;
    // Left to right at z = 0: d b a b c b a b d.
    const double expected[] = {p.d, p.b, p.a, p.b, p.c, p.b, p.a, p.b, p.d};
    const char* rf_order[] = {"RF_OL", "RF_ML", "RF_C", "RF_MR", "RF_OR"};
    std::vector<double> edges;
    for (const char* n : rf_order) {
        edges.push_back(x_extent(L.electrode(n), 0.0, false));
        edges.push_back(x_extent(L.electrode(n), 0.0, true));
    }
    for (int i = 0; i < 9; ++i) EXPECT_NEAR(edges[i + 1] - edges[i], expected[i], 1e-9) << i;
    EXPECT_NEAR(edges[4], -0.5 * p.c, 1e-12);
    EXPECT_NEAR(edges[5], 0.5 * p.c, 1e-12);
}

TEST(Geometry, OuterCrossSectionExchangesInnerRails) {
    const auto& L = published_linear();
    const auto& p = L.params;
    const double z = 800.0;
    EXPECT_NEAR(x_extent(L.electrode("RF_C"), z, true) - x_extent(L.electrode("RF_C"), z, false), p.a, 1e-9);
    EXPECT_NEAR(x_extent(L.electrode("RF_MR"), z, true) - x_extent(L.electrode("RF_MR"), z, false), p.c, 1e-9);
    EXPECT_NEAR(x_extent(L.electrode("RF_MR"), z, false) - x_extent(L.electrode("RF_C"), z, true), p.b, 1e-9);
    EXPECT_NEAR(x_extent(L.electrode("RF_OR"), z, false) - x_extent(L.electrode("RF_MR"), z, true), p.b, 1e-9);
}

TEST(Geometry, LayoutInvariantsAndNoOverlap) {
    const auto& L = published_linear();
    EXPECT_NO_THROW(validate_layout(L, true));
    EXPECT_TRUE(rf_mirror_symmetric(L));
    // Independent oracle: sample interior points of every electrode and check
    // that none lies strictly inside another electrode.
    std::mt19937_64 rng(3);
    for (std::size_t i = 0; i < L.electrodes.size(); ++i) {
        const auto& vi = L.electrodes[i].vertices;
        const auto bb = polygon::bounding_box(vi);
        std::uniform_real_distribution<double> ux(bb.x_min, bb.x_max), uz(bb.z_min, bb.z_max);
        int taken = 0;
        for (int k = 0; k < 200 && taken < 6; ++k) {
            const PlanePoint q{ux(rng), uz(rng)};
            if (!polygon::strictly_contains(vi, q, 1e-6)) continue;
            ++taken;
            for (std::size_t j = 0; j < L.electrodes.size(); ++j) {
                if (j == i) continue;
                ASSERT_FALSE(polygon::contains(L.electrodes[j].vertices, q)) << L.electrodes[i].name;
            }
        }
    }
}

TEST(Geometry, ElectrodesTileTheModelledArea) {
    const std::vector<Transition> kinds{LinearTransition{}, optimized_like(LayoutParams::published())};
    for (const Transition& t : kinds) {
        const auto L = build_layout(LayoutParams::published(), t);
        double area = 0;
        for (const auto& e : L.electrodes) area += polygon::signed_area(e.vertices);
        const auto& p = L.params;
        const double x_out = 0.5 * p.c + 2 * p.b + p.a + p.d + L.tiling.outer_width;
        EXPECT_NEAR(area, 2 * x_out * 2 * p.extent_z, 1e-6 * area);
    }
}

TEST(Geometry, TransitionZonesHoldFiveSegmentsPerGap) {
    const auto& L = published_linear();
    for (const char* ch : {"S1R", "S1L", "S2R", "S2L"})
        for (const char* zone : {"T1P", "T1M"}) {
            int n = 0;
            for (const auto& e : L.electrodes)
                if (e.name.rfind(std::string(ch) + "." + zone + ".", 0) == 0) ++n;
            EXPECT_EQ(n, 5) << ch << zone;
        }
    for (const char* n : {"C1", "C2", "C3", "C4", "DCOR", "DCOL"}) EXPECT_TRUE(L.find(n).has_value()) << n;
}

TEST(Geometry, CollinearSplineReproducesLinearLayout) {
    const LayoutParams p = LayoutParams::published();
    const auto lin = rail_profiles(p, LinearTransition{});
    const auto spl = rail_profiles(p, SplineBoundary::straight(p));
    double worst = 0;
    for (double z = -p.extent_z; z <= p.extent_z; z += 0.37)
        for (auto pr : {&RailProfiles::e1, &RailProfiles::e2, &RailProfiles::e3, &RailProfiles::e4})
            worst = std::max(worst, std::abs((lin.*pr).x_at(z) - (spl.*pr).x_at(z)));
    EXPECT_LT(worst, 1e-9);
}

TEST(Geometry, SplinePolygonizationHausdorff) {
    const LayoutParams p = LayoutParams::published();
    const SplineBoundary s = optimized_like(p);
    const auto zc = zone_curves(p, s);
    const auto curve = s.curve();
    std::vector<PlanePoint> dense;
    for (int i = 0; i <= 20000; ++i) {
        const Eigen::Vector2d q = curve(i / 20000.0);
        dense.push_back({q.y(), q.x()});
    }
    auto dist_to_polyline = [](const PlanePoint& q, const std::vector<PlanePoint>& pl) {
        double best = INFINITY;
        for (std::size_t i = 0; i + 1 < pl.size(); ++i)
            best = std::min(best, polygon::point_segment_distance(q, pl[i], pl[i + 1]));
        return best;
    };
    double h = 0;
    for (const auto& q : dense) h = std::max(h, dist_to_polyline(q, zc.inner));
    for (const auto& q : zc.inner) h = std::max(h, dist_to_polyline(q, dense));
    EXPECT_LT(h, 0.05);
    EXPECT_EQ(static_cast<int>(zc.inner.size()), s.samples);
}

TEST(Geometry, InversionSymmetryOfZoneBoundaries) {
    const LayoutParams p = LayoutParams::published();
    const auto zc = zone_curves(p, optimized_like(p));
    const Eigen::Vector2d c = SplineBoundary::inversion_center(p);  // (z, x)
    ASSERT_EQ(zc.inner.size(), zc.outer.size());
    const std::size_t n = zc.inner.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& q = zc.inner[i];
        const auto& r = zc.outer[n - 1 - i];
        EXPECT_NEAR(2 * c.y() - q.x, r.x, 1e-9);
        EXPECT_NEAR(2 * c.x() - q.z, r.z, 1e-9);
    }
}

TEST(Geometry, MirrorSymmetryWithSpline) {
    const auto L = build_layout(LayoutParams::published(), optimized_like(LayoutParams::published()));
    EXPECT_TRUE(rf_mirror_symmetric(L));
    EXPECT_NO_THROW(validate_layout(L, true));
}

TEST(Geometry, RejectsInvalidParameters) {
    LayoutParams p = LayoutParams::published();
    p.delta = 30;
    EXPECT_THROW(build_layout(p, LinearTransition{}), InputError);
    p = LayoutParams::published();
    p.extent_z = p.gamma + p.delta + 100;
    EXPECT_THROW(build_layout(p, LinearTransition{}), InputError);
    p = LayoutParams::published();
    p.b = -1;
    EXPECT_THROW(build_layout(p, LinearTransition{}), InputError);
}

TEST(Geometry, RejectsNarrowOrFoldedSplines) {
    const LayoutParams p = LayoutParams::published();
    // Dipping the inner boundary towards the axis narrows the central rail.
    const std::vector<Eigen::Vector2d> narrow{{560.0, -20.0}, {640.0, -20.0}};
    EXPECT_THROW(build_layout(p, SplineBoundary::from_internal(p, narrow)), GeometryError);
    const std::vector<Eigen::Vector2d> folded{{750.0, 30.0}, {450.0, 60.0}};
    EXPECT_THROW(build_layout(p, SplineBoundary::from_internal(p, folded)), GeometryError);
    std::vector<Eigen::Vector2d> one{{600.0, 40.0}};
    EXPECT_THROW(build_layout(p, SplineBoundary::from_internal(p, one)), InputError);
}

TEST(Geometry, MultiplePeriods) {
    LayoutParams p = LayoutParams::published();
    p.n_periods = 2;
    p.extent_z = LayoutParams::default_extent(p.gamma, p.delta, 2);
    const auto L = build_layout(p, LinearTransition{});
    EXPECT_NO_THROW(validate_layout(L, false));
    EXPECT_TRUE(rf_mirror_symmetric(L));
    // After two transitions the central rail is back to width c.
    const auto r = rail_profiles(p, LinearTransition{});
    EXPECT_NEAR(r.e1.x_at(p.extent_z - 1), 0.5 * p.c, 1e-12);
    EXPECT_NEAR(r.e1.x_at(p.transition_start(1) - 1), 0.5 * p.a, 1e-12);
}
