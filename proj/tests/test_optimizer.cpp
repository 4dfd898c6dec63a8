#include "surftrap/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace surftrap;

namespace {

const Eigen::Vector4d published_widths{135.6, 61.5, 50.8, 174.0};

const TransitionZoneProblem& zone() {
    static const TransitionZoneProblem pb;
    return pb;
}

const TransitionTerms& baseline() {
    static const TransitionTerms t = transition_baseline(zone());
    return t;
}

}  // namespace

TEST(LinearZone, CostIsTheWeightedDistanceToTheGoal) {
    LinearZoneProblem pb;
    EXPECT_DOUBLE_EQ(linear_zone_cost_at(18, 90, pb), 0.0);
    EXPECT_DOUBLE_EQ(linear_zone_cost_at(19, 90, pb), 2.0);
    EXPECT_DOUBLE_EQ(linear_zone_cost_at(18, 91, pb), 1.0);
    const auto ev = evaluate_linear_zone(published_widths, pb);
    ASSERT_TRUE(ev.feasible) << ev.reason;
    EXPECT_NEAR(ev.cost, linear_zone_cost_at(ev.x0, ev.y0, pb), 1e-12);
    // The published widths put the minimum near the goal.
    EXPECT_LT(ev.cost, 1.0);
    EXPECT_NEAR(cost_linear_zone(135.6, 61.5, 50.8, 174.0, pb), ev.cost, 0.0);
}

TEST(LinearZone, ConstraintsGiveInfiniteCost) {
    LinearZoneProblem pb;
    auto ev = evaluate_linear_zone(Eigen::Vector4d(135.6, 59.0, 50.8, 174.0), pb);
    EXPECT_FALSE(ev.feasible);
    EXPECT_TRUE(std::isinf(ev.cost));
    EXPECT_FALSE(ev.reason.empty());
    EXPECT_TRUE(std::isinf(cost_linear_zone(-1, 61.5, 50.8, 174, pb)));
    pb.x_weight = 3.0;
    EXPECT_THROW(pb.validate(), InputError);
}

TEST(LinearZone, ShortSearchIsDeterministicAndDiscardsBadSeeds) {
    LinearZoneProblem pb;
    NelderMeadConfig nm;
    nm.max_evals = 12;
    const std::vector<Eigen::Vector4d> starts{published_widths, Eigen::Vector4d(135.6, 40.0, 50.8, 174.0)};
    const auto a = optimize_linear_zone(pb, nm, 2, 7, starts);
    ASSERT_TRUE(a.selected.has_value());
    EXPECT_EQ(*a.selected, 0u);
    EXPECT_NE(a.candidates[1].note.find("discarded"), std::string::npos);
    EXPECT_EQ(a.candidates[1].evaluations, 0);
    EXPECT_LE(a.best().cost, evaluate_linear_zone(published_widths, pb).cost);
    EXPECT_GT(a.best().depth_mev, 0.0);
    const auto b = optimize_linear_zone(pb, nm, 2, 7, starts);
    EXPECT_EQ(linear_zone_manifest(pb, a, 7).dump(), linear_zone_manifest(pb, b, 7).dump());
}

TEST(TransitionZone, StraightSplineCostsExactlyTheWeights) {
    const auto s = SplineBoundary::straight(zone().params);
    const auto ev = evaluate_transition_zone(s, zone(), baseline());
    ASSERT_TRUE(ev.feasible) << ev.reason;
    EXPECT_NEAR(ev.cost, zone().w1 + zone().w2, 1e-9);
    EXPECT_GT(baseline().omega_integral, 0.0);
    EXPECT_GT(baseline().gradient_integral, 0.0);
}

TEST(TransitionZone, InvalidSplinesAreInfeasible) {
    // Control points overshooting the zone make the boundary fold back in z.
    const auto& p = zone().params;
    Eigen::VectorXd v = linear_control_vector(zone());
    v(0) = p.gamma + p.delta + 150.0;
    v(2) = p.gamma - 150.0;
    auto ev = evaluate_transition_zone(spline_from_vector(zone(), v), zone(), baseline());
    EXPECT_TRUE(std::isinf(ev.cost));
    EXPECT_FALSE(ev.reason.empty());
    // Boundary pushed so far that the central rail is pinched.
    v = linear_control_vector(zone());
    v(1) = 1.0;
    v(3) = 1.0;
    ev = evaluate_transition_zone(spline_from_vector(zone(), v), zone(), baseline());
    EXPECT_TRUE(std::isinf(ev.cost));
    EXPECT_FALSE(ev.reason.empty());
}

TEST(TransitionZone, ControlVectorsAndImages) {
    const auto& p = zone().params;
    const std::vector<Eigen::Vector2d> in{{634.0, 56.0}, {607.0, 25.8}};
    const auto s = SplineBoundary::from_internal(p, in);
    const Eigen::VectorXd v = vector_from_spline(s);
    EXPECT_EQ(vector_from_spline(spline_from_vector(zone(), v)), v);
    const auto outer = outer_control_points(p, s);
    const auto back = spline_from_outer(p, outer);
    const auto bi = back.internal_points();
    ASSERT_EQ(bi.size(), in.size());
    for (std::size_t i = 0; i < in.size(); ++i) EXPECT_LT((bi[i] - in[i]).norm(), 1e-12);
}

TEST(TransitionZone, PerturbedStartsAreDeterministicAndBounded) {
    const auto& p = zone().params;
    const Eigen::VectorXd lin = linear_control_vector(zone());
    EXPECT_EQ(perturbed_start(zone(), 3), perturbed_start(zone(), 3));
    EXPECT_NE(perturbed_start(zone(), 3), perturbed_start(zone(), 4));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Eigen::VectorXd v = perturbed_start(zone(), seed) - lin;
        for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
            EXPECT_LE(std::abs(v(i)), 0.15 * p.delta);
            EXPECT_LE(std::abs(v(i + 1)), 0.15 * p.shift());
        }
    }
}
