#include "support.hpp"

#include "surftrap/dynamics.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace surftrap;
using testing_support::published_model;

namespace {

using big = boost::multiprecision::cpp_dec_float_50;

// Exchange rate evaluated in 50-digit arithmetic from the same constants.
double coupling_oracle(const CouplingQuery& c) {
    const big pi = boost::math::constants::pi<big>();
    const big eps0 = big("8.8541878128e-12");
    const big k = big(c.kappa), q1 = big(c.q1), q2 = big(c.q2), m1 = big(c.m1), m2 = big(c.m2);
    const big w1 = big(c.omega1), w2 = big(c.omega2), s = big(c.s0);
    const big r = k / (2 * pi * eps0) * q1 * q2 / (sqrt(m1 * m2) * sqrt(w1 * w2) * s * s * s);
    return r.convert_to<double>();
}

// Power series of J_n, independent of the library implementation.
double bessel_series(int n, double x) {
    double term = std::pow(0.5 * x, n) / std::tgamma(n + 1.0), sum = term;
    for (int k = 1; k < 60; ++k) {
        term *= -(0.25 * x * x) / (k * double(k + n));
        sum += term;
    }
    return sum;
}

const RfMinimumPath& centre_path() {
    static const RfMinimumPath p = [] {
        const auto m = refine_radial_minimum(published_model(), 0.0, 18, 90);
        return trace_path(published_model(), 0.0, 80.0, 1.0, {m.x, m.y});
    }();
    return p;
}

}  // namespace

TEST(Dynamics, CouplingMatchesArbitraryPrecision) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lm(-26.5, -24.5), lw(5.5, 7.5), ls(-5.3, -4.3), lq(0.5, 2.5);
    for (int i = 0; i < 100; ++i) {
        CouplingQuery c;
        c.kappa = i % 2 ? 1.0 : 0.5;
        c.q1 = lq(rng) * constants::elementary_charge;
        c.q2 = lq(rng) * constants::elementary_charge;
        c.m1 = std::pow(10.0, lm(rng));
        c.m2 = std::pow(10.0, lm(rng));
        c.omega1 = std::pow(10.0, lw(rng));
        c.omega2 = std::pow(10.0, lw(rng));
        c.s0 = std::pow(10.0, ls(rng));
        const double o = coupling_oracle(c);
        EXPECT_LT(std::abs(coupling_rate(c) - o) / o, 1e-12);
    }
}

TEST(Dynamics, CouplingScalingAndSymmetry) {
    const auto ca = IonSpecies::calcium40();
    auto c = same_species_coupling(ca, mhz_to_rad_s(1.0), 36e-6, 0.5);
    const double w = coupling_rate(c);
    auto c2 = c;
    c2.s0 *= 2;
    EXPECT_NEAR(coupling_rate(c2), w / 8, 1e-12 * w);
    auto c3 = c;
    c3.kappa = 1.0;
    EXPECT_NEAR(coupling_rate(c3), 2 * w, 1e-12 * w);
    CouplingQuery a{1.0, 1.6e-19, 3.2e-19, 6e-26, 7e-26, 6e6, 7e6, 40e-6};
    CouplingQuery b{1.0, 3.2e-19, 1.6e-19, 7e-26, 6e-26, 7e6, 6e6, 40e-6};
    EXPECT_DOUBLE_EQ(coupling_rate(a), coupling_rate(b));
    c.kappa = 0.3;
    EXPECT_THROW(coupling_rate(c), InputError);
}

TEST(Dynamics, BesselInversion) {
    EXPECT_EQ(bessel_invert(0.0, 1.0), 0.0);
    for (double b = 0.0; b <= 1.5 + 1e-12; b += 0.01) {
        const double r = bessel_series(1, b) / bessel_series(0, b);
        EXPECT_NEAR(bessel_invert(r, 1.0), b, 1e-9) << b;
    }
    const double r = bessel_ratio(0.2);
    EXPECT_NEAR(r, bessel_series(1, 0.2) / bessel_series(0, 0.2), 1e-15);
    EXPECT_NEAR(bessel_invert(r * 3.0, 3.0), 0.2, 1e-9);
    EXPECT_LT(std::abs(bessel_invert(1e-6, 1.0) - 2e-6) / 2e-6, 1e-12);
    EXPECT_THROW(bessel_invert(-0.1, 1.0), InputError);
    EXPECT_THROW(bessel_invert(0.1, 0.0), InputError);
    EXPECT_LT(bessel_invert(50.0, 1.0), first_j0_zero);
}

TEST(Dynamics, MicromotionIndexBasics) {
    const double w = mhz_to_rad_s(31.91), m = IonSpecies::calcium40().mass;
    MicromotionQuery q;
    EXPECT_EQ(micromotion_index_from_phi(0.0, w, m, q), 0.0);
    q.theta = constants::pi / 2;
    EXPECT_EQ(micromotion_index_from_phi(1e-22, w, m, q), 0.0);
    q.theta = 2.0;
    EXPECT_THROW(micromotion_index_from_phi(1e-22, w, m, q), InputError);
    // Converged rf null at the centre without pickup.
    const auto& s0 = centre_path().samples.front();
    EXPECT_LT(micromotion_index(published_model(), {s0.x0, s0.y0, 0.0}, 0.0), 1e-4);
}

TEST(Dynamics, MicromotionGrowsAwayFromTheNull) {
    const auto& s = centre_path().samples[30];
    double prev = -1;
    for (double a = 0.0; a >= -1.0; a -= 0.05) {
        const double b = micromotion_index(published_model(), {s.x0, s.y0, s.z}, a);
        EXPECT_GE(b, prev - 1e-12);
        prev = b;
    }
}

TEST(Dynamics, DisplacementFitInvertsTheForwardModel) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ua(-0.5, 0.0), uz(0.0, 70.0);
    std::vector<std::pair<double, double>> data;
    std::vector<double> truth;
    for (int i = 0; i < 30; ++i) {
        const double z = uz(rng), a = ua(rng);
        const Point3 on = interpolate_path(centre_path(), z);
        data.emplace_back(z, micromotion_index(published_model(), on, a));
        truth.push_back(a);
    }
    const auto fit = fit_displacement(data, published_model(), centre_path());
    for (std::size_t i = 0; i < fit.size(); ++i) EXPECT_NEAR(fit[i].alpha_um, truth[i], 5e-3) << fit[i].z;
    // Zero index at the null gives zero displacement.
    EXPECT_EQ(fit_displacement({{0.0, 0.0}}, published_model(), centre_path())[0].alpha_um, 0.0);
}

TEST(Dynamics, DisplacementFitWidensItsBracket) {
    const Point3 on = interpolate_path(centre_path(), 10.0);
    const double b = micromotion_index(published_model(), on, -8.0);
    const auto fit = fit_displacement({{10.0, b}}, published_model(), centre_path());
    EXPECT_TRUE(fit[0].widened);
    EXPECT_FALSE(fit[0].warning.empty());
    EXPECT_NEAR(fit[0].alpha_um, -8.0, 5e-3);
    EXPECT_THROW(fit_displacement({{10.0, 1e6}}, published_model(), centre_path()), InfeasibleError);
    EXPECT_THROW(fit_displacement({{500.0, 0.01}}, published_model(), centre_path()), InputError);
}

TEST(Dynamics, RuleOfSuccession) {
    EXPECT_NEAR(return_probability_bound(80, 80), 0.988, 5e-4);
    EXPECT_NEAR(return_probability_bound(70, 70), 0.986, 5e-4);
    EXPECT_DOUBLE_EQ(return_probability_bound(0, 0), 0.5);
    EXPECT_THROW(return_probability_bound(3, 2), InputError);
}
