#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace surftrap;
using testing_support::published_linear;
using testing_support::published_model;
using testing_support::random_points;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(TrapModel, SpeciesAndPrefactor) {
    const IonSpecies ca = IonSpecies::calcium40();
    EXPECT_NEAR(ca.mass / constants::atomic_mass_unit, 39.96204228, 1e-7);
    const auto& m = published_model();
    const double w = m.drive().omega_rf;
    EXPECT_NEAR(m.pp_prefactor(), ca.charge * ca.charge / (4 * ca.mass * w * w), 1e-40);
    EXPECT_THROW(IonSpecies({-1.0, 1.0, "bad"}).validate(), InputError);
}

TEST(TrapModel, PseudoPotentialDerivativesMatchDifferences) {
    const auto& m = published_model();
    const double h = 0.01e-6;
    for (const auto& p : random_points(20, 11, 150, 40, 160, 600)) {
        const Eigen::Vector3d r = p.si();
        const auto j = m.pp_jet2(r);
        EXPECT_GE(j.phi, 0.0);
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d d = Eigen::Vector3d::Zero();
            d(k) = h;
            const double fd = (-m.phi_pp(Eigen::Vector3d(r + 2 * d)) + 8 * m.phi_pp(Eigen::Vector3d(r + d)) -
                               8 * m.phi_pp(Eigen::Vector3d(r - d)) + m.phi_pp(Eigen::Vector3d(r - 2 * d))) /
                              (12 * h);
            EXPECT_NEAR(j.grad(k), fd, 1e-5 * j.grad.norm() + 1e-30);
            const Eigen::Vector3d gd = (m.pp_jet(r + d).grad - m.pp_jet(r - d).grad) / (2 * h);
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(j.H(i, k), gd(i), 1e-5 * j.H.norm());
        }
    }
}

TEST(TrapModel, TotalConfinementEqualsHessianTrace) {
    const auto& m = published_model();
    for (const auto& p : random_points(50, 5, 150, 40, 160, 900)) {
        const FieldSample s = m.pseudo_potential(p);
        EXPECT_LT(rel(s.total_confinement, s.H_pp.trace() / m.species().mass), 1e-10);
        double sw = 0;
        for (double w : s.secular) sw += w * w;
        if (s.H_pp.eigenvalues().real().minCoeff() > 0) {
            EXPECT_LT(rel(sw, s.total_confinement), 1e-8);
        }
    }
}

TEST(TrapModel, RejectsInvalidInputs) {
    const auto& L = published_linear();
    Drive d = Drive::published();
    d.rf_pickup["RF_C"] = 0.2;
    EXPECT_THROW(TrapModel(L, d, IonSpecies::calcium40()), InputError);
    d.rf_pickup.clear();
    d.rf_pickup["nope"] = 0.2;
    EXPECT_THROW(TrapModel(L, d, IonSpecies::calcium40()), InputError);
    const auto& m = published_model();
    EXPECT_THROW(m.dc_index("RF_MR"), InputError);
    EXPECT_THROW(m.dc_index("missing"), InputError);
    EXPECT_THROW(m.phi_pp(Point3{0, 0, 0}), InputError);
    EXPECT_THROW(m.phi_pp(Point3{0, -5, 0}), InputError);
}

TEST(TrapModel, PickupAddsInPhaseField) {
    Drive d = Drive::published();
    d.rf_pickup["S1R.C.12"] = 0.2;
    d.rf_pickup["S1L.C.12"] = 0.2;
    const TrapModel pick(published_linear(), d, IonSpecies::calcium40());
    const auto& base = published_model();
    const Point3 p{18, 90, 30};
    const Eigen::Vector3d e = base.rf_field(p.si());
    const Eigen::Vector3d e1 = field_jet(base.dc_edges(base.dc_index("S1R.C.12")), p.si()).E +
                               field_jet(base.dc_edges(base.dc_index("S1L.C.12")), p.si()).E;
    const Eigen::Vector3d expect = e + 0.2 * e1;
    EXPECT_LT((pick.rf_field(p.si()) - expect).norm(), 1e-9 * expect.norm());
}

TEST(TrapModel, DcResponseMatchesDifferencesAndIsHarmonic) {
    const auto& m = published_model();
    const VoltageMap v{{"S1R.C.11", 1.5}, {"S1R.C.12", -2.0}, {"C1", 0.7}, {"DCOR", -0.3}};
    const Eigen::Vector3d stray(100.0, -50.0, 20.0);
    const double h = 0.01;
    for (const auto& p : random_points(10, 3, 100, 50, 140, 100)) {
        const DcResponse r = m.dc_potential(v, p, stray);
        EXPECT_LT(std::abs(r.hessian.trace()), 1e-8 * r.hessian.norm());
        for (int k = 0; k < 3; ++k) {
            Point3 a = p, b = p;
            (&a.x)[k] += h;
            (&b.x)[k] -= h;
            const double fd = (m.dc_potential(v, a, stray).energy - m.dc_potential(v, b, stray).energy) / (2 * h * 1e-6);
            EXPECT_NEAR(r.gradient(k), fd, 1e-5 * r.gradient.norm());
        }
    }
}

TEST(TrapModel, DcCurvatureConservesTotalConfinement) {
    const auto& m = published_model();
    const Point3 p{17.92, 89.8, 0.0};
    const VoltageMap v{{"S1R.C.11", 0.5}, {"S1R.C.12", -1.0}, {"S1R.C.13", 0.5}};
    TotalModesOptions opt;
    opt.max_displacement_um = 50;
    const TotalModes t = total_modes(m, v, p, Eigen::Vector3d::Zero(), opt);
    EXPECT_LT(t.conservation_residual(), 1e-6);
    EXPECT_EQ(t.dominant_axis[t.mode_along(2)], 'z');
}

TEST(TrapModel, StrongAntiConfinementIsReported) {
    const auto& m = published_model();
    const Point3 p{17.92, 89.8, 0.0};
    const VoltageMap v{{"S1R.C.11", -10}, {"S1R.C.12", 20}, {"S1R.C.13", -10}};
    TotalModesOptions opt;
    opt.max_displacement_um = 1e9;
    try {
        total_modes(m, v, p, Eigen::Vector3d::Zero(), opt);
        FAIL() << "expected an unstable mode";
    } catch (const UnstableModeError& e) {
        EXPECT_LT(e.eigenvalue, 0.0);
        EXPECT_GT(std::abs(e.vector.z()), 0.9);
    }
}
