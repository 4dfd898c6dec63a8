#include "support.hpp"

#include "surftrap/field_kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace surftrap;
using testing_support::random_points;
using testing_support::rectangle;

namespace {

constexpr double pi = std::numbers::pi;

// Potential of the infinite strip x in [x1, x2] (µm) at (x, y).
double strip_phi(double x1, double x2, double x, double y) {
    return (std::atan((x2 - x) / y) - std::atan((x1 - x) / y)) / pi;
}

// -grad of strip_phi in V/m per volt.
Eigen::Vector3d strip_field(double x1, double x2, double x, double y) {
    const double u2 = x2 - x, u1 = x1 - x;
    const double dphidx = (-y / (y * y + u2 * u2) + y / (y * y + u1 * u1)) / pi;
    const double dphidy = (-u2 / (y * y + u2 * u2) + u1 / (y * y + u1 * u1)) / pi;
    return -Eigen::Vector3d(dphidx, dphidy, 0.0) * m_to_um;
}

// Solid angle of the square [-L, L]^2 seen from height h above its centre.
double square_phi(double L, double h) {
    return 4.0 * std::atan(L * L / (h * std::sqrt(2.0 * L * L + h * h))) / (2.0 * pi);
}

PolygonElectrode odd_polygon() {
    return {"odd", ElectrodeKind::dc, {{0, 0}, {60, -10}, {85, 40}, {40, 20}, {20, 70}, {-15, 35}}};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(FieldKernel, HugeSquareApproachesFullPlane) {
    const Point3 p{0, 90, 0};
    const auto sq6 = rectangle("sq", -1e6, 1e6, -1e6, 1e6);
    EXPECT_NEAR(basis_potential(sq6, p), square_phi(1e6, 90.0), 1e-12);
    EXPECT_LT(1.0 - basis_potential(sq6, p), 1.5 * 90.0 / 1e6);
    const auto sq9 = rectangle("sq", -1e9, 1e9, -1e9, 1e9);
    EXPECT_NEAR(basis_potential(sq9, p), 1.0, 1e-6);
}

TEST(FieldKernel, HalfPlaneGivesOneHalf) {
    for (double y : {1.0, 50.0, 90.0, 400.0}) {
        const auto hp = rectangle("hp", 0.0, 1e10, -1e10, 1e10);
        EXPECT_NEAR(basis_potential(hp, {0, y, 0}), 0.5, 1e-6) << y;
    }
}

TEST(FieldKernel, StripOracle) {
    const double x1 = -40.0, x2 = 70.0;
    const auto strip = rectangle("strip", x1, x2, -1e7, 1e7);
    double worst_phi = 0, worst_e = 0;
    for (const auto& p : random_points(200, 11, 150.0, 10.0, 200.0, 50.0)) {
        worst_phi = std::max(worst_phi, rel(basis_potential(strip, p), strip_phi(x1, x2, p.x, p.y)));
        const Eigen::Vector3d E = basis_field(strip, p);
        const Eigen::Vector3d Ea = strip_field(x1, x2, p.x, p.y);
        worst_e = std::max(worst_e, (E - Ea).norm() / Ea.norm());
    }
    EXPECT_LT(worst_phi, 1e-6);
    EXPECT_LT(worst_e, 1e-6);
    // Width 2y centred under the point: exactly a quarter turn on each side.
    const auto centred = rectangle("c", -90.0, 90.0, -1e7, 1e7);
    EXPECT_NEAR(basis_potential(centred, {0, 90, 0}), 0.5, 1e-6);
}

TEST(FieldKernel, StripHessianHasNoAxialCurvature) {
    const auto strip = rectangle("strip", -40.0, 70.0, -1e7, 1e7);
    const Eigen::Matrix3d H = basis_hessian(strip, {12.0, 80.0, 3.0});
    EXPECT_LT(std::abs(H(2, 2)), 1e-9 * H.norm());
    EXPECT_LT(std::abs(H(0, 2)), 1e-9 * H.norm());
}

TEST(FieldKernel, FieldMatchesFivePointDifferences) {
    const auto e = odd_polygon();
    const double h = 0.01;  // µm
    for (const auto& p : random_points(50, 5, 150.0, 15.0, 150.0, 150.0)) {
        Eigen::Vector3d fd;
        for (int i = 0; i < 3; ++i) {
            auto at = [&](double s) {
                Point3 q = p;
                (i == 0 ? q.x : i == 1 ? q.y : q.z) += s;
                return basis_potential(e, q);
            };
            fd(i) = -(-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h) * m_to_um;
        }
        const Eigen::Vector3d E = basis_field(e, p);
        EXPECT_LT((E - fd).norm() / E.norm(), 1e-6);
    }
}

TEST(FieldKernel, HessianMatchesDifferencesOfField) {
    const auto e = odd_polygon();
    const double h = 0.01;
    for (const auto& p : random_points(50, 6, 150.0, 15.0, 150.0, 150.0)) {
        Eigen::Matrix3d fd;
        for (int j = 0; j < 3; ++j) {
            auto at = [&](double s) {
                Point3 q = p;
                (j == 0 ? q.x : j == 1 ? q.y : q.z) += s;
                return basis_field(e, q);
            };
            const Eigen::Vector3d d = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h) * m_to_um;
            fd.col(j) = -d;  // ∂j(-E) = ∂j∇φ
        }
        const Eigen::Matrix3d H = basis_hessian(e, p);
        EXPECT_LT((H - fd).norm() / H.norm(), 1e-5);
    }
}

TEST(FieldKernel, Harmonicity) {
    const auto e = odd_polygon();
    double worst = 0;
    for (const auto& p : random_points(1000, 7, 200.0, 5.0, 300.0, 200.0)) {
        const Eigen::Matrix3d H = basis_hessian(e, p);
        worst = std::max(worst, std::abs(H.trace()) / H.norm());
        EXPECT_LT((H - H.transpose()).norm(), 1e-12 * H.norm());
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(FieldKernel, PotentialStaysInUnitInterval) {
    const auto e = odd_polygon();
    for (const auto& p : random_points(300, 8, 150.0, 0.5, 100.0, 150.0)) {
        const double phi = basis_potential(e, p);
        EXPECT_GE(phi, 0.0);
        EXPECT_LE(phi, 1.0);
    }
}

TEST(FieldKernel, TriangulationAndRotationInvariance) {
    const auto e = odd_polygon();
    for (const auto& p : random_points(30, 9, 100.0, 10.0, 100.0, 100.0)) {
        const double ref = basis_potential(e, p);
        for (std::size_t root = 1; root < e.vertices.size(); ++root)
            EXPECT_LT(rel(basis_potential(e, p, root), ref), 1e-10);
        auto rot = e;
        std::rotate(rot.vertices.begin(), rot.vertices.begin() + 2, rot.vertices.end());
        EXPECT_LT(rel(basis_potential(rot, p), ref), 1e-10);
        EXPECT_LT((basis_field(rot, p) - basis_field(e, p)).norm() / basis_field(e, p).norm(), 1e-10);
        EXPECT_LT((basis_hessian(rot, p) - basis_hessian(e, p)).norm() / basis_hessian(e, p).norm(), 1e-10);
    }
}

TEST(FieldKernel, ScalingCovariance) {
    const auto e = odd_polygon();
    const double lambda = 3.7;
    auto scaled = e;
    for (auto& v : scaled.vertices) v = {v.x * lambda, v.z * lambda};
    for (const auto& p : random_points(20, 10, 100.0, 10.0, 100.0, 100.0)) {
        const Point3 q{p.x * lambda, p.y * lambda, p.z * lambda};
        EXPECT_LT(rel(basis_potential(scaled, q), basis_potential(e, p)), 1e-10);
        EXPECT_LT((basis_field(scaled, q) * lambda - basis_field(e, p)).norm() / basis_field(e, p).norm(), 1e-10);
        EXPECT_LT((basis_hessian(scaled, q) * lambda * lambda - basis_hessian(e, p)).norm() /
                      basis_hessian(e, p).norm(),
                  1e-10);
    }
}

TEST(FieldKernel, TilingSumsToEnclosingSquare) {
    // 20 x 20 tiles covering [-2000, 2000]^2.
    const double L = 2000.0;
    const int n = 20;
    const double w = 2 * L / n;
    const Point3 p{13.0, 90.0, -7.0};
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sum += basis_potential(rectangle("t", -L + i * w, -L + (i + 1) * w, -L + j * w, -L + (j + 1) * w), p);
    EXPECT_NEAR(sum, basis_potential(rectangle("all", -L, L, -L, L), p), 1e-12);
    EXPECT_NEAR(sum, 1.0, 0.05);
}

TEST(FieldKernel, MirroredPairHasNoTransverseField) {
    PolygonElectrode r = odd_polygon();
    PolygonElectrode l = r;
    for (auto& v : l.vertices) v.x = -v.x;
    std::reverse(l.vertices.begin(), l.vertices.end());
    const Point3 p{0.0, 75.0, 20.0};
    const Eigen::Vector3d E = basis_field(r, p) + basis_field(l, p);
    EXPECT_LT(std::abs(E.x()), 1e-12 * E.norm());
}

TEST(FieldKernel, RejectsPointsOnOrBelowThePlane) {
    const auto e = odd_polygon();
    EXPECT_THROW(basis_potential(e, {0, 0, 0}), InputError);
    EXPECT_THROW(basis_field(e, {0, -1, 0}), InputError);
    EXPECT_THROW(basis_hessian(e, {0, 0, 0}), InputError);
}

TEST(FieldKernel, SecondOrderJetAgreesWithFirstOrder) {
    const auto e = odd_polygon();
    const auto edges = kernel::edges_of(e.vertices, 2.5);
    const Eigen::Vector3d r = Point3{20, 60, 10}.si();
    const FieldJet j1 = field_jet(edges, r);
    const FieldJet2 j2 = field_jet2(edges, r);
    EXPECT_LT((j1.E - j2.E).norm(), 1e-12 * j1.E.norm());
    EXPECT_LT((j1.J - j2.J).norm(), 1e-12 * j1.J.norm());
    // K against differences of J.
    const double h = 1e-8;
    for (int k = 0; k < 3; ++k) {
        Eigen::Vector3d dr = Eigen::Vector3d::Zero();
        dr(k) = h;
        const Eigen::Matrix3d dJ = (field_jet(edges, r + dr).J - field_jet(edges, r - dr).J) / (2 * h);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) EXPECT_NEAR(j2.K[i](j, k), dJ(i, j), 1e-5 * j2.K[i].norm());
    }
}
