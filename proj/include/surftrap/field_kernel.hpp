#pragma once

// Potential, field and derivatives of unit-potential polygons lying in the
// grounded plane y = 0 (gapless plane approximation). The potential of an
// electrode at p is the solid angle it subtends divided by 2π; the field is
// the closed-form Biot-Savart sum over its straight edges. Higher
// derivatives come from forward-mode differentiation of that sum.

#include "surftrap/autodiff.hpp"
#include "surftrap/error.hpp"
#include "surftrap/geometry.hpp"
#include "surftrap/units.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace surftrap {

/// Point above the chip; µm. y is the height above the surface.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Eigen::Vector3d si() const { return {x * um_to_m, y * um_to_m, z * um_to_m}; }
    static Point3 from_si(const Eigen::Vector3d& r) { return {r.x() * m_to_um, r.y() * m_to_um, r.z() * m_to_um}; }
};

inline void require_above_surface(const Point3& p) {
    if (!(p.y > 0.0)) throw InputError("evaluation point must lie above the chip plane (y > 0)");
}

/// Per-volt response of one electrode: φ, E = -∇φ (V/m), H = ∂i∂jφ (V/m²).
struct BasisEval {
    double phi = 0.0;
    Eigen::Vector3d E = Eigen::Vector3d::Zero();
    Eigen::Matrix3d H = Eigen::Matrix3d::Zero();
};

namespace kernel {

/// Straight edge in the plane, SI coordinates, with a weight (volts).
struct Edge {
    double ax, az, bx, bz;
    double w;
};

inline std::vector<Edge> edges_of(std::span<const PlanePoint> v, double weight) {
    std::vector<Edge> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        out.push_back({a.x * um_to_m, a.z * um_to_m, b.x * um_to_m, b.z * um_to_m, weight});
    }
    return out;
}

/// Σ_edges w·(a×b)(|a|+|b|)/(|a||b|(|a||b|+a·b)) with a, b the edge ends
/// relative to p. Equals -2π·E for a counter-clockwise polygon at 1 V.
template <class T>
std::array<T, 3> edge_sum(std::span<const Edge> edges, const T& px, const T& py, const T& pz) {
    std::array<T, 3> acc{T(0.0), T(0.0), T(0.0)};
    const T py2 = py * py;
    for (const auto& e : edges) {
        const T ax = e.ax - px, az = e.az - pz;
        const T bx = e.bx - px, bz = e.bz - pz;
        const T na2 = ax * ax + az * az + py2;
        const T nb2 = bx * bx + bz * bz + py2;
        using std::sqrt;
        const T na = sqrt(na2), nb = sqrt(nb2);
        const T nanb = na * nb;
        const T dot = ax * bx + az * bz + py2;
        // a×b with a_y = b_y = -py.
        const T c0 = py * (e.az - e.bz);
        const T c1 = az * bx - ax * bz;
        const T c2 = py * (e.bx - e.ax);
        // |a||b| + a·b cancels for long edges seen almost end to end; the
        // Lagrange identity gives it without cancellation.
        const T s = ad::value(dot) < 0.0 ? (c0 * c0 + c1 * c1 + c2 * c2) / (nanb - dot) : nanb + dot;
        const T f = (na + nb) / (nanb * s) * e.w;
        acc[0] += f * c0;
        acc[1] += f * c1;
        acc[2] += f * c2;
    }
    return acc;
}

inline constexpr double inv_two_pi = 1.0 / (2.0 * constants::pi);

/// Solid angle by fan triangulation about the polygon vertex `root`, using
/// tan(Ω/2) = det[R1 R2 R3] / (r1 r2 r3 + (R1·R2) r3 + (R1·R3) r2 + (R2·R3) r1).
inline double solid_angle_vertex_fan(std::span<const PlanePoint> v, const Point3& p, std::size_t root) {
    const Eigen::Vector3d ps = p.si();
    const std::size_t n = v.size();
    auto rel = [&](std::size_t i) {
        const auto& q = v[(root + i) % n];
        return Eigen::Vector3d(q.x * um_to_m - ps.x(), -ps.y(), q.z * um_to_m - ps.z());
    };
    const Eigen::Vector3d r1 = rel(0);
    const double n1 = r1.norm();
    double total = 0.0;
    Eigen::Vector3d r2 = rel(1);
    double n2 = r2.norm();
    for (std::size_t k = 2; k < n; ++k) {
        const Eigen::Vector3d r3 = rel(k);
        const double n3 = r3.norm();
        const double num = r1.dot(r2.cross(r3));
        const double den = n1 * n2 * n3 + r1.dot(r2) * n3 + r1.dot(r3) * n2 + r2.dot(r3) * n1;
        total += 2.0 * std::atan2(num, den);
        r2 = r3;
        n2 = n3;
    }
    return total;
}

/// Solid angle by a fan of signed triangles about the foot of p in the
/// plane. With R1 straight down every denominator term is non-negative, so
/// long thin electrodes keep full precision.
inline double solid_angle(std::span<const PlanePoint> v, const Point3& p) {
    const Eigen::Vector3d ps = p.si();
    const double h = ps.y();
    const std::size_t n = v.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % n];
        const Eigen::Vector3d r2(a.x * um_to_m - ps.x(), -h, a.z * um_to_m - ps.z());
        const Eigen::Vector3d r3(b.x * um_to_m - ps.x(), -h, b.z * um_to_m - ps.z());
        const double n2 = r2.norm(), n3 = r3.norm();
        const Eigen::Vector3d c = r2.cross(r3);
        const double dot = r2.dot(r3);
        const double s = dot < 0.0 ? c.squaredNorm() / (n2 * n3 - dot) : n2 * n3 + dot;
        const double num = -h * c.y();
        const double den = h * (s + h * (n2 + n3));
        total += 2.0 * std::atan2(num, den);
    }
    return total;
}

}  // namespace kernel

inline double basis_potential(const PolygonElectrode& e, const Point3& p) {
    require_above_surface(p);
    return kernel::solid_angle(e.vertices, p) * kernel::inv_two_pi;
}

/// Same potential with the fan rooted at a polygon vertex instead.
inline double basis_potential(const PolygonElectrode& e, const Point3& p, std::size_t fan_root) {
    require_above_surface(p);
    return kernel::solid_angle_vertex_fan(e.vertices, p, fan_root) * kernel::inv_two_pi;
}

inline Eigen::Vector3d basis_field(const PolygonElectrode& e, const Point3& p) {
    require_above_surface(p);
    const auto edges = kernel::edges_of(e.vertices, 1.0);
    const Eigen::Vector3d r = p.si();
    const auto s = kernel::edge_sum<double>(edges, r.x(), r.y(), r.z());
    return -kernel::inv_two_pi * Eigen::Vector3d(s[0], s[1], s[2]);
}

/// Field and its Jacobian for a weighted edge set; J(i, j) = ∂E_i/∂x_j.
struct FieldJet {
    Eigen::Vector3d E = Eigen::Vector3d::Zero();
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
};

inline FieldJet field_jet(std::span<const kernel::Edge> edges, const Eigen::Vector3d& r) {
    using D = ad::Dual<double, 3>;
    const auto s = kernel::edge_sum<D>(edges, ad::variable<3>(r.x(), 0), ad::variable<3>(r.y(), 1),
                                       ad::variable<3>(r.z(), 2));
    FieldJet out;
    for (int i = 0; i < 3; ++i) {
        out.E(i) = -kernel::inv_two_pi * s[i].v;
        for (int j = 0; j < 3; ++j) out.J(i, j) = -kernel::inv_two_pi * s[i].d[j];
    }
    return out;
}

/// Field, Jacobian and second derivatives; K[i](j, k) = ∂j∂k E_i.
struct FieldJet2 {
    Eigen::Vector3d E = Eigen::Vector3d::Zero();
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    std::array<Eigen::Matrix3d, 3> K{Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero(), Eigen::Matrix3d::Zero()};
};

inline FieldJet2 field_jet2(std::span<const kernel::Edge> edges, const Eigen::Vector3d& r) {
    using D2 = ad::Dual<ad::Dual<double, 3>, 3>;
    const auto s = kernel::edge_sum<D2>(edges, ad::variable2<3>(r.x(), 0), ad::variable2<3>(r.y(), 1),
                                        ad::variable2<3>(r.z(), 2));
    FieldJet2 out;
    const double k = -kernel::inv_two_pi;
    for (int i = 0; i < 3; ++i) {
        out.E(i) = k * s[i].v.v;
        for (int j = 0; j < 3; ++j) {
            out.J(i, j) = k * s[i].v.d[j];
            for (int m = 0; m < 3; ++m) out.K[i](j, m) = k * s[i].d[j].d[m];
        }
    }
    return out;
}

inline Eigen::Matrix3d basis_hessian(const PolygonElectrode& e, const Point3& p) {
    require_above_surface(p);
    const auto edges = kernel::edges_of(e.vertices, 1.0);
    const FieldJet j = field_jet(edges, p.si());
    // ∂i∂jφ = -∂E_j/∂x_i; symmetrise to remove round-off asymmetry.
    const Eigen::Matrix3d H = -j.J.transpose();
    return 0.5 * (H + H.transpose());
}

inline BasisEval basis_eval(const PolygonElectrode& e, const Point3& p) {
    require_above_surface(p);
    const auto edges = kernel::edges_of(e.vertices, 1.0);
    const FieldJet j = field_jet(edges, p.si());
    BasisEval out;
    out.phi = basis_potential(e, p);
    out.E = j.E;
    const Eigen::Matrix3d H = -j.J.transpose();
    out.H = 0.5 * (H + H.transpose());
    return out;
}

}  // namespace surftrap
