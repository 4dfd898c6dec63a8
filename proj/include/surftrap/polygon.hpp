#pragma once

// Planar polygon utilities in the chip plane. Coordinates are (x, z) in µm.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace surftrap {

struct PlanePoint {
    double x = 0.0;
    double z = 0.0;

    friend bool operator==(const PlanePoint&, const PlanePoint&) = default;
};

struct BoundingBox {
    double x_min, x_max, z_min, z_max;

    bool overlaps(const BoundingBox& o, double tol = 0.0) const {
        return x_min <= o.x_max + tol && o.x_min <= x_max + tol && z_min <= o.z_max + tol &&
               o.z_min <= z_max + tol;
    }
};

namespace polygon {

inline double cross(const PlanePoint& o, const PlanePoint& a, const PlanePoint& b) {
    return (a.x - o.x) * (b.z - o.z) - (a.z - o.z) * (b.x - o.x);
}

/// Shoelace area; positive for counter-clockwise order in the (x, z) plane.
inline double signed_area(std::span<const PlanePoint> v) {
    double s = 0.0;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = v[i];
        const auto& q = v[(i + 1) % n];
        s += p.x * q.z - q.x * p.z;
    }
    return 0.5 * s;
}

inline BoundingBox bounding_box(std::span<const PlanePoint> v) {
    BoundingBox b{v[0].x, v[0].x, v[0].z, v[0].z};
    for (const auto& p : v) {
        b.x_min = std::min(b.x_min, p.x);
        b.x_max = std::max(b.x_max, p.x);
        b.z_min = std::min(b.z_min, p.z);
        b.z_max = std::max(b.z_max, p.z);
    }
    return b;
}

/// True when segments [p1,p2] and [q1,q2] cross at a single point interior to
/// both. Touching, collinear overlap and shared endpoints do not count; `tol`
/// is an absolute area tolerance on the orientation tests.
inline bool segments_cross(const PlanePoint& p1, const PlanePoint& p2, const PlanePoint& q1,
                           const PlanePoint& q2, double tol) {
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    return ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
           ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol));
}

inline double point_segment_distance(const PlanePoint& p, const PlanePoint& a, const PlanePoint& b) {
    const double dx = b.x - a.x, dz = b.z - a.z;
    const double len2 = dx * dx + dz * dz;
    double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.z - a.z) * dz) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double ex = a.x + t * dx - p.x, ez = a.z + t * dz - p.z;
    return std::sqrt(ex * ex + ez * ez);
}

inline double distance_to_boundary(const PlanePoint& p, std::span<const PlanePoint> v) {
    double best = INFINITY;
    for (std::size_t i = 0; i < v.size(); ++i)
        best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
    return best;
}

/// Crossing-number point-in-polygon test (boundary points are unspecified).
inline bool contains(std::span<const PlanePoint> v, const PlanePoint& p) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = v[i];
        const auto& b = v[j];
        if ((a.z > p.z) != (b.z > p.z)) {
            const double x_cross = a.x + (p.z - a.z) * (b.x - a.x) / (b.z - a.z);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

/// Strictly inside with a clearance of at least `tol` from the boundary.
inline bool strictly_contains(std::span<const PlanePoint> v, const PlanePoint& p, double tol) {
    return contains(v, p) && distance_to_boundary(p, v) > tol;
}

/// No two non-adjacent edges cross and no edge is degenerate.
inline bool is_simple(std::span<const PlanePoint> v, double tol = 1e-12) {
    const std::size_t n = v.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % n];
        if (a == b) return false;
    }
    // Sweep-free O(n^2) check with a cheap z-range reject.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p1 = v[i];
        const auto& p2 = v[(i + 1) % n];
        const double pz0 = std::min(p1.z, p2.z), pz1 = std::max(p1.z, p2.z);
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            const auto& q1 = v[j];
            const auto& q2 = v[(j + 1) % n];
            if (std::max(q1.z, q2.z) < pz0 || std::min(q1.z, q2.z) > pz1) continue;
            if (segments_cross(p1, p2, q1, q2, tol)) return false;
        }
    }
    return true;
}

/// A point strictly inside a simple polygon: nudges an edge midpoint inward.
inline PlanePoint interior_point(std::span<const PlanePoint> v) {
    const double orient = signed_area(v) >= 0 ? 1.0 : -1.0;
    double best_len = -1.0;
    PlanePoint best{};
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& a = v[i];
        const auto& b = v[(i + 1) % v.size()];
        const double dx = b.x - a.x, dz = b.z - a.z;
        const double len = std::hypot(dx, dz);
        if (len <= best_len) continue;
        // Inward normal of a CCW polygon is the left normal (-dz, dx).
        const double nx = -dz / len * orient, nz = dx / len * orient;
        for (double eps : {1e-3, 1e-4, 1e-5, 1e-6}) {
            PlanePoint m{0.5 * (a.x + b.x) + eps * len * nx, 0.5 * (a.z + b.z) + eps * len * nz};
            if (contains(v, m)) {
                best_len = len;
                best = m;
                break;
            }
        }
    }
    return best;
}

/// Two simple polygons overlap when their interiors intersect. Shared or
/// collinear boundaries (gapless tiling) are allowed. `tol` is a length in µm.
inline bool polygons_overlap(std::span<const PlanePoint> a, std::span<const PlanePoint> b, double tol = 1e-7) {
    const auto ba = bounding_box(a), bb = bounding_box(b);
    if (!ba.overlaps(bb, -tol)) return false;
    // Orientation tolerance scaled to the edge length squared would be ideal;
    // an absolute tolerance suffices at µm scales.
    const double area_tol = tol * 1e-2;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& p1 = a[i];
        const auto& p2 = a[(i + 1) % a.size()];
        BoundingBox se{std::min(p1.x, p2.x), std::max(p1.x, p2.x), std::min(p1.z, p2.z), std::max(p1.z, p2.z)};
        if (!se.overlaps(bb, tol)) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const auto& q1 = b[j];
            const auto& q2 = b[(j + 1) % b.size()];
            if (segments_cross(p1, p2, q1, q2, area_tol)) return true;
        }
    }
    for (const auto& p : a)
        if (strictly_contains(b, p, tol)) return true;
    for (const auto& p : b)
        if (strictly_contains(a, p, tol)) return true;
    // Identical or nested polygons whose vertices all sit on the other's boundary.
    if (strictly_contains(b, interior_point(a), tol)) return true;
    if (strictly_contains(a, interior_point(b), tol)) return true;
    return false;
}

}  // namespace polygon
}  // namespace surftrap
