#pragma once

// Parametric layout of a surface-electrode trap with five rf rails whose
// central pattern (x >= 0, from the axis outwards) is
//   rf c/2 | dc gap b | rf a | dc gap b | rf d | outer dc
// Transition zones shift every rail boundary by (a - c)/2 so that at the far
// side the narrow and wide rails have exchanged places. All coordinates in µm.

#include "surftrap/bspline.hpp"
#include "surftrap/error.hpp"
#include "surftrap/polygon.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace surftrap {

/// Named dimensions of the layout, all lengths in µm.
struct LayoutParams {
    double a = 135.6;        // wide rf rail next to the inner gap
    double b = 61.5;         // dc gap between rf rails
    double c = 50.8;         // central rf rail
    double d = 174.0;        // outermost rf rail
    double gamma = 500.0;    // trap centre to start of the transition zone
    double delta = 200.0;    // transition zone length
    double extent_z = 2400.0;  // half-length of the modelled rails
    int n_periods = 1;       // transition zones on each side of the centre

    static LayoutParams published() { return {}; }

    /// Default half-length for given gamma/delta (rails run 1700 µm past the
    /// first transition zone).
    static double default_extent(double gamma, double delta, int n_periods = 1) {
        return gamma + delta + (n_periods - 1) * (delta + 2 * gamma) + 1700.0;
    }

    double shift() const { return 0.5 * (a - c); }

    /// Start of the k-th transition zone on the +z side (k = 0 .. n_periods-1).
    double transition_start(int k) const { return gamma + k * (delta + 2.0 * gamma); }

    double last_transition_end() const { return transition_start(n_periods - 1) + delta; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw InputError(std::string("layout parameter ") + name + " must be strictly positive");
        };
        positive(a, "a");
        positive(b, "b");
        positive(c, "c");
        positive(d, "d");
        positive(gamma, "gamma");
        positive(delta, "delta");
        positive(extent_z, "extent_z");
        if (n_periods < 1) throw InputError("layout parameter n_periods must be >= 1");
        if (delta < 40.0) throw InputError("layout parameter delta must be >= 40 um (room for a dc electrode)");
        if (extent_z < last_transition_end() + 500.0)
            throw InputError("layout parameter extent_z must exceed the last transition zone end by >= 500 um");
    }

    friend bool operator==(const LayoutParams&, const LayoutParams&) = default;
};

/// Subdivision of the dc gaps into electrodes. Not part of the rf design; a
/// modelling convention for the dc basis.
struct DcTiling {
    double segment_length = 40.0;           // µm, nominal axial length of a segment
    double segmented_fraction = 2.0 / 3.0;  // share of each gap width taken by segments
    double outer_width = 400.0;             // µm, width of DCOR/DCOL

    friend bool operator==(const DcTiling&, const DcTiling&) = default;
};

enum class ElectrodeKind { rf, dc, ground };

inline std::string_view to_string(ElectrodeKind k) {
    switch (k) {
        case ElectrodeKind::rf: return "rf";
        case ElectrodeKind::dc: return "dc";
        case ElectrodeKind::ground: return "ground";
    }
    return "?";
}

inline ElectrodeKind electrode_kind_from_string(std::string_view s) {
    if (s == "rf") return ElectrodeKind::rf;
    if (s == "dc") return ElectrodeKind::dc;
    if (s == "ground") return ElectrodeKind::ground;
    throw InputError("unknown electrode kind '" + std::string(s) + "'");
}

struct PolygonElectrode {
    std::string name;
    ElectrodeKind kind = ElectrodeKind::dc;
    std::vector<PlanePoint> vertices;  // counter-clockwise in (x, z)

    friend bool operator==(const PolygonElectrode&, const PolygonElectrode&) = default;
};

/// Inner boundary of a transition zone as a cubic B-spline. Control points are
/// (z, x) pairs. The first and last points are pinned to (gamma, c/2) and
/// (gamma + delta, a/2); the outer boundary of the same dc gap is the image
/// under a 180° rotation about the centre of the zone.
struct SplineBoundary {
    std::vector<Eigen::Vector2d> control_points;
    int samples = 64;
    static constexpr int degree = 3;

    static Eigen::Vector2d start_point(const LayoutParams& p) { return {p.gamma, 0.5 * p.c}; }
    static Eigen::Vector2d end_point(const LayoutParams& p) { return {p.gamma + p.delta, 0.5 * p.a}; }

    /// Centre of the 180° inversion: middle of the inner dc gap at mid-zone.
    static Eigen::Vector2d inversion_center(const LayoutParams& p) {
        return {p.gamma + 0.5 * p.delta, 0.25 * (p.a + p.c) + 0.5 * p.b};
    }

    static SplineBoundary from_internal(const LayoutParams& p, std::span<const Eigen::Vector2d> internal,
                                        int samples = 64) {
        SplineBoundary s;
        s.samples = samples;
        s.control_points.push_back(start_point(p));
        for (const auto& q : internal) s.control_points.push_back(q);
        s.control_points.push_back(end_point(p));
        return s;
    }

    /// Internal points evenly spaced on the straight connection.
    static SplineBoundary straight(const LayoutParams& p, int n_internal = 2, int samples = 64) {
        std::vector<Eigen::Vector2d> internal;
        const Eigen::Vector2d p0 = start_point(p), p1 = end_point(p);
        for (int i = 1; i <= n_internal; ++i) internal.push_back(p0 + (p1 - p0) * (double(i) / (n_internal + 1)));
        return from_internal(p, internal, samples);
    }

    std::vector<Eigen::Vector2d> internal_points() const {
        return {control_points.begin() + 1, control_points.end() - 1};
    }

    BSpline<Eigen::Vector2d> curve() const { return BSpline<Eigen::Vector2d>(control_points, degree); }

    void validate(const LayoutParams& p) const {
        if (control_points.size() < 4) throw InputError("spline boundary needs at least 2 internal control points");
        if (samples < 4) throw InputError("spline boundary needs at least 4 samples");
        if (control_points.front() != start_point(p) || control_points.back() != end_point(p))
            throw InputError("spline boundary endpoints must equal (gamma, c/2) and (gamma+delta, a/2)");
        for (const auto& q : control_points)
            if (!q.allFinite()) throw InputError("spline control point is not finite");
    }

    friend bool operator==(const SplineBoundary& l, const SplineBoundary& r) {
        return l.samples == r.samples && l.control_points == r.control_points;
    }
};

struct LinearTransition {
    friend bool operator==(const LinearTransition&, const LinearTransition&) = default;
};

using Transition = std::variant<LinearTransition, SplineBoundary>;

inline bool is_spline(const Transition& t) { return std::holds_alternative<SplineBoundary>(t); }

/// Fabrication/spline constraint failures (narrow rails, crossing boundaries).
class GeometryError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// A boundary x(z) given as a polyline with strictly increasing z.
class Profile {
public:
    Profile() = default;
    explicit Profile(std::vector<PlanePoint> pts) : pts_(std::move(pts)) {}

    const std::vector<PlanePoint>& points() const { return pts_; }
    double z_min() const { return pts_.front().z; }
    double z_max() const { return pts_.back().z; }

    bool strictly_increasing() const {
        for (std::size_t i = 1; i < pts_.size(); ++i)
            if (!(pts_[i].z > pts_[i - 1].z)) return false;
        return true;
    }

    double x_at(double z) const {
        if (z <= pts_.front().z) return pts_.front().x;
        if (z >= pts_.back().z) return pts_.back().x;
        auto it = std::upper_bound(pts_.begin(), pts_.end(), z, [](double v, const PlanePoint& p) { return v < p.z; });
        const auto& q = *it;
        const auto& p = *(it - 1);
        const double t = (z - p.z) / (q.z - p.z);
        return p.x + t * (q.x - p.x);
    }

    /// Vertices on [z0, z1] with interpolated endpoints, ascending z.
    std::vector<PlanePoint> slice(double z0, double z1) const {
        std::vector<PlanePoint> out;
        out.push_back({x_at(z0), z0});
        for (const auto& p : pts_)
            if (p.z > z0 && p.z < z1) out.push_back(p);
        out.push_back({x_at(z1), z1});
        return out;
    }

    template <class F>
    Profile map_x(F f) const {
        std::vector<PlanePoint> out;
        out.reserve(pts_.size());
        for (const auto& p : pts_) out.push_back({f(p.x), p.z});
        return Profile(std::move(out));
    }

    /// Pointwise (1-f)*lhs + f*rhs on the union of both breakpoint sets.
    static Profile blend(const Profile& lhs, const Profile& rhs, double f) {
        std::vector<double> zs;
        for (const auto& p : lhs.pts_) zs.push_back(p.z);
        for (const auto& p : rhs.pts_) zs.push_back(p.z);
        std::sort(zs.begin(), zs.end());
        zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
        std::vector<PlanePoint> out;
        out.reserve(zs.size());
        for (double z : zs) out.push_back({(1.0 - f) * lhs.x_at(z) + f * rhs.x_at(z), z});
        return Profile(std::move(out));
    }

    /// Minimum of rhs(z) - lhs(z) over [z0, z1]; exact for piecewise-linear profiles.
    static double min_separation(const Profile& lhs, const Profile& rhs, double z0, double z1) {
        double best = rhs.x_at(z0) - lhs.x_at(z0);
        best = std::min(best, rhs.x_at(z1) - lhs.x_at(z1));
        for (const auto* pr : {&lhs, &rhs})
            for (const auto& p : pr->pts_)
                if (p.z > z0 && p.z < z1) best = std::min(best, rhs.x_at(p.z) - lhs.x_at(p.z));
        return best;
    }

private:
    std::vector<PlanePoint> pts_;
};

/// Inner (e1) and outer (e2) boundary of the dc gap next to the central rail,
/// inside one forward transition zone, as ascending-z (x, z) vertices.
struct ZoneCurves {
    std::vector<PlanePoint> inner;
    std::vector<PlanePoint> outer;
};

inline ZoneCurves zone_curves(const LayoutParams& p, const Transition& t) {
    ZoneCurves zc;
    const double z0 = p.gamma, z1 = p.gamma + p.delta;
    if (const auto* s = std::get_if<SplineBoundary>(&t)) {
        s->validate(p);
        const auto pts = s->curve().sample(s->samples);
        const Eigen::Vector2d c = SplineBoundary::inversion_center(p);
        for (const auto& q : pts) zc.inner.push_back({q.y(), q.x()});
        for (auto it = pts.rbegin(); it != pts.rend(); ++it) zc.outer.push_back({2 * c.y() - it->y(), 2 * c.x() - it->x()});
        // Pin the endpoints exactly to the straight rails.
        zc.inner.front() = {0.5 * p.c, z0};
        zc.inner.back() = {0.5 * p.a, z1};
        zc.outer.front() = {0.5 * p.c + p.b, z0};
        zc.outer.back() = {0.5 * p.a + p.b, z1};
    } else {
        zc.inner = {{0.5 * p.c, z0}, {0.5 * p.a, z1}};
        zc.outer = {{0.5 * p.c + p.b, z0}, {0.5 * p.a + p.b, z1}};
    }
    return zc;
}

namespace detail {

// Full-length profile from the forward zone curve; x_rest is the value at the
// trap centre, x_shifted past an odd number of transitions.
inline Profile full_profile(const LayoutParams& p, const std::vector<PlanePoint>& zone, double x_rest,
                            double x_shifted) {
    std::vector<PlanePoint> pos;  // z > 0
    for (int k = 0; k < p.n_periods; ++k) {
        const double s = p.transition_start(k);
        const bool forward = (k % 2 == 0);
        if (forward) {
            for (const auto& q : zone) pos.push_back({q.x, s + (q.z - p.gamma)});
        } else {
            for (auto it = zone.rbegin(); it != zone.rend(); ++it) pos.push_back({it->x, s + p.delta - (it->z - p.gamma)});
        }
    }
    const double x_end = (p.n_periods % 2 == 1) ? x_shifted : x_rest;
    pos.push_back({x_end, p.extent_z});
    std::vector<PlanePoint> all;
    all.reserve(2 * pos.size());
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) all.push_back({it->x, -it->z});
    for (const auto& q : pos) all.push_back(q);
    // Drop consecutive duplicates from pinned endpoints.
    std::vector<PlanePoint> out;
    for (const auto& q : all)
        if (out.empty() || q.z != out.back().z) out.push_back(q);
    return Profile(std::move(out));
}

inline std::vector<PlanePoint> strip_polygon(const Profile& left, const Profile& right, double z0, double z1) {
    std::vector<PlanePoint> v = right.slice(z0, z1);
    auto l = left.slice(z0, z1);
    for (auto it = l.rbegin(); it != l.rend(); ++it) v.push_back(*it);
    std::vector<PlanePoint> out;
    for (const auto& q : v)
        if (out.empty() || !(q == out.back())) out.push_back(q);
    if (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

}  // namespace detail

/// The five rail boundaries x >= 0 (e1 .. e5) over the full length.
struct RailProfiles {
    Profile e1, e2, e3, e4, e5;
};

inline RailProfiles rail_profiles(const LayoutParams& p, const Transition& t) {
    const ZoneCurves zc = zone_curves(p, t);
    RailProfiles r;
    r.e1 = detail::full_profile(p, zc.inner, 0.5 * p.c, 0.5 * p.a);
    r.e2 = detail::full_profile(p, zc.outer, 0.5 * p.c + p.b, 0.5 * p.a + p.b);
    const double k = p.c + 2 * p.b + p.a;  // mirror line of the second gap is x = k/2
    r.e3 = r.e2.map_x([k](double x) { return k - x; });
    r.e4 = r.e1.map_x([k](double x) { return k - x; });
    const double x5 = 0.5 * p.c + 2 * p.b + p.a + p.d;
    r.e5 = Profile({{x5, -p.extent_z}, {x5, p.extent_z}});
    return r;
}

/// Narrowest features of a layout, measured along x at fixed z.
struct WidthReport {
    double min_rf_width = INFINITY;           // over the full length
    double min_gap_in_transition = INFINITY;  // dc gaps inside transition zones
    std::string narrowest_rf;
};

inline WidthReport measure_widths(const LayoutParams& p, const RailProfiles& r) {
    WidthReport w;
    const double L = p.extent_z;
    const Profile neg_e1 = r.e1.map_x([](double x) { return -x; });
    auto upd = [&](double v, const char* name) {
        if (v < w.min_rf_width) {
            w.min_rf_width = v;
            w.narrowest_rf = name;
        }
    };
    upd(Profile::min_separation(neg_e1, r.e1, -L, L), "RF_C");
    upd(Profile::min_separation(r.e2, r.e3, -L, L), "RF_M");
    upd(Profile::min_separation(r.e4, r.e5, -L, L), "RF_O");
    for (int k = 0; k < p.n_periods; ++k) {
        const double s = p.transition_start(k);
        for (double sign : {1.0, -1.0}) {
            const double z0 = sign > 0 ? s : -(s + p.delta);
            const double z1 = sign > 0 ? s + p.delta : -s;
            w.min_gap_in_transition = std::min(w.min_gap_in_transition, Profile::min_separation(r.e1, r.e2, z0, z1));
            w.min_gap_in_transition = std::min(w.min_gap_in_transition, Profile::min_separation(r.e3, r.e4, z0, z1));
        }
    }
    return w;
}

struct TrapLayout {
    LayoutParams params;
    Transition transition = LinearTransition{};
    DcTiling tiling;
    std::vector<PolygonElectrode> electrodes;

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < electrodes.size(); ++i)
            if (electrodes[i].name == name) return i;
        return std::nullopt;
    }

    const PolygonElectrode& electrode(std::string_view name) const {
        if (auto i = find(name)) return electrodes[*i];
        throw InputError("unknown electrode '" + std::string(name) + "'");
    }

    std::vector<std::size_t> indices_of(ElectrodeKind k) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < electrodes.size(); ++i)
            if (electrodes[i].kind == k) out.push_back(i);
        return out;
    }
};

/// Spline or linear transition geometry failures (overlapping rails, rails
/// narrower than 20 µm, non-monotone boundaries) raise GeometryError.
struct BuildOptions {
    double min_rf_width = 20.0;  // µm
    bool with_dc = true;
    bool check_overlap = false;  // O(n^2); the construction guarantees it
};

namespace detail {

struct AxialZone {
    double z0, z1;
    std::string label;
    bool transition;
};

inline std::vector<AxialZone> axial_zones(const LayoutParams& p) {
    std::vector<AxialZone> pos;
    double z = p.gamma;
    for (int k = 0; k < p.n_periods; ++k) {
        const double s = p.transition_start(k);
        pos.push_back({s, s + p.delta, "T" + std::to_string(k + 1), true});
        const double next = (k + 1 < p.n_periods) ? p.transition_start(k + 1) : p.extent_z;
        pos.push_back({s + p.delta, next, "I" + std::to_string(k + 1), false});
        z = next;
    }
    (void)z;
    std::vector<AxialZone> zones;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) zones.push_back({-it->z1, -it->z0, it->label + "M", it->transition});
    zones.push_back({-p.gamma, p.gamma, "C", false});
    for (const auto& zn : pos) zones.push_back({zn.z0, zn.z1, zn.label + "P", zn.transition});
    return zones;
}

}  // namespace detail

inline void validate_rail_geometry(const LayoutParams& p, const RailProfiles& r, const BuildOptions& opt) {
    for (const auto* pr : {&r.e1, &r.e2})
        if (!pr->strictly_increasing())
            throw GeometryError("transition boundary is not monotone in z (polygon would self-intersect)");
    const WidthReport w = measure_widths(p, r);
    if (!(w.min_gap_in_transition > 0.0))
        throw GeometryError("transition boundaries cross: dc gap closes inside a transition zone");
    if (!(w.min_rf_width >= opt.min_rf_width)) {
        std::ostringstream os;
        os << "rf electrode " << w.narrowest_rf << " narrows to " << w.min_rf_width << " um (minimum "
           << opt.min_rf_width << " um)";
        throw GeometryError(os.str());
    }
}

inline TrapLayout build_layout(const LayoutParams& p, const Transition& t, const DcTiling& tiling = {},
                               const BuildOptions& opt = {});

/// Every electrode: >= 3 vertices, simple, counter-clockwise; optionally
/// pairwise interior-disjoint.
inline void validate_layout(const TrapLayout& layout, bool check_overlap) {
    if (layout.electrodes.empty()) throw InputError("layout has no electrodes");
    std::map<std::string, int> seen;
    for (const auto& e : layout.electrodes) {
        if (e.name.empty()) throw InputError("electrode with empty name");
        if (seen[e.name]++) throw InputError("duplicate electrode name '" + e.name + "'");
        if (e.vertices.size() < 3) throw InputError("electrode '" + e.name + "': fewer than 3 vertices");
        if (!polygon::is_simple(e.vertices)) throw InputError("electrode '" + e.name + "': polygon is not simple");
        if (!(polygon::signed_area(e.vertices) > 0.0))
            throw InputError("electrode '" + e.name + "': vertices are not counter-clockwise");
    }
    if (!check_overlap) return;
    const std::size_t n = layout.electrodes.size();
    std::vector<BoundingBox> boxes;
    boxes.reserve(n);
    for (const auto& e : layout.electrodes) boxes.push_back(polygon::bounding_box(e.vertices));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (!boxes[i].overlaps(boxes[j], -1e-7)) continue;
            if (polygon::polygons_overlap(layout.electrodes[i].vertices, layout.electrodes[j].vertices))
                throw InputError("electrodes '" + layout.electrodes[i].name + "' and '" + layout.electrodes[j].name +
                                 "' overlap");
        }
}

inline TrapLayout build_layout(const LayoutParams& p, const Transition& t, const DcTiling& tiling,
                               const BuildOptions& opt) {
    p.validate();
    if (!(tiling.segment_length > 0) || !(tiling.segmented_fraction > 0 && tiling.segmented_fraction < 1) ||
        !(tiling.outer_width > 0))
        throw InputError("invalid dc tiling");
    const RailProfiles r = rail_profiles(p, t);
    validate_rail_geometry(p, r, opt);

    TrapLayout layout;
    layout.params = p;
    layout.transition = t;
    layout.tiling = tiling;
    auto& el = layout.electrodes;
    auto neg = [](const Profile& pr) { return pr.map_x([](double x) { return -x; }); };
    const Profile ne1 = neg(r.e1), ne2 = neg(r.e2), ne3 = neg(r.e3), ne4 = neg(r.e4), ne5 = neg(r.e5);
    const double L = p.extent_z;
    auto add = [&](std::string name, ElectrodeKind kind, const Profile& left, const Profile& right, double z0,
                   double z1) { el.push_back({std::move(name), kind, detail::strip_polygon(left, right, z0, z1)}); };

    add("RF_C", ElectrodeKind::rf, ne1, r.e1, -L, L);
    add("RF_MR", ElectrodeKind::rf, r.e2, r.e3, -L, L);
    add("RF_ML", ElectrodeKind::rf, ne3, ne2, -L, L);
    add("RF_OR", ElectrodeKind::rf, r.e4, r.e5, -L, L);
    add("RF_OL", ElectrodeKind::rf, ne5, ne4, -L, L);
    if (!opt.with_dc) return layout;

    // Gap channels: 1 = inner gap, 2 = outer gap; segments sit on the side of
    // each gap closer to the axis, a full-length compensation strip outside.
    const double f = tiling.segmented_fraction;
    const Profile m1 = Profile::blend(r.e1, r.e2, f);
    const Profile m2 = Profile::blend(r.e3, r.e4, f);
    const Profile nm1 = neg(m1), nm2 = neg(m2);
    struct Channel {
        std::string tag;
        const Profile* seg_left;
        const Profile* seg_right;
        const Profile* comp_left;
        const Profile* comp_right;
        std::string comp_name;
    };
    const Channel channels[] = {
        {"1R", &r.e1, &m1, &m1, &r.e2, "C1"},
        {"1L", &nm1, &ne1, &ne2, &nm1, "C2"},
        {"2R", &r.e3, &m2, &m2, &r.e4, "C3"},
        {"2L", &nm2, &ne3, &ne4, &nm2, "C4"},
    };
    const auto zones = detail::axial_zones(p);
    for (const auto& ch : channels) {
        for (const auto& zn : zones) {
            const double len = zn.z1 - zn.z0;
            const int n = std::max(1, static_cast<int>(std::lround(len / tiling.segment_length)));
            for (int k = 0; k < n; ++k) {
                const double a0 = zn.z0 + len * k / n;
                const double a1 = (k + 1 == n) ? zn.z1 : zn.z0 + len * (k + 1) / n;
                add("S" + ch.tag + "." + zn.label + "." + std::to_string(k), ElectrodeKind::dc, *ch.seg_left,
                    *ch.seg_right, a0, a1);
            }
        }
        add(ch.comp_name, ElectrodeKind::dc, *ch.comp_left, *ch.comp_right, -L, L);
    }
    const double x5 = r.e5.x_at(0.0);
    const Profile outer_r({{x5 + tiling.outer_width, -L}, {x5 + tiling.outer_width, L}});
    add("DCOR", ElectrodeKind::dc, r.e5, outer_r, -L, L);
    add("DCOL", ElectrodeKind::dc, neg(outer_r), ne5, -L, L);
    if (opt.check_overlap) validate_layout(layout, true);
    return layout;
}

/// Reflecting the rf set through x = 0 reproduces it (vertex sets compared up to tol).
inline bool rf_mirror_symmetric(const TrapLayout& layout, double tol = 1e-9) {
    std::vector<std::vector<PlanePoint>> rf;
    for (const auto& e : layout.electrodes)
        if (e.kind == ElectrodeKind::rf) rf.push_back(e.vertices);
    auto key = [](std::vector<PlanePoint> v) {
        std::sort(v.begin(), v.end(), [](const PlanePoint& a, const PlanePoint& b) {
            return a.z != b.z ? a.z < b.z : a.x < b.x;
        });
        return v;
    };
    std::vector<std::vector<PlanePoint>> orig, mirrored;
    for (const auto& v : rf) {
        orig.push_back(key(v));
        std::vector<PlanePoint> m;
        for (const auto& q : v) m.push_back({-q.x, q.z});
        mirrored.push_back(key(m));
    }
    for (const auto& m : mirrored) {
        bool found = false;
        for (const auto& o : orig) {
            if (o.size() != m.size()) continue;
            bool same = true;
            for (std::size_t i = 0; i < o.size() && same; ++i)
                same = std::abs(o[i].x - m[i].x) <= tol && std::abs(o[i].z - m[i].z) <= tol;
            if (same) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace surftrap
