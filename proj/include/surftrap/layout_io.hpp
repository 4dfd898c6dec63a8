#pragma once

// Polygon-JSON exchange format and SVG rendering of layouts.
//
//   {"format": "surftrap-layout", "version": 1,
//    "params": {...}, "transition": {"type": "linear"} | {"type": "spline", ...},
//    "tiling": {...},
//    "electrodes": [{"name": "...", "kind": "rf|dc|ground", "vertices": [[x, z], ...]}]}
//
// Coordinates are µm in (x, z). Doubles are written with round-trip precision.

#include "surftrap/geometry.hpp"
#include "surftrap/polygon.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace surftrap {

inline nlohmann::json params_to_json(const LayoutParams& p) {
    return {{"a_um", p.a},         {"b_um", p.b},         {"c_um", p.c},
            {"d_um", p.d},         {"gamma_um", p.gamma}, {"delta_um", p.delta},
            {"extent_z_um", p.extent_z}, {"n_periods", p.n_periods}};
}

inline LayoutParams params_from_json(const nlohmann::json& j, const std::string& where = "params") {
    if (!j.is_object()) throw InputError(where + ": expected an object");
    LayoutParams p;
    auto num = [&](const char* key, double& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number()) throw InputError(where + "." + key + ": expected a number");
        out = j[key].get<double>();
    };
    num("a_um", p.a);
    num("b_um", p.b);
    num("c_um", p.c);
    num("d_um", p.d);
    num("gamma_um", p.gamma);
    num("delta_um", p.delta);
    const bool explicit_extent = j.contains("extent_z_um");
    num("extent_z_um", p.extent_z);
    if (j.contains("n_periods")) {
        if (!j["n_periods"].is_number_integer()) throw InputError(where + ".n_periods: expected an integer");
        p.n_periods = j["n_periods"].get<int>();
    }
    if (!explicit_extent) p.extent_z = LayoutParams::default_extent(p.gamma, p.delta, p.n_periods);
    for (const auto& [k, v] : j.items()) {
        static const char* known[] = {"a_um", "b_um", "c_um", "d_um", "gamma_um", "delta_um", "extent_z_um", "n_periods"};
        if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) == std::end(known))
            throw InputError(where + "." + k + ": unknown key");
    }
    return p;
}

inline nlohmann::json transition_to_json(const Transition& t) {
    if (!is_spline(t)) return {{"type", "linear"}};
    const auto& s = std::get<SplineBoundary>(t);
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& q : s.internal_points()) pts.push_back({q.x(), q.y()});
    return {{"type", "spline"}, {"internal_points_zx_um", pts}, {"samples", s.samples}};
}

inline Transition transition_from_json(const nlohmann::json& j, const LayoutParams& p,
                                       const std::string& where = "transition") {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw InputError(where + ".type: expected \"linear\" or \"spline\"");
    const std::string type = j["type"];
    if (type == "linear") return LinearTransition{};
    if (type != "spline") throw InputError(where + ".type: expected \"linear\" or \"spline\", got \"" + type + "\"");
    if (!j.contains("internal_points_zx_um") || !j["internal_points_zx_um"].is_array())
        throw InputError(where + ".internal_points_zx_um: expected an array of [z, x] pairs");
    std::vector<Eigen::Vector2d> pts;
    for (const auto& q : j["internal_points_zx_um"]) {
        if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
            throw InputError(where + ".internal_points_zx_um: each entry must be [z, x]");
        pts.emplace_back(q[0].get<double>(), q[1].get<double>());
    }
    const int samples = j.value("samples", 64);
    SplineBoundary s = SplineBoundary::from_internal(p, pts, samples);
    s.validate(p);
    return s;
}

inline nlohmann::json layout_to_json(const TrapLayout& L) {
    nlohmann::json j;
    j["format"] = "surftrap-layout";
    j["version"] = 1;
    j["params"] = params_to_json(L.params);
    j["transition"] = transition_to_json(L.transition);
    j["tiling"] = {{"segment_length_um", L.tiling.segment_length},
                   {"segmented_fraction", L.tiling.segmented_fraction},
                   {"outer_width_um", L.tiling.outer_width}};
    j["electrodes"] = nlohmann::json::array();
    for (const auto& e : L.electrodes) {
        nlohmann::json v = nlohmann::json::array();
        for (const auto& q : e.vertices) v.push_back({q.x, q.z});
        j["electrodes"].push_back({{"name", e.name}, {"kind", std::string(to_string(e.kind))}, {"vertices", v}});
    }
    return j;
}

struct ImportOptions {
    bool strict = false;  // clockwise polygons are errors instead of being reversed
    bool check_overlap = true;
};

struct ImportReport {
    std::vector<std::string> warnings;
};

inline TrapLayout layout_from_json(const nlohmann::json& j, const ImportOptions& opt = {}, ImportReport* report = nullptr) {
    if (!j.is_object()) throw InputError("layout: expected a JSON object");
    if (j.value("format", std::string()) != "surftrap-layout") throw InputError("layout.format: expected \"surftrap-layout\"");
    if (j.value("version", 0) != 1) throw InputError("layout.version: only version 1 is supported");
    TrapLayout L;
    if (j.contains("params")) L.params = params_from_json(j["params"], "layout.params");
    if (j.contains("transition")) L.transition = transition_from_json(j["transition"], L.params, "layout.transition");
    if (j.contains("tiling")) {
        const auto& t = j["tiling"];
        L.tiling.segment_length = t.value("segment_length_um", L.tiling.segment_length);
        L.tiling.segmented_fraction = t.value("segmented_fraction", L.tiling.segmented_fraction);
        L.tiling.outer_width = t.value("outer_width_um", L.tiling.outer_width);
    }
    if (!j.contains("electrodes") || !j["electrodes"].is_array() || j["electrodes"].empty())
        throw InputError("layout.electrodes: a layout needs at least one electrode");
    ImportReport rep;
    std::set<std::string> names;
    for (std::size_t i = 0; i < j["electrodes"].size(); ++i) {
        const auto& e = j["electrodes"][i];
        const std::string where = "layout.electrodes[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("name") || !e["name"].is_string())
            throw InputError(where + ".name: expected a string");
        PolygonElectrode pe;
        pe.name = e["name"];
        if (pe.name.empty()) throw InputError(where + ".name: must not be empty");
        if (!names.insert(pe.name).second) throw InputError(where + ": duplicate electrode name '" + pe.name + "'");
        pe.kind = electrode_kind_from_string(e.value("kind", std::string("dc")));
        if (!e.contains("vertices") || !e["vertices"].is_array())
            throw InputError(where + ".vertices: expected an array of [x, z] pairs");
        for (const auto& q : e["vertices"]) {
            if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
                throw InputError(where + ".vertices: each entry must be [x, z]");
            pe.vertices.push_back({q[0].get<double>(), q[1].get<double>()});
            if (!std::isfinite(pe.vertices.back().x) || !std::isfinite(pe.vertices.back().z))
                throw InputError(where + ".vertices: coordinates must be finite");
        }
        if (pe.vertices.size() < 3) throw InputError(where + " ('" + pe.name + "'): a polygon needs >= 3 vertices");
        if (!polygon::is_simple(pe.vertices))
            throw InputError(where + " ('" + pe.name + "'): polygon is not simple");
        if (polygon::signed_area(pe.vertices) < 0) {
            if (opt.strict)
                throw InputError(where + " ('" + pe.name + "'): clockwise polygon (strict mode)");
            std::reverse(pe.vertices.begin(), pe.vertices.end());
            rep.warnings.push_back("electrode '" + pe.name + "' was clockwise and has been reoriented");
        }
        L.electrodes.push_back(std::move(pe));
    }
    if (opt.check_overlap) validate_layout(L, true);
    if (report) *report = rep;
    return L;
}

inline void save_layout(const TrapLayout& L, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write '" + path + "'");
    os << layout_to_json(L).dump(1) << '\n';
}

inline TrapLayout load_layout(const std::string& path, const ImportOptions& opt = {}, ImportReport* report = nullptr) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read '" + path + "'");
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("'" + path + "': " + e.what());
    }
    return layout_from_json(j, opt, report);
}

struct SvgOptions {
    double margin_um = 40.0;
    std::vector<std::vector<PlanePoint>> paths;  // optional overlays in (x, z), e.g. rf minimum paths
};

/// z is drawn horizontally, x vertically (upwards); 1 user unit = 1 µm.
inline void write_layout_svg(std::ostream& os, const TrapLayout& L, const SvgOptions& opt = {}) {
    double x0 = INFINITY, x1 = -INFINITY, z0 = INFINITY, z1 = -INFINITY;
    for (const auto& e : L.electrodes)
        for (const auto& q : e.vertices) {
            x0 = std::min(x0, q.x);
            x1 = std::max(x1, q.x);
            z0 = std::min(z0, q.z);
            z1 = std::max(z1, q.z);
        }
    if (L.electrodes.empty()) x0 = x1 = z0 = z1 = 0;
    const double m = opt.margin_um, legend_h = 60.0;
    const double W = (z1 - z0) + 2 * m, H = (x1 - x0) + 2 * m + legend_h;
    auto X = [&](double z) { return z - z0 + m; };
    auto Y = [&](double x) { return x1 - x + m; };
    auto fill = [](ElectrodeKind k) {
        switch (k) {
            case ElectrodeKind::rf: return "#d62828";
            case ElectrodeKind::dc: return "#f1f1f1";
            case ElectrodeKind::ground: return "#9e9e9e";
        }
        return "#000000";
    };
    const auto prec = os.precision(10);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (const auto& e : L.electrodes) {
        os << "<polygon data-name=\"" << e.name << "\" fill=\"" << fill(e.kind)
           << "\" stroke=\"#555\" stroke-width=\"0.5\" points=\"";
        for (const auto& q : e.vertices) os << X(q.z) << ',' << Y(q.x) << ' ';
        os << "\"/>\n";
    }
    for (const auto& pth : opt.paths) {
        os << "<polyline fill=\"none\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1\" points=\"";
        for (const auto& q : pth) os << X(q.z) << ',' << Y(q.x) << ' ';
        os << "\"/>\n";
    }
    const double ly = (x1 - x0) + 2 * m + 20;
    os << "<g font-family=\"sans-serif\" font-size=\"16\">\n";
    os << "<rect x=\"" << m << "\" y=\"" << ly << "\" width=\"20\" height=\"14\" fill=\"" << fill(ElectrodeKind::rf)
       << "\"/><text x=\"" << m + 26 << "\" y=\"" << ly + 12 << "\">rf</text>\n";
    os << "<rect x=\"" << m + 80 << "\" y=\"" << ly << "\" width=\"20\" height=\"14\" fill=\"" << fill(ElectrodeKind::dc)
       << "\" stroke=\"#555\"/><text x=\"" << m + 106 << "\" y=\"" << ly + 12 << "\">dc</text>\n";
    os << "<text x=\"" << m + 160 << "\" y=\"" << ly + 12 << "\">z horizontal, x vertical, 1 unit = 1 um</text>\n";
    os << "</g>\n</svg>\n";
    os.precision(prec);
}

}  // namespace surftrap
