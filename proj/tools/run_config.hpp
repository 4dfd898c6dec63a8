#pragma once

// Run configuration for the command-line tool. JSON key tree with the unit in
// every dimensional key name; converted to the library's units once, here.

#include "surftrap/designs.hpp"
#include "surftrap/layout_io.hpp"
#include "surftrap/trap_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>

namespace surftrap::cli {

using nlohmann::json;

/// Read-only view of one object in the config with its dotted path, so that
/// every error names the offending field.
class Node {
public:
    Node(const json* j, std::string path) : j_(j), path_(std::move(path)) {
        if (j_ && !j_->is_object()) throw InputError(where() + ": expected an object");
    }

    const std::string& path() const { return path_; }
    bool present() const { return j_ != nullptr; }
    bool has(const std::string& k) const { return j_ && j_->contains(k); }

    void allow(std::initializer_list<const char*> keys) const {
        if (!j_) return;
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, v] : j_->items())
            if (!ok.count(k)) throw InputError(child(k) + ": unknown key");
    }

    Node object(const std::string& k) const { return {has(k) ? &j_->at(k) : nullptr, child(k)}; }
    const json* raw(const std::string& k) const { return has(k) ? &j_->at(k) : nullptr; }

    double number(const std::string& k, double fallback) const {
        if (!has(k)) return fallback;
        const auto& v = j_->at(k);
        if (!v.is_number()) throw InputError(child(k) + ": expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw InputError(child(k) + ": must be finite");
        return d;
    }
    std::optional<double> maybe_number(const std::string& k) const {
        if (!has(k)) return std::nullopt;
        return number(k, 0.0);
    }
    int integer(const std::string& k, int fallback) const {
        if (!has(k)) return fallback;
        const auto& v = j_->at(k);
        if (!v.is_number_integer()) throw InputError(child(k) + ": expected an integer");
        return v.get<int>();
    }
    bool boolean(const std::string& k, bool fallback) const {
        if (!has(k)) return fallback;
        const auto& v = j_->at(k);
        if (!v.is_boolean()) throw InputError(child(k) + ": expected true or false");
        return v.get<bool>();
    }
    std::string string(const std::string& k, const std::string& fallback) const {
        if (!has(k)) return fallback;
        const auto& v = j_->at(k);
        if (!v.is_string()) throw InputError(child(k) + ": expected a string");
        return v.get<std::string>();
    }
    std::vector<double> numbers(const std::string& k) const {
        std::vector<double> out;
        if (!has(k)) return out;
        const auto& v = j_->at(k);
        if (!v.is_array()) throw InputError(child(k) + ": expected an array of numbers");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw InputError(child(k) + "[" + std::to_string(i) + "]: expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }
    std::vector<std::string> strings(const std::string& k) const {
        std::vector<std::string> out;
        if (!has(k)) return out;
        const auto& v = j_->at(k);
        if (!v.is_array()) throw InputError(child(k) + ": expected an array of strings");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) throw InputError(child(k) + "[" + std::to_string(i) + "]: expected a string");
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }
    Eigen::Vector3d vec3(const std::string& k, const Eigen::Vector3d& fallback) const {
        if (!has(k)) return fallback;
        const auto v = numbers(k);
        if (v.size() != 3) throw InputError(child(k) + ": expected three numbers");
        return {v[0], v[1], v[2]};
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }
    std::string child(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    const json* j_;
    std::string path_;
};

/// 64-bit FNV-1a of the canonical (key-sorted) dump; stable across platforms.
inline std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

struct RunConfig {
    json raw = json::object();
    std::string hash;
    LayoutParams params;
    Transition transition = LinearTransition{};
    std::string transition_label = "linear";
    DcTiling tiling;
    std::optional<std::string> layout_file;
    Drive drive = Drive::published();
    IonSpecies species = IonSpecies::calcium40();

    Node root() const { return {&raw, ""}; }
    Node block(const std::string& name) const { return root().object(name); }
};

inline IonSpecies species_from(const Node& n) {
    n.allow({"name", "mass_u", "charge_e"});
    if (!n.present()) return IonSpecies::calcium40();
    if (n.has("name")) {
        if (n.has("mass_u") || n.has("charge_e")) throw InputError(n.path() + ": give either name or mass_u/charge_e");
        const auto s = n.string("name", "");
        if (s == "40Ca+") return IonSpecies::calcium40();
        throw InputError(n.path() + ".name: unknown species '" + s + "' (known: 40Ca+)");
    }
    IonSpecies sp;
    sp.mass = n.number("mass_u", 0.0) * constants::atomic_mass_unit;
    sp.charge = n.number("charge_e", 1.0) * constants::elementary_charge;
    sp.label = "custom";
    sp.validate();
    return sp;
}

inline RunConfig parse_config(const json& j) {
    RunConfig c;
    c.raw = j.is_null() ? json::object() : j;
    c.hash = config_hash(c.raw);
    const Node root = c.root();
    root.allow({"layout", "drive", "species", "scan", "trace", "optimize_linear", "optimize_zone", "report", "dc",
                "waveform", "micromotion", "export"});

    const Node lay = root.object("layout");
    lay.allow({"params", "transition", "tiling", "file"});
    if (lay.has("file")) {
        if (lay.has("params") || lay.has("transition") || lay.has("tiling"))
            throw InputError("layout.file: a layout file replaces params/transition/tiling");
        c.layout_file = lay.string("file", "");
    }
    if (const json* p = lay.raw("params")) c.params = params_from_json(*p, "layout.params");
    const Node tn = lay.object("transition");
    if (tn.present() && tn.string("type", "") == "optimized") {
        tn.allow({"type"});
        c.transition = designs::optimized_transition_for(c.params);
        c.transition_label = "optimized (stored)";
    } else if (const json* t = lay.raw("transition")) {
        c.transition = transition_from_json(*t, c.params, "layout.transition");
        c.transition_label = is_spline(c.transition) ? "spline" : "linear";
    }
    const Node ti = lay.object("tiling");
    ti.allow({"segment_length_um", "segmented_fraction", "outer_width_um"});
    c.tiling.segment_length = ti.number("segment_length_um", c.tiling.segment_length);
    c.tiling.segmented_fraction = ti.number("segmented_fraction", c.tiling.segmented_fraction);
    c.tiling.outer_width = ti.number("outer_width_um", c.tiling.outer_width);

    const Node dr = root.object("drive");
    dr.allow({"v_rf_volts", "f_rf_mhz", "pickup_volts"});
    c.drive.v_rf = dr.number("v_rf_volts", c.drive.v_rf);
    c.drive.omega_rf = mhz_to_rad_s(dr.number("f_rf_mhz", rad_s_to_mhz(c.drive.omega_rf)));
    if (const json* pk = dr.raw("pickup_volts")) {
        if (!pk->is_object()) throw InputError("drive.pickup_volts: expected an object of electrode -> volts");
        for (const auto& [name, v] : pk->items()) {
            if (!v.is_number()) throw InputError("drive.pickup_volts." + name + ": expected a number");
            c.drive.rf_pickup[name] = v.get<double>();
        }
    }
    c.drive.validate();
    c.species = species_from(root.object("species"));
    return c;
}

inline RunConfig load_config(const std::string& path) {
    if (path.empty()) return parse_config(json::object());
    std::ifstream is(path);
    if (!is) throw InputError("cannot read config '" + path + "'");
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw InputError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace surftrap::cli
