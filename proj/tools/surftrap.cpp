// surftrap: build, analyse and control a surface trap with curved rf rails.
//
// Exit codes: 0 success, 1 input error, 2 infeasible or unsolvable request.

#include "run_config.hpp"

#include "surftrap/dc_control.hpp"
#include "surftrap/dynamics.hpp"
#include "surftrap/optimizer.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

#ifndef SURFTRAP_VERSION
#define SURFTRAP_VERSION "dev"
#endif

using namespace surftrap;
using namespace surftrap::cli;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool strict = false;
};

struct Context {
    Globals g;
    RunConfig cfg;
    std::string command;

    fs::path out(const std::string& name) const { return fs::path(g.out_dir) / name; }

    /// Header carried by every emitted data file.
    std::vector<std::string> header(bool with_seed = false) const {
        std::vector<std::string> h;
        h.push_back(std::string("surftrap ") + SURFTRAP_VERSION + " " + command);
        h.push_back("config_hash: " + cfg.hash);
        if (with_seed) h.push_back("seed: " + std::to_string(g.seed));
        h.push_back("units: lengths um, potentials and voltages V, energies meV, frequencies MHz (w/2pi), "
                    "times s, fields V/m, unless a column name says otherwise");
        for (const auto& a : assumptions()) h.push_back("assumption: " + a);
        return h;
    }

    std::vector<std::string> assumptions() const {
        std::ostringstream a, b, c, d;
        const auto& p = cfg.params;
        a << "rails modelled over |z| <= " << p.extent_z << " um (extent_z_um), terminated by straight cuts";
        b << "dc tiling: " << cfg.tiling.segment_length << " um segments over " << cfg.tiling.segmented_fraction
          << " of each gap width, one compensation rail per gap (C1-C4), outer electrodes DCOR/DCOL "
          << cfg.tiling.outer_width << " um wide; every third segment of an interaction zone shares a channel, "
          << "transition-zone segments are independent";
        c << "rf pickup in phase with the drive; ";
        if (cfg.drive.rf_pickup.empty()) c << "no pickup";
        for (const auto& [n, v] : cfg.drive.rf_pickup) c << n << " = " << v << " V; ";
        d << "transition: " << cfg.transition_label << "; gapless-plane electrostatics";
        return {a.str(), b.str(), c.str(), d.str()};
    }

    void write(const std::string& name, const std::string& text) const {
        fs::create_directories(g.out_dir);
        std::ofstream os(out(name), std::ios::binary);
        if (!os) throw InputError("cannot write '" + out(name).string() + "'");
        os << text;
        std::cout << "wrote " << out(name).string() << '\n';
    }
};

std::string join_header(const std::vector<std::string>& h) {
    std::ostringstream os;
    for (const auto& l : h) os << "# " << l << '\n';
    return os.str();
}

TrapLayout make_layout(const Context& c, bool with_dc = true) {
    if (c.cfg.layout_file) {
        ImportOptions io;
        io.strict = c.g.strict;
        ImportReport rep;
        TrapLayout L = load_layout(*c.cfg.layout_file, io, &rep);
        for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
        return L;
    }
    BuildOptions bo;
    bo.with_dc = with_dc;
    return build_layout(c.cfg.params, c.cfg.transition, c.cfg.tiling, bo);
}

TrapModel make_model(const Context& c, bool with_dc = true) {
    return TrapModel(make_layout(c, with_dc), c.cfg.drive, c.cfg.species);
}

SearchWindow window_from(const Node& n, const SearchWindow& dflt) {
    n.allow({"x_min_um", "x_max_um", "y_min_um", "y_max_um", "grid_um"});
    SearchWindow w;
    w.x_min = n.number("x_min_um", dflt.x_min);
    w.x_max = n.number("x_max_um", dflt.x_max);
    w.y_min = n.number("y_min_um", dflt.y_min);
    w.y_max = n.number("y_max_um", dflt.y_max);
    w.grid_um = n.number("grid_um", dflt.grid_um);
    w.validate();
    return w;
}

const SearchWindow central_window_default{-320, 320, 20, 300, 2};

RadialMinimum centre_minimum(const TrapModel& m, unsigned threads) {
    return find_minima(m, 0.0, central_window_default, {}, threads).inner(true);
}

/// rf minimum path of the x > 0 inner well covering [z_a, z_b], traced
/// outwards from the centre in both directions.
RfMinimumPath path_covering(const TrapModel& m, double z_a, double z_b, double dz, unsigned threads,
                            bool full = true) {
    const auto c = centre_minimum(m, threads);
    TraceOptions to;
    to.full_frames = full;
    const double lo = std::min({z_a, z_b, 0.0}), hi = std::max({z_a, z_b, 0.0});
    RfMinimumPath out;
    out.full_frames = full;
    if (lo < 0) {
        auto neg = trace_path(m, 0.0, lo, dz, {c.x, c.y}, to);
        out.samples.assign(neg.samples.rbegin(), neg.samples.rend());
    }
    if (hi > 0 || out.samples.empty()) {
        auto pos = trace_path(m, 0.0, std::max(hi, dz), dz, {c.x, c.y}, to);
        out.samples.insert(out.samples.end(), pos.samples.begin() + (out.samples.empty() ? 0 : 1), pos.samples.end());
    }
    return out;
}

std::string num(double v, int prec = 6) {
    std::ostringstream os;
    os << std::setprecision(prec) << v;
    return os.str();
}

// --- commands --------------------------------------------------------------

int cmd_build(Context& c) {
    const TrapLayout L = make_layout(c);
    validate_layout(L, true);
    std::ostringstream svg;
    write_layout_svg(svg, L);
    c.write("layout.json", layout_to_json(L).dump(1) + "\n");
    c.write("layout.svg", svg.str());
    std::ostringstream s;
    s << join_header(c.header());
    std::size_t n_rf = 0, n_dc = 0;
    for (const auto& e : L.electrodes) (e.kind == ElectrodeKind::rf ? n_rf : n_dc)++;
    const WidthReport w = measure_widths(L.params, rail_profiles(L.params, L.transition));
    s << "rf_electrodes\t" << n_rf << "\ndc_electrodes\t" << n_dc << "\nmeander_channels\t"
      << meander_wiring(L).size() << "\nmin_rf_width_um\t" << num(w.min_rf_width) << "\nnarrowest_rf\t"
      << w.narrowest_rf << "\nmin_transition_gap_um\t" << num(w.min_gap_in_transition) << '\n';
    c.write("build.tsv", s.str());
    return 0;
}

// Heat map of the cross-section with minima marked.
std::string scan_svg(const CrossSectionGrid& g, const std::vector<ClassifiedMinimum>& minima) {
    const auto& w = g.window;
    double lo = INFINITY, hi = -INFINITY;
    for (double v : g.phi) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    // Logarithmic colour scale so that the shallow trapping region is visible.
    const auto shade = [&](double v) {
        const double t = hi > lo ? std::log1p(99.0 * (v - lo) / (hi - lo)) / std::log(100.0) : 0.0;
        const int r = static_cast<int>(255 * t), b = static_cast<int>(255 * (1 - t));
        std::ostringstream os;
        os << "rgb(" << r << ",0," << b << ")";
        return os.str();
    };
    std::ostringstream os;
    const double W = w.x_max - w.x_min, H = w.y_max - w.y_min, s = w.grid_um;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << w.x_min - s / 2 << ' ' << -w.y_max - s / 2 << ' '
       << W + s << ' ' << H + s << "\">\n<title>pseudo-potential at z = " << g.z << " um</title>\n";
    for (int j = 0; j < w.ny(); ++j)
        for (int i = 0; i < w.nx(); ++i)
            os << "<rect x=\"" << w.x(i) - s / 2 << "\" y=\"" << -w.y(j) - s / 2 << "\" width=\"" << s
               << "\" height=\"" << s << "\" fill=\"" << shade(g.at(i, j)) << "\"/>\n";
    for (const auto& m : minima)
        os << "<circle cx=\"" << m.minimum.x << "\" cy=\"" << -m.minimum.y << "\" r=\"" << 2 * s
           << "\" fill=\"none\" stroke=\"white\"/>\n";
    os << "</svg>\n";
    return os.str();
}

int cmd_scan(Context& c) {
    const Node n = c.cfg.block("scan");
    n.allow({"z_um", "window", "svg"});
    const double z = n.number("z_um", 0.0);
    const SearchWindow w = window_from(n.object("window"), central_window_default);
    const TrapModel m = make_model(c, false);
    const CrossSectionGrid g = scan_cross_section(m, z, w, c.g.threads);
    std::vector<ClassifiedMinimum> minima;
    std::string note;
    try {
        minima = find_minima(m, z, w, {}, c.g.threads).minima;
    } catch (const NoMinimumError& e) {
        note = e.what();
    }
    std::ostringstream os;
    auto h = c.header();
    h.push_back("cross-section at z = " + num(z) + " um");
    for (const auto& mm : minima)
        h.push_back(std::string("minimum (") + to_string(mm.kind) + "): x = " + num(mm.minimum.x, 8) +
                    " um, y = " + num(mm.minimum.y, 8) + " um, phi = " + num(mm.minimum.phi_mev(), 8) + " meV");
    if (!note.empty()) h.push_back("minima: none (" + note + ")");
    os << join_header(h) << "# x_um\ty_um\tphi_pp_meV\n" << std::setprecision(9);
    for (int j = 0; j < w.ny(); ++j)
        for (int i = 0; i < w.nx(); ++i) os << w.x(i) << '\t' << w.y(j) << '\t' << to_mev(g.at(i, j)) << '\n';
    c.write("scan.tsv", os.str());
    if (n.boolean("svg", true)) c.write("scan.svg", scan_svg(g, minima));
    return 0;
}

int cmd_trace(Context& c) {
    const Node n = c.cfg.block("trace");
    n.allow({"z_start_um", "z_end_um", "dz_um", "full_frames"});
    const double z0 = n.number("z_start_um", 0.0), z1 = n.number("z_end_um", 800.0), dz = n.number("dz_um", 1.0);
    const TrapModel m = make_model(c, false);
    RfMinimumPath p = path_covering(m, z0, z1, dz, c.g.threads, n.boolean("full_frames", true));
    // Keep the requested range only, in the requested direction.
    std::vector<PathSample> kept;
    for (const auto& s : p.samples)
        if (s.z >= std::min(z0, z1) - 1e-9 && s.z <= std::max(z0, z1) + 1e-9) kept.push_back(s);
    if (z1 < z0) std::reverse(kept.begin(), kept.end());
    p.samples = kept;
    const PathMetrics pm = path_metrics(p);
    auto h = c.header();
    h.push_back("rf minimum path of the x > 0 inner well from z = " + num(z0) + " to " + num(z1) + " um");
    h.push_back("barrier_meV = " + num(pm.barrier_mev(), 8) + " at z = " + num(pm.z_at_max) + " um");
    h.push_back("max_wu_mhz = " + num(rad_s_to_mhz(pm.max_wu), 8) + ", max_wv_mhz = " + num(rad_s_to_mhz(pm.max_wv), 8));
    std::ostringstream os;
    write_path_columns(os, p, h);
    c.write("trace.tsv", os.str());
    return 0;
}

NelderMeadConfig nm_from(const Node& n, NelderMeadConfig nm) {
    nm.max_evals = n.integer("max_evals", nm.max_evals);
    nm.max_iter = n.integer("max_iter", nm.max_iter);
    nm.x_tol = n.number("x_tol", nm.x_tol);
    nm.f_tol = n.number("f_tol", nm.f_tol);
    nm.validate();
    return nm;
}

int cmd_optimize_linear(Context& c) {
    const Node n = c.cfg.block("optimize_linear");
    n.allow({"restarts", "max_evals", "max_iter", "x_tol", "f_tol", "starts_um", "x0_goal_um", "y0_goal_um",
             "b_min_um", "accept_cost"});
    LinearZoneProblem pb;
    pb.drive = c.cfg.drive;
    pb.species = c.cfg.species;
    pb.gamma = c.cfg.params.gamma;
    pb.delta = c.cfg.params.delta;
    pb.x0_goal = n.number("x0_goal_um", pb.x0_goal);
    pb.y0_goal = n.number("y0_goal_um", pb.y0_goal);
    pb.b_min = n.number("b_min_um", pb.b_min);
    pb.accept_cost = n.number("accept_cost", pb.accept_cost);
    NelderMeadConfig base;
    base.max_evals = 300;
    base.x_tol = 0.01;
    base.f_tol = 1e-6;
    const NelderMeadConfig nm = nm_from(n, base);
    std::vector<Eigen::Vector4d> starts;
    if (const json* s = n.raw("starts_um")) {
        if (!s->is_array()) throw InputError("optimize_linear.starts_um: expected [[a, b, c, d], ...]");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const auto& v = (*s)[i];
            if (!v.is_array() || v.size() != 4)
                throw InputError("optimize_linear.starts_um[" + std::to_string(i) + "]: expected four widths");
            starts.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>(), v[3].get<double>());
        }
    }
    const int restarts = n.integer("restarts", 4);
    const auto res = optimize_linear_zone(pb, nm, restarts, c.g.seed, starts, c.g.threads);
    json j = linear_zone_manifest(pb, res, c.g.seed);
    j["header"] = c.header(true);
    c.write("optimize_linear.json", j.dump(1) + "\n");
    return 0;
}

TransitionZoneProblem zone_problem(const Context& c, const Node& n) {
    TransitionZoneProblem pb;
    pb.params = c.cfg.params;
    pb.drive = c.cfg.drive;
    pb.species = c.cfg.species;
    pb.w1 = n.number("w1", pb.w1);
    pb.w2 = n.number("w2", pb.w2);
    if (auto zf = n.maybe_number("z_final_um")) pb.z_F = *zf;
    pb.n_eval = n.integer("n_eval", pb.n_eval);
    pb.min_rf_width = n.number("min_rf_width_um", pb.min_rf_width);
    pb.min_gap = n.number("min_gap_um", pb.min_gap);
    pb.n_internal = n.integer("n_internal", pb.n_internal);
    pb.validate();
    return pb;
}

int cmd_optimize_zone(Context& c) {
    const Node n = c.cfg.block("optimize_zone");
    n.allow({"restarts", "max_evals", "max_iter", "x_tol", "f_tol", "w1", "w2", "z_final_um", "n_eval",
             "min_rf_width_um", "min_gap_um", "n_internal"});
    const TransitionZoneProblem pb = zone_problem(c, n);
    const NelderMeadConfig nm = nm_from(n, designs::transition_search_config());
    const auto res = optimize_transition_zone(pb, nm, n.integer("restarts", designs::transition_restarts), c.g.seed,
                                              c.g.threads);
    json j = transition_zone_manifest(pb, res, c.g.seed);
    j["header"] = c.header(true);
    c.write("optimize_zone.json", j.dump(1) + "\n");
    c.write("optimized_layout.json", layout_to_json(build_layout(pb.params, res.boundary, c.cfg.tiling)).dump(1) + "\n");
    return 0;
}

WiringMap wiring_from(const Node& n, const TrapLayout& L) {
    const auto kind = n.string("wiring", "meander");
    if (kind == "meander") return meander_wiring(L);
    if (kind == "independent") return independent_wiring(L);
    throw InputError(n.path() + ".wiring: expected \"meander\" or \"independent\"");
}

/// Well target from the dc block; the position defaults to the inner rf
/// minimum at z_um.
WellTarget target_from(const Node& n, const TrapModel& m, unsigned threads) {
    WellTarget t;
    if (n.has("position_um")) {
        if (n.has("z_um")) throw InputError(n.path() + ": give position_um or z_um, not both");
        const auto p = n.vec3("position_um", {});
        t.position = {p.x(), p.y(), p.z()};
    } else {
        const double z = n.number("z_um", 0.0);
        const auto cs = find_minima(m, z, central_window_default, {}, threads);
        const auto& in = cs.inner(true);
        t.position = {in.x, in.y, z};
    }
    if (auto f = n.maybe_number("axial_freq_mhz")) t.axial_freq = mhz_to_rad_s(*f);
    t.stray_field = n.vec3("stray_field_v_per_m", Eigen::Vector3d::Zero());
    t.voltage_bound = n.number("voltage_bound_volts", t.voltage_bound);
    t.include_rf = n.boolean("include_rf", t.include_rf);
    t.tikhonov = n.number("tikhonov", t.tikhonov);
    if (auto rs = n.maybe_number("radial_split_j_per_m2")) t.radial_split = *rs;
    t.radial_split_weight = n.number("radial_split_weight", t.radial_split_weight);
    t.active_channels = n.strings("active_channels");
    t.validate();
    return t;
}

const std::initializer_list<const char*> dc_keys{"wiring",         "position_um",         "z_um",
                                                 "axial_freq_mhz", "stray_field_v_per_m", "voltage_bound_volts",
                                                 "include_rf",     "tikhonov",            "radial_split_j_per_m2",
                                                 "radial_split_weight", "active_channels"};

int cmd_solve_dc(Context& c) {
    const Node n = c.cfg.block("dc");
    n.allow(dc_keys);
    const TrapModel m = make_model(c);
    const WiringMap w = wiring_from(n, m.layout());
    const WellTarget t = target_from(n, m, c.g.threads);
    const WellSolution s = solve_well(m, w, t);
    auto h = c.header();
    h.push_back("target: (" + num(t.position.x, 9) + ", " + num(t.position.y, 9) + ", " + num(t.position.z, 9) + ") um");
    h.push_back("max_abs_voltage_V = " + num(s.max_abs_voltage, 9) + ", channels at the bound: " +
                std::to_string(s.clamped_channels) + ", tikhonov = " + num(s.tikhonov));
    for (Eigen::Index i = 0; i < s.constraint_residual.size(); ++i)
        h.push_back("constraint '" + s.constraint_names[i] + "' residual = " + num(s.constraint_residual(i), 3));
    if (s.modes) {
        h.push_back("secular_mhz = " + num(rad_s_to_mhz(s.modes->secular[0]), 9) + ", " +
                    num(rad_s_to_mhz(s.modes->secular[1]), 9) + ", " + num(rad_s_to_mhz(s.modes->secular[2]), 9));
        h.push_back("axial_freq_mhz = " + num(rad_s_to_mhz(s.axial_freq), 9) +
                    ", conservation residual = " + num(s.modes->conservation_residual(), 3));
    }
    std::ostringstream os;
    os << join_header(h) << "# channel\tvoltage_V\n" << std::setprecision(9);
    for (std::size_t i = 0; i < s.channels.size(); ++i) os << s.channels[i] << '\t' << s.voltages(i) << '\n';
    c.write("solve_dc.tsv", os.str());
    return 0;
}

int cmd_waveform(Context& c) {
    const Node n = c.cfg.block("waveform");
    n.allow({"z_start_um", "z_end_um", "steps", "dwell_s", "filter_cutoff_hz", "track_tolerance_um", "jump_penalty",
             "dz_um"});
    const Node dn = c.cfg.block("dc");
    dn.allow(dc_keys);
    const double z0 = n.number("z_start_um", 0.0), z1 = n.number("z_end_um", 400.0);
    const int steps = n.integer("steps", 15);
    const double dwell = n.number("dwell_s", 800e-6);
    WaveformOptions wo;
    wo.track_tolerance_um = n.number("track_tolerance_um", wo.track_tolerance_um);
    wo.jump_penalty = n.number("jump_penalty", wo.jump_penalty);
    const TrapModel m = make_model(c);
    const WiringMap w = wiring_from(dn, m.layout());
    WellTarget base = target_from(dn, m, c.g.threads);
    if (!base.axial_freq) base.axial_freq = mhz_to_rad_s(1.0);
    const RfMinimumPath path = path_covering(m, z0, z1, n.number("dz_um", 2.0), c.g.threads);
    const Waveform wf = make_waveform(m, w, path, z0, z1, steps, dwell, base, wo);
    auto h = c.header();
    h.push_back("shuttle along the rf minimum path from z = " + num(z0) + " to " + num(z1) + " um in " +
                std::to_string(steps) + " steps, axial " + num(rad_s_to_mhz(*base.axial_freq)) + " MHz");
    std::ostringstream os;
    write_waveform_columns(os, wf, h);
    c.write("waveform.tsv", os.str());
    if (auto fc = n.maybe_number("filter_cutoff_hz")) {
        FilterReport rep;
        const Waveform f = filter_waveform(wf, *fc, &rep);
        h.push_back("first-order RC filter, cutoff " + num(*fc) + " Hz, zero-order hold; worst end-of-step lag " +
                    num(rep.worst_lag, 6) + " V");
        std::ostringstream fs_;
        write_waveform_columns(fs_, f, h);
        c.write("waveform_filtered.tsv", fs_.str());
    }
    return 0;
}

int cmd_micromotion(Context& c) {
    const Node n = c.cfg.block("micromotion");
    n.allow({"z_um", "beta", "rabi_mm", "rabi_carrier", "alpha_um", "lambda_nm", "theta_deg", "max_bracket_um"});
    const auto z = n.numbers("z_um");
    if (z.empty()) throw InputError("micromotion.z_um: at least one axial position is required");
    MicromotionQuery q;
    q.lambda = n.number("lambda_nm", q.lambda * 1e9) * 1e-9;
    q.theta = n.number("theta_deg", q.theta * 180.0 / constants::pi) * constants::pi / 180.0;
    q.validate();
    const auto beta_in = n.numbers("beta"), mm = n.numbers("rabi_mm"), car = n.numbers("rabi_carrier"),
               alpha_in = n.numbers("alpha_um");
    const int modes = int(!beta_in.empty()) + int(!mm.empty() || !car.empty()) + int(!alpha_in.empty());
    if (modes != 1)
        throw InputError("micromotion: give exactly one of beta, rabi_mm/rabi_carrier (inverse) or alpha_um (forward)");
    const TrapModel m = make_model(c, false);
    const double zmin = *std::min_element(z.begin(), z.end()), zmax = *std::max_element(z.begin(), z.end());
    const RfMinimumPath path = path_covering(m, zmin, zmax, 1.0, c.g.threads);
    std::vector<MicromotionRow> rows;
    auto h = c.header();
    h.push_back("probe: lambda = " + num(q.lambda * 1e9) + " nm, angle to the axis = " +
                num(q.theta * 180 / constants::pi) + " deg");
    if (!alpha_in.empty()) {
        if (alpha_in.size() != z.size()) throw InputError("micromotion.alpha_um: one value per z_um entry");
        for (std::size_t i = 0; i < z.size(); ++i) {
            const Point3 on = interpolate_path(path, z[i]);
            rows.push_back({z[i], on.x, on.y, alpha_in[i], micromotion_index(m, on, alpha_in[i], q)});
        }
        h.push_back("forward model: beta from the displacement alpha towards the axis");
    } else {
        std::vector<double> beta = beta_in;
        if (beta.empty()) {
            if (mm.size() != z.size() || car.size() != z.size())
                throw InputError("micromotion.rabi_mm/rabi_carrier: one value per z_um entry");
            for (std::size_t i = 0; i < z.size(); ++i) beta.push_back(bessel_invert(mm[i], car[i]));
            h.push_back("beta from the sideband/carrier Rabi ratio J1(beta)/J0(beta)");
        }
        if (beta.size() != z.size()) throw InputError("micromotion.beta: one value per z_um entry");
        std::vector<std::pair<double, double>> data;
        for (std::size_t i = 0; i < z.size(); ++i) data.emplace_back(z[i], beta[i]);
        DisplacementFitOptions fo;
        fo.probe = q;
        fo.max_bracket_um = n.number("max_bracket_um", fo.max_bracket_um);
        const auto fit = fit_displacement(data, m, path, fo);
        for (const auto& f : fit) {
            if (f.widened) {
                if (c.g.strict) throw InfeasibleError("z = " + num(f.z) + " um: " + f.warning + " (strict mode)");
                std::cerr << "warning: z = " << f.z << " um: " << f.warning << '\n';
                h.push_back("warning: z = " + num(f.z) + " um: " + f.warning);
            }
            const Point3 on = interpolate_path(path, f.z);
            rows.push_back({f.z, on.x, on.y, f.alpha_um, f.beta});
        }
        h.push_back("inverse model: displacement alpha (towards the axis, negative) reproducing each beta");
    }
    std::ostringstream os;
    write_micromotion_columns(os, rows, h);
    c.write("micromotion.tsv", os.str());
    return 0;
}

int cmd_report(Context& c) {
    const Node n = c.cfg.block("report");
    n.allow({"dz_um", "z_final_um", "axial_freq_mhz", "kappa", "profile_step_um"});
    const TrapModel m = make_model(c);
    const auto& p = m.layout().params;
    const auto cs = find_minima(m, 0.0, central_window_default, {}, c.g.threads);
    const auto& in = cs.inner(true);
    const double xw = 0.5 * p.c + 2 * p.b + p.a + p.d + 100.0;
    const auto depth = escape_depth(m, in, SearchWindow{-xw, xw, 10, 700, 2}, c.g.threads);
    std::optional<WellBarrier> central;
    try {
        central = inter_well_barrier(m, cs.inner(false), in, SearchWindow{-60, 60, 40, 160, 1}, c.g.threads);
    } catch (const InfeasibleError&) {
    }
    const double zf = n.number("z_final_um", p.gamma + 500.0), dz = n.number("dz_um", 1.0);
    const RfMinimumPath path = trace_path(m, 0.0, zf, dz, {in.x, in.y});
    const PathMetrics pm = path_metrics(path);
    const double f_ax = n.number("axial_freq_mhz", 1.0), kappa = n.number("kappa", 0.5);
    const double s0 = in.x - cs.inner(false).x;
    const double wex = coupling_rate(same_species_coupling(m.species(), mhz_to_rad_s(f_ax), s0 * um_to_m, kappa));

    std::ostringstream os;
    os << join_header(c.header()) << std::setprecision(8);
    os << "# quantity\tvalue\tunit\n";
    os << "inner_well_separation_s0\t" << s0 << "\tum\n";
    os << "ion_height_y0\t" << in.y << "\tum\n";
    os << "pseudo_potential_depth\t" << depth.depth_mev() << "\tmeV\n";
    os << "escape_saddle\t(" << depth.saddle.x << ", " << depth.saddle.y << ")\tum\n";
    if (central) os << "central_inter_well_barrier\t" << central->barrier_mev() << "\tmeV\n";
    os << "transition_barrier\t" << pm.barrier_mev() << "\tmeV\n";
    os << "transition_barrier_position\t" << pm.z_at_max << "\tum\n";
    os << "tangential_gradient_integral\t" << to_mev(pm.tangential_integral) << "\tmeV\n";
    os << "max_radial_secular_u\t" << rad_s_to_mhz(pm.max_wu) << "\tMHz\n";
    os << "max_radial_secular_v\t" << rad_s_to_mhz(pm.max_wv) << "\tMHz\n";
    os << "centre_radial_secular_u\t" << rad_s_to_mhz(path.samples.front().wu) << "\tMHz\n";
    os << "centre_radial_secular_v\t" << rad_s_to_mhz(path.samples.front().wv) << "\tMHz\n";
    os << "coupling_rate_at_" << f_ax << "_MHz_kappa_" << kappa << "\t" << wex / two_pi / 1e3 << "\tkHz (w/2pi)\n";
    try {
        WellTarget t;
        t.position = {in.x, in.y, 0.0};
        t.axial_freq = mhz_to_rad_s(f_ax);
        const auto s = solve_well(m, meander_wiring(m.layout()), t);
        os << "dc_axial_solve_max_abs_voltage\t" << s.max_abs_voltage << "\tV\n";
        os << "dc_axial_solve_frequency\t" << rad_s_to_mhz(s.axial_freq) << "\tMHz\n";
        os << "dc_axial_solve_channels_at_bound\t" << s.clamped_channels << "\t-\n";
    } catch (const Error& e) {
        os << "dc_axial_solve\tunavailable: " << e.what() << "\t-\n";
    }
    // Total confinement profile along the path.
    const double step = n.number("profile_step_um", 10.0);
    os << "#\n# total confinement profile along the rf minimum path\n# z_um\tx0_um\ty0_um\tsum_w2_rad2_s2\tphi_pp_meV\n";
    double next = path.samples.front().z;
    for (const auto& s : path.samples)
        if (s.z >= next - 1e-9) {
            os << s.z << '\t' << s.x0 << '\t' << s.y0 << '\t' << s.w2 << '\t' << to_mev(s.phi) << '\n';
            next += step;
        }
    c.write("report.tsv", os.str());
    return 0;
}

int cmd_export(Context& c) {
    const Node n = c.cfg.block("export");
    n.allow({"path_z_end_um", "dz_um"});
    const TrapLayout L = make_layout(c);
    SvgOptions so;
    if (auto ze = n.maybe_number("path_z_end_um")) {
        const TrapModel m(L, c.cfg.drive, c.cfg.species);
        const auto path = path_covering(m, -*ze, *ze, n.number("dz_um", 2.0), c.g.threads, false);
        std::vector<PlanePoint> right, left;
        for (const auto& s : path.samples) {
            right.push_back({s.x0, s.z});
            left.push_back({-s.x0, s.z});
        }
        so.paths = {right, left};
    }
    std::ostringstream svg;
    write_layout_svg(svg, L, so);
    c.write("export_layout.json", layout_to_json(L).dump(1) + "\n");
    c.write("export_layout.svg", svg.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"surftrap: surface-trap design, analysis and dc control"};
    app.set_version_flag("--version", std::string(SURFTRAP_VERSION));
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "run configuration (JSON)");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "random seed for optimizer restarts");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_flag("--strict", g.strict, "treat import and fit warnings as errors");

    const std::vector<std::pair<std::string, std::function<int(Context&)>>> cmds{
        {"build", cmd_build},           {"scan", cmd_scan},
        {"trace", cmd_trace},           {"optimize-linear", cmd_optimize_linear},
        {"optimize-zone", cmd_optimize_zone}, {"report", cmd_report},
        {"solve-dc", cmd_solve_dc},     {"waveform", cmd_waveform},
        {"micromotion", cmd_micromotion}, {"export", cmd_export}};
    const std::map<std::string, std::string> help{
        {"build", "build the electrode layout; write layout JSON, SVG and widths"},
        {"scan", "pseudo-potential cross-section at one axial position"},
        {"trace", "trace the rf minimum path and its secular frequencies"},
        {"optimize-linear", "multi-start search of the rail widths (a, b, c, d)"},
        {"optimize-zone", "optimize the spline boundary of the transition zone"},
        {"report", "figures of merit of one design"},
        {"solve-dc", "solve dc voltages for a well or stray-field compensation"},
        {"waveform", "quasi-static shuttling waveform along the rf minimum path"},
        {"micromotion", "micromotion index from displacement, or displacement from measured index"},
        {"export", "layout JSON/SVG with optional rf minimum path overlay"}};
    for (const auto& [name, fn] : cmds) app.add_subcommand(name, help.at(name))->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        Context c{g, load_config(g.config_path), {}};
        for (const auto& [name, fn] : cmds)
            if (app.got_subcommand(name)) {
                c.command = name;
                return fn(c);
            }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "not solvable: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
