#pragma once

// DC voltages under the single-layer "meander" wiring: each channel drives a
// group of hard-wired electrodes. Wells are solved as an equality-constrained
// minimum-norm problem; waveforms chain these solves along a traced path.

#include "surftrap/minpath.hpp"
#include "surftrap/trap_model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace surftrap {

struct WiringGroup {
    std::string name;
    std::vector<std::string> electrodes;
};

struct WiringMap {
    std::vector<WiringGroup> groups;  // channel order

    std::size_t size() const { return groups.size(); }

    std::vector<std::string> channel_names() const {
        std::vector<std::string> n;
        for (const auto& g : groups) n.push_back(g.name);
        return n;
    }

    std::size_t channel(const std::string& name) const {
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i].name == name) return i;
        throw InputError("unknown dc channel '" + name + "'");
    }

    /// Every dc electrode of the layout in exactly one group, and nothing else.
    void validate(const TrapLayout& layout) const {
        std::set<std::string> seen, names;
        for (const auto& g : groups) {
            if (g.electrodes.empty()) throw InputError("dc channel '" + g.name + "' has no electrodes");
            if (!names.insert(g.name).second) throw InputError("duplicate dc channel '" + g.name + "'");
            for (const auto& e : g.electrodes) {
                const auto idx = layout.find(e);
                if (!idx) throw InputError("dc channel '" + g.name + "' names unknown electrode '" + e + "'");
                if (layout.electrodes[*idx].kind != ElectrodeKind::dc)
                    throw InputError("dc channel '" + g.name + "' names non-dc electrode '" + e + "'");
                if (!seen.insert(e).second) throw InputError("electrode '" + e + "' is wired to two channels");
            }
        }
        for (const auto& e : layout.electrodes)
            if (e.kind == ElectrodeKind::dc && !seen.count(e.name))
                throw InputError("dc electrode '" + e.name + "' is not wired to any channel");
    }

    VoltageMap expand(const Eigen::VectorXd& v) const {
        if (v.size() != static_cast<Eigen::Index>(groups.size())) throw InputError("voltage vector size mismatch");
        VoltageMap out;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (const auto& e : groups[g].electrodes) out[e] = v(static_cast<Eigen::Index>(g));
        return out;
    }
};

/// Default wiring: segments in interaction zones tied in triplets (every third
/// electrode of a rail per zone), transition-zone segments independent,
/// compensation rails and outer electrodes on their own channels.
inline WiringMap meander_wiring(const TrapLayout& layout) {
    WiringMap w;
    std::map<std::string, std::size_t> by_name;
    std::set<std::string> transition_zones;
    for (const auto& zn : detail::axial_zones(layout.params))
        if (zn.transition) transition_zones.insert(zn.label);
    auto add = [&](const std::string& group, const std::string& electrode) {
        auto it = by_name.find(group);
        if (it == by_name.end()) {
            by_name[group] = w.groups.size();
            w.groups.push_back({group, {electrode}});
        } else {
            w.groups[it->second].electrodes.push_back(electrode);
        }
    };
    for (const auto& e : layout.electrodes) {
        if (e.kind != ElectrodeKind::dc) continue;
        // Segment names are S<gap><side>.<zone>.<index>.
        const auto d1 = e.name.find('.');
        const auto d2 = d1 == std::string::npos ? std::string::npos : e.name.find('.', d1 + 1);
        const bool indexed = d2 != std::string::npos && d2 + 1 < e.name.size() &&
                             std::all_of(e.name.begin() + static_cast<std::ptrdiff_t>(d2 + 1), e.name.end(),
                                         [](char ch) { return ch >= '0' && ch <= '9'; });
        if (e.name[0] != 'S' || !indexed) {
            add(e.name, e.name);
            continue;
        }
        const std::string zone = e.name.substr(d1 + 1, d2 - d1 - 1);
        const int k = std::stoi(e.name.substr(d2 + 1));
        if (transition_zones.count(zone))
            add(e.name, e.name);
        else
            add(e.name.substr(0, d2) + ".m" + std::to_string(k % 3), e.name);
    }
    w.validate(layout);
    return w;
}

/// Every dc electrode on its own channel.
inline WiringMap independent_wiring(const TrapLayout& layout) {
    WiringMap w;
    for (const auto& e : layout.electrodes)
        if (e.kind == ElectrodeKind::dc) w.groups.push_back({e.name, {e.name}});
    return w;
}

struct WellTarget {
    Point3 position;
    std::optional<double> axial_freq;                   // rad/s; none = leave curvature free
    Eigen::Vector3d stray_field = Eigen::Vector3d::Zero();  // V/m, to be cancelled
    double voltage_bound = 40.0;                        // V per channel
    bool include_rf = true;     // include rf gradient and curvature at the target
    double tikhonov = 1e-6;     // weight on |V|² selecting among equivalent solutions
    double jump_penalty = 0.0;  // weight on |V - V_prev|²
    // Optional soft objective on the dc radial anisotropy (H_xx - H_yy), J/m².
    std::optional<double> radial_split;
    double radial_split_weight = 0.0;
    // Channels allowed to move; the rest stay at 0 V. Empty = all channels.
    std::vector<std::string> active_channels;

    void validate() const {
        require_above_surface(position);
        if (axial_freq && !(*axial_freq >= 0)) throw InputError("axial frequency must be >= 0");
        if (!(voltage_bound > 0)) throw InputError("voltage bound must be positive");
        if (!(tikhonov >= 0) || !(jump_penalty >= 0) || !(radial_split_weight >= 0))
            throw InputError("regularisation weights must be >= 0");
        if (!stray_field.allFinite()) throw InputError("stray field must be finite");
    }
};

struct WellSolution {
    Eigen::VectorXd voltages;  // per channel
    std::vector<std::string> channels;
    std::vector<std::string> constraint_names;
    Eigen::VectorXd constraint_residual;  // scaled (V/m for gradients, V/m² for curvatures)
    double max_abs_voltage = 0;
    int clamped_channels = 0;
    double tikhonov = 0;
    std::optional<TotalModes> modes;  // at the target (absent when not solved for a well)
    double axial_freq = NAN;          // rad/s, of the mode along z
};

/// Per-volt gradient (J/m) and Hessian (J/m²) of each channel at r.
struct ChannelBasis {
    Eigen::Matrix<double, 3, Eigen::Dynamic> gradient;
    std::vector<Eigen::Matrix3d> hessian;
};

inline ChannelBasis channel_basis(const TrapModel& model, const WiringMap& w, const Point3& p) {
    const Eigen::Vector3d r = p.si();
    const double q = model.species().charge;
    ChannelBasis b;
    b.gradient.setZero(3, static_cast<Eigen::Index>(w.size()));
    b.hessian.assign(w.size(), Eigen::Matrix3d::Zero());
    for (std::size_t g = 0; g < w.size(); ++g)
        for (const auto& e : w.groups[g].electrodes) {
            const FieldJet j = model.dc_jet(model.dc_index(e), r);
            b.gradient.col(static_cast<Eigen::Index>(g)) += -q * j.E;
            const Eigen::Matrix3d H = -j.J.transpose();
            b.hessian[g] += q * 0.5 * (H + H.transpose());
        }
    return b;
}

namespace detail {

struct LinearSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<std::string> names;
};

inline LinearSystem well_constraints(const TrapModel& model, const ChannelBasis& cb, const WellTarget& t) {
    const double q = model.species().charge, m = model.species().mass;
    // Rows scaled to per-charge units so gradients and curvatures compare.
    const double sg = 1.0 / q, sh = 1e-6 / q;
    Eigen::Vector3d g0 = -q * t.stray_field;
    Eigen::Matrix3d h0 = Eigen::Matrix3d::Zero();
    if (t.include_rf) {
        const FieldSample rf = model.pseudo_potential(t.position);
        g0 += rf.grad_pp;
        h0 = rf.H_pp;
    }
    const Eigen::Index n = cb.gradient.cols();
    LinearSystem s;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    const char* axes[] = {"x", "y", "z"};
    for (int i = 0; i < 3; ++i) {
        rows.push_back(sg * cb.gradient.row(i));
        rhs.push_back(-sg * g0(i));
        s.names.push_back(std::string("zero total force along ") + axes[i]);
    }
    if (t.axial_freq) {
        auto hrow = [&](int i, int j) {
            Eigen::RowVectorXd r(n);
            for (Eigen::Index g = 0; g < n; ++g) r(g) = sh * cb.hessian[g](i, j);
            return r;
        };
        rows.push_back(hrow(2, 2));
        rhs.push_back(sh * (m * *t.axial_freq * *t.axial_freq - h0(2, 2)));
        s.names.push_back("axial curvature");
        rows.push_back(hrow(0, 2));
        rhs.push_back(-sh * h0(0, 2));
        s.names.push_back("axial/x decoupling");
        rows.push_back(hrow(1, 2));
        rhs.push_back(-sh * h0(1, 2));
        s.names.push_back("axial/y decoupling");
    }
    s.A.resize(static_cast<Eigen::Index>(rows.size()), n);
    s.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        s.A.row(static_cast<Eigen::Index>(i)) = rows[i];
        s.b(static_cast<Eigen::Index>(i)) = rhs[i];
    }
    return s;
}

/// Indices of constraints that add no rank to the ones before them.
inline std::vector<Eigen::Index> dependent_rows(const Eigen::MatrixXd& A) {
    std::vector<Eigen::Index> dep;
    Eigen::MatrixXd kept(0, A.cols());
    const double scale = A.rows() ? A.rowwise().norm().maxCoeff() : 0.0;
    for (Eigen::Index k = 0; k < A.rows(); ++k) {
        const double nrm = A.row(k).norm();
        if (!(nrm > 1e-9 * scale)) {
            dep.push_back(k);
            continue;
        }
        Eigen::MatrixXd sub(kept.rows() + 1, A.cols());
        sub << kept, A.row(k) / nrm;
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub.transpose());
        qr.setThreshold(1e-10);
        if (qr.rank() < sub.rows()) dep.push_back(k);
        else kept = sub;
    }
    return dep;
}

/// min τ|V|² + μ|V - V_prev|² + |S V - s|² subject to A V = b (nullspace method).
inline Eigen::VectorXd constrained_min_norm(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tau, double mu,
                                            const Eigen::VectorXd& v_prev, const Eigen::MatrixXd& S,
                                            const Eigen::VectorXd& s) {
    const Eigen::Index n = A.cols(), k = A.rows();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A.transpose());
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Q1 = Q.leftCols(k), Q2 = Q.rightCols(n - k);
    const Eigen::VectorXd vp = Q1 * R.transpose().triangularView<Eigen::Lower>().solve(b);
    if (n == k) return vp;
    Eigen::MatrixXd M = (tau + mu) * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd c = mu * v_prev - (tau + mu) * vp;
    if (S.rows() > 0) {
        M += S.transpose() * S;
        c += S.transpose() * (s - S * vp);
    }
    const Eigen::MatrixXd N = Q2.transpose() * M * Q2;
    if (N.norm() == 0) return vp;
    const Eigen::VectorXd y = N.ldlt().solve(Q2.transpose() * c);
    return vp + Q2 * y;
}

}  // namespace detail

/// Channel voltages that cancel the total force at the target, set the axial
/// curvature (when requested) and keep the axial mode along z.
inline WellSolution solve_well(const TrapModel& model, const WiringMap& wiring, const WellTarget& t,
                               const Eigen::VectorXd* v_prev = nullptr) {
    t.validate();
    wiring.validate(model.layout());
    const ChannelBasis cb = channel_basis(model, wiring, t.position);
    const detail::LinearSystem sys = detail::well_constraints(model, cb, t);
    const Eigen::Index n = static_cast<Eigen::Index>(wiring.size());
    std::vector<int> pinned(static_cast<std::size_t>(n), 0);  // +-1 at the bound, 2 = inactive (0 V)
    if (!t.active_channels.empty()) {
        std::fill(pinned.begin(), pinned.end(), 2);
        for (const auto& c : t.active_channels) pinned[wiring.channel(c)] = 0;
    }
    // Dependent constraints are dropped if the rest implies them, else reported.
    detail::LinearSystem work = sys;
    {
        Eigen::MatrixXd Aa = sys.A;
        for (Eigen::Index g = 0; g < n; ++g)
            if (pinned[g]) Aa.col(g).setZero();
        const auto dep = detail::dependent_rows(Aa);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index k = 0; k < sys.A.rows(); ++k)
            if (std::find(dep.begin(), dep.end(), k) == dep.end()) keep.push_back(k);
        work.A.resize(static_cast<Eigen::Index>(keep.size()), n);
        work.b.resize(static_cast<Eigen::Index>(keep.size()));
        work.names.clear();
        for (std::size_t i = 0; i < keep.size(); ++i) {
            work.A.row(static_cast<Eigen::Index>(i)) = Aa.row(keep[i]);
            work.b(static_cast<Eigen::Index>(i)) = sys.b(keep[i]);
            work.names.push_back(sys.names[static_cast<std::size_t>(keep[i])]);
        }
        if (!dep.empty()) {
            // A dependent row is consistent if the least-squares fit of its
            // coefficients on the kept rows also reproduces its right side.
            for (Eigen::Index k : dep) {
                const Eigen::VectorXd row = Aa.row(k).transpose();
                double predicted = 0.0;
                if (work.A.rows() > 0) {
                    const Eigen::VectorXd c = work.A.transpose().colPivHouseholderQr().solve(row);
                    predicted = c.dot(work.b);
                }
                const double scale = std::max(1.0, sys.b.cwiseAbs().maxCoeff());
                if (std::abs(predicted - sys.b(k)) > 1e-6 * scale)
                    throw InfeasibleError("dc basis is rank deficient: constraint '" +
                                          sys.names[static_cast<std::size_t>(k)] +
                                          "' is not independently controllable by the available channels");
            }
        }
    }

    Eigen::MatrixXd S(0, n);
    Eigen::VectorXd s(0);
    if (t.radial_split && t.radial_split_weight > 0) {
        const double sh = 1e-6 / model.species().charge, w = std::sqrt(t.radial_split_weight);
        S.resize(1, n);
        for (Eigen::Index g = 0; g < n; ++g) S(0, g) = w * sh * (cb.hessian[g](0, 0) - cb.hessian[g](1, 1));
        s.resize(1);
        s(0) = w * sh * *t.radial_split;
    }
    const Eigen::VectorXd prev = v_prev ? *v_prev : Eigen::VectorXd::Zero(n);
    if (prev.size() != n) throw InputError("previous voltage vector size mismatch");
    const double mu = v_prev ? t.jump_penalty : 0.0;

    // Channels that exceed the bound are pinned at it and the rest re-solved.
    Eigen::VectorXd v;
    for (int pass = 0;; ++pass) {
        std::vector<Eigen::Index> free;
        Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
        for (Eigen::Index g = 0; g < n; ++g) {
            if (pinned[g] == 1 || pinned[g] == -1) fixed(g) = pinned[g] * t.voltage_bound;
            else if (pinned[g] == 0) free.push_back(g);
        }
        const auto nf = static_cast<Eigen::Index>(free.size());
        if (nf < work.A.rows())
            throw InfeasibleError("constraints cannot be met within the +/-" + std::to_string(t.voltage_bound) +
                                  " V bound");
        Eigen::MatrixXd Af(work.A.rows(), nf), Sf(S.rows(), nf);
        Eigen::VectorXd pf(nf);
        for (Eigen::Index i = 0; i < nf; ++i) {
            Af.col(i) = work.A.col(free[i]);
            if (S.rows()) Sf.col(i) = S.col(free[i]);
            pf(i) = prev(free[i]);
        }
        if (pass > 0 && !detail::dependent_rows(Af).empty())
            throw InfeasibleError("constraints cannot be met within the +/-" + std::to_string(t.voltage_bound) +
                                  " V bound");
        const Eigen::VectorXd vf = detail::constrained_min_norm(Af, work.b - work.A * fixed, t.tikhonov, mu, pf, Sf,
                                                                S.rows() ? Eigen::VectorXd(s - S * fixed) : s);
        v = fixed;
        for (Eigen::Index i = 0; i < nf; ++i) v(free[i]) = vf(i);
        bool changed = false;
        for (Eigen::Index g = 0; g < n; ++g)
            if (!pinned[g] && std::abs(v(g)) > t.voltage_bound * (1 + 1e-12)) {
                pinned[g] = v(g) > 0 ? 1 : -1;
                changed = true;
            }
        if (!changed) break;
    }

    WellSolution out;
    out.voltages = v;
    out.channels = wiring.channel_names();
    out.constraint_names = sys.names;
    out.constraint_residual = sys.A * v - sys.b;
    out.max_abs_voltage = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
    out.clamped_channels = static_cast<int>(std::count_if(pinned.begin(), pinned.end(), [](int p) { return p == 1 || p == -1; }));
    out.tikhonov = t.tikhonov;
    if (t.axial_freq && t.include_rf) {
        TotalModesOptions mo;
        mo.max_displacement_um = 1e3;
        out.modes = total_modes(model, wiring.expand(v), t.position, t.stray_field, mo);
        out.axial_freq = out.modes->secular[static_cast<std::size_t>(out.modes->mode_along(2))];
    }
    return out;
}

/// Newton iteration on the total (rf + dc + stray) potential from `start`.
inline Point3 find_total_minimum(const TrapModel& model, const VoltageMap& v, const Point3& start,
                                 const Eigen::Vector3d& stray = Eigen::Vector3d::Zero(), int max_iter = 50) {
    Eigen::Vector3d r = start.si();
    for (int it = 0; it < max_iter; ++it) {
        const Point3 p = Point3::from_si(r);
        const FieldSample rf = model.pseudo_potential(p);
        const DcResponse dc = model.dc_potential(v, p, stray);
        const Eigen::Vector3d g = rf.grad_pp + dc.gradient;
        const Eigen::Matrix3d H = rf.H_pp + dc.hessian;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(H);
        if (es.eigenvalues().minCoeff() <= 0)
            throw InfeasibleError("total potential is not confining near the requested well");
        Eigen::Vector3d step = -H.ldlt().solve(g);
        const double cap = 2e-6;
        if (step.norm() > cap) step *= cap / step.norm();
        r += step;
        if (step.norm() < 1e-13) break;
    }
    return Point3::from_si(r);
}

struct WaveformStep {
    double z = 0;  // µm, path position of the well
    Point3 target;
    Point3 achieved;
    Eigen::VectorXd voltages;
    double dwell = 0;  // s
};

struct Waveform {
    std::vector<std::string> channels;
    std::vector<WaveformStep> steps;

    void validate(double bound) const {
        for (const auto& s : steps) {
            if (!(s.dwell > 0)) throw InputError("waveform dwell times must be positive");
            if (s.voltages.size() && s.voltages.cwiseAbs().maxCoeff() > bound * (1 + 1e-12))
                throw InfeasibleError("waveform step exceeds the voltage bound");
        }
    }
};

struct WaveformOptions {
    double track_tolerance_um = 0.5;
    double jump_penalty = 1.0;
};

/// Quasi-static shuttle between z_start and z_end along `path` in n_steps
/// equidistant steps, each solved with a jump penalty towards its predecessor
/// and verified by re-locating the total-potential minimum.
inline Waveform make_waveform(const TrapModel& model, const WiringMap& wiring, const RfMinimumPath& path,
                              double z_start, double z_end, int n_steps, double dwell, const WellTarget& base,
                              const WaveformOptions& opt = {}) {
    if (n_steps < 2) throw InputError("a waveform needs at least 2 steps");
    if (!(dwell > 0)) throw InputError("dwell time must be positive");
    Waveform w;
    w.channels = wiring.channel_names();
    std::optional<Eigen::VectorXd> prev;
    for (int i = 0; i < n_steps; ++i) {
        const double z = z_start + (z_end - z_start) * i / (n_steps - 1);
        WellTarget t = base;
        t.position = interpolate_path(path, z);
        t.jump_penalty = opt.jump_penalty;
        WellSolution sol;
        try {
            sol = solve_well(model, wiring, t, prev ? &*prev : nullptr);
        } catch (const InfeasibleError& e) {
            throw InfeasibleError("waveform step " + std::to_string(i) + " (z = " + std::to_string(z) +
                                  " um): " + e.what());
        }
        WaveformStep st;
        st.z = z;
        st.target = t.position;
        st.voltages = sol.voltages;
        st.dwell = dwell;
        st.achieved = find_total_minimum(model, wiring.expand(sol.voltages), t.position, t.stray_field);
        const double d = (st.achieved.si() - st.target.si()).norm() * m_to_um;
        if (!(d <= opt.track_tolerance_um))
            throw InfeasibleError("waveform step " + std::to_string(i) + ": well is " + std::to_string(d) +
                                  " um off the path");
        prev = sol.voltages;
        w.steps.push_back(std::move(st));
    }
    return w;
}

struct FilterReport {
    std::vector<double> lag;  // V, max over channels of |commanded - filtered| at each step end
    double worst_lag = 0;
};

/// Single-pole RC low-pass (τ = 1/(2π f_c)) driven by the zero-order-hold
/// step sequence; the filter starts settled on the first step. Each output
/// step carries the filtered voltages at the end of its dwell.
inline Waveform filter_waveform(const Waveform& w, double cutoff_hz, FilterReport* report = nullptr) {
    if (!(cutoff_hz > 0)) throw InputError("filter cutoff must be positive");
    for (const auto& s : w.steps)
        if (!(s.dwell > 0)) throw InputError("waveform dwell times must be positive");
    Waveform out = w;
    FilterReport rep;
    if (w.steps.empty()) {
        if (report) *report = rep;
        return out;
    }
    const double tau = 1.0 / (two_pi * cutoff_hz);
    Eigen::VectorXd state = w.steps.front().voltages;
    for (std::size_t k = 0; k < w.steps.size(); ++k) {
        const auto& cmd = w.steps[k].voltages;
        const double decay = std::isinf(cutoff_hz) ? 0.0 : std::exp(-w.steps[k].dwell / tau);
        state = cmd + (state - cmd) * decay;
        out.steps[k].voltages = state;
        const double lag = cmd.size() ? (cmd - state).cwiseAbs().maxCoeff() : 0.0;
        rep.lag.push_back(lag);
        rep.worst_lag = std::max(rep.worst_lag, lag);
    }
    if (report) *report = rep;
    return out;
}

/// One row per step: index, z (µm), dwell (s), then one column per channel.
inline void write_waveform_columns(std::ostream& os, const Waveform& w, const std::vector<std::string>& header = {}) {
    for (const auto& h : header) os << "# " << h << '\n';
    os << "# step\tz_um\tdwell_s";
    for (const auto& c : w.channels) os << '\t' << c << "_V";
    os << '\n';
    std::ostringstream row;
    row << std::setprecision(9);
    for (std::size_t k = 0; k < w.steps.size(); ++k) {
        const auto& s = w.steps[k];
        row.str("");
        row << k << '\t' << s.z << '\t' << s.dwell;
        for (Eigen::Index c = 0; c < s.voltages.size(); ++c) row << '\t' << s.voltages(c);
        os << row.str() << '\n';
    }
}

}  // namespace surftrap
