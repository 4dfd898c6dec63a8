#pragma once

// Physical trap quantities built from the electrode basis: the rf
// pseudo-potential φ_PP = q²|E₀|²/(4mΩ²), dc potential energies, and the
// secular modes of their sum.

#include "surftrap/error.hpp"
#include "surftrap/field_kernel.hpp"
#include "surftrap/geometry.hpp"
#include "surftrap/units.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace surftrap {

struct IonSpecies {
    double mass = 0.0;    // kg
    double charge = 0.0;  // C
    std::string label;

    static IonSpecies calcium40() {
        return {(39.962590863 - constants::electron_mass_u) * constants::atomic_mass_unit, constants::elementary_charge,
                "40Ca+"};
    }

    void validate() const {
        if (!(mass > 0.0)) throw InputError("ion mass must be positive");
        if (charge == 0.0 || !std::isfinite(charge)) throw InputError("ion charge must be non-zero");
    }
};

struct Drive {
    double v_rf = 194.5;                        // V amplitude
    double omega_rf = mhz_to_rad_s(31.91);      // rad/s
    std::map<std::string, double> rf_pickup;    // dc electrode -> rf amplitude (V), in phase

    static Drive published() { return {}; }

    void validate() const {
        if (!(omega_rf > 0.0)) throw InputError("rf drive frequency must be positive");
        if (!(v_rf >= 0.0)) throw InputError("rf amplitude must be non-negative");
        for (const auto& [name, v] : rf_pickup)
            if (!(v >= 0.0)) throw InputError("rf pickup on '" + name + "' must be non-negative");
    }
};

using VoltageMap = std::map<std::string, double>;

/// Eigen-decomposition of a curvature matrix, descending eigenvalues.
struct Modes {
    Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();   // J/m²
    Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Identity();  // columns
};

inline Modes descending_modes(const Eigen::Matrix3d& H) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (H + H.transpose()));
    Modes m;
    for (int i = 0; i < 3; ++i) {
        m.eigenvalues(i) = es.eigenvalues()(2 - i);
        m.eigenvectors.col(i) = es.eigenvectors().col(2 - i);
    }
    return m;
}

inline double secular_from_curvature(double k, double mass) { return std::sqrt(std::max(k, 0.0) / mass); }

struct FieldSample {
    Point3 point;
    double phi_pp = 0.0;                                   // J
    Eigen::Vector3d E0 = Eigen::Vector3d::Zero();          // V/m
    Eigen::Vector3d grad_pp = Eigen::Vector3d::Zero();     // J/m
    Eigen::Matrix3d H_pp = Eigen::Matrix3d::Zero();        // J/m²
    std::array<double, 3> secular{0.0, 0.0, 0.0};          // rad/s, descending
    Eigen::Matrix3d mode_vectors = Eigen::Matrix3d::Identity();
    double total_confinement = 0.0;                        // (rad/s)², tr(H)/m

    double phi_pp_mev() const { return to_mev(phi_pp); }
};

/// Pseudo-potential with gradient and cheap curvature information.
struct PseudoJet {
    double phi = 0.0;
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    Eigen::Matrix3d gauss_newton = Eigen::Matrix3d::Zero();  // 2κ JᵀJ
    double trace = 0.0;                                      // exact tr(H)
    Eigen::Vector3d E = Eigen::Vector3d::Zero();
};

struct DcResponse {
    double energy = 0.0;                                   // J
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();    // J/m
    Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();     // J/m²
};

class UnstableModeError : public InfeasibleError {
public:
    UnstableModeError(const std::string& msg, double eigenvalue, Eigen::Vector3d vector)
        : InfeasibleError(msg), eigenvalue(eigenvalue), vector(std::move(vector)) {}
    double eigenvalue;
    Eigen::Vector3d vector;
};

class TrapModel {
public:
    TrapModel(TrapLayout layout, Drive drive, IonSpecies species)
        : layout_(std::move(layout)), drive_(std::move(drive)), species_(std::move(species)) {
        drive_.validate();
        species_.validate();
        if (layout_.electrodes.empty()) throw InputError("layout has no electrodes");
        for (const auto& e : layout_.electrodes) {
            if (e.kind != ElectrodeKind::rf) continue;
            auto es = kernel::edges_of(e.vertices, drive_.v_rf);
            rf_edges_.insert(rf_edges_.end(), es.begin(), es.end());
        }
        for (const auto& [name, v] : drive_.rf_pickup) {
            const auto& e = layout_.electrode(name);
            if (e.kind == ElectrodeKind::rf) throw InputError("rf pickup must name a dc electrode, got '" + name + "'");
            auto es = kernel::edges_of(e.vertices, v);
            rf_edges_.insert(rf_edges_.end(), es.begin(), es.end());
        }
        for (std::size_t i = 0; i < layout_.electrodes.size(); ++i) {
            const auto& e = layout_.electrodes[i];
            if (e.kind != ElectrodeKind::dc) continue;
            dc_index_[e.name] = dc_names_.size();
            dc_names_.push_back(e.name);
            dc_offsets_.push_back(dc_edges_.size());
            auto es = kernel::edges_of(e.vertices, 1.0);
            dc_edges_.insert(dc_edges_.end(), es.begin(), es.end());
        }
        dc_offsets_.push_back(dc_edges_.size());
        kappa_ = species_.charge * species_.charge / (4.0 * species_.mass * drive_.omega_rf * drive_.omega_rf);
    }

    const TrapLayout& layout() const { return layout_; }
    const Drive& drive() const { return drive_; }
    const IonSpecies& species() const { return species_; }

    /// κ in φ_PP = κ|E₀|².
    double pp_prefactor() const { return kappa_; }

    Eigen::Vector3d rf_field(const Eigen::Vector3d& r) const {
        const auto s = kernel::edge_sum<double>(rf_edges_, r.x(), r.y(), r.z());
        return -kernel::inv_two_pi * Eigen::Vector3d(s[0], s[1], s[2]);
    }

    /// φ_PP in joules at an SI position.
    double phi_pp(const Eigen::Vector3d& r) const { return kappa_ * rf_field(r).squaredNorm(); }
    double phi_pp(const Point3& p) const {
        require_above_surface(p);
        return phi_pp(p.si());
    }

    PseudoJet pp_jet(const Eigen::Vector3d& r) const {
        const FieldJet j = field_jet(rf_edges_, r);
        PseudoJet out;
        out.E = j.E;
        out.phi = kappa_ * j.E.squaredNorm();
        out.grad = 2.0 * kappa_ * j.J.transpose() * j.E;
        out.gauss_newton = 2.0 * kappa_ * j.J.transpose() * j.J;
        out.trace = 2.0 * kappa_ * j.J.squaredNorm();
        return out;
    }

    /// Exact pseudo-potential Hessian 2κ(JᵀJ + Σ E_i ∇∇E_i) with value and gradient.
    struct PseudoJet2 {
        double phi;
        Eigen::Vector3d grad;
        Eigen::Matrix3d H;
        Eigen::Vector3d E;
        Eigen::Matrix3d J;
    };

    PseudoJet2 pp_jet2(const Eigen::Vector3d& r) const {
        const FieldJet2 j = field_jet2(rf_edges_, r);
        PseudoJet2 out;
        out.E = j.E;
        out.J = j.J;
        out.phi = kappa_ * j.E.squaredNorm();
        out.grad = 2.0 * kappa_ * j.J.transpose() * j.E;
        Eigen::Matrix3d H = j.J.transpose() * j.J;
        for (int i = 0; i < 3; ++i) H += j.E(i) * j.K[i];
        H *= 2.0 * kappa_;
        out.H = 0.5 * (H + H.transpose());
        return out;
    }

    FieldSample pseudo_potential(const Point3& p) const {
        require_above_surface(p);
        const PseudoJet2 j = pp_jet2(p.si());
        FieldSample s;
        s.point = p;
        s.phi_pp = j.phi;
        s.E0 = j.E;
        s.grad_pp = j.grad;
        s.H_pp = j.H;
        // Trace from the first-derivative identity; E·∇²E vanishes.
        s.total_confinement = 2.0 * kappa_ * j.J.squaredNorm() / species_.mass;
        const Modes m = descending_modes(j.H);
        const double eps = 1e-6 * j.H.norm();
        for (int i = 0; i < 3; ++i) {
            double k = m.eigenvalues(i);
            if (k < 0.0 && k > -eps) k = 0.0;
            s.secular[i] = secular_from_curvature(k, species_.mass);
        }
        s.mode_vectors = m.eigenvectors;
        return s;
    }

    // --- dc electrodes ----------------------------------------------------

    const std::vector<std::string>& dc_names() const { return dc_names_; }

    std::size_t dc_index(const std::string& name) const {
        auto it = dc_index_.find(name);
        if (it == dc_index_.end()) {
            if (auto i = layout_.find(name); i && layout_.electrodes[*i].kind == ElectrodeKind::rf)
                throw InputError("rf electrode '" + name + "' cannot carry a dc voltage");
            throw InputError("unknown dc electrode '" + name + "'");
        }
        return it->second;
    }

    std::span<const kernel::Edge> dc_edges(std::size_t idx) const {
        return std::span<const kernel::Edge>(dc_edges_).subspan(dc_offsets_[idx], dc_offsets_[idx + 1] - dc_offsets_[idx]);
    }

    /// Per-volt E (V/m) and Hessian of φ (V/m²) of one dc electrode.
    FieldJet dc_jet(std::size_t idx, const Eigen::Vector3d& r) const { return field_jet(dc_edges(idx), r); }

    BasisEval dc_basis(std::size_t idx, const Point3& p) const {
        return basis_eval(layout_.electrodes[*layout_.find(dc_names_[idx])], p);
    }

    /// q Σ V_i φ_i plus a uniform external field (V/m) contribution -q E·r.
    DcResponse dc_potential(const VoltageMap& voltages, const Point3& p,
                            const Eigen::Vector3d& stray = Eigen::Vector3d::Zero()) const {
        require_above_surface(p);
        DcResponse out;
        const Eigen::Vector3d r = p.si();
        const double q = species_.charge;
        for (const auto& [name, v] : voltages) {
            const std::size_t idx = dc_index(name);
            if (v == 0.0) continue;
            const auto& e = layout_.electrodes[*layout_.find(name)];
            const FieldJet j = dc_jet(idx, r);
            out.energy += q * v * basis_potential(e, p);
            out.gradient += -q * v * j.E;
            const Eigen::Matrix3d H = -j.J.transpose();
            out.hessian += q * v * 0.5 * (H + H.transpose());
        }
        out.energy += -q * stray.dot(r);
        out.gradient += -q * stray;
        return out;
    }

private:
    TrapLayout layout_;
    Drive drive_;
    IonSpecies species_;
    std::vector<kernel::Edge> rf_edges_;
    std::vector<kernel::Edge> dc_edges_;
    std::vector<std::size_t> dc_offsets_;
    std::vector<std::string> dc_names_;
    std::map<std::string, std::size_t> dc_index_;
    double kappa_ = 0.0;
};

inline FieldSample pseudo_potential(const TrapModel& model, const Point3& p) { return model.pseudo_potential(p); }

inline DcResponse dc_potential(const TrapModel& model, const VoltageMap& voltages, const Point3& p) {
    return model.dc_potential(voltages, p);
}

/// Secular modes of rf + dc at a point near a minimum of the total potential.
struct TotalModes {
    std::array<double, 3> secular{};          // rad/s, descending
    Eigen::Matrix3d vectors = Eigen::Matrix3d::Identity();
    std::array<char, 3> dominant_axis{};      // 'x', 'y' or 'z'
    double sum_w2_total = 0.0;                // Σω_i² of rf + dc
    double sum_w2_rf = 0.0;                   // Σω_i² of rf alone
    double displacement_um = 0.0;             // |H⁻¹∇U|, distance to the true minimum

    double conservation_residual() const {
        return sum_w2_rf > 0 ? std::abs(sum_w2_total - sum_w2_rf) / sum_w2_rf : std::abs(sum_w2_total);
    }
    /// Mode whose eigenvector is most aligned with `axis` (0 = x, 1 = y, 2 = z).
    int mode_along(int axis) const {
        int best = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(vectors(axis, i)) > std::abs(vectors(axis, best))) best = i;
        return best;
    }
};

struct TotalModesOptions {
    double max_displacement_um = 1.0;
    double negative_tolerance = 1e-6;  // relative to ‖H‖
};

inline TotalModes total_modes(const TrapModel& model, const VoltageMap& voltages, const Point3& p,
                              const Eigen::Vector3d& stray = Eigen::Vector3d::Zero(),
                              const TotalModesOptions& opt = {}) {
    const FieldSample rf = model.pseudo_potential(p);
    const DcResponse dc = model.dc_potential(voltages, p, stray);
    const Eigen::Matrix3d H = rf.H_pp + dc.hessian;
    const Eigen::Vector3d g = rf.grad_pp + dc.gradient;
    const double m = model.species().mass;
    TotalModes out;
    const Modes md = descending_modes(H);
    const double eps = opt.negative_tolerance * H.norm();
    for (int i = 0; i < 3; ++i) {
        double k = md.eigenvalues(i);
        if (k < -eps) {
            std::ostringstream os;
            os << "unstable/saddle: curvature " << k << " J/m^2 along (" << md.eigenvectors(0, i) << ", "
               << md.eigenvectors(1, i) << ", " << md.eigenvectors(2, i) << ")";
            throw UnstableModeError(os.str(), k, md.eigenvectors.col(i));
        }
        out.secular[i] = secular_from_curvature(k, m);
        int axis = 0;
        md.eigenvectors.col(i).cwiseAbs().maxCoeff(&axis);
        out.dominant_axis[i] = "xyz"[axis];
    }
    out.vectors = md.eigenvectors;
    out.sum_w2_total = H.trace() / m;
    out.sum_w2_rf = rf.H_pp.trace() / m;
    out.displacement_um = (H.ldlt().solve(g)).norm() * m_to_um;
    if (!(out.displacement_um <= opt.max_displacement_um)) {
        std::ostringstream os;
        os << "point is " << out.displacement_um << " um from the total-potential minimum";
        throw InputError(os.str());
    }
    return out;
}

}  // namespace surftrap
