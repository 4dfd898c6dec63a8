#pragma once

// Read-outs of a solved trap: double-well exchange rate, micromotion
// modulation index along a path, and the rule-of-succession bound.

#include "surftrap/minpath.hpp"
#include "surftrap/trap_model.hpp"
#include "surftrap/units.hpp"

#include <boost/math/tools/roots.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace surftrap {

// --- exchange coupling ---------------------------------------------------

struct CouplingQuery {
    double kappa = 1.0;  // 1 for axial, 1/2 for radial modes
    double q1 = constants::elementary_charge, q2 = constants::elementary_charge;  // C
    double m1 = 0, m2 = 0;          // kg
    double omega1 = 0, omega2 = 0;  // rad/s
    double s0 = 0;                  // m

    void validate() const {
        if (kappa != 1.0 && kappa != 0.5) throw InputError("coupling kappa must be exactly 1 or 1/2");
        for (double v : {q1, q2, m1, m2, omega1, omega2, s0})
            if (!(v > 0.0) || !std::isfinite(v)) throw InputError("coupling inputs must be positive and finite");
    }
};

/// Ω_ex = κ/(2π ε0) q1 q2 / (√(m1 m2) √(ω1 ω2) s0³), rad/s.
inline double coupling_rate(const CouplingQuery& c) {
    c.validate();
    return c.kappa / (two_pi * constants::epsilon0) * c.q1 * c.q2 /
           (std::sqrt(c.m1 * c.m2) * std::sqrt(c.omega1 * c.omega2) * c.s0 * c.s0 * c.s0);
}

inline CouplingQuery same_species_coupling(const IonSpecies& ion, double omega, double s0_m, double kappa) {
    return {kappa, ion.charge, ion.charge, ion.mass, ion.mass, omega, omega, s0_m};
}

// --- micromotion ---------------------------------------------------------

struct MicromotionQuery {
    double lambda = 729e-9;             // m, probe wavelength
    double theta = constants::pi / 4;   // rad, angle between beam and trap axis

    void validate() const {
        if (!(lambda > 0)) throw InputError("probe wavelength must be positive");
        if (!(theta >= 0 && theta <= constants::pi / 2)) throw InputError("probe angle must lie in [0, pi/2]");
    }
};

/// β from a pseudo-potential energy (J): (4π/(Ω λ)) √(φ/m) cos ϑ.
inline double micromotion_index_from_phi(double phi_j, double omega_rf, double mass, const MicromotionQuery& q) {
    q.validate();
    if (!(phi_j >= 0.0)) throw InputError("pseudo-potential must be non-negative");
    const double c = std::cos(q.theta);
    if (q.theta == constants::pi / 2) return 0.0;
    return 4.0 * constants::pi / (omega_rf * q.lambda) * std::sqrt(phi_j / mass) * c;
}

/// β at (x0 + α, y0, z) for a path point; α in µm, negative towards the axis
/// on the x > 0 path.
inline double micromotion_index(const TrapModel& model, const Point3& on_path, double alpha_um,
                                const MicromotionQuery& q = {}) {
    const double sx = on_path.x >= 0 ? 1.0 : -1.0;
    const Point3 p{on_path.x + sx * alpha_um, on_path.y, on_path.z};
    return micromotion_index_from_phi(model.phi_pp(p), model.drive().omega_rf, model.species().mass, q);
}

/// Pseudo-potential energy (J) that produces a given β.
inline double phi_for_index(double beta, double omega_rf, double mass, const MicromotionQuery& q) {
    const double c = std::cos(q.theta);
    if (!(c > 0)) throw InputError("probe perpendicular to the axis measures no micromotion");
    const double s = beta * omega_rf * q.lambda / (4.0 * constants::pi * c);
    return mass * s * s;
}

struct DisplacementFit {
    double z = 0;         // µm
    double beta = 0;
    double alpha_um = 0;  // µm
    bool widened = false; // bracket had to be extended beyond the default
    std::string warning;
};

struct DisplacementFitOptions {
    MicromotionQuery probe;
    double bracket_um = 5.0;     // search α in [-bracket, 0]
    double max_bracket_um = 80.0;
    double tol_um = 1e-7;
};

/// Solves φ_PP(x0(z) + α, y0(z), z) = φ(β) for α ≤ 0 at each (z, β), with
/// (x0, y0) interpolated on the path.
inline std::vector<DisplacementFit> fit_displacement(const std::vector<std::pair<double, double>>& z_beta,
                                                     const TrapModel& model, const RfMinimumPath& path,
                                                     const DisplacementFitOptions& opt = {}) {
    opt.probe.validate();
    if (path.samples.size() < 2) throw InputError("displacement fit needs a traced path");
    std::vector<DisplacementFit> out;
    for (const auto& [z, beta] : z_beta) {
        if (!(beta >= 0.0)) throw InputError("micromotion index must be non-negative");
        const Point3 on = interpolate_path(path, z);
        const double sx = on.x >= 0 ? 1.0 : -1.0;
        const double target = phi_for_index(beta, model.drive().omega_rf, model.species().mass, opt.probe);
        auto g = [&](double a) { return model.phi_pp(Point3{on.x + sx * a, on.y, on.z}) - target; };
        DisplacementFit fit{z, beta, 0.0, false, {}};
        if (g(0.0) >= 0.0) {
            out.push_back(fit);  // at or below the field already present at the path point
            continue;
        }
        double lo = -opt.bracket_um;
        while (g(lo) < 0.0) {
            if (-2 * lo > opt.max_bracket_um) throw InfeasibleError("micromotion index inconsistent with the geometry: no displacement root");
            lo *= 2;
            fit.widened = true;
        }
        if (fit.widened) fit.warning = "bracket widened to " + std::to_string(-lo) + " um";
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::toms748_solve(
            g, lo, 0.0, [&](double a, double b) { return std::abs(b - a) < opt.tol_um; }, iters);
        fit.alpha_um = 0.5 * (r.first + r.second);
        out.push_back(fit);
    }
    return out;
}

// --- Rabi-ratio inversion ------------------------------------------------

inline constexpr double first_j0_zero = 2.404825557695773;

inline double bessel_ratio(double beta) {
    if (beta == 0.0) return 0.0;
    return std::cyl_bessel_j(1.0, beta) / std::cyl_bessel_j(0.0, beta);
}

/// Solves J1(β)/J0(β) = Ω_mm/Ω_carr on the branch 0 ≤ β < first zero of J0.
inline double bessel_invert(double omega_mm, double omega_carr) {
    if (!(omega_mm >= 0) || !(omega_carr > 0)) throw InputError("Rabi frequencies must satisfy mm >= 0, carrier > 0");
    const double r = omega_mm / omega_carr;
    if (!std::isfinite(r)) throw InputError("Rabi ratio is not finite");
    if (r == 0.0) return 0.0;
    // J1 - r J0 is increasing on the branch; Newton from the linearised guess.
    auto fn = [r](double b) {
        const double j0 = std::cyl_bessel_j(0.0, b), j1 = std::cyl_bessel_j(1.0, b);
        const double dj1 = j0 - (b == 0.0 ? 0.5 : j1 / b);
        return std::make_pair(j1 - r * j0, dj1 + r * j1);
    };
    const double hi = first_j0_zero * (1.0 - 1e-12);
    const double guess = std::min(2.0 * r, 0.5 * hi);
    return boost::math::tools::newton_raphson_iterate(fn, guess, 0.0, hi, 52);
}

// --- statistics ------------------------------------------------------------

/// Laplace's rule of succession: (s + 1) / (n + 2).
inline double return_probability_bound(std::uint64_t successes, std::uint64_t trials) {
    if (successes > trials) throw InputError("successes cannot exceed trials");
    return (static_cast<double>(successes) + 1.0) / (static_cast<double>(trials) + 2.0);
}

// --- stray field and exports ------------------------------------------------

/// Measured stray field, V/m, in model axes (x, y, z).
inline Eigen::Vector3d measured_stray_field() { return {-0.16e3, 1.2e3, 0.46e3}; }

struct MicromotionRow {
    double z = 0, x0 = 0, y0 = 0, alpha_um = 0, beta = 0;
};

inline void write_micromotion_columns(std::ostream& os, const std::vector<MicromotionRow>& rows,
                                      const std::vector<std::string>& header = {}) {
    for (const auto& h : header) os << "# " << h << '\n';
    os << "# z_um\tx0_um\ty0_um\talpha_um\tbeta\n";
    const auto flags = os.flags();
    const auto prec = os.precision(9);
    for (const auto& r : rows) os << r.z << '\t' << r.x0 << '\t' << r.y0 << '\t' << r.alpha_um << '\t' << r.beta << '\n';
    os.precision(prec);
    os.flags(flags);
}

}  // namespace surftrap
