#pragma once

// The two design optimizations:
//  (A) rail widths (a, b, c, d) against a target position of the inner
//      double well at z = 0, C = 2(x0 - x0_goal)² + (y0 - y0_goal)²;
//  (B) the B-spline transition boundary against
//      C = w1 ∫ω² dz / (∫ω² dz)_lin + w2 ∫|∂φ_PP/∂t| dz / (∫|∂φ_PP/∂t| dz)_lin,
//      the first integral over the transition zone only, the second over
//      [0, z_F], both normalised by the linear-transition baseline.

#include "surftrap/geometry.hpp"
#include "surftrap/minpath.hpp"
#include "surftrap/nelder_mead.hpp"
#include "surftrap/parallel.hpp"
#include "surftrap/trap_model.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace surftrap {

inline constexpr double infeasible_cost = std::numeric_limits<double>::infinity();

// --- (A) linear zone -----------------------------------------------------

struct LinearZoneProblem {
    double x0_goal = 18.0;  // µm
    double y0_goal = 90.0;  // µm
    double gamma = 500.0;
    double delta = 200.0;
    double b_min = 60.0;
    double x_weight = 2.0;  // twice the y weight
    double y_weight = 1.0;
    Drive drive = Drive::published();
    IonSpecies species = IonSpecies::calcium40();
    // Selection considers candidates whose cost is at most this (µm²).
    double accept_cost = 1.0;
    // Seed ranges for random restarts (µm).
    double seed_min = 20.0, seed_max = 250.0;

    void validate() const {
        if (!(x0_goal > 0) || !(y0_goal > 0)) throw InputError("linear-zone goals must be positive");
        if (x_weight != 2.0 * y_weight) throw InputError("x weight must be exactly twice the y weight");
    }
};

/// Cost from given inner-minimum coordinates (µm).
inline double linear_zone_cost_at(double x0, double y0, const LinearZoneProblem& pb) {
    return pb.x_weight * (x0 - pb.x0_goal) * (x0 - pb.x0_goal) + pb.y_weight * (y0 - pb.y0_goal) * (y0 - pb.y0_goal);
}

struct LinearZoneEval {
    double cost = infeasible_cost;
    double x0 = NAN, y0 = NAN;
    bool feasible = false;
    std::string reason;
    RadialMinimum inner;
};

inline LayoutParams linear_zone_params(const Eigen::Vector4d& abcd, const LinearZoneProblem& pb) {
    LayoutParams p;
    p.a = abcd(0);
    p.b = abcd(1);
    p.c = abcd(2);
    p.d = abcd(3);
    p.gamma = pb.gamma;
    p.delta = pb.delta;
    p.extent_z = LayoutParams::default_extent(pb.gamma, pb.delta);
    return p;
}

inline SearchWindow central_window(const LayoutParams& p, double grid = 2.0) {
    const double x = 0.5 * p.c + p.b + p.a;
    return {-x, x, 20.0, 250.0, grid};
}

inline LinearZoneEval evaluate_linear_zone(const Eigen::Vector4d& abcd, const LinearZoneProblem& pb) {
    LinearZoneEval ev;
    for (int i = 0; i < 4; ++i)
        if (!(abcd(i) > 0.0)) {
            ev.reason = "non-positive electrode width";
            return ev;
        }
    if (abcd(1) < pb.b_min) {
        ev.reason = "b below its lower bound";
        return ev;
    }
    try {
        const LayoutParams p = linear_zone_params(abcd, pb);
        BuildOptions bo;
        bo.with_dc = false;
        const TrapModel model(build_layout(p, LinearTransition{}, {}, bo), pb.drive, pb.species);
        const auto cs = find_minima(model, 0.0, central_window(p));
        ev.inner = cs.inner(true);
        ev.x0 = ev.inner.x;
        ev.y0 = ev.inner.y;
        ev.cost = linear_zone_cost_at(ev.x0, ev.y0, pb);
        ev.feasible = true;
    } catch (const Error& e) {
        ev.reason = e.what();
    }
    return ev;
}

inline double cost_linear_zone(double a, double b, double c, double d, const LinearZoneProblem& pb) {
    return evaluate_linear_zone(Eigen::Vector4d(a, b, c, d), pb).cost;
}

struct LinearCandidate {
    int restart = 0;
    std::uint64_t seed = 0;
    Eigen::Vector4d start = Eigen::Vector4d::Zero();
    Eigen::Vector4d widths = Eigen::Vector4d::Zero();
    double cost = infeasible_cost;
    double x0 = NAN, y0 = NAN;
    double depth_mev = NAN;
    double min_width = NAN;
    bool feasible = false;
    bool converged = false;
    int evaluations = 0;
    std::string note;
};

struct LinearZoneResult {
    std::vector<LinearCandidate> candidates;
    std::optional<std::size_t> selected;
    std::string rationale;

    const LinearCandidate& best() const {
        if (!selected) throw InfeasibleError("no feasible linear-zone candidate");
        return candidates[*selected];
    }
};

inline double central_depth_mev(const Eigen::Vector4d& abcd, const LinearZoneProblem& pb, const RadialMinimum& inner) {
    const LayoutParams p = linear_zone_params(abcd, pb);
    BuildOptions bo;
    bo.with_dc = false;
    const TrapModel model(build_layout(p, LinearTransition{}, {}, bo), pb.drive, pb.species);
    const double xw = 0.5 * p.c + 2 * p.b + p.a + p.d + 100.0;
    return escape_depth(model, inner, SearchWindow{-xw, xw, 10.0, 700.0, 2.0}).depth_mev();
}

/// Multi-start Nelder-Mead on (a, b, c, d). Explicit `starts` are used first,
/// then random seeds drawn from a deterministic generator. Starts with
/// b < b_min are discarded without optimizing.
inline LinearZoneResult optimize_linear_zone(const LinearZoneProblem& pb, const NelderMeadConfig& nm, int n_restarts,
                                             std::uint64_t seed, const std::vector<Eigen::Vector4d>& starts = {},
                                             unsigned threads = 1) {
    pb.validate();
    if (n_restarts < 1) throw InputError("n_restarts must be >= 1");
    LinearZoneResult out;
    out.candidates.resize(static_cast<std::size_t>(n_restarts));
    for (int r = 0; r < n_restarts; ++r) {
        auto& c = out.candidates[r];
        c.restart = r;
        c.seed = seed + static_cast<std::uint64_t>(r);
        if (r < static_cast<int>(starts.size())) {
            c.start = starts[r];
        } else {
            std::mt19937_64 rng(c.seed);
            std::uniform_real_distribution<double> u(pb.seed_min, pb.seed_max);
            for (int i = 0; i < 4; ++i) c.start(i) = u(rng);
        }
    }
    parallel_for(out.candidates.size(), threads, [&](std::size_t r) {
        auto& c = out.candidates[r];
        if (c.start(1) < pb.b_min || (c.start.array() <= 0).any()) {
            c.note = "seed violates b >= b_min; discarded";
            return;
        }
        const auto f = [&](const Eigen::VectorXd& x) { return evaluate_linear_zone(x.head<4>(), pb).cost; };
        Eigen::VectorXd x0 = c.start;
        const Eigen::VectorXd step = 0.05 * x0;
        NelderMeadConfig cfg = nm;
        cfg.threads = 1;
        const auto res = nelder_mead(f, x0, step, cfg);
        c.widths = res.x.head<4>();
        c.converged = res.converged;
        c.evaluations = res.evaluations;
        // Re-validate the returned point rather than trusting the search.
        const auto ev = evaluate_linear_zone(c.widths, pb);
        c.cost = ev.cost;
        c.x0 = ev.x0;
        c.y0 = ev.y0;
        c.feasible = ev.feasible && c.widths(1) >= pb.b_min;
        c.min_width = c.widths.minCoeff();
        if (!c.feasible) {
            c.note = ev.reason.empty() ? "infeasible" : ev.reason;
            return;
        }
        try {
            c.depth_mev = central_depth_mev(c.widths, pb, ev.inner);
        } catch (const Error& e) {
            c.note = std::string("depth unavailable: ") + e.what();
        }
    });
    // Highest depth first, then the largest smallest electrode.
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        const auto& c = out.candidates[i];
        if (!c.feasible || !(c.cost <= pb.accept_cost) || !std::isfinite(c.depth_mev)) continue;
        if (!out.selected) {
            out.selected = i;
            continue;
        }
        const auto& s = out.candidates[*out.selected];
        if (c.depth_mev > s.depth_mev || (c.depth_mev == s.depth_mev && c.min_width > s.min_width)) out.selected = i;
    }
    if (!out.selected) throw InfeasibleError("no linear-zone candidate satisfies b >= b_min and reaches the goals");
    out.rationale = "highest central pseudo-potential depth among feasible candidates with cost <= accept_cost; "
                    "ties broken by the largest min(a, b, c, d)";
    return out;
}

// --- (B) transition zone -------------------------------------------------

struct TransitionZoneProblem {
    LayoutParams params = LayoutParams::published();
    Drive drive = Drive::published();
    IonSpecies species = IonSpecies::calcium40();
    double w1 = 1.0;
    double w2 = 1.0;
    std::optional<double> z_F;  // default gamma + 500 µm
    int n_eval = 5000;
    double min_rf_width = 20.0;  // µm
    double min_gap = 30.0;       // µm, b(z) inside the zone
    double perturbation = 0.15;  // of the zone length (z) and rail shift (x)
    int n_internal = 2;
    int spline_samples = 64;

    double z_final() const { return z_F.value_or(params.gamma + 500.0); }

    void validate() const {
        params.validate();
        if (!(w1 >= 0) || !(w2 >= 0) || (w1 == 0 && w2 == 0)) throw InputError("cost weights must be >= 0, not both 0");
        if (n_eval < 3) throw InputError("n_eval must be >= 3");
        if (n_internal < 2) throw InputError("at least two internal control points are required");
        if (!(z_final() > params.gamma + params.delta)) throw InputError("z_F must lie beyond the transition zone");
    }
};

struct TransitionTerms {
    double omega_integral = 0;     // (rad/s)² m, ∫ω² dz over [γ, γ+δ]
    double gradient_integral = 0;  // J, ∫|∂φ/∂t| dz over [0, z_F]
};

struct TransitionEval {
    double cost = infeasible_cost;
    TransitionTerms terms;
    bool feasible = false;
    std::string reason;
    double min_rf_width = NAN;
    double min_gap = NAN;
    double x0_center = NAN, y0_center = NAN;
};

namespace detail {

inline Eigen::Vector2d center_seed(const LayoutParams& p) { return {0.35 * p.c, 90.0}; }

inline TransitionTerms transition_terms(const TrapModel& model, const TransitionZoneProblem& pb,
                                        Eigen::Vector2d* center = nullptr) {
    const auto& p = pb.params;
    RadialOptions ro;
    auto m0 = refine_radial_minimum(model, 0.0, center_seed(p).x(), center_seed(p).y(), ro);
    if (!m0.converged) throw ContinuationError("no inner minimum at z = 0", 0.0);
    if (center) *center = {m0.x, m0.y};
    TraceOptions to;
    to.full_frames = false;
    const RfMinimumPath path = trace_path_n(model, 0.0, pb.z_final(), pb.n_eval, {m0.x, m0.y}, to);
    TransitionTerms t;
    t.omega_integral =
        integrate_path(path, p.gamma, p.gamma + p.delta, [](const PathSample& s) { return s.w2; });
    t.gradient_integral =
        integrate_path(path, 0.0, pb.z_final(), [](const PathSample& s) { return std::abs(s.dphidt); });
    return t;
}

}  // namespace detail

/// Linear-transition reference values used to normalise both cost terms.
inline TransitionTerms transition_baseline(const TransitionZoneProblem& pb) {
    pb.validate();
    BuildOptions bo;
    bo.with_dc = false;
    const TrapModel model(build_layout(pb.params, LinearTransition{}, {}, bo), pb.drive, pb.species);
    return detail::transition_terms(model, pb);
}

inline SplineBoundary spline_from_vector(const TransitionZoneProblem& pb, const Eigen::VectorXd& v) {
    std::vector<Eigen::Vector2d> internal;
    for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) internal.emplace_back(v(i), v(i + 1));
    return SplineBoundary::from_internal(pb.params, internal, pb.spline_samples);
}

inline Eigen::VectorXd vector_from_spline(const SplineBoundary& s) {
    const auto in = s.internal_points();
    Eigen::VectorXd v(2 * in.size());
    for (std::size_t i = 0; i < in.size(); ++i) v.segment<2>(2 * i) = in[i];
    return v;
}

/// Layout, constraints and path terms for one candidate boundary.
inline TransitionEval evaluate_transition_zone(const SplineBoundary& s, const TransitionZoneProblem& pb,
                                               const TransitionTerms& baseline) {
    TransitionEval ev;
    try {
        s.validate(pb.params);
        const RailProfiles r = rail_profiles(pb.params, s);
        const WidthReport w = measure_widths(pb.params, r);
        ev.min_rf_width = w.min_rf_width;
        ev.min_gap = w.min_gap_in_transition;
        BuildOptions bo;
        bo.with_dc = false;
        bo.min_rf_width = pb.min_rf_width;
        const TrapLayout layout = build_layout(pb.params, s, {}, bo);
        if (!(w.min_gap_in_transition > pb.min_gap)) {
            ev.reason = "dc gap inside the transition zone is not wider than the minimum";
            return ev;
        }
        const TrapModel model(layout, pb.drive, pb.species);
        Eigen::Vector2d c;
        ev.terms = detail::transition_terms(model, pb, &c);
        ev.x0_center = c.x();
        ev.y0_center = c.y();
        ev.cost = pb.w1 * ev.terms.omega_integral / baseline.omega_integral +
                  pb.w2 * ev.terms.gradient_integral / baseline.gradient_integral;
        ev.feasible = std::isfinite(ev.cost);
    } catch (const Error& e) {
        ev.reason = e.what();
    }
    return ev;
}

inline double cost_transition_zone(const SplineBoundary& s, const TransitionZoneProblem& pb,
                                   const TransitionTerms& baseline) {
    return evaluate_transition_zone(s, pb, baseline).cost;
}

/// Boundary given by the control points of its 180° image (the outer edge of
/// the same dc gap); the inner boundary is reconstructed by the inversion.
inline SplineBoundary spline_from_outer(const LayoutParams& p, std::span<const Eigen::Vector2d> outer_internal,
                                        int samples = 64) {
    const Eigen::Vector2d c = SplineBoundary::inversion_center(p);
    std::vector<Eigen::Vector2d> inner;
    for (auto it = outer_internal.rbegin(); it != outer_internal.rend(); ++it) inner.push_back(2.0 * c - *it);
    return SplineBoundary::from_internal(p, inner, samples);
}

inline std::vector<Eigen::Vector2d> outer_control_points(const LayoutParams& p, const SplineBoundary& s) {
    const Eigen::Vector2d c = SplineBoundary::inversion_center(p);
    std::vector<Eigen::Vector2d> out;
    const auto in = s.internal_points();
    for (auto it = in.rbegin(); it != in.rend(); ++it) out.push_back(2.0 * c - *it);
    return out;
}

struct TransitionCandidate {
    int restart = 0;
    std::uint64_t seed = 0;
    Eigen::VectorXd start;
    Eigen::VectorXd result;
    TransitionEval eval;
    int evaluations = 0;
    bool converged = false;
};

struct TransitionDesignMetrics {
    PathMetrics linear, optimized;
    double barrier_ratio = NAN;
    double wu_center_linear = NAN, wu_center_optimized = NAN;  // rad/s at z = 0
    double excess_ratio = NAN;  // (max ω_u - ω_u(0)) optimized / linear
    double x0_linear = NAN, y0_linear = NAN, x0_optimized = NAN, y0_optimized = NAN;  // at z = 0
    double max_dx0 = NAN, max_dy0 = NAN;  // largest path difference optimized - linear
};

struct TransitionZoneResult {
    std::vector<TransitionCandidate> candidates;
    std::optional<std::size_t> selected;
    TransitionTerms baseline;
    SplineBoundary boundary;
    TransitionDesignMetrics metrics;

    const TransitionCandidate& best() const {
        if (!selected) throw InfeasibleError("all transition-zone restarts are infeasible");
        return candidates[*selected];
    }
};

/// Evenly spaced internal points on the straight zone boundary.
inline Eigen::VectorXd linear_control_vector(const TransitionZoneProblem& pb) {
    return vector_from_spline(SplineBoundary::straight(pb.params, pb.n_internal, pb.spline_samples));
}

inline Eigen::VectorXd perturbed_start(const TransitionZoneProblem& pb, std::uint64_t seed) {
    Eigen::VectorXd v = linear_control_vector(pb);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-pb.perturbation, pb.perturbation);
    const double sz = pb.params.delta, sx = pb.params.shift();
    for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
        v(i) += u(rng) * sz;
        v(i + 1) += u(rng) * sx;
    }
    return v;
}

/// Compare an optimized boundary against the linear transition with full
/// frames at 1 µm steps over [0, z_F].
inline TransitionDesignMetrics compare_transition_designs(const TransitionZoneProblem& pb, const SplineBoundary& s,
                                                          double dz = 1.0) {
    BuildOptions bo;
    bo.with_dc = false;
    const TrapModel lin(build_layout(pb.params, LinearTransition{}, {}, bo), pb.drive, pb.species);
    const TrapModel opt(build_layout(pb.params, s, {}, bo), pb.drive, pb.species);
    auto trace = [&](const TrapModel& m) {
        auto m0 = refine_radial_minimum(m, 0.0, detail::center_seed(pb.params).x(), detail::center_seed(pb.params).y());
        return trace_path(m, 0.0, pb.z_final(), dz, {m0.x, m0.y});
    };
    const RfMinimumPath pl = trace(lin), po = trace(opt);
    TransitionDesignMetrics d;
    d.linear = path_metrics(pl);
    d.optimized = path_metrics(po);
    d.barrier_ratio = d.optimized.barrier / d.linear.barrier;
    d.wu_center_linear = pl.samples.front().wu;
    d.wu_center_optimized = po.samples.front().wu;
    d.excess_ratio = (d.optimized.max_wu - d.wu_center_optimized) / (d.linear.max_wu - d.wu_center_linear);
    d.x0_linear = pl.samples.front().x0;
    d.y0_linear = pl.samples.front().y0;
    d.x0_optimized = po.samples.front().x0;
    d.y0_optimized = po.samples.front().y0;
    d.max_dx0 = 0;
    d.max_dy0 = 0;
    for (std::size_t i = 0; i < std::min(pl.samples.size(), po.samples.size()); ++i) {
        const double dx = po.samples[i].x0 - pl.samples[i].x0, dy = po.samples[i].y0 - pl.samples[i].y0;
        if (std::abs(dx) > std::abs(d.max_dx0)) d.max_dx0 = dx;
        if (std::abs(dy) > std::abs(d.max_dy0)) d.max_dy0 = dy;
    }
    return d;
}

inline TransitionZoneResult optimize_transition_zone(const TransitionZoneProblem& pb, const NelderMeadConfig& nm,
                                                     int n_restarts, std::uint64_t seed, unsigned threads = 1,
                                                     const std::vector<Eigen::VectorXd>& starts = {}) {
    pb.validate();
    if (n_restarts < 1) throw InputError("n_restarts must be >= 1");
    TransitionZoneResult out;
    out.baseline = transition_baseline(pb);
    out.candidates.resize(static_cast<std::size_t>(n_restarts));
    for (int r = 0; r < n_restarts; ++r) {
        auto& c = out.candidates[r];
        c.restart = r;
        c.seed = seed + static_cast<std::uint64_t>(r);
        c.start = r < static_cast<int>(starts.size()) ? starts[r] : perturbed_start(pb, c.seed);
    }
    parallel_for(out.candidates.size(), threads, [&](std::size_t r) {
        auto& c = out.candidates[r];
        const auto f = [&](const Eigen::VectorXd& x) {
            return cost_transition_zone(spline_from_vector(pb, x), pb, out.baseline);
        };
        Eigen::VectorXd step(c.start.size());
        for (Eigen::Index i = 0; i + 1 < step.size(); i += 2) {
            step(i) = 0.1 * pb.params.delta;
            step(i + 1) = 0.1 * pb.params.shift();
        }
        NelderMeadConfig cfg = nm;
        cfg.threads = 1;
        const auto res = nelder_mead(f, c.start, step, cfg);
        c.result = res.x;
        c.evaluations = res.evaluations;
        c.converged = res.converged;
        c.eval = evaluate_transition_zone(spline_from_vector(pb, res.x), pb, out.baseline);
        // Post-hoc constraint check on the returned point.
        if (c.eval.feasible && !(c.eval.min_rf_width >= pb.min_rf_width && c.eval.min_gap > pb.min_gap))
            c.eval.feasible = false;
    });
    for (std::size_t i = 0; i < out.candidates.size(); ++i) {
        const auto& c = out.candidates[i];
        if (!c.eval.feasible) continue;
        if (!out.selected || c.eval.cost < out.candidates[*out.selected].eval.cost) out.selected = i;
    }
    if (!out.selected) throw InfeasibleError("all transition-zone restarts are infeasible");
    out.boundary = spline_from_vector(pb, out.candidates[*out.selected].result);
    out.metrics = compare_transition_designs(pb, out.boundary);
    return out;
}

// --- manifests -----------------------------------------------------------

inline nlohmann::json to_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline nlohmann::json linear_zone_manifest(const LinearZoneProblem& pb, const LinearZoneResult& r, std::uint64_t seed) {
    nlohmann::json j;
    j["problem"] = {{"x0_goal_um", pb.x0_goal}, {"y0_goal_um", pb.y0_goal}, {"gamma_um", pb.gamma},
                    {"delta_um", pb.delta},     {"b_min_um", pb.b_min},     {"x_weight", pb.x_weight},
                    {"y_weight", pb.y_weight},  {"accept_cost_um2", pb.accept_cost}};
    j["seed"] = seed;
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        j["candidates"].push_back({{"restart", c.restart},
                                   {"seed", c.seed},
                                   {"start_abcd_um", to_json(c.start)},
                                   {"abcd_um", to_json(c.widths)},
                                   {"cost", std::isfinite(c.cost) ? nlohmann::json(c.cost) : nlohmann::json(nullptr)},
                                   {"x0_um", std::isfinite(c.x0) ? nlohmann::json(c.x0) : nlohmann::json(nullptr)},
                                   {"y0_um", std::isfinite(c.y0) ? nlohmann::json(c.y0) : nlohmann::json(nullptr)},
                                   {"depth_meV", std::isfinite(c.depth_mev) ? nlohmann::json(c.depth_mev) : nlohmann::json(nullptr)},
                                   {"feasible", c.feasible},
                                   {"converged", c.converged},
                                   {"evaluations", c.evaluations},
                                   {"note", c.note}});
    }
    j["selected"] = r.selected ? nlohmann::json(*r.selected) : nlohmann::json(nullptr);
    j["selection_rationale"] = r.rationale;
    return j;
}

inline nlohmann::json transition_zone_manifest(const TransitionZoneProblem& pb, const TransitionZoneResult& r,
                                               std::uint64_t seed) {
    nlohmann::json j;
    j["problem"] = {{"w1", pb.w1},
                    {"w2", pb.w2},
                    {"z_F_um", pb.z_final()},
                    {"n_eval", pb.n_eval},
                    {"min_rf_width_um", pb.min_rf_width},
                    {"min_gap_um", pb.min_gap},
                    {"perturbation", pb.perturbation},
                    {"n_internal", pb.n_internal},
                    {"normalisation", "each term divided by its linear-transition value"}};
    j["baseline"] = {{"omega2_integral_rad2_s2_m", r.baseline.omega_integral},
                     {"gradient_integral_J", r.baseline.gradient_integral}};
    j["seed"] = seed;
    j["candidates"] = nlohmann::json::array();
    for (const auto& c : r.candidates) {
        j["candidates"].push_back(
            {{"restart", c.restart},
             {"seed", c.seed},
             {"start_zx_um", to_json(c.start)},
             {"control_zx_um", to_json(c.result)},
             {"cost", std::isfinite(c.eval.cost) ? nlohmann::json(c.eval.cost) : nlohmann::json(nullptr)},
             {"feasible", c.eval.feasible},
             {"reason", c.eval.reason},
             {"min_rf_width_um", std::isfinite(c.eval.min_rf_width) ? nlohmann::json(c.eval.min_rf_width) : nlohmann::json(nullptr)},
             {"min_gap_um", std::isfinite(c.eval.min_gap) ? nlohmann::json(c.eval.min_gap) : nlohmann::json(nullptr)},
             {"evaluations", c.evaluations},
             {"converged", c.converged}});
    }
    j["selected"] = r.selected ? nlohmann::json(*r.selected) : nlohmann::json(nullptr);
    j["selection_rationale"] = "lowest cost among restarts satisfying every constraint (re-validated)";
    const auto& m = r.metrics;
    j["metrics"] = {{"barrier_linear_meV", m.linear.barrier_mev()},
                    {"barrier_optimized_meV", m.optimized.barrier_mev()},
                    {"barrier_ratio", m.barrier_ratio},
                    {"radial_excess_ratio", m.excess_ratio},
                    {"max_wu_linear_mhz", rad_s_to_mhz(m.linear.max_wu)},
                    {"max_wu_optimized_mhz", rad_s_to_mhz(m.optimized.max_wu)},
                    {"x0_center_linear_um", m.x0_linear},
                    {"x0_center_optimized_um", m.x0_optimized},
                    {"y0_center_linear_um", m.y0_linear},
                    {"y0_center_optimized_um", m.y0_optimized},
                    {"max_dx0_um", m.max_dx0},
                    {"max_dy0_um", m.max_dy0}};
    return j;
}

}  // namespace surftrap
