#pragma once

// Stored results of expensive searches, kept so that regressions and the CLI
// can re-evaluate them in seconds.

#include "surftrap/error.hpp"
#include "surftrap/geometry.hpp"
#include "surftrap/nelder_mead.hpp"

#include <array>

namespace surftrap::designs {

/// Search settings that produced optimized_transition().
inline constexpr int transition_restarts = 2;
inline constexpr unsigned transition_seed = 42;

inline NelderMeadConfig transition_search_config() {
    NelderMeadConfig c;
    c.max_evals = 400;
    c.x_tol = 0.05;
    c.f_tol = 1e-5;
    return c;
}

/// Selected candidate of optimize_transition_zone on the published layout with
/// default TransitionZoneProblem, the settings above and transition_seed.
/// Internal control points as (z, x) in µm.
inline SplineBoundary optimized_transition() {
    const std::array<Eigen::Vector2d, 2> internal{Eigen::Vector2d{747.1463271422002, -6.944848843456855},
                                                  Eigen::Vector2d{564.0385261219483, 161.2255945823473}};
    return SplineBoundary::from_internal(LayoutParams::published(), internal);
}

/// The stored boundary only makes sense for the geometry it was optimized on.
inline SplineBoundary optimized_transition_for(const LayoutParams& p) {
    const LayoutParams q = LayoutParams::published();
    if (p.a != q.a || p.b != q.b || p.c != q.c || p.d != q.d || p.gamma != q.gamma || p.delta != q.delta)
        throw InputError("the stored optimized transition exists only for the published a, b, c, d, gamma, delta; "
                         "run optimize-zone for other parameters");
    return optimized_transition();
}

}  // namespace surftrap::designs
