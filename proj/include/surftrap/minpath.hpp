#pragma once

// Radial pseudo-potential minima, rf-minimum path continuation with a moving
// frame (t, u, v), and the energy metrics derived from them.

#include "surftrap/error.hpp"
#include "surftrap/parallel.hpp"
#include "surftrap/trap_model.hpp"
#include "surftrap/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

namespace surftrap {

inline constexpr double joule_per_m_per_mev_um = joule_per_mev / um_to_m;  // 1 meV/µm in J/m

struct RadialOptions {
    // |∇_r φ_PP| tolerance: 1e-9 of a 100 meV depth scale per µm.
    double g_tol_mev_um = 1e-7;
    int max_iter = 60;
    int exact_after = 8;       // Gauss-Newton first, then the exact Hessian
    double max_step_um = 5.0;
    bool exact_final = true;   // exact radial Hessian at the converged point
};

struct RadialMinimum {
    double x = 0, y = 0, z = 0;                            // µm
    double phi = 0;                                        // J
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();        // J/m, full 3D
    Eigen::Matrix2d H_rr = Eigen::Matrix2d::Zero();        // J/m², radial block
    int iterations = 0;
    bool converged = false;
    bool exact_hessian = false;

    double radial_gradient_mev_um() const { return grad.head<2>().norm() / joule_per_m_per_mev_um; }
    double phi_mev() const { return to_mev(phi); }
};

namespace detail {

inline bool positive_definite(const Eigen::Matrix2d& H) { return H(0, 0) > 0 && H.determinant() > 0; }

inline Eigen::Matrix2d radial_block(const Eigen::Matrix3d& H) { return H.topLeftCorner<2, 2>(); }

}  // namespace detail

/// Damped Newton descent on the radial gradient at fixed z. `hint` is an
/// optional radial Hessian (chord method) used instead of Gauss-Newton.
inline RadialMinimum refine_radial_minimum(const TrapModel& model, double z, double x, double y,
                                           const RadialOptions& opt = {}, const Eigen::Matrix2d* hint = nullptr) {
    if (!(y > 0.0)) throw InputError("radial search start must lie above the chip plane");
    const double g_tol = opt.g_tol_mev_um * joule_per_m_per_mev_um;
    RadialMinimum m;
    m.z = z;
    Eigen::Vector2d q(x * um_to_m, y * um_to_m);
    const double zs = z * um_to_m;
    auto eval = [&](const Eigen::Vector2d& r) { return model.pp_jet(Eigen::Vector3d(r.x(), r.y(), zs)); };
    PseudoJet jet = eval(q);
    for (int it = 0; it < opt.max_iter; ++it) {
        m.iterations = it;
        Eigen::Vector2d g = jet.grad.head<2>();
        if (g.norm() < g_tol) {
            m.converged = true;
            break;
        }
        Eigen::Matrix2d H;
        bool exact = false;
        if (it >= opt.exact_after) {
            const auto j2 = model.pp_jet2(Eigen::Vector3d(q.x(), q.y(), zs));
            H = detail::radial_block(j2.H);
            exact = detail::positive_definite(H);
        }
        if (!exact) {
            if (hint && detail::positive_definite(*hint) && it < opt.exact_after)
                H = *hint;
            else
                H = detail::radial_block(jet.gauss_newton);
        }
        // Levenberg damping keeps the step finite on flat directions.
        H.diagonal().array() += 1e-12 * H.trace() + 1e-300;
        Eigen::Vector2d step = -H.ldlt().solve(g);
        const double max_step = opt.max_step_um * um_to_m;
        if (step.norm() > max_step) step *= max_step / step.norm();
        // Backtrack until φ or |g| decreases.
        double t = 1.0;
        PseudoJet next;
        Eigen::Vector2d qn;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            qn = q + t * step;
            if (qn.y() <= 0.0) {
                t *= 0.5;
                continue;
            }
            next = eval(qn);
            const double slack = 1e-14 * std::abs(jet.phi);
            if (next.phi <= jet.phi + slack || next.grad.head<2>().norm() < g.norm()) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        q = qn;
        jet = next;
        m.iterations = it + 1;
    }
    if (jet.grad.head<2>().norm() < g_tol) m.converged = true;
    m.x = q.x() * m_to_um;
    m.y = q.y() * m_to_um;
    m.phi = jet.phi;
    m.grad = jet.grad;
    if (opt.exact_final) {
        const auto j2 = model.pp_jet2(Eigen::Vector3d(q.x(), q.y(), zs));
        m.H_rr = detail::radial_block(j2.H);
        m.exact_hessian = true;
    } else {
        m.H_rr = hint ? *hint : detail::radial_block(jet.gauss_newton);
    }
    return m;
}

// --- cross sections ------------------------------------------------------

struct SearchWindow {
    double x_min = -400, x_max = 400;  // µm
    double y_min = 20, y_max = 300;    // µm
    double grid_um = 2.0;

    void validate() const {
        if (!(y_min > 0.0)) throw InputError("search window must lie above the chip plane (y_min > 0)");
        if (!(x_max > x_min) || !(y_max > y_min)) throw InputError("search window is empty");
        if (!(grid_um > 0.0)) throw InputError("search grid spacing must be positive");
    }
    int nx() const { return static_cast<int>(std::floor((x_max - x_min) / grid_um + 1e-9)) + 1; }
    int ny() const { return static_cast<int>(std::floor((y_max - y_min) / grid_um + 1e-9)) + 1; }
    double x(int i) const { return x_min + i * grid_um; }
    double y(int j) const { return y_min + j * grid_um; }
};

/// φ_PP (J) on the window grid at fixed z; row-major, index j * nx + i.
struct CrossSectionGrid {
    SearchWindow window;
    double z = 0;
    std::vector<double> phi;

    double at(int i, int j) const { return phi[static_cast<std::size_t>(j) * window.nx() + i]; }
};

inline CrossSectionGrid scan_cross_section(const TrapModel& model, double z, const SearchWindow& w,
                                           unsigned threads = 1) {
    w.validate();
    CrossSectionGrid g{w, z, {}};
    const int nx = w.nx(), ny = w.ny();
    g.phi.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    parallel_for(static_cast<std::size_t>(ny), threads, [&](std::size_t j) {
        for (int i = 0; i < nx; ++i)
            g.phi[j * nx + i] = model.phi_pp(Point3{w.x(i), w.y(static_cast<int>(j)), z}.si());
    });
    return g;
}

enum class MinimumClass { inner, outer };

inline const char* to_string(MinimumClass c) { return c == MinimumClass::inner ? "inner" : "outer"; }

struct ClassifiedMinimum {
    RadialMinimum minimum;
    MinimumClass kind = MinimumClass::outer;
};

struct CrossSectionMinima {
    double z = 0;
    std::vector<ClassifiedMinimum> minima;  // sorted by x

    /// Inner minimum on the requested side (x >= 0 when `positive_side`).
    const RadialMinimum& inner(bool positive_side = true) const {
        for (const auto& m : minima)
            if (m.kind == MinimumClass::inner && (m.minimum.x >= 0) == positive_side) return m.minimum;
        throw InfeasibleError("no inner minimum on the requested side");
    }
};

class NoMinimumError : public InfeasibleError {
public:
    using InfeasibleError::InfeasibleError;
};

/// Discrete local minima of the grid (strictly below all 8 neighbours),
/// refined, deduplicated within 0.1 µm and classified: on each side of x = 0
/// the minimum closest to the axis is inner, the rest outer.
inline CrossSectionMinima find_minima(const TrapModel& model, double z, const SearchWindow& w,
                                      const RadialOptions& opt = {}, unsigned threads = 1) {
    const CrossSectionGrid g = scan_cross_section(model, z, w, threads);
    const int nx = w.nx(), ny = w.ny();
    std::vector<std::pair<int, int>> seeds;
    for (int j = 1; j + 1 < ny; ++j)
        for (int i = 1; i + 1 < nx; ++i) {
            const double v = g.at(i, j);
            bool is_min = true;
            for (int dj = -1; dj <= 1 && is_min; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if ((di || dj) && !(v < g.at(i + di, j + dj))) {
                        is_min = false;
                        break;
                    }
            if (is_min) seeds.emplace_back(i, j);
        }
    std::vector<RadialMinimum> refined(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t k) {
        refined[k] = refine_radial_minimum(model, z, w.x(seeds[k].first), w.y(seeds[k].second), opt);
    });
    CrossSectionMinima out;
    out.z = z;
    for (const auto& m : refined) {
        if (!m.converged || !detail::positive_definite(m.H_rr)) continue;
        if (m.x < w.x_min || m.x > w.x_max || m.y < w.y_min || m.y > w.y_max) continue;
        bool dup = false;
        for (const auto& o : out.minima)
            if (std::hypot(o.minimum.x - m.x, o.minimum.y - m.y) < 0.1) dup = true;
        if (!dup) out.minima.push_back({m, MinimumClass::outer});
    }
    if (out.minima.empty()) {
        std::ostringstream os;
        os << "no pseudo-potential minimum found in the window at z = " << z << " um";
        throw NoMinimumError(os.str());
    }
    std::sort(out.minima.begin(), out.minima.end(),
              [](const ClassifiedMinimum& a, const ClassifiedMinimum& b) { return a.minimum.x < b.minimum.x; });
    for (bool pos : {true, false}) {
        ClassifiedMinimum* best = nullptr;
        for (auto& m : out.minima)
            if ((m.minimum.x >= 0) == pos && (!best || std::abs(m.minimum.x) < std::abs(best->minimum.x))) best = &m;
        if (best) best->kind = MinimumClass::inner;
    }
    return out;
}

// --- barriers ------------------------------------------------------------

struct SaddlePoint {
    double x = 0, y = 0, z = 0;  // µm
    double phi = 0;              // J
    bool refined = false;        // Newton-polished from the grid estimate
};

namespace detail {

// Bottleneck (minimax) flood over the 4-connected grid from `start` until a
// cell satisfying `is_target` is reached. Returns the saddle cell.
template <class Target>
std::pair<int, int> minimax_flood(const CrossSectionGrid& g, int si, int sj, Target is_target) {
    const int nx = g.window.nx(), ny = g.window.ny();
    std::vector<char> seen(static_cast<std::size_t>(nx) * ny, 0);
    using Item = std::tuple<double, int, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(g.at(si, sj), si, sj);
    double level = -INFINITY;
    std::pair<int, int> saddle{si, sj};
    while (!pq.empty()) {
        auto [v, i, j] = pq.top();
        pq.pop();
        auto& s = seen[static_cast<std::size_t>(j) * nx + i];
        if (s) continue;
        s = 1;
        if (v > level) {
            level = v;
            saddle = {i, j};
        }
        if (is_target(i, j)) return saddle;
        const int di[] = {1, -1, 0, 0}, dj[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int a = i + di[k], b = j + dj[k];
            if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
            if (!seen[static_cast<std::size_t>(b) * nx + a]) pq.emplace(g.at(a, b), a, b);
        }
    }
    throw InfeasibleError("flood fill never reached its target");
}

inline std::pair<int, int> nearest_cell(const SearchWindow& w, double x, double y) {
    const int i = std::clamp(static_cast<int>(std::lround((x - w.x_min) / w.grid_um)), 0, w.nx() - 1);
    const int j = std::clamp(static_cast<int>(std::lround((y - w.y_min) / w.grid_um)), 0, w.ny() - 1);
    return {i, j};
}

}  // namespace detail

/// Newton iteration on ∇_r φ_PP = 0 with the exact Hessian; converges to the
/// index-1 saddle near the start. Falls back to the start on failure.
inline SaddlePoint refine_saddle(const TrapModel& model, double z, double x, double y, double max_shift_um = 5.0,
                                 const RadialOptions& opt = {}) {
    const double g_tol = opt.g_tol_mev_um * joule_per_m_per_mev_um;
    const double zs = z * um_to_m;
    Eigen::Vector2d q0(x * um_to_m, y * um_to_m), q = q0;
    SaddlePoint s{x, y, z, model.phi_pp(Point3{x, y, z}.si()), false};
    for (int it = 0; it < 50; ++it) {
        const auto j = model.pp_jet2(Eigen::Vector3d(q.x(), q.y(), zs));
        const Eigen::Vector2d g = j.grad.head<2>();
        if (g.norm() < g_tol) {
            if ((q - q0).norm() * m_to_um <= max_shift_um && j.H.topLeftCorner<2, 2>().determinant() < 0) {
                s = {q.x() * m_to_um, q.y() * m_to_um, z, j.phi, true};
            }
            return s;
        }
        Eigen::Vector2d step = -j.H.topLeftCorner<2, 2>().fullPivLu().solve(g);
        const double cap = 0.5 * um_to_m;
        if (step.norm() > cap) step *= cap / step.norm();
        q += step;
        if (q.y() <= 0.0) break;
    }
    return s;
}

/// Depth of a radial minimum: lowest saddle over which the ion can leave the
/// window through its top or sides, minus the minimum value.
struct EscapeDepth {
    double depth = 0;  // J
    SaddlePoint saddle;
    double depth_mev() const { return to_mev(depth); }
};

inline EscapeDepth escape_depth(const TrapModel& model, const RadialMinimum& m, const SearchWindow& w,
                                unsigned threads = 1) {
    const CrossSectionGrid g = scan_cross_section(model, m.z, w, threads);
    const auto [si, sj] = detail::nearest_cell(w, m.x, m.y);
    const int nx = w.nx(), ny = w.ny();
    const auto cell = detail::minimax_flood(g, si, sj, [&](int i, int j) { return i == 0 || i == nx - 1 || j == ny - 1; });
    EscapeDepth d;
    d.saddle = refine_saddle(model, m.z, w.x(cell.first), w.y(cell.second), 2.0 * w.grid_um);
    if (!d.saddle.refined) d.saddle.phi = g.at(cell.first, cell.second);
    d.depth = d.saddle.phi - m.phi;
    return d;
}

/// Barrier between two minima of one cross-section (minimax path).
struct WellBarrier {
    double barrier = 0;  // J, above the higher of the two minima
    SaddlePoint saddle;
    double barrier_mev() const { return to_mev(barrier); }
};

inline WellBarrier inter_well_barrier(const TrapModel& model, const RadialMinimum& a, const RadialMinimum& b,
                                      const SearchWindow& w, unsigned threads = 1) {
    if (a.z != b.z) throw InputError("inter-well barrier needs minima of the same cross-section");
    const CrossSectionGrid g = scan_cross_section(model, a.z, w, threads);
    const auto [si, sj] = detail::nearest_cell(w, a.x, a.y);
    const auto target = detail::nearest_cell(w, b.x, b.y);
    const auto cell = detail::minimax_flood(g, si, sj, [&](int i, int j) { return i == target.first && j == target.second; });
    WellBarrier out;
    out.saddle = refine_saddle(model, a.z, w.x(cell.first), w.y(cell.second), 2.0 * w.grid_um);
    if (!out.saddle.refined) out.saddle.phi = g.at(cell.first, cell.second);
    out.barrier = out.saddle.phi - std::max(a.phi, b.phi);
    return out;
}

// --- path continuation ---------------------------------------------------

struct PathSample {
    double z = 0, x0 = 0, y0 = 0;  // µm
    Eigen::Vector3d t = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d u = Eigen::Vector3d::UnitX();
    Eigen::Vector3d v = Eigen::Vector3d::UnitY();
    double phi = 0;          // J
    double wu = NAN, wv = NAN;  // rad/s, radial secular frequencies (u stiffer)
    double w2 = 0;           // (rad/s)², tr(H_pp)/m
    double dphidt = 0;       // J/m, t̂·∇φ_PP
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();  // J/m
    bool degenerate = false;
};

struct RfMinimumPath {
    std::vector<PathSample> samples;
    bool full_frames = true;
};

struct TraceOptions {
    bool full_frames = true;    // exact Hessians and frames at every sample
    RadialOptions radial{1e-7, 60, 8, 5.0, false};
    double continuity_per_um = 5.0;  // |Δ(x0,y0)| bound per µm of dz
    double continuity_floor_um = 0.5;
    double branch_tol = 1e-4;   // λ_min/λ_max of the radial Hessian
    double degenerate_tol = 1e-6;
    int hessian_refresh = 16;   // light mode: exact radial Hessian every k samples
};

class ContinuationError : public ConvergenceError {
public:
    ContinuationError(const std::string& msg, double last_good_z) : ConvergenceError(msg), last_good_z(last_good_z) {}
    double last_good_z;
};

class BranchError : public ConvergenceError {
public:
    BranchError(const std::string& msg, double z) : ConvergenceError(msg), z(z) {}
    double z;
};

namespace detail {

// Two unit vectors spanning the plane orthogonal to t.
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> normal_plane(const Eigen::Vector3d& t) {
    Eigen::Vector3d a = Eigen::Vector3d::UnitX() - t.x() * t;
    if (a.norm() < 1e-6) a = Eigen::Vector3d::UnitY() - t.y() * t;
    a.normalize();
    Eigen::Vector3d b = t.cross(a).normalized();
    return {a, b};
}

inline void fill_frame(PathSample& s, const Eigen::Matrix3d& H, double mass, const PathSample* prev,
                       double degenerate_tol) {
    const Eigen::Matrix2d Hrr = H.topLeftCorner<2, 2>();
    const Eigen::Vector2d Hrz = H.block<2, 1>(0, 2);
    const Eigen::Vector2d drdz = -Hrr.ldlt().solve(Hrz);
    s.t = Eigen::Vector3d(drdz.x(), drdz.y(), 1.0).normalized();
    const auto [a, b] = normal_plane(s.t);
    Eigen::Matrix<double, 3, 2> E;
    E.col(0) = a;
    E.col(1) = b;
    const Eigen::Matrix2d M = E.transpose() * H * E;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (M + M.transpose()));
    const double l_hi = es.eigenvalues()(1), l_lo = es.eigenvalues()(0);
    Eigen::Vector3d u = (E * es.eigenvectors().col(1)).normalized();
    if (prev) {
        if (u.dot(prev->u) < 0) u = -u;
    } else {
        int k = 0;
        u.cwiseAbs().maxCoeff(&k);
        if (u(k) < 0) u = -u;
    }
    // Re-orthogonalise against t to machine precision.
    u = (u - u.dot(s.t) * s.t).normalized();
    s.u = u;
    s.v = s.t.cross(u).normalized();
    s.wu = std::sqrt(std::max(l_hi, 0.0) / mass);
    s.wv = std::sqrt(std::max(l_lo, 0.0) / mass);
    s.degenerate = std::abs(l_hi - l_lo) <= degenerate_tol * std::abs(l_hi);
}

}  // namespace detail

/// Predictor-corrector continuation of the radial minimum from z_start to
/// z_end over n evenly spaced samples, starting from `seed` = (x, y) µm.
inline RfMinimumPath trace_path_n(const TrapModel& model, double z_start, double z_end, int n,
                                  Eigen::Vector2d seed, const TraceOptions& opt = {}) {
    if (n < 2) throw InputError("a path needs at least 2 samples");
    const double dz = (z_end - z_start) / (n - 1);
    const double mass = model.species().mass;
    RfMinimumPath path;
    path.full_frames = opt.full_frames;
    path.samples.reserve(n);
    std::vector<Eigen::Vector2d> pos;
    pos.reserve(n);
    Eigen::Matrix2d hint = Eigen::Matrix2d::Zero();
    bool have_hint = false;
    for (int i = 0; i < n; ++i) {
        const double z = (i + 1 == n) ? z_end : z_start + i * dz;
        Eigen::Vector2d pred = seed;
        if (i >= 3)
            pred = 3.0 * pos[i - 1] - 3.0 * pos[i - 2] + pos[i - 3];
        else if (i >= 2)
            pred = 2.0 * pos[i - 1] - pos[i - 2];
        else if (i == 1)
            pred = pos[0];
        const bool refresh = opt.full_frames || !have_hint || (i % std::max(1, opt.hessian_refresh) == 0);
        RadialOptions ropt = opt.radial;
        ropt.exact_final = refresh;
        RadialMinimum m = refine_radial_minimum(model, z, pred.x(), pred.y(), ropt, have_hint ? &hint : nullptr);
        if (!m.converged && !refresh) {
            // Retry with a fresh exact Hessian before giving up.
            ropt.exact_final = true;
            m = refine_radial_minimum(model, z, pred.x(), pred.y(), ropt, nullptr);
        }
        const double last_good = path.samples.empty() ? z_start : path.samples.back().z;
        if (!m.converged) {
            std::ostringstream os;
            os << "continuation lost at z = " << z << " um (radial minimum did not converge); last good z = "
               << last_good << " um";
            throw ContinuationError(os.str(), last_good);
        }
        const Eigen::Vector2d here(m.x, m.y);
        if (i > 0) {
            const double bound = opt.continuity_per_um * std::abs(dz) + opt.continuity_floor_um;
            if ((here - pos[i - 1]).norm() > bound) {
                std::ostringstream os;
                os << "continuation lost at z = " << z << " um (jump of " << (here - pos[i - 1]).norm()
                   << " um); last good z = " << last_good << " um";
                throw ContinuationError(os.str(), last_good);
            }
        }
        if (m.exact_hessian) {
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m.H_rr);
            const double lo = es.eigenvalues()(0), hi = es.eigenvalues()(1);
            if (!(lo > opt.branch_tol * hi)) {
                std::ostringstream os;
                os << "path branches near z = " << z << " um: radial minimum merges with a neighbouring extremum"
                   << " (curvature ratio " << lo / hi << ")";
                throw BranchError(os.str(), z);
            }
            hint = m.H_rr;
            have_hint = true;
        }
        pos.push_back(here);
        PathSample s;
        s.z = z;
        s.x0 = m.x;
        s.y0 = m.y;
        if (opt.full_frames) {
            const auto j2 = model.pp_jet2(Point3{m.x, m.y, z}.si());
            s.phi = j2.phi;
            s.grad = j2.grad;
            s.w2 = 2.0 * model.pp_prefactor() * j2.J.squaredNorm() / mass;
            detail::fill_frame(s, j2.H, mass, path.samples.empty() ? nullptr : &path.samples.back(),
                               opt.degenerate_tol);
            s.dphidt = s.t.dot(s.grad);
        } else {
            const auto j = model.pp_jet(Point3{m.x, m.y, z}.si());
            s.phi = j.phi;
            s.grad = j.grad;
            s.w2 = j.trace / mass;
        }
        path.samples.push_back(s);
    }
    if (!opt.full_frames) {
        // Tangent from second-order differences of the converged positions.
        const int N = static_cast<int>(path.samples.size());
        for (int i = 0; i < N; ++i) {
            Eigen::Vector2d d;
            if (i == 0)
                d = (-3.0 * pos[0] + 4.0 * pos[1] - pos[std::min(2, N - 1)]) / (2.0 * dz);
            else if (i == N - 1)
                d = (3.0 * pos[N - 1] - 4.0 * pos[N - 2] + pos[std::max(N - 3, 0)]) / (2.0 * dz);
            else
                d = (pos[i + 1] - pos[i - 1]) / (2.0 * dz);
            if (N < 3) d = (pos[N - 1] - pos[0]) / ((N - 1) * dz);
            auto& s = path.samples[i];
            s.t = Eigen::Vector3d(d.x(), d.y(), 1.0).normalized();
            const auto [a, b] = detail::normal_plane(s.t);
            s.u = a;
            s.v = b;
            s.dphidt = s.t.dot(s.grad);
        }
    }
    return path;
}

inline RfMinimumPath trace_path(const TrapModel& model, double z_start, double z_end, double dz,
                                Eigen::Vector2d seed, const TraceOptions& opt = {}) {
    if (!(dz > 0.0)) throw InputError("path step dz must be positive");
    const int n = std::max(2, static_cast<int>(std::lround(std::abs(z_end - z_start) / dz)) + 1);
    return trace_path_n(model, z_start, z_end, n, seed, opt);
}

/// Path point (x0, y0) at axial position z, linear between samples.
inline Point3 interpolate_path(const RfMinimumPath& path, double z) {
    const auto& s = path.samples;
    if (s.empty()) throw InputError("path has no samples");
    const double zlo = std::min(s.front().z, s.back().z), zhi = std::max(s.front().z, s.back().z);
    if (z < zlo - 1e-9 || z > zhi + 1e-9) throw InputError("position lies outside the traced path");
    if (s.size() == 1) return {s[0].x0, s[0].y0, z};
    const double dir = s.back().z >= s.front().z ? 1.0 : -1.0;
    std::size_t k = 1;
    while (k + 1 < s.size() && (s[k].z - z) * dir < 0) ++k;
    const auto& a = s[k - 1];
    const auto& b = s[k];
    const double f = b.z == a.z ? 0.0 : (z - a.z) / (b.z - a.z);
    return {a.x0 + f * (b.x0 - a.x0), a.y0 + f * (b.y0 - a.y0), z};
}

/// Trapezoid integral of f(sample) dz over samples with z in [z0, z1].
template <class F>
double integrate_path(const RfMinimumPath& path, double z0, double z1, F f) {
    double acc = 0.0;
    const auto& s = path.samples;
    const double lo = std::min(z0, z1), hi = std::max(z0, z1);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double za = s[i - 1].z, zb = s[i].z;
        if (std::min(za, zb) < lo - 1e-9 || std::max(za, zb) > hi + 1e-9) continue;
        acc += 0.5 * (f(s[i - 1]) + f(s[i])) * std::abs(zb - za) * um_to_m;
    }
    return acc;
}

struct PathMetrics {
    double barrier = 0;             // J, max φ - φ(start)
    double barrier_vs_min = 0;      // J, max φ - min φ
    double z_at_max = 0;            // µm
    double max_wu = 0, max_wv = 0;  // rad/s
    double max_w2 = 0;              // (rad/s)²
    double tangential_integral = 0; // J, ∫|∂φ/∂t| dz

    double barrier_mev() const { return to_mev(barrier); }
};

inline PathMetrics path_metrics(const RfMinimumPath& path) {
    if (path.samples.size() < 2) throw InputError("path metrics need at least 2 samples");
    PathMetrics m;
    const auto& s = path.samples;
    double lo = s.front().phi, hi = s.front().phi;
    m.z_at_max = s.front().z;
    for (const auto& p : s) {
        if (p.phi > hi) {
            hi = p.phi;
            m.z_at_max = p.z;
        }
        lo = std::min(lo, p.phi);
        if (std::isfinite(p.wu)) m.max_wu = std::max(m.max_wu, p.wu);
        if (std::isfinite(p.wv)) m.max_wv = std::max(m.max_wv, p.wv);
        m.max_w2 = std::max(m.max_w2, p.w2);
    }
    m.barrier = hi - s.front().phi;
    m.barrier_vs_min = hi - lo;
    m.tangential_integral =
        integrate_path(path, s.front().z, s.back().z, [](const PathSample& p) { return std::abs(p.dphidt); });
    return m;
}

/// Columnar export: z, x0, y0 (µm), phi_pp_meV, wu, wv (MHz, ω/2π), w2
/// ((rad/s)²), dphidt (meV/µm). `header` lines are written with a '#' prefix.
inline void write_path_columns(std::ostream& os, const RfMinimumPath& path, const std::vector<std::string>& header = {}) {
    for (const auto& h : header) os << "# " << h << '\n';
    os << "# columns: z_um\tx0_um\ty0_um\tphi_pp_meV\twu_mhz\twv_mhz\tw2_rad2_s2\tdphidt_meV_per_um\n";
    os << "z\tx0\ty0\tphi_pp_meV\twu\twv\tw2\tdphidt\n";
    const auto prec = os.precision();
    os << std::setprecision(10);
    for (const auto& s : path.samples) {
        os << s.z << '\t' << s.x0 << '\t' << s.y0 << '\t' << to_mev(s.phi) << '\t' << rad_s_to_mhz(s.wu) << '\t'
           << rad_s_to_mhz(s.wv) << '\t' << s.w2 << '\t' << s.dphidt / joule_per_m_per_mev_um << '\n';
    }
    os.precision(prec);
}

}  // namespace surftrap
