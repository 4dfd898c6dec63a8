#pragma once

// Nelder-Mead downhill simplex with the standard coefficients. Infeasible
// points are expressed as +inf costs and simply lose every comparison.

#include "surftrap/error.hpp"
#include "surftrap/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace surftrap {

struct NelderMeadConfig {
    double reflection = 1.0;   // α
    double expansion = 2.0;    // χ
    double contraction = 0.5;  // γ_c
    double shrink = 0.5;       // σ
    double x_tol = 1e-8;       // max vertex distance from the best vertex
    double f_tol = 1e-12;      // cost spread across the simplex
    int max_iter = 5000;
    int max_evals = 20000;
    unsigned threads = 1;      // concurrent evaluation during initialisation and shrink

    void validate() const {
        if (!(reflection > 0) || !(expansion > 1) || !(contraction > 0 && contraction < 1) ||
            !(shrink > 0 && shrink < 1))
            throw InputError("Nelder-Mead coefficients outside their standard ranges");
        if (max_iter < 1 || max_evals < 1) throw InputError("Nelder-Mead iteration limits must be positive");
    }
};

struct NelderMeadResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

using CostFunction = std::function<double(const Eigen::VectorXd&)>;

/// Axis-aligned initial simplex: x0 plus one step along each coordinate.
inline std::vector<Eigen::VectorXd> axis_simplex(const Eigen::VectorXd& x0, const Eigen::VectorXd& step) {
    std::vector<Eigen::VectorXd> s{x0};
    for (int i = 0; i < x0.size(); ++i) {
        Eigen::VectorXd v = x0;
        v(i) += step(i);
        s.push_back(v);
    }
    return s;
}

inline NelderMeadResult nelder_mead(const CostFunction& f, std::vector<Eigen::VectorXd> simplex,
                                    const NelderMeadConfig& cfg = {}) {
    cfg.validate();
    const std::size_t n = simplex.empty() ? 0 : static_cast<std::size_t>(simplex[0].size());
    if (n == 0 || simplex.size() != n + 1) throw InputError("Nelder-Mead needs n+1 vertices in n dimensions");
    NelderMeadResult res;
    auto eval = [&](const Eigen::VectorXd& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    std::vector<double> fv(n + 1);
    parallel_for(n + 1, cfg.threads, [&](std::size_t i) {
        const double v = f(simplex[i]);
        fv[i] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    });
    res.evaluations += static_cast<int>(n + 1);

    std::vector<std::size_t> order(n + 1);
    auto sort = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };
    for (res.iterations = 0; res.iterations < cfg.max_iter && res.evaluations < cfg.max_evals; ++res.iterations) {
        sort();
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        double size = 0.0;
        for (std::size_t i = 0; i <= n; ++i) size = std::max(size, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
        const double spread = fv[worst] - fv[best];
        if (size <= cfg.x_tol && std::isfinite(spread) && spread <= cfg.f_tol) {
            res.converged = true;
            break;
        }
        Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) c += simplex[order[k]];
        c /= static_cast<double>(n);

        const Eigen::VectorXd xr = c + cfg.reflection * (c - simplex[worst]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Eigen::VectorXd xe = c + cfg.expansion * (xr - c);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        if (fr < fv[worst]) {
            const Eigen::VectorXd xc = c + cfg.contraction * (xr - c);
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex[worst] = xc;
                fv[worst] = fc;
                continue;
            }
        } else {
            const Eigen::VectorXd xc = c + cfg.contraction * (simplex[worst] - c);
            const double fc = eval(xc);
            if (fc < fv[worst]) {
                simplex[worst] = xc;
                fv[worst] = fc;
                continue;
            }
        }
        // Shrink towards the best vertex.
        std::vector<std::size_t> moved;
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            simplex[i] = simplex[best] + cfg.shrink * (simplex[i] - simplex[best]);
            moved.push_back(i);
        }
        parallel_for(moved.size(), cfg.threads, [&](std::size_t k) {
            const double v = f(simplex[moved[k]]);
            fv[moved[k]] = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
        });
        res.evaluations += static_cast<int>(moved.size());
    }
    sort();
    res.x = simplex[order.front()];
    res.f = fv[order.front()];
    return res;
}

inline NelderMeadResult nelder_mead(const CostFunction& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                                    const NelderMeadConfig& cfg = {}) {
    return nelder_mead(f, axis_simplex(x0, step), cfg);
}

}  // namespace surftrap
