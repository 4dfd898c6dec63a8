#pragma once

// Clamped uniform B-spline curves (de Boor evaluation).

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace surftrap {

template <class Point = Eigen::Vector2d>
class BSpline {
public:
    BSpline(std::vector<Point> control, int degree) : control_(std::move(control)), degree_(degree) {
        if (degree_ < 1) throw std::invalid_argument("B-spline degree must be >= 1");
        if (control_.size() < static_cast<std::size_t>(degree_) + 1)
            throw std::invalid_argument("B-spline needs at least degree+1 control points");
        const int n = static_cast<int>(control_.size());
        const int m = n + degree_ + 1;
        knots_.resize(m);
        const int interior = n - degree_;
        for (int i = 0; i < m; ++i) {
            if (i <= degree_)
                knots_[i] = 0.0;
            else if (i >= n)
                knots_[i] = 1.0;
            else
                knots_[i] = static_cast<double>(i - degree_) / interior;
        }
    }

    int degree() const { return degree_; }
    const std::vector<Point>& control_points() const { return control_; }
    const std::vector<double>& knots() const { return knots_; }

    /// Point on the curve at parameter t in [0, 1].
    Point operator()(double t) const { return de_boor(control_, knots_, degree_, t); }

    /// First derivative dC/dt.
    Point derivative(double t) const {
        const int n = static_cast<int>(control_.size());
        std::vector<Point> d;
        d.reserve(n - 1);
        for (int i = 0; i < n - 1; ++i) {
            const double span = knots_[i + degree_ + 1] - knots_[i + 1];
            d.push_back((control_[i + 1] - control_[i]) * (span > 0 ? degree_ / span : 0.0));
        }
        std::vector<double> dk(knots_.begin() + 1, knots_.end() - 1);
        return de_boor(d, dk, degree_ - 1, t);
    }

    /// `samples` points at uniformly spaced parameters, endpoints included.
    std::vector<Point> sample(int samples) const {
        if (samples < 2) throw std::invalid_argument("need at least 2 samples");
        std::vector<Point> out;
        out.reserve(samples);
        for (int i = 0; i < samples; ++i) out.push_back((*this)(static_cast<double>(i) / (samples - 1)));
        return out;
    }

private:
    static Point de_boor(const std::vector<Point>& ctrl, const std::vector<double>& knots, int p, double t) {
        const int n = static_cast<int>(ctrl.size());
        if (p == 0) {
            int k = find_span(knots, n, 0, t);
            return ctrl[k];
        }
        const int k = find_span(knots, n, p, t);
        std::vector<Point> d(p + 1);
        for (int j = 0; j <= p; ++j) d[j] = ctrl[j + k - p];
        for (int r = 1; r <= p; ++r) {
            for (int j = p; j >= r; --j) {
                const double denom = knots[j + 1 + k - r] - knots[j + k - p];
                const double alpha = denom > 0 ? (t - knots[j + k - p]) / denom : 0.0;
                d[j] = (1.0 - alpha) * d[j - 1] + alpha * d[j];
            }
        }
        return d[p];
    }

    // Knot span index k with knots[k] <= t < knots[k+1], clamped at t = 1.
    static int find_span(const std::vector<double>& knots, int n, int p, double t) {
        if (t >= knots[n]) return n - 1;
        if (t <= knots[p]) return p;
        int lo = p, hi = n;
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            if (t < knots[mid])
                hi = mid;
            else
                lo = mid;
        }
        return lo;
    }

    std::vector<Point> control_;
    int degree_;
    std::vector<double> knots_;
};

}  // namespace surftrap
