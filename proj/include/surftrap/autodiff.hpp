#pragma once

// Forward-mode dual numbers with a fixed number of directional derivatives.
// Nesting Dual<Dual<double, N>, N> yields exact second derivatives.

#include <array>
#include <cmath>
#include <type_traits>

namespace surftrap::ad {

template <class T, int N>
struct Dual {
    T v{};
    std::array<T, N> d{};

    constexpr Dual() = default;
    constexpr Dual(double value) : v(value) {}  // NOLINT: implicit promotion of constants
    constexpr Dual(T value, const std::array<T, N>& grad) : v(value), d(grad) {}

    Dual& operator+=(const Dual& o) {
        v += o.v;
        for (int i = 0; i < N; ++i) d[i] += o.d[i];
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        for (int i = 0; i < N; ++i) d[i] -= o.d[i];
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        for (int i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
        v *= o.v;
        return *this;
    }
    Dual& operator*=(double s) {
        v *= s;
        for (int i = 0; i < N; ++i) d[i] *= s;
        return *this;
    }
};

template <class>
struct is_dual : std::false_type {};
template <class T, int N>
struct is_dual<Dual<T, N>> : std::true_type {};

template <class T, int N>
Dual<T, N> operator-(const Dual<T, N>& a) {
    Dual<T, N> r;
    r.v = -a.v;
    for (int i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) {
    return a += b;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) {
    return a -= b;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) {
    return a *= b;
}
template <class T, int N>
Dual<T, N> operator*(Dual<T, N> a, double s) {
    return a *= s;
}
template <class T, int N>
Dual<T, N> operator*(double s, Dual<T, N> a) {
    return a *= s;
}
template <class T, int N>
Dual<T, N> operator+(Dual<T, N> a, double s) {
    a.v += s;
    return a;
}
template <class T, int N>
Dual<T, N> operator+(double s, Dual<T, N> a) {
    a.v += s;
    return a;
}
template <class T, int N>
Dual<T, N> operator-(Dual<T, N> a, double s) {
    a.v -= s;
    return a;
}
template <class T, int N>
Dual<T, N> operator-(double s, const Dual<T, N>& a) {
    Dual<T, N> r = -a;
    r.v += s;
    return r;
}

template <class T, int N>
Dual<T, N> inverse(const Dual<T, N>& a) {
    Dual<T, N> r;
    T inv = 1.0 / a.v;
    T dinv = -(inv * inv);
    r.v = inv;
    for (int i = 0; i < N; ++i) r.d[i] = dinv * a.d[i];
    return r;
}

template <class T, int N>
Dual<T, N> operator/(const Dual<T, N>& a, const Dual<T, N>& b) {
    return a * inverse(b);
}
template <class T, int N>
Dual<T, N> operator/(Dual<T, N> a, double s) {
    return a *= (1.0 / s);
}
template <class T, int N>
Dual<T, N> operator/(double s, const Dual<T, N>& a) {
    return s * inverse(a);
}

template <class T, int N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
    using std::sqrt;
    Dual<T, N> r;
    r.v = sqrt(a.v);
    T half_inv = 0.5 / r.v;
    for (int i = 0; i < N; ++i) r.d[i] = half_inv * a.d[i];
    return r;
}

/// Value of a (possibly nested) dual number.
inline double value(double x) { return x; }
template <class T, int N>
double value(const Dual<T, N>& x) {
    return value(x.v);
}

/// First-order variable: value x, unit derivative along direction `index`.
template <int N>
Dual<double, N> variable(double x, int index) {
    Dual<double, N> r(x);
    r.d[index] = 1.0;
    return r;
}

/// Second-order variable for exact Hessians via nesting.
template <int N>
Dual<Dual<double, N>, N> variable2(double x, int index) {
    Dual<Dual<double, N>, N> r;
    r.v = variable<N>(x, index);
    r.d[index] = Dual<double, N>(1.0);
    return r;
}

}  // namespace surftrap::ad
