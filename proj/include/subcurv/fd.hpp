#pragma once

#include <cmath>

#include "subcurv/core.hpp"

namespace subcurv {

// Central-difference step: h = scale * eps^(1/3), the standard balance of
// truncation against roundoff for second-order stencils.
inline double fd_step(double scale) {
    static const double cbrt_eps =
        std::cbrt(std::numeric_limits<double>::epsilon());
    return scale * cbrt_eps;
}

inline double fd_scale(const Vec& x) {
    return std::max(1.0, max_abs(x));
}

inline double fd_scale(double t) { return std::max(1.0, std::abs(t)); }

namespace detail {
inline void require_finite(const Vec& v, const char* what) {
    if (!v.allFinite())
        throw numerical_domain_error(std::string(what) +
                                     ": non-finite value encountered");
}
}  // namespace detail

// Central-difference Jacobian of f: R^n -> R^m at x. Deterministic for fixed
// inputs; exact (up to roundoff) on affine maps.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                       double scale) {
    const double h = fd_step(scale);
    const int n = static_cast<int>(x.size());
    Mat jac;
    for (int j = 0; j < n; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Vec fp = f(xp);
        const Vec fm = f(xm);
        detail::require_finite(fp, "fd_jacobian");
        detail::require_finite(fm, "fd_jacobian");
        if (j == 0) jac.resize(fp.size(), n);
        jac.col(j) = (fp - fm) / (2.0 * h);
    }
    if (n == 0) jac.resize(f(x).size(), 0);
    return jac;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x) {
    return fd_jacobian(f, x, fd_scale(x));
}

// Directional derivative <F'(p); dir> of a matrix-valued field by central
// differences along the (unnormalized) direction.
inline Mat fd_matrix_directional(const std::function<Mat(const Vec&)>& field,
                                 const Vec& p, const Vec& dir) {
    const double len = max_abs(dir);
    if (len == 0.0) {
        Mat f = field(p);
        return Mat::Zero(f.rows(), f.cols());
    }
    const Vec unit = dir / len;
    const double h = fd_step(fd_scale(p));
    Mat fp = field(p + h * unit);
    Mat fm = field(p - h * unit);
    Mat d = (fp - fm) * (len / (2.0 * h));
    if (!d.allFinite())
        throw numerical_domain_error(
            "fd_matrix_directional: non-finite value encountered");
    return d;
}

// Central time derivative of a curve.
inline Vec fd_time_derivative(const std::function<Vec(double)>& f, double t) {
    const double h = fd_step(fd_scale(t));
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace subcurv
