#pragma once

#include "subcurv/connection.hpp"
#include "subcurv/curvature.hpp"
#include "subcurv/polynomial.hpp"

namespace subcurv::fixtures {

// --- charts ----------------------------------------------------------------

// Gamma == 0: the integrable product foliation.
inline DistributionChart flat_graph(int m = 2, int k = 2) {
    auto gamma = [m, k](const Vec&, const Vec&) { return Mat::Zero(k, m); };
    auto dxfn = [m, k](const Vec&, const Vec&) { return Tensor3(k, m, m); };
    auto dyfn = [m, k](const Vec&, const Vec&) { return Tensor3(k, m, k); };
    return DistributionChart(m, k, gamma, dxfn, dyfn, Box::cube(m + k, 10.0));
}

// Constant curvature C with dims (2,2), C(e1^e2) = e3: the injective
// nondegenerate pair on a four-dimensional chart.
inline ConstantBivectorMap injective_bivector() {
    ConstantBivectorMap c = ConstantBivectorMap::zero(2, 2);
    c.set(0, 0, 1, 1.0);  // C(e1 ^ e2) = first W direction
    return c;
}

// Dims (3,1), C(e1^e3) = e4, others zero: the surjective pair.
inline ConstantBivectorMap surjective_bivector() {
    ConstantBivectorMap c = ConstantBivectorMap::zero(3, 1);
    c.set(0, 0, 2, 1.0);
    return c;
}

inline DistributionChart injective_curvature() {
    return make_constant_curvature(injective_bivector());
}

inline DistributionChart surjective_curvature() {
    return make_constant_curvature(surjective_bivector());
}

// Contact-type graph on (2,1): Gamma(x,y)(v1,v2) = x1 v2, the standard
// maximally nonintegrable line field complement.
inline DistributionChart contact() {
    auto gamma = [](const Vec& x, const Vec&) {
        Mat g(1, 2);
        g << 0.0, x[0];
        return g;
    };
    auto dxfn = [](const Vec&, const Vec&) {
        Tensor3 d(1, 2, 2);
        d(0, 1, 0) = 1.0;  // d gamma_{0,1} / d x_0
        return d;
    };
    auto dyfn = [](const Vec&, const Vec&) { return Tensor3(1, 2, 1); };
    return DistributionChart(2, 1, gamma, dxfn, dyfn, Box::cube(3, 10.0));
}

// Fiber-linear graph on (1,1): Gamma(x,y)v = a y v. Its fiber transport has
// the closed form exp(a (t-s)) for the base path x(t) = t.
inline DistributionChart fiber_linear(double a = 1.0) {
    auto gamma = [a](const Vec&, const Vec& y) {
        Mat g(1, 1);
        g(0, 0) = a * y[0];
        return g;
    };
    auto dxfn = [](const Vec&, const Vec&) { return Tensor3(1, 1, 1); };
    auto dyfn = [a](const Vec&, const Vec&) {
        Tensor3 d(1, 1, 1);
        d(0, 0, 0) = a;
        return d;
    };
    return DistributionChart(1, 1, gamma, dxfn, dyfn, Box::cube(2, 50.0));
}

// Nonlinear-in-fiber graph on (1,1): Gamma(x,y)v = sin(y) v. Exercises the
// genuinely nonlinear Ehresmann transport.
inline DistributionChart fiber_sine() {
    auto gamma = [](const Vec&, const Vec& y) {
        Mat g(1, 1);
        g(0, 0) = std::sin(y[0]);
        return g;
    };
    auto dxfn = [](const Vec&, const Vec&) { return Tensor3(1, 1, 1); };
    auto dyfn = [](const Vec&, const Vec& y) {
        Tensor3 d(1, 1, 1);
        d(0, 0, 0) = std::cos(y[0]);
        return d;
    };
    return DistributionChart(1, 1, gamma, dxfn, dyfn, Box::cube(2, 50.0));
}

// --- connections -------------------------------------------------------------

inline LinearConnection flat_connection(int n = 2) {
    return LinearConnection::flat(n);
}

// n = 2 with a handful of constant nonzero coefficients, torsion included.
inline LinearConnection constant_christoffel() {
    Tensor3 g(2, 2, 2);
    g(0, 0, 1) = 0.3;
    g(0, 1, 0) = 0.1;
    g(1, 0, 0) = -0.2;
    g(1, 1, 1) = 0.25;
    g(0, 1, 1) = -0.15;
    return LinearConnection::constant(g);
}

// n = 2 with coefficients affine in x, analytic derivative included.
inline LinearConnection polynomial_christoffel() {
    const int n = 2;
    Tensor3 g0(2, 2, 2);
    g0(0, 0, 1) = 0.2;
    g0(1, 1, 0) = -0.1;
    Tensor3 g1(2, 2, 2);  // coefficient of x_0
    g1(0, 1, 1) = 0.15;
    g1(1, 0, 0) = 0.1;
    Tensor3 g2(2, 2, 2);  // coefficient of x_1
    g2(0, 0, 0) = -0.12;
    g2(1, 0, 1) = 0.08;
    auto at = [g0, g1, g2, n](const Vec& x) {
        Tensor3 g(n, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    g(i, j, k) = g0(i, j, k) + g1(i, j, k) * x[0] +
                                 g2(i, j, k) * x[1];
        return g;
    };
    auto dir = [g1, g2, n](const Vec&, const Vec& a) {
        Tensor3 g(n, n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    g(i, j, k) = g1(i, j, k) * a[0] + g2(i, j, k) * a[1];
        return g;
    };
    return LinearConnection(n, at, dir);
}

// --- catalog -----------------------------------------------------------------

struct FixtureInfo {
    std::string name;
    std::string summary;
    std::string dims;
};

inline std::vector<FixtureInfo> catalog() {
    return {
        {"flat_graph", "zero graph field, integrable product foliation",
         "m=2 k=2"},
        {"constant_curvature",
         "gamma(x,y)v = c(x^v)/2, curvature equals c everywhere", "m=2 k=2"},
        {"injective_curvature",
         "constant curvature with c(e1^e2)=e3, injective wedge map", "m=2 k=2"},
        {"surjective_curvature",
         "constant curvature with c(e1^e3)=e4, surjective wedge map",
         "m=3 k=1"},
        {"contact", "contact-type graph gamma(x,y)(v1,v2) = x1 v2", "m=2 k=1"},
        {"fiber_linear", "fiber-linear graph gamma(x,y)v = a y v", "m=1 k=1"},
        {"fiber_sine", "nonlinear fiber graph gamma(x,y)v = sin(y) v",
         "m=1 k=1"},
        {"flat_connection", "zero Christoffel data", "n=2"},
        {"constant_christoffel", "constant Christoffel data with torsion",
         "n=2"},
        {"polynomial_christoffel", "Christoffel data affine in x", "n=2"},
    };
}

inline DistributionChart chart_by_name(const std::string& name) {
    if (name == "flat_graph") return flat_graph();
    if (name == "constant_curvature" || name == "injective_curvature")
        return injective_curvature();
    if (name == "surjective_curvature") return surjective_curvature();
    if (name == "contact") return contact();
    if (name == "fiber_linear") return fiber_linear();
    if (name == "fiber_sine") return fiber_sine();
    throw schema_error("unknown chart fixture: " + name);
}

inline LinearConnection connection_by_name(const std::string& name) {
    if (name == "flat_connection") return flat_connection();
    if (name == "constant_christoffel") return constant_christoffel();
    if (name == "polynomial_christoffel") return polynomial_christoffel();
    throw schema_error("unknown connection fixture: " + name);
}

}  // namespace subcurv::fixtures
