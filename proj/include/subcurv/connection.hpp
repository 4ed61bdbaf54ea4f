#pragma once

#include "subcurv/variation.hpp"

namespace subcurv {

// Christoffel contraction G(a,b)^i = sum_{j,k} G(i,j,k) a_j b_k with the
// direction in the middle slot: nabla_a b = Db.a + G(a, b).
inline Vec chris_apply(const Tensor3& g, const Vec& a, const Vec& b) {
    return g.contract_both(a, b);
}

// A linear connection on TM over a single chart, stored through its
// Christoffel data x -> G(x) with G(i,j,k) the coefficient of
// (nabla_{e_j} e_k)^i.
class LinearConnection {
public:
    using ChristoffelFn = std::function<Tensor3(const Vec&)>;
    // directional derivative <G'(x); a>
    using DChristoffelFn = std::function<Tensor3(const Vec&, const Vec&)>;

    LinearConnection(int n, ChristoffelFn g)
        : n_(n), christoffel_(std::move(g)) {}
    LinearConnection(int n, ChristoffelFn g, DChristoffelFn dg)
        : n_(n), christoffel_(std::move(g)), dchristoffel_(std::move(dg)) {}

    static LinearConnection flat(int n) {
        return LinearConnection(
            n, [n](const Vec&) { return Tensor3(n, n, n); },
            [n](const Vec&, const Vec&) { return Tensor3(n, n, n); });
    }

    static LinearConnection constant(const Tensor3& g) {
        const int n = g.dim0();
        return LinearConnection(
            n, [g](const Vec&) { return g; },
            [n](const Vec&, const Vec&) { return Tensor3(n, n, n); });
    }

    int n() const { return n_; }
    bool has_analytic_derivative() const {
        return static_cast<bool>(dchristoffel_);
    }

    Tensor3 christoffel(const Vec& x) const {
        Tensor3 g = christoffel_(x);
        if (!g.all_finite())
            throw numerical_domain_error("LinearConnection: non-finite data");
        return g;
    }

    Tensor3 christoffel_dir(const Vec& x, const Vec& a) const {
        if (dchristoffel_) return dchristoffel_(x, a);
        const double len = max_abs(a);
        if (len == 0.0) return Tensor3(n_, n_, n_);
        const Vec unit = a / len;
        const double h = fd_step(fd_scale(x));
        Tensor3 gp = christoffel_(x + h * unit);
        Tensor3 gm = christoffel_(x - h * unit);
        Tensor3 out(n_, n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    out(i, j, k) =
                        (gp(i, j, k) - gm(i, j, k)) * (len / (2.0 * h));
        return out;
    }

private:
    int n_;
    ChristoffelFn christoffel_;
    DChristoffelFn dchristoffel_;
};

// Horizontal distribution of the connection on the chart of TM = R^n x R^n:
// curves with ydot = -G(x)(xdot, y) are parallel fields, so
//   gamma_H((x,y)) v = -G(x)(v, y),
// linear in y by construction. Geodesic velocity curves are tangent to it.
inline DistributionChart lift_to_distribution(const LinearConnection& conn,
                                              double domain_radius = 50.0) {
    const int n = conn.n();
    auto gamma = [conn, n](const Vec& x, const Vec& y) -> Mat {
        const Tensor3 g = conn.christoffel(x);
        Mat out(n, n);
        for (int j = 0; j < n; ++j) {
            Vec ej = Vec::Zero(n);
            ej[j] = 1.0;
            out.col(j) = -chris_apply(g, ej, y);
        }
        return out;
    };
    auto dxfn = [conn, n](const Vec& x, const Vec& y) -> Tensor3 {
        Tensor3 out(n, n, n);
        for (int c = 0; c < n; ++c) {
            Vec ec = Vec::Zero(n);
            ec[c] = 1.0;
            const Tensor3 dg = conn.christoffel_dir(x, ec);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) s += dg(a, b, l) * y[l];
                    out(a, b, c) = -s;
                }
        }
        return out;
    };
    auto dyfn = [conn, n](const Vec& x, const Vec&) -> Tensor3 {
        const Tensor3 g = conn.christoffel(x);
        Tensor3 out(n, n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) out(a, b, c) = -g(a, b, c);
        return out;
    };
    if (conn.has_analytic_derivative())
        return DistributionChart(n, n, gamma, dxfn, dyfn,
                                 Box::cube(2 * n, domain_radius));
    return DistributionChart(n, n, gamma, Box::cube(2 * n, domain_radius));
}

// Geodesic through (x0, v0): integrates xddot + G(x)(xdot, xdot) = 0 as a
// first-order system, with dense output.
class GeodesicPath {
public:
    GeodesicPath(const LinearConnection& conn, Trajectory traj)
        : n_(conn.n()), traj_(std::make_shared<Trajectory>(std::move(traj))) {
        measure_residual(conn);
    }

    int n() const { return n_; }
    double t0() const { return traj_->t0(); }
    double t1() const { return traj_->t1(); }
    double residual() const { return residual_; }

    Vec x(double t) const { return traj_->eval(t).head(n_); }
    Vec v(double t) const { return traj_->eval(t).tail(n_); }
    Vec a(double t) const { return traj_->deriv_at(t).tail(n_); }

private:
    void measure_residual(const LinearConnection& conn, int samples = 101) {
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double t =
                t0() + (t1() - t0()) * static_cast<double>(i) / (samples - 1);
            const Vec xx = x(t), vv = v(t);
            worst = std::max(
                worst, max_abs(Vec(a(t) + chris_apply(conn.christoffel(xx), vv,
                                                      vv))));
        }
        residual_ = worst;
    }

    int n_;
    std::shared_ptr<Trajectory> traj_;
    double residual_ = 0.0;
};

inline GeodesicPath geodesic(const LinearConnection& conn, const Vec& x0,
                             const Vec& v0, double t1, int steps) {
    const int n = conn.n();
    OdeProblem p;
    p.rhs = [&conn, n](double, const Vec& state) -> Vec {
        const Vec x = state.head(n), v = state.tail(n);
        Vec out(2 * n);
        out.head(n) = v;
        out.tail(n) = -chris_apply(conn.christoffel(x), v, v);
        return out;
    };
    p.t0 = 0.0;
    p.t1 = t1;
    p.state0 = Vec(2 * n);
    p.state0 << x0, v0;
    p.steps = steps;
    return GeodesicPath(conn, rk4_solve(p));
}

// Torsion T_x(v,w) = G(x)(v,w) - G(x)(w,v).
inline Vec torsion(const LinearConnection& conn, const Vec& x, const Vec& v,
                   const Vec& w) {
    const Tensor3 g = conn.christoffel(x);
    return chris_apply(g, v, w) - chris_apply(g, w, v);
}

// Classical coordinate Riemann tensor with the convention
//   R(u,v)w = d_u G(v,w) - d_v G(u,w) + G(u, G(v,w)) - G(v, G(u,w)),
// antisymmetric in (u,v). The convention is pinned by the residual below.
inline Vec riemann(const LinearConnection& conn, const Vec& x, const Vec& u,
                   const Vec& v, const Vec& w) {
    const Tensor3 g = conn.christoffel(x);
    const Tensor3 du = conn.christoffel_dir(x, u);
    const Tensor3 dv = conn.christoffel_dir(x, v);
    return chris_apply(du, v, w) - chris_apply(dv, u, w) +
           chris_apply(g, u, chris_apply(g, v, w)) -
           chris_apply(g, v, chris_apply(g, u, w));
}

// Residual of the bridge between the Riemann tensor and the curvature of the
// lifted distribution at X = (x,y), for horizontal arguments a_h, b_h:
//   || R(Ttau a, Ttau b) y + C_lift(a_V ^ b_V) ||_inf.
inline double riemann_vs_distribution_residual(const LinearConnection& conn,
                                               const DistributionChart& lifted,
                                               const Vec& x, const Vec& y,
                                               const Vec& a_h, const Vec& b_h,
                                               double horizontal_tol = 1e-8) {
    const int n = conn.n();
    const Mat g = lifted.gamma(x, y);
    auto check_horizontal = [&](const Vec& h) {
        if (max_abs(Vec(h.tail(n) - g * h.head(n))) > horizontal_tol)
            throw not_horizontal(
                "riemann_vs_distribution_residual: argument not horizontal");
    };
    check_horizontal(a_h);
    check_horizontal(b_h);
    const Vec r = riemann(conn, x, a_h.head(n), b_h.head(n), y);
    const Vec c = curvature_at(lifted, x, y).apply(a_h.head(n), b_h.head(n));
    return max_abs(Vec(r + c));
}

inline double riemann_vs_distribution_residual(const LinearConnection& conn,
                                               const Vec& x, const Vec& y,
                                               const Vec& a_h, const Vec& b_h) {
    return riemann_vs_distribution_residual(conn, lift_to_distribution(conn), x,
                                            y, a_h, b_h);
}

// Jacobi field along a geodesic: solves
//   nabla^2 Z + nabla(T(Z, gdot)) + R(Z, gdot) gdot = 0
// as a first-order linear system in the state (Z, U) with U = nabla_gdot Z;
// Zdot is recovered through Zdot = U - G(gdot, Z).
struct JacobiSolution {
    std::function<Vec(double)> z;
    std::function<Vec(double)> zdot;
    std::function<Vec(double)> nabla_z;
};

inline JacobiSolution jacobi_solve(const LinearConnection& conn,
                                   const GeodesicPath& geo, const Vec& z0,
                                   const Vec& zdot0, int steps) {
    const int n = conn.n();
    auto rhs = [&conn, &geo, n](double t, const Vec& state) -> Vec {
        const Vec z = state.head(n), u = state.tail(n);
        const Vec x = geo.x(t), v = geo.v(t);
        const Tensor3 g = conn.christoffel(x);
        const Vec zdot = u - chris_apply(g, v, z);
        const Vec accel = -chris_apply(g, v, v);
        // d/dt T(z, gdot) along the curve
        const Tensor3 dg = conn.christoffel_dir(x, v);
        const Vec tz = chris_apply(g, z, v) - chris_apply(g, v, z);
        const Vec dT = chris_apply(dg, z, v) - chris_apply(dg, v, z) +
                       chris_apply(g, zdot, v) - chris_apply(g, v, zdot) +
                       chris_apply(g, z, accel) - chris_apply(g, accel, z);
        const Vec nabla_T = dT + chris_apply(g, v, tz);
        const Vec udot = -chris_apply(g, v, u) - nabla_T -
                         riemann(conn, x, z, v, v);
        Vec out(2 * n);
        out << zdot, udot;
        return out;
    };
    OdeProblem p;
    p.rhs = rhs;
    p.t0 = geo.t0();
    p.t1 = geo.t1();
    p.state0 = Vec(2 * n);
    const Vec u0 =
        zdot0 + chris_apply(conn.christoffel(geo.x(geo.t0())), geo.v(geo.t0()),
                            z0);
    p.state0 << z0, u0;
    p.steps = steps;
    auto traj = std::make_shared<Trajectory>(rk4_solve(p));

    auto zfn = [traj, n](double t) { return Vec(traj->eval(t).head(n)); };
    auto ufn = [traj, n](double t) { return Vec(traj->eval(t).tail(n)); };
    auto zdotfn = [traj, conn, geo, n](double t) {
        const Vec z = traj->eval(t).head(n);
        const Vec u = traj->eval(t).tail(n);
        return Vec(u - chris_apply(conn.christoffel(geo.x(t)), geo.v(t), z));
    };
    return JacobiSolution{zfn, zdotfn, ufn};
}

// Residual of the identification of Jacobi fields with the kernel of D on
// the lifted distribution: beta0 = gdot, X_t = omega of the (Z, Zdot) double
// tangent, evaluated through the vertical supplement.
inline double theorem13_residual(const LinearConnection& conn,
                                 const GeodesicPath& geo,
                                 const std::function<Vec(double)>& z,
                                 const std::function<Vec(double)>& zdot,
                                 const std::vector<double>& grid, int steps) {
    const int n = conn.n();
    DistributionChart lifted = lift_to_distribution(conn);
    auto xfn = [geo](double t) { return geo.x(t); };
    auto yfn = [geo](double t) { return geo.v(t); };
    auto xdfn = [geo](double t) { return geo.v(t); };
    auto ydfn = [geo](double t) { return geo.a(t); };
    // the geodesic equation makes the velocity curve H-tangent; the path is
    // integrator output, so the looser tolerance applies
    TangentPath beta0 =
        TangentPath::analytic(lifted, xfn, yfn, xdfn, ydfn, geo.t0(), geo.t1(),
                              kTangencyTolIntegrated);
    VariationField vf{beta0, z, zdot};
    SupplementaryField vert = SupplementaryField::vertical(n, n);
    double worst = 0.0;
    for (double t : grid)
        worst = std::max(
            worst, max_abs(evaluate_D(lifted, vert, vf, geo.t0(), t, steps)));
    return worst;
}

}  // namespace subcurv
