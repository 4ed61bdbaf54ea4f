#pragma once

#include "subcurv/curvature.hpp"
#include "subcurv/path.hpp"
#include "subcurv/supplement.hpp"

namespace subcurv {

// Linear transport operator between two path parameters, expressed in the
// W-side parameterization of the fibers (w parameterizes (S w, w) in K, and
// directly the quotient TM/H).
struct TransportOperator {
    double s = 0.0;
    double t = 0.0;
    Mat matrix;
};

// Nonlinear Ehresmann transport of the fiber: solves
//   d/dt gamma_s^t(y) = Gamma(x(t), gamma_s^t(y)) xdot(t),  gamma_s^s(y) = y.
inline Vec ehresmann_transport(const DistributionChart& chart,
                               const BasePath& base, const Vec& y0, double s,
                               double t, int steps) {
    if (s == t) return y0;
    OdeProblem p;
    p.rhs = [&](double tau, const Vec& y) -> Vec {
        return chart.gamma(base.x(tau), y) * base.xdot(tau);
    };
    p.t0 = s;
    p.t1 = t;
    p.state0 = y0;
    p.steps = steps;
    return rk4_solve(p).final_state();
}

// Fundamental matrix of the linearized fiber transport along a tangent path:
//   wdot = <dGamma/dy (x,y); w> xdot.
// By the tangent-operator identity this equals the derivative of the
// Ehresmann transport with respect to the start fiber point.
inline TransportOperator linearized_transport(const DistributionChart& chart,
                                              const TangentPath& beta0,
                                              double s, double t, int steps) {
    const int k = chart.k();
    auto rhs = [&](double tau, const Mat& w) -> Mat {
        const Vec x = beta0.x(tau), y = beta0.y(tau), xd = beta0.xdot(tau);
        Mat out(k, static_cast<int>(w.cols()));
        for (int c = 0; c < w.cols(); ++c)
            out.col(c) = chart.dgamma_dy_dir(x, y, w.col(c)) * xd;
        return out;
    };
    Mat m = (s == t) ? Mat::Identity(k, k)
                     : rk4_matrix_solve(rhs, s, t, Mat::Identity(k, k), steps);
    return TransportOperator{s, t, m};
}

// Covariant derivative in K along a tangent path. For beta0 tangent to H the
// flat-coordinate expression of Psi^{-1} (omega . TP . omega)(sigma-dot)
// reduces to  <P'(beta0); sigma> beta0-dot + P(beta0) sigma-dot.
inline Vec covariant_derivative_K(const DistributionChart& chart,
                                  const SupplementaryField& supp,
                                  const TangentPath& beta0,
                                  const std::function<Vec(double)>& sigma,
                                  double t, double membership_tol = 1e-6) {
    if (beta0.tangency_residual() > kTangencyTolIntegrated)
        throw not_tangent("covariant_derivative_K: base path not tangent");
    ProjectionField field = ProjectionField::onto_k(chart, supp);
    const Vec p = beta0.point(t);
    const Mat pr = field.at(p);
    const Vec sig = sigma(t);
    if (max_abs(Vec(pr * sig - sig)) > membership_tol)
        throw not_in_k("covariant_derivative_K: sigma(t) not in K");
    const Vec sigdot = fd_time_derivative(sigma, t);
    return field.dir_deriv(p, sig) * beta0.velocity(t) + pr * sigdot;
}

// Parallel transport in K along a tangent path: integrates the frame ODE
//   sigma-dot = <P'; beta0-dot> sigma - <P'; sigma> beta0-dot,
// obtained from nabla sigma = 0 together with the membership constraint
// (I-P) sigma = 0 differentiated along the path. Columns start from the
// K-basis (S e_j, e_j) at time s; returns the full n x k frame at t.
inline Mat k_transport_frame(const DistributionChart& chart,
                             const SupplementaryField& supp,
                             const TangentPath& beta0, double s, double t,
                             int steps) {
    if (beta0.tangency_residual() > kTangencyTolIntegrated)
        throw not_tangent("k_transport: base path not tangent");
    const int m = chart.m(), k = chart.k(), n = chart.n();
    ProjectionField field = ProjectionField::onto_k(chart, supp);

    Mat frame0(n, k);
    {
        const Vec xs = beta0.x(s), ys = beta0.y(s);
        frame0.topRows(m) = supp.s(xs, ys);
        frame0.bottomRows(k) = Mat::Identity(k, k);
    }
    if (s == t) return frame0;
    auto rhs = [&](double tau, const Mat& frame) -> Mat {
        const Vec p = beta0.point(tau);
        const Vec vel = beta0.velocity(tau);
        const Mat dvel = field.dir_deriv(p, vel);
        Mat out(n, k);
        for (int c = 0; c < k; ++c)
            out.col(c) =
                dvel * frame.col(c) - field.dir_deriv(p, frame.col(c)) * vel;
        return out;
    };
    return rk4_matrix_solve(rhs, s, t, frame0, steps);
}

// W-parameterization of the frame transport: a K element (S w, w) is
// determined by its W part.
inline TransportOperator k_transport(const DistributionChart& chart,
                                     const SupplementaryField& supp,
                                     const TangentPath& beta0, double s,
                                     double t, int steps) {
    const Mat frame = k_transport_frame(chart, supp, beta0, s, t, steps);
    return TransportOperator{s, t, frame.bottomRows(chart.k())};
}

// Transport induced on TM/H (W-identified) by conjugating the K transport
// with the quotient section:  (I - G S)|_t  .  M_k  .  (I - G S)|_s^{-1}.
inline TransportOperator quotient_transport(const DistributionChart& chart,
                                            const SupplementaryField& supp,
                                            const TangentPath& beta0, double s,
                                            double t, int steps) {
    const int k = chart.k();
    TransportOperator kt = k_transport(chart, supp, beta0, s, t, steps);
    const Vec xs = beta0.x(s), ys = beta0.y(s);
    const Vec xt = beta0.x(t), yt = beta0.y(t);
    const Mat iw_s =
        Mat::Identity(k, k) - chart.gamma(xs, ys) * supp.s(xs, ys);
    const Mat iw_t =
        Mat::Identity(k, k) - chart.gamma(xt, yt) * supp.s(xt, yt);
    Mat q = iw_t * kt.matrix * iw_s.partialPivLu().solve(Mat::Identity(k, k));
    return TransportOperator{s, t, q};
}

// Max-norm residual of the quotient evolution identity
//   d/dt { [K1]_t^{t0} [K2]_{t0}^t v } =
//     [K1]_t^{t0} C( P^{K1}_H Q^H_{K2} [K2]_{t0}^t v  ^  beta0-dot(t) )
// over the grid and the W basis. The left side differentiates the integrated
// product by central differences with re-integration per node, keeping it
// independent of the right-hand side's curvature route.
inline double theorem10_residual(const DistributionChart& chart,
                                 const SupplementaryField& supp1,
                                 const SupplementaryField& supp2,
                                 const TangentPath& beta0, double t0,
                                 const std::vector<double>& grid, int steps) {
    const int k = chart.k();
    const double span = beta0.t1() - beta0.t0();
    const double delta = span / steps;

    auto product = [&](double t) -> Mat {
        Mat fwd = quotient_transport(chart, supp2, beta0, t0, t, steps).matrix;
        Mat back = quotient_transport(chart, supp1, beta0, t, t0, steps).matrix;
        return back * fwd;
    };

    double worst = 0.0;
    for (double t : grid) {
        const Mat dprod = (product(t + delta) - product(t - delta)) / (2 * delta);

        const Mat fwd_t =
            quotient_transport(chart, supp2, beta0, t0, t, steps).matrix;
        const Mat back_t =
            quotient_transport(chart, supp1, beta0, t, t0, steps).matrix;
        const Vec x = beta0.x(t), y = beta0.y(t);
        const SplitOperators split1 = split_at(chart, supp1, x, y);
        const SplitOperators split2 = split_at(chart, supp2, x, y);
        const CurvatureValue cv = curvature_at(chart, x, y);
        const Vec xd = beta0.xdot(t);

        for (int c = 0; c < k; ++c) {
            const Vec w2 = fwd_t.col(c);
            const Vec h = split1.p_onto_h * (split2.q_h_k * w2);
            const Vec rhs = back_t * cv.apply(h.head(chart.m()), xd);
            worst = std::max(worst, max_abs(Vec(dprod.col(c) - rhs)));
        }
    }
    return worst;
}

}  // namespace subcurv
