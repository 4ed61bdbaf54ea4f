#pragma once

#include "subcurv/chart.hpp"
#include "subcurv/linalg.hpp"

namespace subcurv {

// The curvature of H at a point, an antisymmetric bilinear map V ^ V -> W
// stored as tensor(a,i,j) with a a W-index and i,j V-indices.
struct CurvatureValue {
    int m = 0, k = 0;
    Tensor3 tensor;

    Vec apply(const Vec& f, const Vec& g) const {
        return tensor.contract_both(f, g);
    }

    double max_abs() const { return tensor.max_abs(); }

    // k x m(m-1)/2 matrix over the wedge basis e_i ^ e_j, i < j, lexicographic.
    Mat flatten_wedge() const {
        const int wd = m * (m - 1) / 2;
        Mat out = Mat::Zero(k, wd);
        int col = 0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j, ++col)
                for (int a = 0; a < k; ++a) out(a, col) = tensor(a, i, j);
        return out;
    }
};

inline int wedge_dim(int m) { return m * (m - 1) / 2; }

// A fixed antisymmetric C in Hom(V ^ V, W).
struct ConstantBivectorMap {
    int m = 0, k = 0;
    Tensor3 c;

    static ConstantBivectorMap zero(int m, int k) {
        return ConstantBivectorMap{m, k, Tensor3(k, m, m)};
    }

    // Sets C(e_i ^ e_j) += value * e_a (and the antisymmetric mirror).
    void set(int a, int i, int j, double value) {
        c(a, i, j) = value;
        c(a, j, i) = -value;
    }

    Vec apply(const Vec& f, const Vec& g) const {
        return c.contract_both(f, g);
    }

    bool antisymmetric(double tol = 0.0) const {
        for (int a = 0; a < k; ++a)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (std::abs(c(a, i, j) + c(a, j, i)) > tol) return false;
        return true;
    }
};

// Local curvature of the graph presentation:
//   C(f^g) = <dG/dx;f>g - <dG/dx;g>f + <dG/dy;Gf>g - <dG/dy;Gg>f.
// Assembled on basis pairs i<j, then stored antisymmetrized.
inline CurvatureValue curvature_at(const DistributionChart& chart, const Vec& x,
                                   const Vec& y) {
    if (!chart.contains(x, y))
        throw domain_error("curvature_at: point outside chart domain");
    const int m = chart.m(), k = chart.k();
    CurvatureValue cv{m, k, Tensor3(k, m, m)};
    if (m < 2) return cv;

    const Mat g = chart.gamma(x, y);
    const Tensor3 dx = chart.dgamma_dx(x, y);
    const Tensor3 dy = chart.dgamma_dy(x, y);

    // <dG/dx; e_i> as matrices per V-direction, <dG/dy; G e_i> per column.
    std::vector<Mat> ddx(m), ddy(m);
    for (int i = 0; i < m; ++i) {
        Vec ei = Vec::Zero(m);
        ei[i] = 1.0;
        ddx[i] = dx.contract_last(ei);
        ddy[i] = dy.contract_last(g.col(i));
    }
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            Vec ei = Vec::Zero(m), ej = Vec::Zero(m);
            ei[i] = 1.0;
            ej[j] = 1.0;
            Vec val = ddx[i] * ej - ddx[j] * ei + ddy[i] * ej - ddy[j] * ei;
            for (int a = 0; a < k; ++a) {
                cv.tensor(a, i, j) = val[a];
                cv.tensor(a, j, i) = -val[a];
            }
        }
    return cv;
}

// Chart with gamma(x,y)v = (1/2) c(x ^ v); its curvature equals c at every
// point, which realizes any prescribed antisymmetric value.
inline DistributionChart make_constant_curvature(const ConstantBivectorMap& c,
                                                 double domain_radius = 10.0) {
    if (!c.antisymmetric())
        throw std::invalid_argument(
            "make_constant_curvature: c must be antisymmetric");
    const int m = c.m, k = c.k;
    Tensor3 cc = c.c;
    auto gamma = [m, k, cc](const Vec& x, const Vec&) -> Mat {
        // gamma(x,y)_{a j} = (1/2) sum_i c(a,i,j) x_i
        Mat g = cc.contract_middle(x);
        return 0.5 * g;
    };
    auto dxfn = [m, k, cc](const Vec&, const Vec&) -> Tensor3 {
        Tensor3 d(k, m, m);
        for (int a = 0; a < k; ++a)
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < m; ++i) d(a, j, i) = 0.5 * cc(a, i, j);
        return d;
    };
    auto dyfn = [m, k](const Vec&, const Vec&) -> Tensor3 {
        return Tensor3(k, m, k);
    };
    return DistributionChart(m, k, gamma, dxfn, dyfn,
                             Box::cube(m + k, domain_radius));
}

enum class NondegeneracyKind { injective, surjective, both, degenerate };

struct NondegeneracyClass {
    NondegeneracyKind kind;
    int rank;
    int wedge;  // m(m-1)/2
};

inline const char* to_string(NondegeneracyKind k) {
    switch (k) {
        case NondegeneracyKind::injective: return "Injective";
        case NondegeneracyKind::surjective: return "Surjective";
        case NondegeneracyKind::both: return "Both";
        default: return "Degenerate";
    }
}

// Classification by the rank of the flattened wedge matrix.
inline NondegeneracyClass nondegeneracy_class(const CurvatureValue& cv) {
    const int wd = wedge_dim(cv.m);
    const int r = numerical_rank(cv.flatten_wedge());
    const bool inj = (r == wd);
    const bool surj = (r == cv.k);
    NondegeneracyKind kind = NondegeneracyKind::degenerate;
    if (inj && surj)
        kind = NondegeneracyKind::both;
    else if (inj)
        kind = NondegeneracyKind::injective;
    else if (surj)
        kind = NondegeneracyKind::surjective;
    return NondegeneracyClass{kind, r, wd};
}

struct FrobeniusVerdict {
    bool integrable;
    std::optional<Vec> witness;  // first sampled point failing the test
    double max_curvature;
};

// Sampling-based integrability check: the pointwise criterion is certified
// only on the supplied sample points.
inline FrobeniusVerdict frobenius_verdict(const DistributionChart& chart,
                                          const std::vector<Vec>& points,
                                          double tol = 1e-7) {
    if (points.empty())
        throw std::invalid_argument("frobenius_verdict: no sample points");
    double worst = 0.0;
    for (const Vec& p : points) {
        const Vec x = p.head(chart.m()), y = p.tail(chart.k());
        const double c = curvature_at(chart, x, y).max_abs();
        worst = std::max(worst, c);
        if (c > tol) return FrobeniusVerdict{false, p, c};
    }
    return FrobeniusVerdict{true, std::nullopt, worst};
}

// Curvature of the pushed-forward distribution under an invertible linear
// chart map L on V x W, expressed at the mapped point: with
// A = L_VV + L_VW G and Q = L_WW - G' L_VW,
//   C'(Af ^ Ag) = Q C(f ^ g).
inline CurvatureValue pushforward_curvature(const DistributionChart& chart,
                                            const Mat& linmap, const Vec& x,
                                            const Vec& y) {
    const int m = chart.m(), k = chart.k(), n = chart.n();
    if (linmap.rows() != n || linmap.cols() != n)
        throw std::invalid_argument("pushforward_curvature: linmap must be n x n");
    if (!(condition_number(linmap) < kConditionLimit))
        throw std::invalid_argument("pushforward_curvature: linmap is singular");

    const Mat g = chart.gamma(x, y);
    const Mat l_vv = linmap.topLeftCorner(m, m);
    const Mat l_vw = linmap.topRightCorner(m, k);
    const Mat l_wv = linmap.bottomLeftCorner(k, m);
    const Mat l_ww = linmap.bottomRightCorner(k, k);

    const Mat a = l_vv + l_vw * g;
    if (!(condition_number(a) < kConditionLimit))
        throw chart_breakdown(
            "pushforward_curvature: image subspace not transverse to {0} x W");
    const Mat gprime = (l_wv + l_ww * g) * a.partialPivLu().solve(
                                               Mat::Identity(m, m));
    const Mat q = l_ww - gprime * l_vw;
    const Mat a_inv = a.partialPivLu().solve(Mat::Identity(m, m));

    const CurvatureValue base = curvature_at(chart, x, y);
    CurvatureValue out{m, k, Tensor3(k, m, m)};
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const Vec val = q * base.apply(a_inv.col(i), a_inv.col(j));
            for (int aidx = 0; aidx < k; ++aidx) {
                out.tensor(aidx, i, j) = val[aidx];
                out.tensor(aidx, j, i) = -val[aidx];
            }
        }
    return out;
}

// Transforms the chart itself under a linear map; used to cross-check the
// covariance identity by direct recomputation.
inline DistributionChart pushforward_chart(const DistributionChart& chart,
                                           const Mat& linmap) {
    const int m = chart.m(), k = chart.k(), n = chart.n();
    Mat linv = linmap.partialPivLu().solve(Mat::Identity(n, n));
    Mat l_vv = linmap.topLeftCorner(m, m);
    Mat l_vw = linmap.topRightCorner(m, k);
    Mat l_wv = linmap.bottomLeftCorner(k, m);
    Mat l_ww = linmap.bottomRightCorner(k, k);
    auto gamma = [=, g0 = chart](const Vec& xp, const Vec& yp) -> Mat {
        Vec p(n);
        p << xp, yp;
        Vec q = linv * p;
        Mat g = g0.gamma(q.head(m), q.tail(k));
        Mat a = l_vv + l_vw * g;
        return (l_wv + l_ww * g) * a.partialPivLu().solve(Mat::Identity(m, m));
    };
    // Domain: image of the original box under linmap is not a box; use a
    // conservative cube around the mapped center.
    Box b = Box::cube(n, 1e6);
    return DistributionChart(m, k, gamma, b);
}

// Residual of the duality identity  d(alpha)(X,Y) = -alpha([X,Y])  for the
// constant-frame sections X=(f,Gf), Y=(g,Gg) of H and the annihilator
// covector field alpha_(x,y)(v,w) = <phi, w - G(x,y)v>. Both sides use
// independent central-difference stencils; the bracket is [F,G] = G'F - F'G.
inline double bracket_duality_residual(const DistributionChart& chart,
                                       const Vec& x, const Vec& y, const Vec& f,
                                       const Vec& g, const Vec& phi) {
    const int m = chart.m(), k = chart.k(), n = chart.n();
    Vec p(n);
    p << x, y;

    auto alpha = [&](const Vec& q) -> Vec {
        const Mat gm = chart.gamma_at(q);
        Vec a(n);
        a.head(m) = -gm.transpose() * phi;
        a.tail(k) = phi;
        return a;
    };
    auto section = [&](const Vec& q, const Vec& dir) -> Vec {
        const Mat gm = chart.gamma_at(q);
        Vec s(n);
        s.head(m) = dir;
        s.tail(k) = gm * dir;
        return s;
    };
    auto xf = [&](const Vec& q) { return section(q, f); };
    auto yf = [&](const Vec& q) { return section(q, g); };

    const Vec xp = xf(p);
    const Vec yp = yf(p);

    // d(alpha)(u,v) = <J u, v> - <J v, u> with J the covector-field Jacobian
    const Mat jal = fd_jacobian(alpha, p);
    const double d_alpha = yp.dot(jal * xp) - xp.dot(jal * yp);

    // [X,Y] = Y'X - X'Y
    const Mat jx = fd_jacobian(xf, p);
    const Mat jy = fd_jacobian(yf, p);
    const Vec bracket = jy * xp - jx * yp;
    const double a_bracket = alpha(p).dot(bracket);

    return std::abs(d_alpha + a_bracket);
}

// The quotient pairing <phi, C(f^g)> alone; equals |alpha([X,Y])| for the
// same frame data.
inline double annihilator_curvature_pairing(const DistributionChart& chart,
                                            const Vec& x, const Vec& y,
                                            const Vec& f, const Vec& g,
                                            const Vec& phi) {
    return std::abs(phi.dot(curvature_at(chart, x, y).apply(f, g)));
}

}  // namespace subcurv
