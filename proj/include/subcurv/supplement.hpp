#pragma once

#include "subcurv/chart.hpp"
#include "subcurv/linalg.hpp"

namespace subcurv {

// A supplementary subbundle K to H, parameterized from the W side:
// K_(x,y) = {(S(x,y)w, w) | w in W} with S(x,y) in Hom(W,V). S == 0 is the
// vertical supplement.
class SupplementaryField {
public:
    using SFn = std::function<Mat(const Vec& x, const Vec& y)>;
    // ds_dx: (m,k,m), ds_dy: (m,k,k), entries (a,b,c) = d S_ab / d var_c
    using DSFn = std::function<Tensor3(const Vec& x, const Vec& y)>;

    SupplementaryField(int m, int k, SFn s)
        : m_(m), k_(k), s_(std::move(s)) {}
    SupplementaryField(int m, int k, SFn s, DSFn dx, DSFn dy)
        : m_(m), k_(k), s_(std::move(s)), ds_dx_(std::move(dx)),
          ds_dy_(std::move(dy)) {}

    static SupplementaryField vertical(int m, int k) {
        return constant(Mat::Zero(m, k));
    }

    static SupplementaryField constant(const Mat& s0) {
        const int m = static_cast<int>(s0.rows());
        const int k = static_cast<int>(s0.cols());
        return SupplementaryField(
            m, k, [s0](const Vec&, const Vec&) { return s0; },
            [m, k](const Vec&, const Vec&) { return Tensor3(m, k, m); },
            [m, k](const Vec&, const Vec&) { return Tensor3(m, k, k); });
    }

    int m() const { return m_; }
    int k() const { return k_; }
    bool has_analytic_derivatives() const { return static_cast<bool>(ds_dx_); }

    Mat s(const Vec& x, const Vec& y) const { return s_(x, y); }
    Mat s_at(const Vec& p) const { return s_(p.head(m_), p.tail(k_)); }

    Mat ds_dir(const Vec& x, const Vec& y, const Vec& dir) const {
        if (ds_dx_)
            return ds_dx_(x, y).contract_last(dir.head(m_)) +
                   ds_dy_(x, y).contract_last(dir.tail(k_));
        Vec p(m_ + k_);
        p << x, y;
        return fd_matrix_directional([this](const Vec& q) { return s_at(q); },
                                     p, dir);
    }

private:
    int m_, k_;
    SFn s_;
    DSFn ds_dx_, ds_dy_;
};

// Pointwise operators of the splitting TM = H + K in the adapted chart.
// TM/H is identified with W throughout (class of (v,w) has W-coordinate
// w - Gv), and TM/K with V (coordinate v - Sw).
struct SplitOperators {
    Mat p_onto_h;  // n x n, image H, kernel K
    Mat p_onto_k;  // n x n, image K, kernel H
    Mat q_h_k;     // n x k: W-coordinate of TM/H -> the K representative
    Mat lambda_w;  // k x n: quotient projection TM -> W
    Mat q_k_h;     // n x m: V-coordinate of TM/K -> the H representative
    Mat lambda_v;  // m x n: quotient projection TM -> V
    double condition = 0.0;
};

inline SplitOperators split_at(const DistributionChart& chart,
                               const SupplementaryField& supp, const Vec& x,
                               const Vec& y) {
    const int m = chart.m(), k = chart.k(), n = chart.n();
    const Mat g = chart.gamma(x, y);
    const Mat s = supp.s(x, y);

    Mat basis_h(n, m), basis_k(n, k);
    basis_h.topRows(m) = Mat::Identity(m, m);
    basis_h.bottomRows(k) = g;
    basis_k.topRows(m) = s;
    basis_k.bottomRows(k) = Mat::Identity(k, k);

    ProjectionPair pp = projection_pair(basis_h, basis_k);

    SplitOperators out;
    out.p_onto_h = pp.onto_h;
    out.p_onto_k = pp.onto_k;
    out.condition = pp.condition;

    out.lambda_w = Mat::Zero(k, n);
    out.lambda_w.leftCols(m) = -g;
    out.lambda_w.rightCols(k) = Mat::Identity(k, k);

    out.lambda_v = Mat::Zero(m, n);
    out.lambda_v.leftCols(m) = Mat::Identity(m, m);
    out.lambda_v.rightCols(k) = -s;

    const Mat iw = Mat::Identity(k, k) - g * s;
    const Mat iv = Mat::Identity(m, m) - s * g;
    out.q_h_k = basis_k * iw.partialPivLu().solve(Mat::Identity(k, k));
    out.q_k_h = basis_h * iv.partialPivLu().solve(Mat::Identity(m, m));
    return out;
}

// The projection field p -> P(p) over the chart domain, with directional
// derivatives either assembled from analytic gamma/S derivatives or taken
// by central differences of the split.
class ProjectionField {
public:
    using AtFn = std::function<Mat(const Vec&)>;
    using DirFn = std::function<Mat(const Vec&, const Vec&)>;

    ProjectionField(AtFn at, DirFn dir)
        : at_(std::move(at)), dir_(std::move(dir)) {}

    // Field of projections onto K along H.
    static ProjectionField onto_k(const DistributionChart& chart,
                                  const SupplementaryField& supp) {
        auto at = [&chart, &supp](const Vec& p) {
            return split_at(chart, supp, p.head(chart.m()), p.tail(chart.k()))
                .p_onto_k;
        };
        const bool analytic = chart.has_analytic_derivatives() &&
                              supp.has_analytic_derivatives();
        DirFn dir;
        if (analytic) {
            dir = [&chart, &supp](const Vec& p, const Vec& a) {
                return analytic_dir(chart, supp, p, a);
            };
        } else {
            auto base = at;
            dir = [base](const Vec& p, const Vec& a) {
                return fd_matrix_directional(base, p, a);
            };
        }
        return ProjectionField(std::move(at), std::move(dir));
    }

    static ProjectionField onto_h(const DistributionChart& chart,
                                  const SupplementaryField& supp) {
        return onto_k(chart, supp).complement();
    }

    Mat at(const Vec& p) const { return at_(p); }
    Mat dir_deriv(const Vec& p, const Vec& a) const { return dir_(p, a); }

    ProjectionField complement() const {
        auto at = at_;
        auto dir = dir_;
        return ProjectionField(
            [at](const Vec& p) {
                Mat m = at(p);
                return Mat(Mat::Identity(m.rows(), m.cols()) - m);
            },
            [dir](const Vec& p, const Vec& a) { return Mat(-dir(p, a)); });
    }

private:
    // d[P] for P = [S;I](I - GS)^{-1}[-G, I], by the product rule.
    static Mat analytic_dir(const DistributionChart& chart,
                            const SupplementaryField& supp, const Vec& p,
                            const Vec& a) {
        const int m = chart.m(), k = chart.k(), n = chart.n();
        const Vec x = p.head(m), y = p.tail(k);
        const Mat g = chart.gamma(x, y);
        const Mat s = supp.s(x, y);
        const Mat dg = chart.dgamma_dir(x, y, a);
        const Mat ds = supp.ds_dir(x, y, a);

        Mat basis_k(n, k), dbasis_k(n, k);
        basis_k.topRows(m) = s;
        basis_k.bottomRows(k) = Mat::Identity(k, k);
        dbasis_k.setZero();
        dbasis_k.topRows(m) = ds;

        Mat lam(k, n), dlam(k, n);
        lam.leftCols(m) = -g;
        lam.rightCols(k) = Mat::Identity(k, k);
        dlam.setZero();
        dlam.leftCols(m) = -dg;

        const Mat iw = Mat::Identity(k, k) - g * s;
        const Mat iw_inv = iw.partialPivLu().solve(Mat::Identity(k, k));
        const Mat diw_inv = iw_inv * (dg * s + g * ds) * iw_inv;

        return dbasis_k * iw_inv * lam + basis_k * diw_inv * lam +
               basis_k * iw_inv * dlam;
    }

    AtFn at_;
    DirFn dir_;
};

// Local form of the lift R_P at the tangent vector u attached to p:
//   (p, Pu; (I-P)u, <P';(I-P)u>u - P<P';u>u).
inline DoubleTangent r_p_lift_field(const ProjectionField& field, const Vec& p,
                                    const Vec& u) {
    const Mat pr = field.at(p);
    const Vec pu = pr * u;
    const Vec qu = u - pu;
    const Vec fourth = field.dir_deriv(p, qu) * u - pr * (field.dir_deriv(p, u) * u);
    return DoubleTangent{p, pu, qu, fourth};
}

inline DoubleTangent r_p_lift(const DistributionChart& chart,
                              const SupplementaryField& supp, const Vec& x,
                              const Vec& y, const Vec& u) {
    Vec p(chart.n());
    p << x, y;
    return r_p_lift_field(ProjectionField::onto_k(chart, supp), p, u);
}

// (omega . TP . omega) applied to a quadruple (p,y;z,w):
//   (p, y; Pz, <P';y>z + Pw).
inline DoubleTangent omega_tp_omega(const ProjectionField& field,
                                    const DoubleTangent& t) {
    const Mat pr = field.at(t.base);
    return DoubleTangent{t.base, t.first, pr * t.second,
                         field.dir_deriv(t.base, t.first) * t.second +
                             pr * t.third};
}

// Residual of the projection identity on N_k: compares
// (omega . T(I-P) . omega)(tangent) with R_P(k + T tau . tangent) where
// k = tangent.first is the K-fiber element over the chart point (x,y).
// Membership in N_k means  P z = 0  and  (I-P) w = <P'; z> k.
inline double n_k_projection_residual(const DistributionChart& chart,
                                      const SupplementaryField& supp,
                                      const Vec& x, const Vec& y,
                                      const DoubleTangent& tangent,
                                      double membership_tol = 1e-6) {
    const int n = chart.n();
    if (tangent.dim() != n || !tangent.consistent())
        throw std::invalid_argument("n_k_projection_residual: bad tangent dims");
    Vec p(n);
    p << x, y;
    if (max_abs(Vec(tangent.base - p)) > 0)
        throw std::invalid_argument(
            "n_k_projection_residual: tangent not attached at (x,y)");
    ProjectionField field = ProjectionField::onto_k(chart, supp);
    const Mat pr = field.at(p);

    const Vec fiber = tangent.first;
    if (max_abs(Vec(pr * fiber - fiber)) > membership_tol)
        throw not_in_k("n_k_projection_residual: fiber point not in K");
    const Vec z = tangent.second;
    const Vec w = tangent.third;
    if (max_abs(Vec(pr * z)) > membership_tol)
        throw not_in_nk("n_k_projection_residual: P z != 0");
    const Vec defect = (w - pr * w) - field.dir_deriv(p, z) * fiber;
    if (max_abs(defect) > membership_tol)
        throw not_in_nk("n_k_projection_residual: vertical membership fails");

    const DoubleTangent lhs = omega_tp_omega(field.complement(), tangent);
    const DoubleTangent rhs = r_p_lift_field(field, p, Vec(fiber + z));

    double r = 0.0;
    r = std::max(r, max_abs(Vec(lhs.base - rhs.base)));
    r = std::max(r, max_abs(Vec(lhs.first - rhs.first)));
    r = std::max(r, max_abs(Vec(lhs.second - rhs.second)));
    r = std::max(r, max_abs(Vec(lhs.third - rhs.third)));
    return r;
}

}  // namespace subcurv
