#pragma once

#include "subcurv/chart.hpp"

namespace subcurv {

// Matrix-valued multivariate polynomial: F(z) = sum_t coeff_t * z^exp_t,
// z in R^nvars. Serializable as (exponent multi-index, coefficient matrix)
// records and differentiable term by term.
class PolyMatrixField {
public:
    struct Term {
        std::vector<int> exponents;  // length nvars
        Mat coeff;
    };

    PolyMatrixField(int rows, int cols, int nvars)
        : rows_(rows), cols_(cols), nvars_(nvars) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }

    void add_term(std::vector<int> exponents, Mat coeff) {
        if (static_cast<int>(exponents.size()) != nvars_)
            throw std::invalid_argument("PolyMatrixField: bad exponent length");
        if (coeff.rows() != rows_ || coeff.cols() != cols_)
            throw std::invalid_argument("PolyMatrixField: bad coefficient shape");
        terms_.push_back(Term{std::move(exponents), std::move(coeff)});
    }

    Mat eval(const Vec& z) const {
        Mat out = Mat::Zero(rows_, cols_);
        for (const Term& t : terms_) {
            double mono = 1.0;
            for (int v = 0; v < nvars_; ++v)
                for (int e = 0; e < t.exponents[v]; ++e) mono *= z[v];
            out += mono * t.coeff;
        }
        return out;
    }

    PolyMatrixField derivative(int var) const {
        PolyMatrixField d(rows_, cols_, nvars_);
        for (const Term& t : terms_) {
            if (t.exponents[var] == 0) continue;
            std::vector<int> e = t.exponents;
            const double factor = e[var];
            e[var] -= 1;
            d.add_term(std::move(e), factor * t.coeff);
        }
        return d;
    }

private:
    int rows_, cols_, nvars_;
    std::vector<Term> terms_;
};

// Chart whose gamma is a k x m polynomial in the chart variables (x,y);
// analytic first derivatives come from termwise differentiation.
inline DistributionChart poly_chart(int m, int k, const PolyMatrixField& gamma,
                                    Box domain) {
    if (gamma.rows() != k || gamma.cols() != m || gamma.nvars() != m + k)
        throw std::invalid_argument("poly_chart: field shape mismatch");
    std::vector<PolyMatrixField> dx, dy;
    for (int v = 0; v < m; ++v) dx.push_back(gamma.derivative(v));
    for (int v = 0; v < k; ++v) dy.push_back(gamma.derivative(m + v));

    auto join = [m, k](const Vec& x, const Vec& y) {
        Vec z(m + k);
        z << x, y;
        return z;
    };
    auto gfn = [gamma, join](const Vec& x, const Vec& y) {
        return gamma.eval(join(x, y));
    };
    auto dxfn = [dx, join, m, k](const Vec& x, const Vec& y) {
        Tensor3 out(k, m, m);
        const Vec z = join(x, y);
        for (int c = 0; c < m; ++c) {
            Mat d = dx[c].eval(z);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < m; ++b) out(a, b, c) = d(a, b);
        }
        return out;
    };
    auto dyfn = [dy, join, m, k](const Vec& x, const Vec& y) {
        Tensor3 out(k, m, k);
        const Vec z = join(x, y);
        for (int c = 0; c < k; ++c) {
            Mat d = dy[c].eval(z);
            for (int a = 0; a < k; ++a)
                for (int b = 0; b < m; ++b) out(a, b, c) = d(a, b);
        }
        return out;
    };
    return DistributionChart(m, k, gfn, dxfn, dyfn, std::move(domain));
}

}  // namespace subcurv
