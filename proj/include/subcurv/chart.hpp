#pragma once

#include "subcurv/core.hpp"
#include "subcurv/fd.hpp"

namespace subcurv {

// A distribution H of the tangent bundle presented in an adapted chart on
// V x W = R^m x R^k: H_(x,y) is the graph of gamma(x,y) in Hom(V,W). The
// chart is only locally valid, so every instance carries its domain box.
class DistributionChart {
public:
    using GammaFn = std::function<Mat(const Vec& x, const Vec& y)>;
    // dgamma_dx: (k,m,m) with (a,b,c) = d gamma_ab / d x_c
    // dgamma_dy: (k,m,k) with (a,b,c) = d gamma_ab / d y_c
    using DGammaFn = std::function<Tensor3(const Vec& x, const Vec& y)>;

    DistributionChart(int m, int k, GammaFn gamma, Box domain)
        : m_(m), k_(k), gamma_(std::move(gamma)), domain_(std::move(domain)) {
        check_dims();
    }

    DistributionChart(int m, int k, GammaFn gamma, DGammaFn dx, DGammaFn dy,
                      Box domain)
        : m_(m),
          k_(k),
          gamma_(std::move(gamma)),
          dgamma_dx_(std::move(dx)),
          dgamma_dy_(std::move(dy)),
          domain_(std::move(domain)) {
        check_dims();
        validate_derivatives();
    }

    int m() const { return m_; }
    int k() const { return k_; }
    int n() const { return m_ + k_; }
    const Box& domain() const { return domain_; }
    bool has_analytic_derivatives() const {
        return static_cast<bool>(dgamma_dx_);
    }

    bool contains(const Vec& x, const Vec& y) const {
        Vec p(n());
        p << x, y;
        return domain_.contains(p);
    }

    Mat gamma(const Vec& x, const Vec& y) const { return gamma_(x, y); }

    Mat gamma_at(const Vec& p) const {
        return gamma_(p.head(m_), p.tail(k_));
    }

    Tensor3 dgamma_dx(const Vec& x, const Vec& y) const {
        if (dgamma_dx_) return dgamma_dx_(x, y);
        return fd_dgamma(x, y, /*wrt_x=*/true);
    }

    Tensor3 dgamma_dy(const Vec& x, const Vec& y) const {
        if (dgamma_dy_) return dgamma_dy_(x, y);
        return fd_dgamma(x, y, /*wrt_x=*/false);
    }

    // <dGamma/dx (x,y); f>, a k x m matrix.
    Mat dgamma_dx_dir(const Vec& x, const Vec& y, const Vec& f) const {
        if (dgamma_dx_) return dgamma_dx_(x, y).contract_last(f);
        return fd_matrix_directional(
            [&](const Vec& xx) { return gamma_(xx, y); }, x, f);
    }

    // <dGamma/dy (x,y); h>, a k x m matrix.
    Mat dgamma_dy_dir(const Vec& x, const Vec& y, const Vec& h) const {
        if (dgamma_dy_) return dgamma_dy_(x, y).contract_last(h);
        return fd_matrix_directional(
            [&](const Vec& yy) { return gamma_(x, yy); }, y, h);
    }

    // Directional derivative of gamma along a combined direction in R^{m+k}.
    Mat dgamma_dir(const Vec& x, const Vec& y, const Vec& dir) const {
        return dgamma_dx_dir(x, y, dir.head(m_)) +
               dgamma_dy_dir(x, y, dir.tail(k_));
    }

    // A copy that forgets the analytic derivative routes, forcing finite
    // differences everywhere. Used by cross-validation tests.
    DistributionChart without_analytic_derivatives() const {
        return DistributionChart(m_, k_, gamma_, domain_);
    }

private:
    void check_dims() {
        if (m_ < 1 || k_ < 1)
            throw std::invalid_argument("DistributionChart: dims must be >= 1");
        if (domain_.dim() != n())
            throw std::invalid_argument(
                "DistributionChart: domain box must live in R^(m+k)");
    }

    Tensor3 fd_dgamma(const Vec& x, const Vec& y, bool wrt_x) const {
        const int vars = wrt_x ? m_ : k_;
        Tensor3 out(k_, m_, vars);
        const Vec& base = wrt_x ? x : y;
        const double h = fd_step(fd_scale(base));
        for (int c = 0; c < vars; ++c) {
            Vec bp = base, bm = base;
            bp[c] += h;
            bm[c] -= h;
            Mat gp = wrt_x ? gamma_(bp, y) : gamma_(x, bp);
            Mat gm = wrt_x ? gamma_(bm, y) : gamma_(x, bm);
            Mat d = (gp - gm) / (2.0 * h);
            if (!d.allFinite())
                throw numerical_domain_error(
                    "DistributionChart: non-finite gamma derivative");
            for (int a = 0; a < k_; ++a)
                for (int b = 0; b < m_; ++b) out(a, b, c) = d(a, b);
        }
        return out;
    }

    // Spot-check analytic derivatives against central differences on a few
    // deterministic sample points of the domain.
    void validate_derivatives() const {
        Vec c = domain_.center();
        std::vector<Vec> samples = {c};
        // simple fixed lattice offsets, scaled into the box
        const Vec half = 0.25 * (domain_.hi - domain_.lo);
        for (int s = 0; s < 4; ++s) {
            Vec p = c;
            for (int i = 0; i < p.size(); ++i)
                p[i] += half[i] * (((s + i) % 2 == 0) ? 0.7 : -0.6);
            samples.push_back(p);
        }
        for (const Vec& p : samples) {
            const Vec x = p.head(m_), y = p.tail(k_);
            const Tensor3 ax = dgamma_dx_(x, y);
            const Tensor3 ay = dgamma_dy_(x, y);
            const Tensor3 fx = fd_dgamma(x, y, true);
            const Tensor3 fy = fd_dgamma(x, y, false);
            const double scale =
                std::max({1.0, ax.max_abs(), ay.max_abs()});
            double diff = 0.0;
            for (int a = 0; a < k_; ++a)
                for (int b = 0; b < m_; ++b) {
                    for (int i = 0; i < m_; ++i)
                        diff = std::max(diff,
                                        std::abs(ax(a, b, i) - fx(a, b, i)));
                    for (int i = 0; i < k_; ++i)
                        diff = std::max(diff,
                                        std::abs(ay(a, b, i) - fy(a, b, i)));
                }
            if (diff / scale > 1e-6)
                throw std::invalid_argument(
                    "DistributionChart: analytic derivatives disagree with "
                    "finite differences (relative error " +
                    std::to_string(diff / scale) + ")");
        }
    }

    int m_, k_;
    GammaFn gamma_;
    DGammaFn dgamma_dx_, dgamma_dy_;
    Box domain_;
};

}  // namespace subcurv
