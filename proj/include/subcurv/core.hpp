#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace subcurv {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numerical_domain_error : error {
    using error::error;
};

struct integration_blowup : error {
    double last_good_t;
    integration_blowup(const std::string& msg, double t)
        : error(msg), last_good_t(t) {}
};

struct degenerate_split : error {
    using error::error;
};

struct domain_error : error {
    using error::error;
};

struct domain_escape : error {
    using error::error;
};

struct chart_breakdown : error {
    using error::error;
};

struct not_in_nk : error {
    using error::error;
};

struct not_in_k : error {
    using error::error;
};

struct not_tangent : error {
    using error::error;
};

struct not_horizontal : error {
    using error::error;
};

struct schema_error : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Small dense rank-3 array. Dimensions here never exceed ~8, so a flat
// vector with explicit indexing is all we need.

class Tensor3 {
public:
    Tensor3() : d0_(0), d1_(0), d2_(0) {}
    Tensor3(int d0, int d1, int d2)
        : d0_(d0), d1_(d1), d2_(d2),
          a_(static_cast<size_t>(d0) * d1 * d2, 0.0) {}

    int dim0() const { return d0_; }
    int dim1() const { return d1_; }
    int dim2() const { return d2_; }

    double& operator()(int i, int j, int k) { return a_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return a_[idx(i, j, k)]; }

    // sum_k T(i,j,k) v_k
    Mat contract_last(const Vec& v) const {
        Mat out = Mat::Zero(d0_, d1_);
        for (int i = 0; i < d0_; ++i)
            for (int j = 0; j < d1_; ++j) {
                double s = 0.0;
                for (int k = 0; k < d2_; ++k) s += (*this)(i, j, k) * v[k];
                out(i, j) = s;
            }
        return out;
    }

    // sum_j T(i,j,k) v_j
    Mat contract_middle(const Vec& v) const {
        Mat out = Mat::Zero(d0_, d2_);
        for (int i = 0; i < d0_; ++i)
            for (int k = 0; k < d2_; ++k) {
                double s = 0.0;
                for (int j = 0; j < d1_; ++j) s += (*this)(i, j, k) * v[j];
                out(i, k) = s;
            }
        return out;
    }

    // sum_{j,k} T(i,j,k) a_j b_k
    Vec contract_both(const Vec& a, const Vec& b) const {
        Vec out = Vec::Zero(d0_);
        for (int i = 0; i < d0_; ++i) {
            double s = 0.0;
            for (int j = 0; j < d1_; ++j)
                for (int k = 0; k < d2_; ++k)
                    s += (*this)(i, j, k) * a[j] * b[k];
            out[i] = s;
        }
        return out;
    }

    Tensor3& operator+=(const Tensor3& o) {
        for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    Tensor3& operator*=(double c) {
        for (auto& v : a_) v *= c;
        return *this;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        for (double v : a_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * d1_ + j) * d2_ + k;
    }

    int d0_, d1_, d2_;
    std::vector<double> a_;
};

// ---------------------------------------------------------------------------
// Axis-aligned box, the validity region of a chart.

struct Box {
    Vec lo, hi;

    static Box cube(int dim, double radius) {
        Box b;
        b.lo = Vec::Constant(dim, -radius);
        b.hi = Vec::Constant(dim, radius);
        return b;
    }

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Vec& p) const {
        if (p.size() != lo.size()) return false;
        for (int i = 0; i < p.size(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }

    Vec center() const { return 0.5 * (lo + hi); }
};

// ---------------------------------------------------------------------------
// A point of T(TM) over a flat chart, stored as the quadruple (x,y;u,v):
// base point x, tangent-bundle fiber y, outer base velocity u, outer fiber
// velocity v. All four live in R^n.

struct DoubleTangent {
    Vec base, first, second, third;

    int dim() const { return static_cast<int>(base.size()); }

    bool consistent() const {
        return first.size() == base.size() && second.size() == base.size() &&
               third.size() == base.size();
    }
};

// Canonical involution of T(TM) in flat coordinates: (x,y;u,v) -> (x,u;y,v).
inline DoubleTangent omega_swap(const DoubleTangent& a) {
    return DoubleTangent{a.base, a.second, a.first, a.third};
}

// Difference of two double tangents attached at the same point of TM
// (equal base and first slots); the result is the vertical vector with the
// remaining two slots subtracted.
inline DoubleTangent vertical_difference(const DoubleTangent& a,
                                         const DoubleTangent& b) {
    return DoubleTangent{a.base, a.first, a.second - b.second,
                         a.third - b.third};
}

inline double max_abs(const Vec& v) {
    return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
}

inline double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.lpNorm<Eigen::Infinity>();
}

}  // namespace subcurv
