#pragma once

#include <Eigen/SVD>

#include "subcurv/core.hpp"

namespace subcurv {

inline constexpr double kRankTolFactor = 1e-9;
inline constexpr double kConditionLimit = 1e12;

inline double condition_number(const Mat& a) {
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double smin = s[s.size() - 1];
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return s[0] / smin;
}

// Numerical rank with threshold 1e-9 * sigma_max.
inline int numerical_rank(const Mat& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0.0) return 0;
    const double tol = kRankTolFactor * s[0];
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > tol) ++r;
    return r;
}

struct ProjectionPair {
    Mat onto_h;  // image span(basisH), kernel span(basisK)
    Mat onto_k;  // complementary projection
    double condition;
};

// Complementary projections from a direct-sum basis [basisH | basisK] of R^n.
inline ProjectionPair projection_pair(const Mat& basis_h, const Mat& basis_k) {
    const int n = static_cast<int>(basis_h.rows());
    if (basis_k.rows() != n || basis_h.cols() + basis_k.cols() != n)
        throw std::invalid_argument(
            "projection_pair: basis columns must combine to a square matrix");
    Mat t(n, n);
    t.leftCols(basis_h.cols()) = basis_h;
    t.rightCols(basis_k.cols()) = basis_k;
    const double cond = condition_number(t);
    if (!(cond < kConditionLimit))
        throw degenerate_split("projection_pair: combined basis has condition " +
                               std::to_string(cond));
    Mat selector = Mat::Zero(n, n);
    for (int i = 0; i < basis_h.cols(); ++i) selector(i, i) = 1.0;
    // P_H = T diag(I,0) T^{-1}
    Mat ph = t * selector * t.partialPivLu().solve(Mat::Identity(n, n));
    ProjectionPair out;
    out.onto_h = ph;
    out.onto_k = Mat::Identity(n, n) - ph;
    out.condition = cond;
    return out;
}

}  // namespace subcurv
