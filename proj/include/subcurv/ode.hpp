#pragma once

#include <algorithm>
#include <cmath>

#include "subcurv/core.hpp"

namespace subcurv {

struct OdeProblem {
    std::function<Vec(double, const Vec&)> rhs;
    double t0 = 0.0;
    double t1 = 1.0;
    Vec state0;
    int steps = 1;
};

// Fixed-step RK4 output with cubic-Hermite dense evaluation. Node derivatives
// are the rhs values, so the interpolant matches the integrator's order.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> t, std::vector<Vec> state,
               std::vector<Vec> deriv)
        : t_(std::move(t)), state_(std::move(state)), deriv_(std::move(deriv)) {}

    const std::vector<double>& times() const { return t_; }
    const std::vector<Vec>& states() const { return state_; }
    const std::vector<Vec>& derivs() const { return deriv_; }

    const Vec& final_state() const { return state_.back(); }
    double t0() const { return t_.front(); }
    double t1() const { return t_.back(); }

    Vec eval(double t) const { return hermite(t, false); }
    Vec deriv_at(double t) const { return hermite(t, true); }

private:
    Vec hermite(double t, bool derivative) const {
        const size_t n = t_.size();
        if (n == 1) return derivative ? deriv_[0] : state_[0];
        size_t i = segment_index(t);
        const double h = t_[i + 1] - t_[i];
        const double s = (t - t_[i]) / h;
        const Vec& y0 = state_[i];
        const Vec& y1 = state_[i + 1];
        const Vec& f0 = deriv_[i];
        const Vec& f1 = deriv_[i + 1];
        if (!derivative) {
            const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
            const double h10 = s * (1 - s) * (1 - s);
            const double h01 = s * s * (3 - 2 * s);
            const double h11 = s * s * (s - 1);
            return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
        }
        const double d00 = 6 * s * (s - 1) / h;
        const double d10 = (1 - s) * (1 - 3 * s);
        const double d01 = -6 * s * (s - 1) / h;
        const double d11 = s * (3 * s - 2);
        return d00 * y0 + d10 * f0 + d01 * y1 + d11 * f1;
    }

    size_t segment_index(double t) const {
        // Nodes are uniformly spaced but may run in either time direction.
        const size_t n = t_.size();
        const double span = t_.back() - t_.front();
        double frac = (t - t_.front()) / span;
        frac = std::clamp(frac, 0.0, 1.0);
        size_t i = static_cast<size_t>(frac * static_cast<double>(n - 1));
        return std::min(i, n - 2);
    }

    std::vector<double> t_;
    std::vector<Vec> state_;
    std::vector<Vec> deriv_;
};

// Classic fourth-order Runge-Kutta with fixed steps. t1 < t0 integrates
// backward. Throws integration_blowup carrying the last good time.
inline Trajectory rk4_solve(const OdeProblem& p) {
    if (p.steps < 1) throw std::invalid_argument("rk4_solve: steps must be >= 1");
    if (p.t0 == p.t1)
        return Trajectory({p.t0}, {p.state0}, {p.rhs(p.t0, p.state0)});
    const int n = p.steps;
    const double h = (p.t1 - p.t0) / n;
    std::vector<double> ts;
    std::vector<Vec> ys, fs;
    ts.reserve(n + 1);
    ys.reserve(n + 1);
    fs.reserve(n + 1);

    double t = p.t0;
    Vec y = p.state0;
    Vec f = p.rhs(t, y);
    if (!y.allFinite() || !f.allFinite())
        throw integration_blowup("rk4_solve: non-finite initial data", p.t0);
    ts.push_back(t);
    ys.push_back(y);
    fs.push_back(f);

    for (int i = 0; i < n; ++i) {
        const Vec k1 = f;
        const Vec k2 = p.rhs(t + 0.5 * h, y + (0.5 * h) * k1);
        const Vec k3 = p.rhs(t + 0.5 * h, y + (0.5 * h) * k2);
        const Vec k4 = p.rhs(t + h, y + h * k3);
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = p.t0 + (i + 1) * h;
        if (!y.allFinite())
            throw integration_blowup("rk4_solve: state diverged", ts.back());
        f = p.rhs(t, y);
        if (!f.allFinite())
            throw integration_blowup("rk4_solve: rhs diverged", ts.back());
        ts.push_back(t);
        ys.push_back(y);
        fs.push_back(f);
    }
    return Trajectory(std::move(ts), std::move(ys), std::move(fs));
}

// Matrix-valued convenience: integrates column-stacked states.
inline Mat rk4_matrix_solve(const std::function<Mat(double, const Mat&)>& rhs,
                            double t0, double t1, const Mat& m0, int steps) {
    const int r = static_cast<int>(m0.rows());
    const int c = static_cast<int>(m0.cols());
    OdeProblem p;
    p.rhs = [&](double t, const Vec& v) -> Vec {
        Mat m = Eigen::Map<const Mat>(v.data(), r, c);
        Mat d = rhs(t, m);
        return Eigen::Map<const Vec>(d.data(), r * c);
    };
    p.t0 = t0;
    p.t1 = t1;
    p.state0 = Eigen::Map<const Vec>(m0.data(), r * c);
    p.steps = steps;
    Vec out = rk4_solve(p).final_state();
    return Eigen::Map<const Mat>(out.data(), r, c);
}

}  // namespace subcurv
