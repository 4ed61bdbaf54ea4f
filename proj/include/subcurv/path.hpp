#pragma once

#include "subcurv/chart.hpp"
#include "subcurv/ode.hpp"

namespace subcurv {

inline constexpr double kTangencyTolAnalytic = 1e-8;
inline constexpr double kTangencyTolIntegrated = 1e-6;

// A base-space curve t -> x(t) in V with its velocity.
struct BasePath {
    std::function<Vec(double)> x;
    std::function<Vec(double)> xdot;
    double t0 = 0.0;
    double t1 = 1.0;

    static BasePath from_position(std::function<Vec(double)> xfn, double t0,
                                  double t1) {
        BasePath b;
        b.x = xfn;
        b.xdot = [xfn](double t) { return fd_time_derivative(xfn, t); };
        b.t0 = t0;
        b.t1 = t1;
        return b;
    }
};

// A path t -> (x(t), y(t)) tangent to H: ydot = gamma(x,y) xdot up to the
// stored residual. Construction fails when the residual exceeds the
// tolerance for the construction route (1e-8 analytic, 1e-6 integrated).
class TangentPath {
public:
    double t0() const { return t0_; }
    double t1() const { return t1_; }
    int m() const { return m_; }
    int k() const { return k_; }
    double tangency_residual() const { return tangency_residual_; }

    Vec x(double t) const { return x_(t); }
    Vec y(double t) const { return y_(t); }
    Vec xdot(double t) const { return xdot_(t); }
    Vec ydot(double t) const { return ydot_(t); }

    Vec point(double t) const {
        Vec p(m_ + k_);
        p << x_(t), y_(t);
        return p;
    }
    Vec velocity(double t) const {
        Vec v(m_ + k_);
        v << xdot_(t), ydot_(t);
        return v;
    }

    static TangentPath analytic(const DistributionChart& chart,
                                std::function<Vec(double)> x,
                                std::function<Vec(double)> y, double t0,
                                double t1) {
        auto xd = [x](double t) { return fd_time_derivative(x, t); };
        auto yd = [y](double t) { return fd_time_derivative(y, t); };
        return analytic(chart, x, y, xd, yd, t0, t1);
    }

    static TangentPath analytic(const DistributionChart& chart,
                                std::function<Vec(double)> x,
                                std::function<Vec(double)> y,
                                std::function<Vec(double)> xdot,
                                std::function<Vec(double)> ydot, double t0,
                                double t1,
                                double tol = kTangencyTolAnalytic) {
        TangentPath p;
        p.m_ = chart.m();
        p.k_ = chart.k();
        p.t0_ = t0;
        p.t1_ = t1;
        p.x_ = std::move(x);
        p.y_ = std::move(y);
        p.xdot_ = std::move(xdot);
        p.ydot_ = std::move(ydot);
        p.measure_tangency(chart);
        if (p.tangency_residual_ > tol)
            throw not_tangent("TangentPath: residual " +
                              std::to_string(p.tangency_residual_) +
                              " exceeds tolerance");
        return p;
    }

    // Used by horizontal_lift and the variation machinery: y from a dense
    // integrator trajectory over [t0,t1].
    static TangentPath integrated(const DistributionChart& chart,
                                  const BasePath& base, Trajectory y_traj) {
        auto traj = std::make_shared<Trajectory>(std::move(y_traj));
        TangentPath p;
        p.m_ = chart.m();
        p.k_ = chart.k();
        p.t0_ = base.t0;
        p.t1_ = base.t1;
        p.x_ = base.x;
        p.xdot_ = base.xdot;
        p.y_ = [traj](double t) { return traj->eval(t); };
        p.ydot_ = [traj](double t) { return traj->deriv_at(t); };
        p.measure_tangency(chart);
        if (p.tangency_residual_ > kTangencyTolIntegrated)
            throw not_tangent("TangentPath: residual " +
                              std::to_string(p.tangency_residual_) +
                              " exceeds integrated tolerance");
        return p;
    }

private:
    void measure_tangency(const DistributionChart& chart, int samples = 101) {
        double worst = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double t =
                t0_ + (t1_ - t0_) * static_cast<double>(i) / (samples - 1);
            const Vec xx = x_(t), yy = y_(t);
            const Vec res = ydot_(t) - chart.gamma(xx, yy) * xdot_(t);
            worst = std::max(worst, max_abs(res));
        }
        tangency_residual_ = worst;
    }

    int m_ = 0, k_ = 0;
    double t0_ = 0.0, t1_ = 0.0;
    std::function<Vec(double)> x_, y_, xdot_, ydot_;
    double tangency_residual_ = 0.0;
};

// Horizontal lift: integrates ydot = gamma(x,y) xdot from y(t0) = y_start.
inline TangentPath horizontal_lift(const DistributionChart& chart,
                                   const BasePath& base, const Vec& y_start,
                                   int steps) {
    OdeProblem p;
    p.rhs = [&chart, &base](double t, const Vec& y) -> Vec {
        return chart.gamma(base.x(t), y) * base.xdot(t);
    };
    p.t0 = base.t0;
    p.t1 = base.t1;
    p.state0 = y_start;
    p.steps = steps;
    Trajectory traj = rk4_solve(p);
    for (size_t i = 0; i < traj.times().size(); ++i) {
        Vec q(chart.n());
        q << base.x(traj.times()[i]), traj.states()[i];
        if (!chart.domain().contains(q))
            throw domain_escape("horizontal_lift: path left the chart domain");
    }
    return TangentPath::integrated(chart, base, std::move(traj));
}

}  // namespace subcurv
