#pragma once

#include "subcurv/transport.hpp"

namespace subcurv {

// A field X(t) = (A(t), B(t)) along a tangent path, split into its V and W
// components in the chart.
struct VariationField {
    TangentPath beta0;
    std::function<Vec(double)> a;  // V component
    std::function<Vec(double)> b;  // W component

    Vec x_at(double t) const {
        Vec out(a(t).size() + b(t).size());
        out << a(t), b(t);
        return out;
    }
};

// The curvature-driven operator along beta0, valued in TM/H (W-identified):
//   (D X)_t = [K]_{t0}^t d/dt( [K]_t^{t0} P^H X_t )
//             - C( P^K_H X_t ^ beta0-dot(t) ).
// The time derivative of the transported quantity uses central differences
// with re-integration, with step span/steps.
inline Vec evaluate_D(const DistributionChart& chart,
                      const SupplementaryField& supp, const VariationField& vf,
                      double t0, double t, int steps) {
    const TangentPath& beta0 = vf.beta0;
    const double span = beta0.t1() - beta0.t0();
    const double delta = span / steps;

    auto pulled = [&](double tau) -> Vec {
        const Vec x = beta0.x(tau), y = beta0.y(tau);
        const SplitOperators sp = split_at(chart, supp, x, y);
        const Vec u = sp.lambda_w * vf.x_at(tau);
        return quotient_transport(chart, supp, beta0, tau, t0, steps).matrix * u;
    };
    const Vec dpulled = (pulled(t + delta) - pulled(t - delta)) / (2 * delta);
    const Vec transported =
        quotient_transport(chart, supp, beta0, t0, t, steps).matrix * dpulled;

    const Vec x = beta0.x(t), y = beta0.y(t);
    const SplitOperators sp = split_at(chart, supp, x, y);
    const Vec h = sp.p_onto_h * vf.x_at(t);
    const Vec curv = curvature_at(chart, x, y).apply(h.head(chart.m()),
                                                     beta0.xdot(t));
    return transported - curv;
}

// Max over the grid of the difference between D evaluated through
// (supp1, t0a) and through (supp2, t0b).
inline double d_invariance_residual(const DistributionChart& chart,
                                    const SupplementaryField& supp1,
                                    const SupplementaryField& supp2,
                                    const VariationField& vf, double t0a,
                                    double t0b,
                                    const std::vector<double>& grid,
                                    int steps) {
    double worst = 0.0;
    for (double t : grid) {
        const Vec d1 = evaluate_D(chart, supp1, vf, t0a, t, steps);
        const Vec d2 = evaluate_D(chart, supp2, vf, t0b, t, steps);
        worst = std::max(worst, max_abs(Vec(d1 - d2)));
    }
    return worst;
}

// Solves D X = 0 in the vertical-supplement form: given the free V component
// A(t) and B(t0) = b0, integrates the linear equation
//   Bdot = Gamma(beta0) Adot + <dG/dx; A> xdot + <dG/dy; B> xdot.
inline VariationField solve_variation_equation(
    const DistributionChart& chart, const TangentPath& beta0,
    const std::function<Vec(double)>& a, const std::function<Vec(double)>& adot,
    const Vec& b0, int steps) {
    if (beta0.tangency_residual() > kTangencyTolIntegrated)
        throw not_tangent("solve_variation_equation: base path not tangent");
    OdeProblem p;
    p.rhs = [&](double t, const Vec& b) -> Vec {
        const Vec x = beta0.x(t), y = beta0.y(t), xd = beta0.xdot(t);
        return chart.gamma(x, y) * adot(t) +
               chart.dgamma_dx_dir(x, y, a(t)) * xd +
               chart.dgamma_dy_dir(x, y, b) * xd;
    };
    p.t0 = beta0.t0();
    p.t1 = beta0.t1();
    p.state0 = b0;
    p.steps = steps;
    auto traj = std::make_shared<Trajectory>(rk4_solve(p));
    VariationField vf{beta0, a, [traj](double t) { return traj->eval(t); }};
    return vf;
}

inline VariationField solve_variation_equation(
    const DistributionChart& chart, const TangentPath& beta0,
    const std::function<Vec(double)>& a, const Vec& b0, int steps) {
    auto adot = [a](double t) { return fd_time_derivative(a, t); };
    return solve_variation_equation(chart, beta0, a, adot, b0, steps);
}

// A finite variation surface beta(s,t). Row s = 0 is beta0 itself; the other
// rows are horizontal lifts of x(s,t) = x0(t) + s A(t) started from
// y(s,t0) = y0(t0) + s B(t0). Rows are kept as dense tangent paths so the
// s-derivative can be extracted off the storage grid.
struct VariationSurface {
    std::vector<double> s_values;
    std::vector<double> t_values;
    std::vector<std::vector<Vec>> values;  // values[i][j] = beta(s_i, t_j)
    std::vector<TangentPath> rows;         // one tangent path per s value
    double epsilon = 0.0;
    double tangency_residual = 0.0;

    int zero_row() const {
        for (size_t i = 0; i < s_values.size(); ++i)
            if (s_values[i] == 0.0) return static_cast<int>(i);
        throw std::logic_error("VariationSurface: no s = 0 row");
    }

    void write_csv(std::ostream& os) const {
        const int n = static_cast<int>(values[0][0].size());
        os << "s,t";
        for (int c = 0; c < n; ++c) os << ",c" << c;
        os << "\n";
        char buf[64];
        for (size_t i = 0; i < s_values.size(); ++i)
            for (size_t j = 0; j < t_values.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.12g,%.12g", s_values[i],
                              t_values[j]);
                os << buf;
                for (int c = 0; c < n; ++c) {
                    std::snprintf(buf, sizeof buf, ",%.12g", values[i][j][c]);
                    os << buf;
                }
                os << "\n";
            }
    }
};

// Reconstructs a variation through tangent paths from a field with
// D X ~ 0. On integration blowup the strip half-width is halved once before
// giving up.
inline VariationSurface reconstruct_variation(const DistributionChart& chart,
                                              const VariationField& vf,
                                              double epsilon, int s_steps,
                                              int t_steps,
                                              bool check_precondition = true) {
    const TangentPath& beta0 = vf.beta0;
    if (s_steps < 2 || s_steps % 2 != 0)
        throw std::invalid_argument(
            "reconstruct_variation: s_steps must be even and >= 2");
    if (check_precondition) {
        // the check needs enough steps that evaluate_D's own differencing
        // error stays well below the acceptance threshold
        SupplementaryField vert =
            SupplementaryField::vertical(chart.m(), chart.k());
        const double span = beta0.t1() - beta0.t0();
        double worst = 0.0;
        for (int i = 1; i < 8; ++i) {
            const double t = beta0.t0() + span * i / 8.0;
            worst = std::max(
                worst,
                max_abs(evaluate_D(chart, vert, vf, beta0.t0(), t, 512)));
        }
        if (worst > 1e-5)
            throw std::invalid_argument(
                "reconstruct_variation: field does not satisfy D X = 0 "
                "(residual " +
                std::to_string(worst) + ")");
    }

    const int integration_steps = std::max(t_steps, 256);
    auto build = [&](double eps) -> VariationSurface {
        VariationSurface surf;
        surf.epsilon = eps;
        for (int i = 0; i <= s_steps; ++i)
            surf.s_values.push_back(-eps + 2.0 * eps * i / s_steps);
        for (int j = 0; j <= t_steps; ++j)
            surf.t_values.push_back(beta0.t0() + (beta0.t1() - beta0.t0()) *
                                                     static_cast<double>(j) /
                                                     t_steps);
        const Vec y00 = beta0.y(beta0.t0());
        const Vec b0 = vf.b(beta0.t0());
        for (double s : surf.s_values) {
            if (s == 0.0) {
                surf.rows.push_back(beta0);
                continue;
            }
            BasePath base;
            base.t0 = beta0.t0();
            base.t1 = beta0.t1();
            base.x = [path = beta0, afn = vf.a, s](double t) {
                return Vec(path.x(t) + s * afn(t));
            };
            base.xdot = [path = beta0, afn = vf.a, s](double t) {
                return Vec(path.xdot(t) + s * fd_time_derivative(afn, t));
            };
            surf.rows.push_back(horizontal_lift(chart, base, Vec(y00 + s * b0),
                                                integration_steps));
        }
        double tres = 0.0;
        for (const TangentPath& row : surf.rows)
            tres = std::max(tres, row.tangency_residual());
        surf.tangency_residual = tres;
        for (size_t i = 0; i < surf.s_values.size(); ++i) {
            surf.values.emplace_back();
            for (double t : surf.t_values)
                surf.values.back().push_back(surf.rows[i].point(t));
        }
        return surf;
    };

    auto retry = [&]() -> VariationSurface {
        try {
            return build(0.5 * epsilon);
        } catch (const error&) {
            throw integration_blowup(
                "reconstruct_variation: strip half-widths " +
                    std::to_string(epsilon) + " and " +
                    std::to_string(0.5 * epsilon) + " both failed to integrate",
                beta0.t0());
        }
    };
    try {
        return build(epsilon);
    } catch (const integration_blowup&) {
        return retry();
    } catch (const domain_escape&) {
        return retry();
    }
}

// Central-difference extraction of the infinitesimal variation
// d beta / d s (0, t) from the two surface rows adjacent to s = 0.
inline VariationField extract_infinitesimal(const VariationSurface& surf) {
    const int z = surf.zero_row();
    if (z == 0 || z + 1 >= static_cast<int>(surf.rows.size()))
        throw std::invalid_argument(
            "extract_infinitesimal: no rows adjacent to s = 0");
    const TangentPath lo = surf.rows[z - 1];
    const TangentPath hi = surf.rows[z + 1];
    const double ds = surf.s_values[z + 1] - surf.s_values[z];
    auto a = [lo, hi, ds](double t) {
        return Vec((hi.x(t) - lo.x(t)) / (2.0 * ds));
    };
    auto b = [lo, hi, ds](double t) {
        return Vec((hi.y(t) - lo.y(t)) / (2.0 * ds));
    };
    return VariationField{surf.rows[z], a, b};
}

}  // namespace subcurv
