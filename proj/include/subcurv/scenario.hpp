#pragma once

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "subcurv/subcurv.hpp"

namespace subcurv {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Report

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string detail;  // optional, e.g. a classification string
};

struct Report {
    Json scenario_echo;
    std::vector<Check> checks;
    double wall_time_ms = 0.0;

    bool all_pass() const {
        for (const Check& c : checks)
            if (!c.pass) return false;
        return true;
    }

    Json to_json() const {
        Json j;
        j["scenario"] = scenario_echo;
        Json arr = Json::array();
        for (const Check& c : checks) {
            Json jc;
            jc["name"] = c.name;
            jc["value"] = c.value;
            jc["tolerance"] = c.tolerance;
            jc["pass"] = c.pass;
            if (!c.detail.empty()) jc["detail"] = c.detail;
            arr.push_back(jc);
        }
        j["checks"] = arr;
        j["all_pass"] = all_pass();
        j["wall_time_ms"] = wall_time_ms;
        return j;
    }

    void print_summary(std::ostream& os) const {
        for (const Check& c : checks) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-44s %12.5g  tol %-9.3g  %s%s%s",
                          c.name.c_str(), c.value, c.tolerance,
                          c.pass ? "PASS" : "FAIL",
                          c.detail.empty() ? "" : "  ", c.detail.c_str());
            os << buf << "\n";
        }
        os << (all_pass() ? "ALL CHECKS PASSED" : "CHECK FAILURES PRESENT")
           << "\n";
    }
};

namespace scenario_detail {

// ---------------------------------------------------------------------------
// Schema helpers

inline const Json& need(const Json& j, const char* key) {
    if (!j.contains(key))
        throw schema_error(std::string("scenario: missing field '") + key + "'");
    return j.at(key);
}

inline Vec to_vec(const Json& j) {
    if (!j.is_array()) throw schema_error("scenario: expected a number array");
    Vec v(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw schema_error("scenario: non-numeric entry");
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

inline Mat to_mat(const Json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw schema_error("scenario: expected a matrix (array of arrays)");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols)
            throw schema_error("scenario: ragged matrix");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline Tensor3 to_tensor3(const Json& j) {
    const int d0 = static_cast<int>(j.size());
    const int d1 = static_cast<int>(j[0].size());
    const int d2 = static_cast<int>(j[0][0].size());
    Tensor3 t(d0, d1, d2);
    for (int i = 0; i < d0; ++i)
        for (int a = 0; a < d1; ++a)
            for (int b = 0; b < d2; ++b) t(i, a, b) = j[i][a][b].get<double>();
    return t;
}

// t -> const + t lin + sin(freq t) s + cos(freq t) c, with analytic derivative
struct Curve {
    Vec cst, lin, sin_c, cos_c;
    double freq = 1.0;

    int dim() const { return static_cast<int>(cst.size()); }
    Vec at(double t) const {
        return cst + t * lin + std::sin(freq * t) * sin_c +
               std::cos(freq * t) * cos_c;
    }
    Vec deriv(double t) const {
        return lin + freq * std::cos(freq * t) * sin_c -
               freq * std::sin(freq * t) * cos_c;
    }
};

inline Curve parse_curve(const Json& j, int dim) {
    Curve c;
    c.cst = Vec::Zero(dim);
    c.lin = Vec::Zero(dim);
    c.sin_c = Vec::Zero(dim);
    c.cos_c = Vec::Zero(dim);
    auto grab = [&](const char* key, Vec& into) {
        if (j.contains(key)) {
            into = to_vec(j.at(key));
            if (into.size() != dim)
                throw schema_error(std::string("scenario: curve field '") + key +
                                   "' has wrong dimension");
        }
    };
    grab("const", c.cst);
    grab("lin", c.lin);
    grab("sin", c.sin_c);
    grab("cos", c.cos_c);
    if (j.contains("freq")) c.freq = j.at("freq").get<double>();
    return c;
}

inline DistributionChart parse_chart(const Json& j) {
    if (j.contains("fixture")) {
        const std::string name = j.at("fixture").get<std::string>();
        if (name == "fiber_linear" && j.contains("a"))
            return fixtures::fiber_linear(j.at("a").get<double>());
        return fixtures::chart_by_name(name);
    }
    if (j.contains("poly")) {
        const Json& pj = j.at("poly");
        const int m = need(pj, "m").get<int>();
        const int k = need(pj, "k").get<int>();
        PolyMatrixField f(k, m, m + k);
        for (const Json& term : need(pj, "terms")) {
            std::vector<int> expo =
                need(term, "exponents").get<std::vector<int>>();
            f.add_term(std::move(expo), to_mat(need(term, "coeff")));
        }
        const double radius =
            pj.contains("radius") ? pj.at("radius").get<double>() : 4.0;
        return poly_chart(m, k, f, Box::cube(m + k, radius));
    }
    throw schema_error("scenario: chart needs 'fixture' or 'poly'");
}

inline LinearConnection parse_connection(const Json& j) {
    if (j.contains("fixture"))
        return fixtures::connection_by_name(j.at("fixture").get<std::string>());
    if (j.contains("constant"))
        return LinearConnection::constant(to_tensor3(j.at("constant")));
    throw schema_error("scenario: connection needs 'fixture' or 'constant'");
}

inline SupplementaryField parse_supplement(const Json& j, int m, int k) {
    if (j.contains("vertical")) return SupplementaryField::vertical(m, k);
    if (j.contains("constant")) {
        Mat s0 = to_mat(j.at("constant"));
        if (s0.rows() != m || s0.cols() != k)
            throw schema_error("scenario: supplement matrix must be m x k");
        return SupplementaryField::constant(s0);
    }
    throw schema_error("scenario: supplement needs 'vertical' or 'constant'");
}

inline BasePath parse_base_path(const Json& j, int m) {
    Curve c = parse_curve(need(j, "x"), m);
    BasePath b;
    b.x = [c](double t) { return c.at(t); };
    b.xdot = [c](double t) { return c.deriv(t); };
    b.t0 = j.contains("t0") ? j.at("t0").get<double>() : 0.0;
    b.t1 = j.contains("t1") ? j.at("t1").get<double>() : 1.0;
    return b;
}

inline std::vector<double> interior_grid(double t0, double t1, int count) {
    std::vector<double> g;
    for (int i = 1; i <= count; ++i)
        g.push_back(t0 + (t1 - t0) * i / (count + 1.0));
    return g;
}

inline Vec random_in_box(std::mt19937_64& rng, const Box& box, double shrink) {
    std::uniform_real_distribution<double> u(-shrink, shrink);
    Vec c = box.center();
    Vec v(box.dim());
    for (int i = 0; i < box.dim(); ++i)
        v[i] = c[i] + u(rng) * 0.5 * (box.hi[i] - box.lo[i]);
    return v;
}

}  // namespace scenario_detail

// ---------------------------------------------------------------------------
// Scenario runner

class ScenarioRunner {
public:
    explicit ScenarioRunner(Json scenario) : j_(std::move(scenario)) {}

    // Applies command-line overrides before running.
    void override_steps(int steps) { j_["steps"] = steps; }
    void override_tol(double tol) { j_["tol"] = tol; }
    void override_seed(uint64_t seed) { j_["seed"] = seed; }
    void override_out(const std::string& path) { j_["out"] = path; }

    const Json& scenario() const { return j_; }

    Report run() {
        using scenario_detail::need;
        const auto start = std::chrono::steady_clock::now();
        Report report;
        report.scenario_echo = j_;

        const std::string kind = need(j_, "kind").get<std::string>();
        seed_ = j_.contains("seed") ? j_.at("seed").get<uint64_t>() : 0;
        steps_ = j_.contains("steps") ? j_.at("steps").get<int>() : 256;
        if (steps_ < 1) throw schema_error("scenario: steps must be positive");

        if (kind == "curvature")
            run_curvature(report);
        else if (kind == "frobenius")
            run_frobenius(report);
        else if (kind == "transport")
            run_transport(report);
        else if (kind == "theorem8")
            run_theorem8(report);
        else if (kind == "theorem10")
            run_theorem10(report);
        else if (kind == "variation")
            run_variation(report);
        else if (kind == "reconstruct")
            run_reconstruct(report);
        else if (kind == "jacobi")
            run_jacobi(report);
        else if (kind == "theorem13")
            run_theorem13(report);
        else if (kind == "invariants")
            run_invariants(report);
        else
            throw schema_error("scenario: unknown kind '" + kind + "'");

        const auto stop = std::chrono::steady_clock::now();
        report.wall_time_ms =
            std::chrono::duration<double, std::milli>(stop - start).count();
        return report;
    }

private:
    double tol_or(double fallback) const {
        return j_.contains("tol") ? j_.at("tol").get<double>() : fallback;
    }

    TangentPath lifted_path(const DistributionChart& chart) const {
        using namespace scenario_detail;
        const Json& pj = need(j_, "path");
        BasePath base = parse_base_path(pj, chart.m());
        Vec y0 = to_vec(need(pj, "y0"));
        if (y0.size() != chart.k())
            throw schema_error("scenario: path y0 must have dimension k");
        return horizontal_lift(chart, base, y0, steps_);
    }

    void run_curvature(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        const int npoints =
            j_.contains("points") ? j_.at("points").get<int>() : 20;
        std::mt19937_64 rng(seed_);
        double antisym = 0.0;
        CurvatureValue last{chart.m(), chart.k(),
                            Tensor3(chart.k(), chart.m(), chart.m())};
        for (int i = 0; i < npoints; ++i) {
            Vec p = random_in_box(rng, chart.domain(), 0.4);
            last = curvature_at(chart, p.head(chart.m()), p.tail(chart.k()));
            for (int a = 0; a < chart.k(); ++a)
                for (int r = 0; r < chart.m(); ++r)
                    for (int c = 0; c < chart.m(); ++c)
                        antisym = std::max(
                            antisym, std::abs(last.tensor(a, r, c) +
                                              last.tensor(a, c, r)));
        }
        report.checks.push_back(
            {"curvature antisymmetry defect", antisym, 0.0, antisym == 0.0, ""});
        NondegeneracyClass nc = nondegeneracy_class(last);
        Check cls{"nondegeneracy class", static_cast<double>(nc.rank), 0.0,
                  true, to_string(nc.kind)};
        if (j_.contains("expect_class"))
            cls.pass = j_.at("expect_class").get<std::string>() ==
                       to_string(nc.kind);
        if (j_.contains("expect_rank"))
            cls.pass = cls.pass && nc.rank == j_.at("expect_rank").get<int>();
        report.checks.push_back(cls);
    }

    void run_frobenius(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        const int npoints =
            j_.contains("points") ? j_.at("points").get<int>() : 64;
        std::mt19937_64 rng(seed_);
        std::vector<Vec> grid;
        for (int i = 0; i < npoints; ++i)
            grid.push_back(random_in_box(rng, chart.domain(), 0.4));
        const double tol = tol_or(1e-7);
        FrobeniusVerdict v = frobenius_verdict(chart, grid, tol);
        Check c{"max sampled curvature", v.max_curvature, tol, true,
                v.integrable ? "Integrable" : "NotIntegrable"};
        if (j_.contains("expect_integrable"))
            c.pass = v.integrable == j_.at("expect_integrable").get<bool>();
        report.checks.push_back(c);
    }

    void run_transport(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        SupplementaryField supp = parse_supplement(
            need(j_, "supplements").at(0), chart.m(), chart.k());
        TangentPath beta0 = lifted_path(chart);
        const double t0 = beta0.t0(), t1 = beta0.t1();
        const double mid = 0.5 * (t0 + t1);
        const double tol = tol_or(1e-7);

        const Mat whole =
            quotient_transport(chart, supp, beta0, t0, t1, steps_).matrix;
        const Mat first =
            quotient_transport(chart, supp, beta0, t0, mid, steps_).matrix;
        const Mat second =
            quotient_transport(chart, supp, beta0, mid, t1, steps_).matrix;
        report.checks.push_back({"quotient transport multiplicativity",
                                 max_abs(Mat(second * first - whole)), tol,
                                 max_abs(Mat(second * first - whole)) <= tol,
                                 ""});
        const Mat back =
            quotient_transport(chart, supp, beta0, t1, t0, steps_).matrix;
        const double inv = max_abs(
            Mat(back * whole - Mat::Identity(chart.k(), chart.k())));
        report.checks.push_back(
            {"quotient transport inverse", inv, tol, inv <= tol, ""});

        const Mat frame =
            k_transport_frame(chart, supp, beta0, t0, t1, steps_);
        const Vec pt = beta0.point(t1);
        const SplitOperators sp =
            split_at(chart, supp, pt.head(chart.m()), pt.tail(chart.k()));
        const double member = max_abs(Mat(sp.p_onto_h * frame));
        report.checks.push_back({"transported frame stays in K", member, 1e-6,
                                 member <= 1e-6, ""});
    }

    void run_theorem8(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        const Json& pj = need(j_, "path");
        BasePath base = parse_base_path(pj, chart.m());
        Vec y0 = to_vec(need(pj, "y0"));
        TangentPath beta0 = horizontal_lift(chart, base, y0, steps_);
        const double tol = tol_or(1e-5);
        const double h = 1e-4;
        const Mat lin =
            linearized_transport(chart, beta0, base.t0, base.t1, steps_).matrix;
        Mat fd(chart.k(), chart.k());
        for (int c = 0; c < chart.k(); ++c) {
            Vec up = y0, dn = y0;
            up[c] += h;
            dn[c] -= h;
            fd.col(c) =
                (ehresmann_transport(chart, base, up, base.t0, base.t1, steps_) -
                 ehresmann_transport(chart, base, dn, base.t0, base.t1,
                                     steps_)) /
                (2 * h);
        }
        const double diff = max_abs(Mat(lin - fd));
        report.checks.push_back({"linearized equals fiber derivative", diff,
                                 tol, diff <= tol, ""});
        if (j_.contains("expect_exp_rate")) {
            // one-dimensional closed form exp(a (t1 - t0))
            const double a = j_.at("expect_exp_rate").get<double>();
            const double exact = std::exp(a * (base.t1 - base.t0));
            const double err = std::abs(lin(0, 0) - exact);
            report.checks.push_back(
                {"closed-form fiber transport", err, 1e-8, err <= 1e-8, ""});
        }
    }

    void run_theorem10(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        const Json& sj = need(j_, "supplements");
        if (sj.size() < 2)
            throw schema_error("scenario: theorem10 needs two supplements");
        SupplementaryField s1 = parse_supplement(sj.at(0), chart.m(), chart.k());
        SupplementaryField s2 = parse_supplement(sj.at(1), chart.m(), chart.k());
        TangentPath beta0 = lifted_path(chart);
        const int gridn = j_.contains("grid") ? j_.at("grid").get<int>() : 3;
        std::vector<double> grid =
            interior_grid(beta0.t0(), beta0.t1(), gridn);
        const double tol = tol_or(1e-4);
        const double r1 = theorem10_residual(chart, s1, s2, beta0, beta0.t0(),
                                             grid, steps_);
        const double r2 = theorem10_residual(chart, s1, s2, beta0, beta0.t0(),
                                             grid, 2 * steps_);
        report.checks.push_back(
            {"quotient evolution residual", r1, tol, r1 <= tol, ""});
        const double ratio = r2 > 0 ? r1 / r2 : 1e300;
        report.checks.push_back({"residual drop under step doubling", ratio,
                                 3.5, ratio >= 3.5, ""});
    }

    VariationField parse_variation(const DistributionChart& chart,
                                   const TangentPath& beta0) {
        using namespace scenario_detail;
        const Json& vj = need(j_, "variation");
        Curve a = parse_curve(need(vj, "a"), chart.m());
        Vec b0 = to_vec(need(vj, "b0"));
        return solve_variation_equation(
            chart, beta0, [a](double t) { return a.at(t); },
            [a](double t) { return a.deriv(t); }, b0, steps_);
    }

    void run_variation(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        TangentPath beta0 = lifted_path(chart);
        VariationField vf = parse_variation(chart, beta0);
        SupplementaryField vert =
            SupplementaryField::vertical(chart.m(), chart.k());
        const int gridn = j_.contains("grid") ? j_.at("grid").get<int>() : 3;
        std::vector<double> grid =
            interior_grid(beta0.t0(), beta0.t1(), gridn);
        const double tol = tol_or(1e-6);
        double worst = 0.0;
        for (double t : grid)
            worst = std::max(worst, max_abs(evaluate_D(chart, vert, vf,
                                                       beta0.t0(), t, 1024)));
        report.checks.push_back(
            {"solved field lies in ker D", worst, tol, worst <= tol, ""});
        if (j_.contains("supplements")) {
            SupplementaryField other = parse_supplement(
                j_.at("supplements").at(0), chart.m(), chart.k());
            const double inv = d_invariance_residual(
                chart, vert, other, vf, beta0.t0(),
                0.5 * (beta0.t0() + beta0.t1()), grid, steps_);
            report.checks.push_back({"operator independence of supplement",
                                     inv, 1e-5, inv <= 1e-5, ""});
        }
    }

    void run_reconstruct(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        TangentPath beta0 = lifted_path(chart);
        VariationField vf = parse_variation(chart, beta0);
        const double eps =
            j_.contains("epsilon") ? j_.at("epsilon").get<double>() : 0.1;
        const int s_steps =
            j_.contains("s_steps") ? j_.at("s_steps").get<int>() : 8;
        const int t_steps =
            j_.contains("t_steps") ? j_.at("t_steps").get<int>() : 32;
        VariationSurface surf =
            reconstruct_variation(chart, vf, eps, s_steps, t_steps);
        report.checks.push_back({"surface tangency residual",
                                 surf.tangency_residual, 1e-6,
                                 surf.tangency_residual <= 1e-6, ""});
        VariationField extracted = extract_infinitesimal(surf);
        double xnorm = 0.0, diff = 0.0;
        for (double t : interior_grid(beta0.t0(), beta0.t1(), 5)) {
            xnorm = std::max(xnorm, max_abs(vf.x_at(t)));
            diff = std::max(diff, max_abs(Vec(extracted.x_at(t) - vf.x_at(t))));
        }
        const double tol = tol_or(1e-4);
        report.checks.push_back({"field recovery relative error",
                                 diff / std::max(xnorm, 1e-12), tol,
                                 diff <= tol * std::max(xnorm, 1e-12), ""});
        if (j_.contains("csv_out")) {
            std::ofstream os(j_.at("csv_out").get<std::string>());
            if (!os) throw io_error("scenario: cannot open csv_out");
            surf.write_csv(os);
        }
    }

    GeodesicPath parse_geodesic(const LinearConnection& conn) {
        using namespace scenario_detail;
        const Json& gj = need(j_, "geodesic");
        Vec x0 = to_vec(need(gj, "x0"));
        Vec v0 = to_vec(need(gj, "v0"));
        const double t1 = gj.contains("t1") ? gj.at("t1").get<double>() : 1.0;
        return geodesic(conn, x0, v0, t1, steps_);
    }

    void run_jacobi(Report& report) {
        using namespace scenario_detail;
        LinearConnection conn = parse_connection(need(j_, "connection"));
        GeodesicPath geo = parse_geodesic(conn);
        report.checks.push_back({"geodesic equation residual", geo.residual(),
                                 1e-6, geo.residual() <= 1e-6, ""});
        const Json& fj = need(j_, "field");
        Vec z0 = to_vec(need(fj, "z0"));
        Vec zdot0 = to_vec(need(fj, "zdot0"));
        JacobiSolution sol = jacobi_solve(conn, geo, z0, zdot0, steps_);
        JacobiSolution doubled =
            jacobi_solve(conn, geo, Vec(2 * z0), Vec(2 * zdot0), steps_);
        const double lin = max_abs(
            Vec(doubled.z(geo.t1()) - 2.0 * sol.z(geo.t1())));
        report.checks.push_back(
            {"field linearity in initial data", lin, 1e-8, lin <= 1e-8, ""});
    }

    void run_theorem13(Report& report) {
        using namespace scenario_detail;
        LinearConnection conn = parse_connection(need(j_, "connection"));
        GeodesicPath geo = parse_geodesic(conn);
        const Json& fj = need(j_, "field");
        Vec z0 = to_vec(need(fj, "z0"));
        Vec zdot0 = to_vec(need(fj, "zdot0"));
        JacobiSolution sol = jacobi_solve(conn, geo, z0, zdot0, steps_);
        const int gridn = j_.contains("grid") ? j_.at("grid").get<int>() : 4;
        std::vector<double> grid = interior_grid(geo.t0(), geo.t1(), gridn);
        const double tol = tol_or(1e-4);
        const double r1 =
            theorem13_residual(conn, geo, sol.z, sol.zdot, grid, steps_);
        const double r2 =
            theorem13_residual(conn, geo, sol.z, sol.zdot, grid, 2 * steps_);
        report.checks.push_back(
            {"variation operator residual", r1, tol, r1 <= tol, ""});
        const double ratio = r2 > 0 ? r1 / r2 : 1e300;
        report.checks.push_back({"residual drop under step doubling", ratio,
                                 3.5, ratio >= 3.5, ""});
        const int n = conn.n();
        auto zb = [&sol, n](double t) {
            Vec v = sol.z(t);
            v[0] += t * t;
            return v;
        };
        auto zbdot = [&sol, n](double t) {
            Vec v = sol.zdot(t);
            v[0] += 2 * t;
            return v;
        };
        const double bump =
            theorem13_residual(conn, geo, zb, zbdot, grid, steps_);
        report.checks.push_back({"perturbed field is rejected", bump, 1e-2,
                                 bump >= 1e-2, ""});
    }

    void run_invariants(Report& report) {
        using namespace scenario_detail;
        DistributionChart chart = parse_chart(need(j_, "chart"));
        const int m = chart.m(), k = chart.k(), n = chart.n();
        SupplementaryField s1 =
            j_.contains("supplements")
                ? parse_supplement(j_.at("supplements").at(0), m, k)
                : SupplementaryField::vertical(m, k);
        SupplementaryField s2 =
            (j_.contains("supplements") && j_.at("supplements").size() > 1)
                ? parse_supplement(j_.at("supplements").at(1), m, k)
                : SupplementaryField::vertical(m, k);
        const int draws = j_.contains("draws") ? j_.at("draws").get<int>() : 100;
        std::mt19937_64 rng(seed_);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        auto rvec = [&](int d) {
            Vec v(d);
            for (int i = 0; i < d; ++i) v[i] = u(rng);
            return v;
        };

        double r_sum = 0, r_factor_w = 0, r_factor_v = 0, r_tau = 0, r_omega = 0,
               r_nk = 0, r_proj_id = 0, r_affine = 0, r_antisym = 0,
               r_involution = 0;
        ProjectionField field = ProjectionField::onto_k(chart, s1);
        for (int d = 0; d < draws; ++d) {
            Vec p = random_in_box(rng, chart.domain(), 0.4);
            const Vec x = p.head(m), y = p.tail(k);
            SplitOperators sp1 = split_at(chart, s1, x, y);
            SplitOperators sp2 = split_at(chart, s2, x, y);

            r_sum = std::max(r_sum,
                             max_abs(Mat(sp1.p_onto_h + sp1.p_onto_k -
                                         Mat::Identity(n, n))));
            r_factor_w = std::max(
                r_factor_w, max_abs(Mat(sp1.p_onto_k - sp1.q_h_k * sp1.lambda_w)));
            r_factor_v = std::max(
                r_factor_v, max_abs(Mat(sp1.p_onto_h - sp1.q_k_h * sp1.lambda_v)));
            r_affine = std::max(
                r_affine, max_abs(Mat(sp1.q_h_k - sp2.q_h_k -
                                      sp2.p_onto_h * sp1.q_h_k)));

            const Vec uvec = rvec(n);
            DoubleTangent lift = r_p_lift(chart, s1, x, y, uvec);
            r_tau = std::max(r_tau,
                             max_abs(Vec(lift.first - sp1.p_onto_k * uvec)));
            r_tau = std::max(
                r_tau, max_abs(Vec(lift.second - sp1.p_onto_h * uvec)));
            DoubleTangent other = r_p_lift_field(field.complement(), p, uvec);
            DoubleTangent swapped = omega_swap(lift);
            r_omega = std::max(r_omega,
                               max_abs(Vec(swapped.third - other.third)));

            const Mat dp = field.dir_deriv(p, rvec(n));
            const Vec b = rvec(n);
            r_proj_id = std::max(
                r_proj_id, max_abs(Vec(sp1.p_onto_k * (dp * (sp1.p_onto_k * b)))));
            r_proj_id = std::max(
                r_proj_id, max_abs(Vec(sp1.p_onto_h * (dp * (sp1.p_onto_h * b)))));

            // N_k identity with a membership-built tangent
            const Vec fiber = sp1.p_onto_k * rvec(n);
            const Vec z = sp1.p_onto_h * rvec(n);
            const Vec w = field.dir_deriv(p, z) * fiber +
                          sp1.p_onto_k * rvec(n);
            DoubleTangent tangent{p, fiber, z, w};
            r_nk = std::max(
                r_nk, n_k_projection_residual(chart, s1, x, y, tangent));

            // flat-coordinate involution identities
            const Vec pp = rvec(n), ss = rvec(n), tt = rvec(n), xx = rvec(n),
                      yy = rvec(n);
            DoubleTangent aa{pp, ss, tt, xx};
            DoubleTangent bb{pp, tt, ss, yy};
            DoubleTangent d1 = vertical_difference(omega_swap(aa), bb);
            DoubleTangent d2 = vertical_difference(omega_swap(bb), aa);
            r_antisym = std::max(r_antisym, max_abs(Vec(d1.third + d2.third)));
            DoubleTangent tw = omega_swap(omega_swap(aa));
            r_involution = std::max(
                r_involution, std::max(max_abs(Vec(tw.first - aa.first)),
                                       max_abs(Vec(tw.second - aa.second))));
        }
        auto push = [&report](const char* name, double value, double tol) {
            report.checks.push_back({name, value, tol, value <= tol, ""});
        };
        push("projection sum identity", r_sum, 1e-10);
        push("quotient factorization (W side)", r_factor_w, 1e-10);
        push("quotient factorization (V side)", r_factor_v, 1e-10);
        push("affine supplement identity", r_affine, 1e-10);
        push("lift projection identities", r_tau, 1e-10);
        push("lift involution relation", r_omega, 1e-8);
        push("projection derivative identities", r_proj_id, 1e-8);
        push("vertical subspace projection identity", r_nk, 1e-6);
        push("involution difference antisymmetry", r_antisym, 0.0);
        push("involution is involutive", r_involution, 0.0);
    }

    Json j_;
    uint64_t seed_ = 0;
    int steps_ = 256;
};

// File-level entry point used by the command-line tool. Returns the exit
// code contract: 0 all checks pass, 1 numerical failure, 2 schema error,
// 3 i/o error.
inline int run_scenario_file(const std::string& path,
                             const std::optional<int>& steps,
                             const std::optional<double>& tol,
                             const std::optional<std::string>& out,
                             const std::optional<uint64_t>& seed,
                             std::ostream& os = std::cout) {
    Json scenario;
    {
        std::ifstream in(path);
        if (!in) {
            os << "error: cannot open scenario file '" << path << "'\n";
            return 3;
        }
        try {
            in >> scenario;
        } catch (const nlohmann::json::exception& e) {
            os << "schema error: " << e.what() << "\n";
            return 2;
        }
    }
    try {
        ScenarioRunner runner(std::move(scenario));
        if (steps) runner.override_steps(*steps);
        if (tol) runner.override_tol(*tol);
        if (seed) runner.override_seed(*seed);
        if (out) runner.override_out(*out);
        Report report = runner.run();
        report.print_summary(os);
        std::string out_path;
        if (runner.scenario().contains("out"))
            out_path = runner.scenario().at("out").get<std::string>();
        if (!out_path.empty()) {
            std::ofstream of(out_path);
            if (!of) {
                os << "error: cannot write report to '" << out_path << "'\n";
                return 3;
            }
            of << report.to_json().dump(2) << "\n";
        }
        return report.all_pass() ? 0 : 1;
    } catch (const schema_error& e) {
        os << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const io_error& e) {
        os << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        os << "schema error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        os << "numerical failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace subcurv
