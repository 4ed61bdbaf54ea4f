#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "subcurv/connection.hpp"
#include "subcurv/fixtures.hpp"

using namespace subcurv;

namespace {

Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// symmetric (torsion-free) constant Christoffel data
LinearConnection torsion_free_constant() {
    Tensor3 g(2, 2, 2);
    auto set_sym = [&](int i, int j, int k, double v) {
        g(i, j, k) = v;
        g(i, k, j) = v;
    };
    set_sym(0, 0, 1, 0.3);
    set_sym(0, 0, 0, -0.1);
    set_sym(1, 1, 1, 0.2);
    set_sym(1, 0, 1, 0.15);
    return LinearConnection::constant(g);
}

}  // namespace

TEST_CASE("lift_to_distribution: flat connection lifts to the zero chart") {
    DistributionChart lifted = lift_to_distribution(fixtures::flat_connection());
    std::mt19937_64 rng(81);
    Vec x = random_vec(rng, 2), y = random_vec(rng, 2);
    REQUIRE(max_abs(lifted.gamma(x, y)) == 0.0);
}

TEST_CASE("lift_to_distribution: the graph field is linear in the fiber") {
    LinearConnection conn = fixtures::polynomial_christoffel();
    DistributionChart lifted = lift_to_distribution(conn);
    std::mt19937_64 rng(82);
    Vec x = random_vec(rng, 2);
    Vec y1 = random_vec(rng, 2), y2 = random_vec(rng, 2);
    const double a = 0.7, b = -1.3;
    Mat lhs = lifted.gamma(x, Vec(a * y1 + b * y2));
    Mat rhs = a * lifted.gamma(x, y1) + b * lifted.gamma(x, y2);
    REQUIRE(max_abs(Mat(lhs - rhs)) < 1e-13);
}

TEST_CASE("vertical projection of the lift agrees with the oblique split") {
    LinearConnection conn = fixtures::constant_christoffel();
    DistributionChart lifted = lift_to_distribution(conn);
    SupplementaryField vert = SupplementaryField::vertical(2, 2);
    std::mt19937_64 rng(83);
    Vec x = random_vec(rng, 2), y = random_vec(rng, 2);
    SplitOperators sp = split_at(lifted, vert, x, y);
    Vec v = random_vec(rng, 2), w = random_vec(rng, 2);
    Vec u(4);
    u << v, w;
    Vec expected(4);
    expected << Vec::Zero(2), w - lifted.gamma(x, y) * v;
    REQUIRE(max_abs(Vec(sp.p_onto_k * u - expected)) < 1e-10);
}

TEST_CASE("geodesic: flat connection gives straight lines") {
    LinearConnection conn = fixtures::flat_connection();
    Vec x0 = vec2(0.3, -0.2), v0 = vec2(1.0, 0.5);
    GeodesicPath geo = geodesic(conn, x0, v0, 1.0, 64);
    REQUIRE(max_abs(Vec(geo.x(0.7) - (x0 + 0.7 * v0))) < 1e-12);
    REQUIRE(geo.residual() < 1e-12);
}

TEST_CASE("geodesic: velocity curve is tangent to the lifted distribution") {
    LinearConnection conn = fixtures::polynomial_christoffel();
    DistributionChart lifted = lift_to_distribution(conn);
    GeodesicPath geo = geodesic(conn, vec2(0.1, 0.2), vec2(0.6, -0.4), 1.0, 256);
    REQUIRE(geo.residual() < 1e-6);
    auto xfn = [geo](double t) { return geo.x(t); };
    auto yfn = [geo](double t) { return geo.v(t); };
    auto xdfn = [geo](double t) { return geo.v(t); };
    auto ydfn = [geo](double t) { return geo.a(t); };
    TangentPath beta0 = TangentPath::analytic(lifted, xfn, yfn, xdfn, ydfn, 0.0,
                                              1.0, kTangencyTolIntegrated);
    REQUIRE(beta0.tangency_residual() < 1e-6);
}

TEST_CASE("geodesic: reversing the final velocity traverses the curve back") {
    LinearConnection conn = fixtures::constant_christoffel();
    GeodesicPath fwd = geodesic(conn, vec2(0.0, 0.1), vec2(0.5, -0.3), 1.0, 256);
    GeodesicPath back =
        geodesic(conn, fwd.x(1.0), Vec(-fwd.v(1.0)), 1.0, 256);
    for (double t : {0.25, 0.5, 0.75, 1.0}) {
        REQUIRE(max_abs(Vec(back.x(t) - fwd.x(1.0 - t))) < 1e-8);
    }
}

TEST_CASE("torsion: symmetric data and equal arguments vanish") {
    LinearConnection sym = torsion_free_constant();
    std::mt19937_64 rng(84);
    Vec x = random_vec(rng, 2);
    Vec v = random_vec(rng, 2), w = random_vec(rng, 2);
    REQUIRE(max_abs(torsion(sym, x, v, w)) < 1e-14);
    LinearConnection skew = fixtures::constant_christoffel();
    REQUIRE(max_abs(torsion(skew, x, v, v)) == 0.0);
}

TEST_CASE("torsion: single-coefficient hand expansion") {
    Tensor3 g(2, 2, 2);
    g(0, 0, 1) = 1.0;  // only coefficient: first component, directions (0,1)
    LinearConnection conn = LinearConnection::constant(g);
    Vec e1 = vec2(1, 0), e2 = vec2(0, 1);
    Vec t = torsion(conn, Vec::Zero(2), e1, e2);
    REQUIRE(max_abs(Vec(t - e1)) == 0.0);
}

TEST_CASE("riemann: flat and repeated-argument cases vanish") {
    std::mt19937_64 rng(85);
    Vec x = random_vec(rng, 2);
    Vec u = random_vec(rng, 2), w = random_vec(rng, 2);
    REQUIRE(max_abs(riemann(fixtures::flat_connection(), x, u, u, w)) == 0.0);
    LinearConnection conn = fixtures::polynomial_christoffel();
    REQUIRE(max_abs(riemann(conn, x, u, u, w)) < 1e-12);
    // antisymmetry in the first pair
    Vec v = random_vec(rng, 2);
    REQUIRE(max_abs(Vec(riemann(conn, x, u, v, w) + riemann(conn, x, v, u, w))) <
            1e-10);
}

TEST_CASE("riemann: constant data reduces to the quadratic commutator") {
    LinearConnection conn = fixtures::constant_christoffel();
    const Tensor3 g = conn.christoffel(Vec::Zero(2));
    std::mt19937_64 rng(86);
    Vec x = random_vec(rng, 2);
    Vec u = random_vec(rng, 2), v = random_vec(rng, 2), w = random_vec(rng, 2);
    Vec expected = chris_apply(g, u, chris_apply(g, v, w)) -
                   chris_apply(g, v, chris_apply(g, u, w));
    REQUIRE(max_abs(Vec(riemann(conn, x, u, v, w) - expected)) < 1e-13);
}

TEST_CASE("riemann: derivative terms against a scalar finite-difference "
          "expansion") {
    LinearConnection conn = fixtures::polynomial_christoffel();
    std::mt19937_64 rng(87);
    Vec x = random_vec(rng, 2);
    Vec u = random_vec(rng, 2), v = random_vec(rng, 2), w = random_vec(rng, 2);
    // independent route: difference quotients of the contracted scalar maps
    const double h = 1e-6;
    auto gvw = [&](const Vec& q, const Vec& a, const Vec& b) {
        return Vec(chris_apply(conn.christoffel(q), a, b));
    };
    Vec du_term = (gvw(x + h * u, v, w) - gvw(x - h * u, v, w)) / (2 * h);
    Vec dv_term = (gvw(x + h * v, u, w) - gvw(x - h * v, u, w)) / (2 * h);
    Vec expected = du_term - dv_term + gvw(x, u, gvw(x, v, w)) -
                   gvw(x, v, gvw(x, u, w));
    REQUIRE(max_abs(Vec(riemann(conn, x, u, v, w) - expected)) < 1e-8);
}

TEST_CASE("bridge between the Riemann tensor and the lifted curvature") {
    std::mt19937_64 rng(88);
    for (const char* name :
         {"flat_connection", "constant_christoffel", "polynomial_christoffel"}) {
        LinearConnection conn = fixtures::connection_by_name(name);
        DistributionChart lifted = lift_to_distribution(conn);
        for (int trial = 0; trial < 10; ++trial) {
            Vec x = random_vec(rng, 2), y = random_vec(rng, 2);
            Mat g = lifted.gamma(x, y);
            Vec av = random_vec(rng, 2), bv = random_vec(rng, 2);
            Vec a(4), b(4);
            a << av, g * av;
            b << bv, g * bv;
            REQUIRE(riemann_vs_distribution_residual(conn, lifted, x, y, a, b) <
                    1e-6);
        }
    }
}

TEST_CASE("bridge residual rejects non-horizontal arguments and is "
          "antisymmetric") {
    LinearConnection conn = fixtures::constant_christoffel();
    DistributionChart lifted = lift_to_distribution(conn);
    std::mt19937_64 rng(89);
    Vec x = random_vec(rng, 2), y = random_vec(rng, 2);
    Mat g = lifted.gamma(x, y);
    Vec av = random_vec(rng, 2), bv = random_vec(rng, 2);
    Vec a(4), b(4);
    a << av, g * av;
    b << bv, g * bv;
    Vec bad(4);
    bad << av, g * av + vec2(0.1, 0.0);
    REQUIRE_THROWS_AS(riemann_vs_distribution_residual(conn, lifted, x, y, bad, b),
                      not_horizontal);
    // swapping the pair flips both sides, so the residual is unchanged
    const double r1 = riemann_vs_distribution_residual(conn, lifted, x, y, a, b);
    const double r2 = riemann_vs_distribution_residual(conn, lifted, x, y, b, a);
    REQUIRE(std::abs(r1 - r2) < 1e-12);
}

TEST_CASE("vertical-defect difference of a curve in TM measures the torsion") {
    LinearConnection conn = fixtures::constant_christoffel();
    DistributionChart lifted = lift_to_distribution(conn);
    // arbitrary smooth curve Z(t) = (x(t), y(t)) in TM
    auto xfn = [](double t) { return vec2(0.4 * std::cos(t), 0.3 * std::sin(t)); };
    auto yfn = [](double t) { return vec2(std::sin(2 * t), 0.5 - 0.2 * t); };
    auto xdfn = [](double t) { return vec2(-0.4 * std::sin(t), 0.3 * std::cos(t)); };
    auto ydfn = [](double t) { return vec2(2 * std::cos(2 * t), -0.2); };
    for (double t : {0.2, 0.7, 1.1}) {
        const Vec x = xfn(t), y = yfn(t), xd = xdfn(t), yd = ydfn(t);
        // vertical part of omega(Z-dot) at the point (x, x-dot)
        const Vec lhs1 = yd - lifted.gamma(x, xd) * y;
        // vertical part of Z-dot at the point (x, y)
        const Vec lhs2 = yd - lifted.gamma(x, y) * xd;
        const Vec rhs = torsion(conn, x, y, xd);
        REQUIRE(max_abs(Vec(lhs1 - lhs2 - rhs)) < 1e-6);
    }
}

TEST_CASE("jacobi_solve: flat connection gives affine fields") {
    LinearConnection conn = fixtures::flat_connection();
    GeodesicPath geo = geodesic(conn, vec2(0, 0), vec2(1, 0.2), 1.0, 64);
    Vec z0 = vec2(0.3, -0.1), zdot0 = vec2(-0.2, 0.5);
    JacobiSolution sol = jacobi_solve(conn, geo, z0, zdot0, 64);
    for (double t : {0.25, 0.8}) {
        REQUIRE(max_abs(Vec(sol.z(t) - (z0 + t * zdot0))) < 1e-12);
        REQUIRE(max_abs(Vec(sol.zdot(t) - zdot0)) < 1e-12);
    }
}

TEST_CASE("jacobi_solve: linear in the initial data") {
    LinearConnection conn = fixtures::constant_christoffel();
    GeodesicPath geo = geodesic(conn, vec2(0.1, 0.0), vec2(0.7, -0.3), 1.0, 256);
    Vec z0a = vec2(0.2, 0.4), zd0a = vec2(-0.1, 0.3);
    Vec z0b = vec2(-0.5, 0.1), zd0b = vec2(0.2, 0.2);
    JacobiSolution a = jacobi_solve(conn, geo, z0a, zd0a, 256);
    JacobiSolution b = jacobi_solve(conn, geo, z0b, zd0b, 256);
    JacobiSolution combo = jacobi_solve(conn, geo, Vec(2.0 * z0a - z0b),
                                        Vec(2.0 * zd0a - zd0b), 256);
    const double t = 0.8;
    REQUIRE(max_abs(Vec(combo.z(t) - (2.0 * a.z(t) - b.z(t)))) < 1e-8);
    REQUIRE(max_abs(Vec(combo.zdot(t) - (2.0 * a.zdot(t) - b.zdot(t)))) < 1e-8);
}

TEST_CASE("jacobi_solve: against an independent expansion of the equation") {
    // torsion-free constant data: the field equation expands to
    //   z-ddot = -2 G(gdot, zdot) - G(gdot, G(gdot, z)) + G(G(gdot,gdot), z)
    //            - R(z, gdot) gdot
    LinearConnection conn = torsion_free_constant();
    const Tensor3 g = conn.christoffel(Vec::Zero(2));
    GeodesicPath geo = geodesic(conn, vec2(0.0, 0.1), vec2(0.6, -0.2), 1.0, 512);
    Vec z0 = vec2(0.4, -0.3), zdot0 = vec2(0.1, 0.5);

    OdeProblem p;
    p.rhs = [&](double t, const Vec& state) -> Vec {
        const Vec z = state.head(2), zd = state.tail(2);
        const Vec gd = geo.v(t);
        const Vec rzgg = chris_apply(g, z, chris_apply(g, gd, gd)) -
                         chris_apply(g, gd, chris_apply(g, z, gd));
        const Vec zdd = -2.0 * chris_apply(g, gd, zd) -
                        chris_apply(g, gd, chris_apply(g, gd, z)) +
                        chris_apply(g, chris_apply(g, gd, gd), z) - rzgg;
        Vec out(4);
        out << zd, zdd;
        return out;
    };
    p.t0 = 0.0;
    p.t1 = 1.0;
    p.state0 = Vec(4);
    p.state0 << z0, zdot0;
    p.steps = 512;
    Trajectory oracle = rk4_solve(p);

    JacobiSolution sol = jacobi_solve(conn, geo, z0, zdot0, 512);
    for (double t : {0.3, 0.6, 1.0}) {
        REQUIRE(max_abs(Vec(sol.z(t) - oracle.eval(t).head(2))) < 1e-7);
        REQUIRE(max_abs(Vec(sol.zdot(t) - oracle.eval(t).tail(2))) < 1e-7);
    }
}

TEST_CASE("theorem13_residual: flat connection with affine fields") {
    LinearConnection conn = fixtures::flat_connection();
    GeodesicPath geo = geodesic(conn, vec2(0, 0), vec2(0.8, 0.1), 1.0, 64);
    Vec z0 = vec2(0.2, -0.4), zdot0 = vec2(0.3, 0.1);
    auto z = [=](double t) { return Vec(z0 + t * zdot0); };
    auto zdot = [=](double) { return zdot0; };
    std::vector<double> grid = {0.25, 0.5, 0.75};
    REQUIRE(theorem13_residual(conn, geo, z, zdot, grid, 128) < 1e-8);
}

TEST_CASE("theorem13_residual: jacobi solutions pass, perturbations fail") {
    LinearConnection conn = fixtures::constant_christoffel();
    GeodesicPath geo = geodesic(conn, vec2(0.1, 0.0), vec2(0.6, -0.2), 1.0, 512);
    Vec z0 = vec2(0.4, -0.2), zdot0 = vec2(-0.1, 0.3);
    JacobiSolution sol = jacobi_solve(conn, geo, z0, zdot0, 512);
    std::vector<double> grid = {0.2, 0.4, 0.6, 0.8};
    const double r256 = theorem13_residual(conn, geo, sol.z, sol.zdot, grid, 256);
    const double r512 = theorem13_residual(conn, geo, sol.z, sol.zdot, grid, 512);
    REQUIRE(r256 < 1e-4);
    REQUIRE(r512 < r256 / 3.5);

    // a unit quadratic bump is far from the kernel
    auto zb = [&](double t) { return Vec(sol.z(t) + t * t * vec2(1.0, 0.0)); };
    auto zbdot = [&](double t) {
        return Vec(sol.zdot(t) + 2.0 * t * vec2(1.0, 0.0));
    };
    REQUIRE(theorem13_residual(conn, geo, zb, zbdot, grid, 256) > 1e-2);
}
