#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ferroflow/operators.hpp"
#include "ferroflow/verify.hpp"

using namespace ferroflow;

namespace {
constexpr double kPi = 3.14159265358979323846;

ScalarField random_scalar(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField s(g);
    for (double& v : s.v) v = dist(rng);
    return s;
}
}  // namespace

TEST_CASE("grad is exact on linear and constant fields") {
    Grid g(16, 16);
    ScalarField s(g);
    s.fill_with([](double x, double) { return x; });
    VectorField d = grad(s);
    for (std::size_t k = 0; k < d.x.size(); ++k) {
        REQUIRE(d.x[k] == Catch::Approx(1.0).margin(1e-13));
        REQUIRE(d.y[k] == Catch::Approx(0.0).margin(1e-13));
    }
    s.fill_with([](double, double) { return 3.25; });
    d = grad(s);
    REQUIRE(max_abs(d.x) < 1e-13);
    REQUIRE(max_abs(d.y) < 1e-13);
}

TEST_CASE("grad of x^2 + y^2 is exact at interior centers, O(h^2) at boundary") {
    Grid g(32, 32);
    ScalarField s(g);
    s.fill_with([](double x, double y) { return x * x + y * y; });
    VectorField d = grad(s);
    // one-sided second-order stencils are exact on quadratics too
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            REQUIRE(d.x[g.idx(i, j)] == Catch::Approx(2.0 * g.xc(i)).margin(1e-11));
            REQUIRE(d.y[g.idx(i, j)] == Catch::Approx(2.0 * g.yc(j)).margin(1e-11));
        }
}

TEST_CASE("div is exact on linears in the interior") {
    Grid g(16, 16);
    VectorField v(g);
    v.fill_with([](double x, double) { return x; }, [](double, double y) { return y; });
    ScalarField d = div(v);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) REQUIRE(d(i, j) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("div of a harmonic gradient vanishes in the interior") {
    Grid g(24, 24);
    VectorField v(g);  // grad(x^2 - y^2)
    v.fill_with([](double x, double) { return 2.0 * x; },
                [](double, double y) { return -2.0 * y; });
    ScalarField d = div(v);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) REQUIRE(std::abs(d(i, j)) < 1e-11);
}

TEST_CASE("div of (sin(pi x), 0) converges to pi cos(pi x)") {
    // frozen analytic oracle: d/dx sin(pi x) = pi cos(pi x)
    auto err = [](int n) {
        Grid g(n, n);
        VectorField v(g);
        v.fill_with([](double x, double) { return std::sin(kPi * x); },
                    [](double, double) { return 0.0; });
        ScalarField d = div(v);
        double e = 0.0;
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i)
                e = std::max(e, std::abs(d(i, j) - kPi * std::cos(kPi * g.xc(i))));
        return e;
    };
    const double e32 = err(32), e64 = err(64);
    REQUIRE(std::log2(e32 / e64) > 1.8);
}

TEST_CASE("curl_vec of solid rotation is 2, curl_scalar of a constant is zero") {
    Grid g(16, 16);
    VectorField v(g);
    v.fill_with([](double, double y) { return -y; }, [](double x, double) { return x; });
    ScalarField c = curl_vec(v);
    for (double x : c.v) REQUIRE(x == Catch::Approx(2.0).margin(1e-12));

    ScalarField w(g, 0.7);
    VectorField cs = curl_scalar(w);
    REQUIRE(max_abs(cs.x) < 1e-13);
    REQUIRE(max_abs(cs.y) < 1e-13);
}

TEST_CASE("curl(grad s) = 0 exactly on interior cells for random fields") {
    Grid g(64, 64);
    for (unsigned seed = 0; seed < 20; ++seed) {
        ScalarField s = random_scalar(g, seed);
        ScalarField c = curl_vec(grad(s));
        const double scale = max_abs(s.v) / (g.hx * g.hy);
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) REQUIRE(std::abs(c(i, j)) <= 1e-13 * scale);
    }
}

TEST_CASE("div(curl_scalar w) = 0 exactly on interior cells for random fields") {
    Grid g(64, 64);
    for (unsigned seed = 100; seed < 120; ++seed) {
        ScalarField w = random_scalar(g, seed);
        ScalarField d = div(curl_scalar(w));
        const double scale = max_abs(w.v) / (g.hx * g.hy);
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) REQUIRE(std::abs(d(i, j)) <= 1e-13 * scale);
    }
}

TEST_CASE("operators are linear") {
    Grid g(24, 24);
    ScalarField f = random_scalar(g, 7);
    ScalarField h = random_scalar(g, 8);
    const double a = 2.5, b = -1.25;
    ScalarField comb(g);
    for (std::size_t k = 0; k < comb.v.size(); ++k) comb.v[k] = a * f.v[k] + b * h.v[k];
    VectorField g1 = grad(comb);
    VectorField gf = grad(f), gh = grad(h);
    double worst = 0.0;
    for (std::size_t k = 0; k < g1.x.size(); ++k) {
        worst = std::max(worst, std::abs(g1.x[k] - (a * gf.x[k] + b * gh.x[k])));
        worst = std::max(worst, std::abs(g1.y[k] - (a * gf.y[k] + b * gh.y[k])));
    }
    REQUIRE(worst < 1e-11 / g.hx);
}

TEST_CASE("laplacian: exact on quadratics, zero on linears") {
    Grid g(20, 20);
    ScalarField f(g);
    f.fill_with([](double x, double y) { return x * x + y * y; });
    ScalarField l = laplacian(f, LaplacianClosure::Neumann);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) REQUIRE(l(i, j) == Catch::Approx(4.0).margin(1e-10));

    f.fill_with([](double x, double y) { return 2.0 * x - y; });
    l = laplacian(f, LaplacianClosure::Natural);
    REQUIRE(max_abs(l.v) < 1e-10);
}

TEST_CASE("laplacian with Dirichlet closure converges on sin(pi x) sin(pi y)") {
    std::vector<double> errs = {verify::laplacian_error(32), verify::laplacian_error(64),
                                verify::laplacian_error(128)};
    REQUIRE(verify::observed_order(errs) >= 1.8);
}

TEST_CASE("operator convergence orders >= 1.8 over three refinements") {
    using namespace verify;
    REQUIRE(observed_order({grad_error(32), grad_error(64), grad_error(128)}) >= 1.8);
    REQUIRE(observed_order({div_error(32), div_error(64), div_error(128)}) >= 1.8);
    REQUIRE(observed_order({curl_error(32), curl_error(64), curl_error(128)}) >= 1.8);
}

TEST_CASE("upwind advection: exact on linear fields with constant velocity") {
    Grid g(16, 16);
    VectorField u(g, 1.0, -0.5);
    ScalarField f(g);
    f.fill_with([](double x, double y) { return 2.0 * x + 3.0 * y; });
    ScalarField a = advect(u, f, AdvectionScheme::Upwind);
    // interior cells: (u.grad)f = 1*2 + (-0.5)*3 = 0.5
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) REQUIRE(a(i, j) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("advection of a constant field vanishes") {
    Grid g(16, 16);
    VectorField u(g, 0.3, 0.9);
    ScalarField f(g, 4.0);
    REQUIRE(max_abs(advect(u, f, AdvectionScheme::Upwind).v) < 1e-13);
    REQUIRE(max_abs(advect(u, f, AdvectionScheme::Centered).v) < 1e-13);
}
