#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "ferroflow/config.hpp"
#include "ferroflow/params.hpp"
#include "ferroflow/snapshot.hpp"

using namespace ferroflow;

TEST_CASE("validate_params accepts the defaults") {
    Params p;
    p.tau = 1e-2;
    REQUIRE_NOTHROW(validate_params(p));
}

TEST_CASE("validate_params rejects tau = 0 in full mode") {
    Params p;
    p.tau = 0.0;
    REQUIRE_THROWS_WITH(validate_params(p), Catch::Matchers::ContainsSubstring("tau must be > 0"));
}

TEST_CASE("validate_params rejects a missing tau unless in limit mode") {
    Params p;
    REQUIRE_THROWS_WITH(validate_params(p), Catch::Matchers::ContainsSubstring("tau"));
    p.mode = SystemMode::Limit;
    REQUIRE_NOTHROW(validate_params(p));
}

TEST_CASE("validate_params names the sign violation") {
    Params p;
    p.tau = 1e-2;
    p.kappa0 = -1.0;
    REQUIRE_THROWS_WITH(validate_params(p), Catch::Matchers::ContainsSubstring("kappa0"));
}

TEST_CASE("sigma > 0 requires regularized mode and vice versa") {
    Params p;
    p.tau = 1e-2;
    p.sigma = 0.1;
    REQUIRE_THROWS(validate_params(p));
    p.mode = SystemMode::Regularized;
    REQUIRE_NOTHROW(validate_params(p));
    p.sigma = 0.0;
    REQUIRE_THROWS(validate_params(p));
}

TEST_CASE("applied field family is divergence- and curl-free") {
    AppliedField ha;
    ha.cx = 0.3;
    ha.g2a = 0.7;
    ha.g2b = -0.2;
    ha.g3a = 0.4;
    ha.g3b = 0.1;
    // finite-difference div/curl of the analytic field at a few points
    const double eps = 1e-5;
    for (double x : {0.21, 0.55, 0.83})
        for (double y : {0.17, 0.5, 0.92}) {
            double e1x, e1y, w1x, w1y, n1x, n1y, s1x, s1y;
            ha.at(x + eps, y, 0.0, e1x, e1y);
            ha.at(x - eps, y, 0.0, w1x, w1y);
            ha.at(x, y + eps, 0.0, n1x, n1y);
            ha.at(x, y - eps, 0.0, s1x, s1y);
            const double divv = (e1x - w1x) / (2 * eps) + (n1y - s1y) / (2 * eps);
            const double curl = (e1y - w1y) / (2 * eps) - (n1x - s1x) / (2 * eps);
            REQUIRE(std::abs(divv) < 1e-6);
            REQUIRE(std::abs(curl) < 1e-6);
        }
}

TEST_CASE("limit state never stores M; accessor returns kappa0 H") {
    Grid g(8, 8);
    LimitState s(g);
    for (std::size_t k = 0; k < s.H.x.size(); ++k) {
        s.H.x[k] = 0.1 * double(k);
        s.H.y[k] = -0.05 * double(k);
    }
    VectorField m = s.magnetization(2.5);
    for (std::size_t k = 0; k < m.x.size(); ++k) {
        REQUIRE(m.x[k] == 2.5 * s.H.x[k]);
        REQUIRE(m.y[k] == 2.5 * s.H.y[k]);
    }
}

TEST_CASE("snapshot round-trips bit-exactly") {
    Grid g(12, 9, 2.0, 1.5);
    State s(g);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto* f : {&s.u.x, &s.u.y, &s.w.v, &s.m.x, &s.m.y, &s.phi.v, &s.p.v})
        for (double& v : *f) v = dist(rng);
    s.time = 0.7251;

    std::stringstream buf;
    write_snapshot(buf, s);
    State r = read_snapshot(buf);
    REQUIRE(r.grid() == g);
    REQUIRE(r.time == s.time);
    REQUIRE(r.u.x == s.u.x);
    REQUIRE(r.u.y == s.u.y);
    REQUIRE(r.w.v == s.w.v);
    REQUIRE(r.m.x == s.m.x);
    REQUIRE(r.m.y == s.m.y);
    REQUIRE(r.phi.v == s.phi.v);
    REQUIRE(r.p.v == s.p.v);

    // writing the same state twice gives identical bytes
    std::stringstream buf2;
    write_snapshot(buf2, s);
    REQUIRE(buf2.str() == buf.str());
}

TEST_CASE("snapshot rejects bad magic") {
    std::stringstream buf;
    buf << "NOPE garbage";
    REQUIRE_THROWS_WITH(read_snapshot(buf), Catch::Matchers::ContainsSubstring("magic"));
}

TEST_CASE("minimal config gets documented defaults") {
    RunConfig cfg = parse_config("tau = 0.01\n");
    REQUIRE(cfg.grid.nx == 48);
    REQUIRE(cfg.params.tau == 0.01);
    REQUIRE(cfg.params.nu == Catch::Approx(1e-2));
    REQUIRE(cfg.stepper.cfl_number == Catch::Approx(0.4));
    REQUIRE(cfg.diagnostics_every == 1);
}

TEST_CASE("config: tau = -1 names tau") {
    REQUIRE_THROWS_WITH(parse_config("tau = -1\n"),
                        Catch::Matchers::ContainsSubstring("tau"));
}

TEST_CASE("config: unknown keys and malformed values name the key and line") {
    REQUIRE_THROWS_WITH(parse_config("tau = 0.01\nbogus_key = 3\n"),
                        Catch::Matchers::ContainsSubstring("bogus_key"));
    REQUIRE_THROWS_WITH(parse_config("tau = abc\n"),
                        Catch::Matchers::ContainsSubstring("line 1"));
    REQUIRE_THROWS_WITH(parse_config("nx = 12.5\n"), Catch::Matchers::ContainsSubstring("nx"));
}

TEST_CASE("config: comments and blank lines are ignored") {
    RunConfig cfg = parse_config("# comment\n\n  tau = 0.02  # trailing\nnx = 64\nny = 64\n");
    REQUIRE(cfg.params.tau == 0.02);
    REQUIRE(cfg.grid.nx == 64);
}

TEST_CASE("config round-trips through serialize/parse") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(0.001, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        RunConfig a;
        a.grid = Grid(8 + 4 * (trial % 5), 8 + 8 * (trial % 3), dist(rng), dist(rng));
        a.params.nu = dist(rng);
        a.params.nu_r = dist(rng);
        a.params.c1 = dist(rng);
        a.params.kappa0 = dist(rng);
        a.params.tau = dist(rng);
        a.params.dt = dist(rng) * 1e-3;
        a.params.t_end = dist(rng);
        a.params.applied_field.cx = dist(rng);
        a.params.applied_field.g2b = dist(rng);
        a.params.applied_field.x0 = 0.5 * a.grid.lx;
        a.params.applied_field.y0 = 0.5 * a.grid.ly;
        a.stepper.picard_tol = dist(rng) * 1e-9;
        a.seed = unsigned(trial * 31 + 1);
        a.initial.seed = a.seed;
        a.initial.psi_amp = dist(rng) * 0.1;
        RunConfig b = parse_config(serialize_config(a));
        REQUIRE(b.grid == a.grid);
        REQUIRE(b.params.nu == a.params.nu);
        REQUIRE(b.params.tau == a.params.tau);
        REQUIRE(b.params.dt == a.params.dt);
        REQUIRE(b.params.applied_field.cx == a.params.applied_field.cx);
        REQUIRE(b.params.applied_field.g2b == a.params.applied_field.g2b);
        REQUIRE(b.stepper.picard_tol == a.stepper.picard_tol);
        REQUIRE(b.seed == a.seed);
        REQUIRE(b.initial.psi_amp == a.initial.psi_amp);
        // serialization is a fixed point
        REQUIRE(serialize_config(b) == serialize_config(a));
    }
}

TEST_CASE("diagnostics CSV: header only for an empty series, blanks for optionals") {
    std::stringstream out;
    write_diagnostics_csv(out, {});
    REQUIRE(out.str() == std::string(kDiagnosticsHeader) + "\n");

    DiagnosticsSample s;
    s.time = 0.5;
    s.energy = 1.25;
    s.dissipation = 0.5;
    s.energy_residual = -1e-7;
    std::stringstream out2;
    write_diagnostics_csv(out2, {s});
    std::string text = out2.str();
    REQUIRE(text.find(",,") != std::string::npos);  // blank optional columns
    const auto lines = std::count(text.begin(), text.end(), '\n');
    REQUIRE(lines == 2);
}

TEST_CASE("diagnostics CSV round-trips at full precision") {
    DiagnosticsSeries series;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int k = 0; k < 10; ++k) {
        DiagnosticsSample s;
        s.time = k * 0.1 + dist(rng) * 1e-13;
        s.energy = std::abs(dist(rng));
        s.dissipation = std::abs(dist(rng));
        s.energy_residual = dist(rng) * 1e-9;
        if (k % 2 == 0) s.m_l2_residual = std::abs(dist(rng)) * 1e-7;
        if (k % 3 == 0) s.rel_entropy = std::abs(dist(rng));
        series.push_back(s);
    }
    std::stringstream buf;
    write_diagnostics_csv(buf, series);
    DiagnosticsSeries back = read_diagnostics_csv(buf);
    REQUIRE(back.size() == series.size());
    for (std::size_t k = 0; k < series.size(); ++k) {
        REQUIRE(back[k].time == series[k].time);
        REQUIRE(back[k].energy == series[k].energy);
        REQUIRE(back[k].dissipation == series[k].dissipation);
        REQUIRE(back[k].energy_residual == series[k].energy_residual);
        REQUIRE(back[k].m_l2_residual == series[k].m_l2_residual);
        REQUIRE(back[k].rel_entropy == series[k].rel_entropy);
    }
}
