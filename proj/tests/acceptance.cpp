// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion.  Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ferroflow/config.hpp"
#include "ferroflow/diagnostics.hpp"
#include "ferroflow/experiments.hpp"
#include "ferroflow/forces.hpp"
#include "ferroflow/initial_data.hpp"
#include "ferroflow/magnetostatics.hpp"
#include "ferroflow/operators.hpp"
#include "ferroflow/projection.hpp"
#include "ferroflow/snapshot.hpp"
#include "ferroflow/stepper.hpp"
#include "ferroflow/verify.hpp"

using namespace ferroflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

int g_failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d  %-28s %s\n", pass ? "PASS" : "FAIL", idx, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

// applied field shared by the dynamic criteria: constant plus harmonic terms
AppliedField standard_applied_field() {
    AppliedField ha;
    ha.cx = 0.6;
    ha.cy = 0.2;
    ha.g2a = 0.15;
    ha.g2b = 0.4;
    ha.x0 = ha.y0 = 0.5;
    return ha;
}

// --------------------------------------------------------------------------

void criterion_1_operators() {
    const auto t0 = std::chrono::steady_clock::now();
    using namespace verify;
    const double og = observed_order({grad_error(32), grad_error(64), grad_error(128)});
    const double od = observed_order({div_error(32), div_error(64), div_error(128)});
    const double oc = observed_order({curl_error(32), curl_error(64), curl_error(128)});
    const double ol =
        observed_order({laplacian_error(32), laplacian_error(64), laplacian_error(128)});

    // stencil exactness on linears/quadratics
    Grid g(32, 32);
    ScalarField lin(g), quad(g);
    lin.fill_with([](double x, double y) { return 2.0 * x - y + 0.5; });
    quad.fill_with([](double x, double y) { return x * x + y * y; });
    VectorField gl = grad(lin);
    double exact_err = 0.0;
    for (std::size_t k = 0; k < gl.x.size(); ++k)
        exact_err = std::max({exact_err, std::abs(gl.x[k] - 2.0), std::abs(gl.y[k] + 1.0)});
    ScalarField lq = laplacian(quad, LaplacianClosure::Neumann);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i)
            exact_err = std::max(exact_err, std::abs(lq(i, j) - 4.0));
    const double el = seconds_since(t0);
    const bool pass =
        og >= 1.8 && od >= 1.8 && oc >= 1.8 && ol >= 1.8 && exact_err < 1e-10 && el < 10.0;
    report(1, "operator_orders", pass,
           "grad " + fmt(og) + " div " + fmt(od) + " curl " + fmt(oc) + " lap " + fmt(ol) +
               ", exactness " + fmt(exact_err) + ", " + fmt(el) + " s");
}

void criterion_2_structure_identities() {
    Grid g(64, 64);
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ScalarField s(g);
        for (double& v : s.v) v = dist(rng);
        const double scale = max_abs(s.v) / (g.hx * g.hy);
        ScalarField cg = curl_vec(grad(s));
        ScalarField dc = div(curl_scalar(s));
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                worst = std::max(worst, std::abs(cg(i, j)) / scale);
                worst = std::max(worst, std::abs(dc(i, j)) / scale);
            }
    }
    report(2, "structure_identities", worst <= 1e-13,
           "max |curl grad| and |div curl| = " + fmt(worst) + " of stencil scale (<= 1e-13)");
}

void criterion_3_magnetostatics() {
    const auto t0 = std::chrono::steady_clock::now();
    using namespace verify;
    const double order =
        observed_order({manufactured_potential_error(32), manufactured_potential_error(64),
                        manufactured_potential_error(128)});
    // compatibility defect for a harmonic-gradient applied field with nonzero m
    Grid g(64, 64);
    VectorField m(g);
    m.fill_with([](double x, double y) { return std::sin(2 * x) * y * y; },
                [](double x, double y) { return std::cos(3 * y) - x; });
    AppliedField ha = standard_applied_field();
    ha.g3a = -0.5;
    ha.g3b = 0.25;
    std::vector<double> b = detail::potential_rhs(
        g, &m, [&](double x, double y, double& hx, double& hy) { ha.at(x, y, 0.0, hx, hy); });
    const double defect = std::abs(pairwise_sum(b) * g.cell_area());
    const double el = seconds_since(t0);
    report(3, "magnetostatics", order >= 1.8 && defect < 1e-12 && el < 10.0,
           "order " + fmt(order) + ", defect " + fmt(defect) + ", " + fmt(el) + " s");
}

void criterion_4_kelvin_identity() {
    using namespace verify;
    const std::vector<double> gaps = {kelvin_gap(32), kelvin_gap(64), kelvin_gap(128)};
    const double order = observed_order(gaps);

    // m = 0, h = grad(x^2 - y^2): conservative form's L2 norm <= C h^2, C = 1
    bool small = true;
    std::string detail;
    for (int n : {32, 64}) {
        Grid g(n, n);
        VectorField m(g), h(g);
        h.fill_with([](double x, double) { return 2.0 * x; },
                    [](double, double y) { return -2.0 * y; });
        const double nrm = l2_norm(kelvin_conservative(m, h, 1.0));
        small = small && nrm <= g.hx * g.hx;
        if (n == 64) detail = "harmonic case " + fmt(nrm) + " <= h^2 = " + fmt(g.hx * g.hx);
    }
    report(4, "kelvin_identity", order >= 1.0 && small,
           "gap order " + fmt(order) + ", " + detail);
}

struct EnergyRunResult {
    double max_residual = 0.0;
    double e0 = 0.0;
};

EnergyRunResult energy_run(int n, double dt, double t_end) {
    Grid g(n, n);
    Params p;
    p.tau = 5e-2;
    p.dt = dt;
    p.t_end = t_end;
    p.applied_field = standard_applied_field();
    StepperConfig cfg;
    cfg.advection = AdvectionScheme::Centered;
    InitialData init;
    FullStepper stepper(g, p, cfg);
    NeumannPoissonSolver pois(g, cfg.poisson_tol);
    PotentialSolution lim = solve_limit_potential(g, p.applied_field, p.kappa0, 0.0, pois);
    VectorField m0 = init.magnetization(g, lim.h, p.kappa0, std::sqrt(*p.tau));
    State s0 = stepper.prepare_initial(init.velocity(g), init.spin(g), m0);
    Trajectory traj = run_full(s0, p, cfg);
    EnergyRunResult r;
    r.e0 = traj.series.front().energy;
    for (const DiagnosticsSample& d : traj.series)
        r.max_residual = std::max(r.max_residual, std::abs(d.energy_residual));
    return r;
}

void criterion_5_energy_inequality() {
    const auto t0 = std::chrono::steady_clock::now();
    const double dt = 2e-3;
    EnergyRunResult a = energy_run(64, dt, 1.0);
    EnergyRunResult b = energy_run(64, dt / 2, 1.0);
    const double el = seconds_since(t0);
    const double ratio = b.max_residual / a.max_residual;
    const bool pass = a.max_residual <= 1e-2 * a.e0 && ratio >= 0.4 && ratio <= 0.6 && el < 120.0;
    report(5, "energy_inequality", pass,
           "max residual " + fmt(a.max_residual) + " (bound " + fmt(1e-2 * a.e0) +
               "), halving ratio " + fmt(ratio) + " in [0.4,0.6], " + fmt(el) + " s");
}

void criterion_6_relaxation_ode() {
    Grid g(32, 32);
    bool pass = true;
    std::string detail;
    for (double ratio : {10.0, 1.0, 0.01}) {
        const double dt = 0.02;
        const double tau = ratio * dt;
        double bound = 0.0;
        const double err = verify::relaxation_ode_error(g, tau, dt, 0.4, bound);
        pass = pass && std::isfinite(err) && err <= bound;
        detail += "tau/dt " + fmt(ratio) + ": " + fmt(err) + "<=" + fmt(bound) + "  ";
    }
    report(6, "relaxation_ode_oracle", pass, detail);
}

double m_identity_defect(int n, double dt, double t_end) {
    Grid g(n, n);
    Params p;
    p.tau = 2e-2;
    p.dt = dt;
    p.t_end = t_end;
    p.applied_field = standard_applied_field();
    StepperConfig cfg;
    InitialData init;
    FullStepper stepper(g, p, cfg);
    NeumannPoissonSolver pois(g, cfg.poisson_tol);
    PotentialSolution lim = solve_limit_potential(g, p.applied_field, p.kappa0, 0.0, pois);
    VectorField m0 = init.magnetization(g, lim.h, p.kappa0, std::sqrt(*p.tau));
    State s0 = stepper.prepare_initial(init.velocity(g), init.spin(g), m0);
    Trajectory traj = run_full(s0, p, cfg);
    double worst = 0.0;
    for (const DiagnosticsSample& d : traj.series)
        if (d.m_l2_residual) worst = std::max(worst, *d.m_l2_residual);
    return worst;
}

void criterion_7_m_l2_identity() {
    const double d0 = m_identity_defect(24, 8e-3, 0.2);
    const double d1 = m_identity_defect(48, 4e-3, 0.2);
    const double d2 = m_identity_defect(96, 2e-3, 0.2);
    const bool pass = d0 / d1 >= 1.7 && d1 / d2 >= 1.7;
    report(7, "m_l2_identity", pass,
           "defects " + fmt(d0) + " / " + fmt(d1) + " / " + fmt(d2) + ", ratios " +
               fmt(d0 / d1) + ", " + fmt(d1 / d2) + " (>= 1.7)");
}

void criterion_8_relative_entropy_algebra() {
    Grid g(64, 64);
    Params p;
    p.tau = 1e-2;
    p.mu0 = 1.4;
    p.kappa0 = 0.7;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        State s(g);
        LimitState l(g);
        for (auto* f : {&s.u.x, &s.u.y, &s.w.v, &s.m.x, &s.m.y, &s.h.x, &s.h.y})
            for (double& v : *f) v = dist(rng);
        for (auto* f : {&l.U.x, &l.U.y, &l.W.v, &l.H.x, &l.H.y})
            for (double& v : *f) v = dist(rng);
        const double direct = relative_entropy(s, l, p);
        const double via = relative_entropy_via_energy(s, l, p);
        worst = std::max(worst, std::abs(direct - via) / std::max(1.0, std::abs(direct)));
    }
    report(8, "relative_entropy_algebra", worst <= 1e-12,
           "max relative gap " + fmt(worst) + " (<= 1e-12)");
}

void criterion_9_rate_reproduction() {
    const auto t0 = std::chrono::steady_clock::now();
    SweepConfig cfg;
    cfg.grid = Grid(48, 48);
    cfg.params.tau = 1e-2;  // placeholder; overwritten per run
    cfg.params.dt = 2.5e-3;
    cfg.params.t_end = 0.5;
    cfg.params.applied_field = standard_applied_field();
    cfg.initial.psi_amp = 0.12;
    cfg.initial.w_amp = 0.3;
    SweepReport rep = relaxation_sweep(cfg, {1e-1, 3e-2, 1e-2, 3e-3, 1e-3});
    const double el = seconds_since(t0);
    const bool pass = rep.fit.slope >= 0.35 && rep.fit.slope <= 0.65 &&
                      rep.fit.r_squared >= 0.95 && el < 900.0;
    std::string taus;
    for (const SweepEntry& e : rep.entries) taus += fmt(e.sup_sqrt_re) + " ";
    report(9, "rate_reproduction", pass,
           "slope " + fmt(rep.fit.slope) + " in [0.35,0.65], r^2 " + fmt(rep.fit.r_squared) +
               ", sup sqrt(E): " + taus + ", " + fmt(el) + " s");
}

void criterion_10_pressure_folding() {
    Grid g(48, 48);
    Params p;
    p.mode = SystemMode::Limit;
    p.dt = 2e-3;
    p.applied_field = standard_applied_field();
    StepperConfig folded;
    StepperConfig expl = folded;
    expl.limit_explicit_kelvin = true;
    InitialData init;
    init.psi_amp = 0.12;
    init.w_amp = 0.3;
    LimitStepper st1(g, p, folded);
    LimitStepper st2(g, p, expl);
    LimitState a = st1.prepare_initial(init.velocity(g), init.spin(g));
    LimitState b = a;
    for (int step = 1; step <= 100; ++step) {
        st1.step(a, step);
        st2.step(b, step);
    }
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double ex = a.U.x[k] - b.U.x[k];
        const double ey = a.U.y[k] - b.U.y[k];
        cell[k] = ex * ex + ey * ey;
    }
    const double gap = std::sqrt(integrate(g, cell));
    const double bound = 10.0 * folded.projection_tol * (1.0 + l2_norm(a.U));
    report(10, "limit_pressure_folding", gap <= bound,
           "trajectory gap " + fmt(gap) + " <= " + fmt(bound) + " over 100 steps");
}

void criterion_11_determinism() {
#ifdef FERROFLOW_CLI_PATH
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "ferroflow_acceptance";
    fs::remove_all(tmp);
    fs::create_directories(tmp);
    const fs::path cfg_path = tmp / "run.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "nx = 24\nny = 24\ntau = 0.02\ndt = 0.004\nt_end = 0.04\n"
            << "ha_cx = 0.5\nha_g2b = 0.3\nseed = 7\n"
            << "output_dir = " << (tmp / "out").string() << "\n";
    }
    bool pass = true;
    std::string detail;
    std::string csv[2];
    for (int r = 0; r < 2; ++r) {
        const std::string cmd =
            std::string(FERROFLOW_CLI_PATH) + " run " + cfg_path.string() + " > /dev/null";
        if (std::system(cmd.c_str()) != 0) {
            pass = false;
            detail = "run invocation failed";
            break;
        }
        std::ifstream in(tmp / "out" / "diagnostics.csv", std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        csv[r] = ss.str();
    }
    if (pass) {
        pass = !csv[0].empty() && csv[0] == csv[1];
        detail = "two runs, " + std::to_string(csv[0].size()) + " bytes, byte-identical: " +
                 (pass ? "yes" : "no");
    }
    fs::remove_all(tmp);
    report(11, "determinism", pass, detail);
#else
    report(11, "determinism", false, "CLI path not configured");
#endif
}

}  // namespace

int main() {
    std::printf("ferroflow acceptance suite\n");
    criterion_1_operators();
    criterion_2_structure_identities();
    criterion_3_magnetostatics();
    criterion_4_kelvin_identity();
    criterion_5_energy_inequality();
    criterion_6_relaxation_ode();
    criterion_7_m_l2_identity();
    criterion_8_relative_entropy_algebra();
    criterion_9_rate_reproduction();
    criterion_10_pressure_folding();
    criterion_11_determinism();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
