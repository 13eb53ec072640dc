#pragma once

#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ferroflow/diagnostics.hpp"
#include "ferroflow/experiments.hpp"
#include "ferroflow/forces.hpp"
#include "ferroflow/magnetostatics.hpp"
#include "ferroflow/operators.hpp"
#include "ferroflow/stepper.hpp"

namespace ferroflow {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace verify {

inline constexpr double kPi = 3.14159265358979323846;

/// Observed convergence order from errors on grids n, 2n, 4n, ...
inline double observed_order(const std::vector<double>& errors) {
    double worst = 1e300;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k)
        worst = std::min(worst, std::log2(errors[k] / errors[k + 1]));
    return worst;
}

/// L2 error of grad on s = sin(pi x) sin(pi y) over the whole domain.
inline double grad_error(int n) {
    Grid g(n, n);
    ScalarField s(g);
    s.fill_with([](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
    VectorField gr = grad(s);
    std::vector<double> cell(g.cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.xc(i), y = g.yc(j);
            const double ex = gr.x[g.idx(i, j)] - kPi * std::cos(kPi * x) * std::sin(kPi * y);
            const double ey = gr.y[g.idx(i, j)] - kPi * std::sin(kPi * x) * std::cos(kPi * y);
            cell[g.idx(i, j)] = ex * ex + ey * ey;
        }
    return std::sqrt(integrate(g, cell));
}

/// Interior L2 error of div on v = (sin(pi x) cos(pi y), x y).
inline double div_error(int n) {
    Grid g(n, n);
    VectorField v(g);
    v.fill_with([](double x, double y) { return std::sin(kPi * x) * std::cos(kPi * y); },
                [](double x, double y) { return x * y; });
    ScalarField d = div(v);
    std::vector<double> cell(g.cells(), 0.0);
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            const double x = g.xc(i), y = g.yc(j);
            const double ex = d(i, j) - (kPi * std::cos(kPi * x) * std::cos(kPi * y) + x);
            cell[g.idx(i, j)] = ex * ex;
        }
    return std::sqrt(integrate(g, cell));
}

inline double curl_error(int n) {
    Grid g(n, n);
    VectorField v(g);
    v.fill_with([](double x, double y) { return std::cos(kPi * x) * std::sin(kPi * y); },
                [](double x, double y) { return std::sin(2 * kPi * x) * y; });
    ScalarField c = curl_vec(v);
    std::vector<double> cell(g.cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.xc(i), y = g.yc(j);
            const double exact =
                2 * kPi * std::cos(2 * kPi * x) * y - kPi * std::cos(kPi * x) * std::cos(kPi * y);
            const double e = c(i, j) - exact;
            cell[g.idx(i, j)] = e * e;
        }
    return std::sqrt(integrate(g, cell));
}

inline double laplacian_error(int n) {
    Grid g(n, n);
    ScalarField f(g);
    f.fill_with([](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); });
    ScalarField l = laplacian(f, LaplacianClosure::Dirichlet);
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double e = l.v[k] + 2.0 * kPi * kPi * f.v[k];
        cell[k] = e * e;
    }
    return std::sqrt(integrate(g, cell));
}

/// Manufactured Neumann problem m = grad(cos(pi x) cos(pi y)), h_a = 0:
/// exact solution phi = -cos(pi x) cos(pi y) (zero-mean on the unit square).
inline double manufactured_potential_error(int n, double tol = 1e-11) {
    Grid g(n, n);
    VectorField m(g);
    m.fill_with([](double x, double y) { return -kPi * std::sin(kPi * x) * std::cos(kPi * y); },
                [](double x, double y) { return -kPi * std::cos(kPi * x) * std::sin(kPi * y); });
    NeumannPoissonSolver solver(g, tol);
    PotentialSolution ps = solve_potential(
        m, [](double, double, double& hx, double& hy) { hx = hy = 0.0; }, solver);
    std::vector<double> cell(g.cells());
    ScalarField exact(g);
    exact.fill_with([](double x, double y) { return -std::cos(kPi * x) * std::cos(kPi * y); });
    subtract_mean(g, exact.v);
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double e = ps.phi.v[k] - exact.v[k];
        cell[k] = e * e;
    }
    return std::sqrt(integrate(g, cell));
}

/// L2 distance between the direct and conservative Kelvin forms on a
/// compatible pair (curl h = 0, div(m + h) = 0), sampled analytically.
inline double kelvin_gap(int n) {
    Grid g(n, n);
    VectorField h(g), m(g);
    h.fill_with([](double x, double y) { return -kPi * std::sin(kPi * x) * std::cos(kPi * y); },
                [](double x, double y) { return -kPi * std::cos(kPi * x) * std::sin(kPi * y); });
    // m = -h + curl(chi) with chi = sin(2 pi x) sin(pi y): div(m + h) = 0
    m.fill_with(
        [](double x, double y) {
            return kPi * std::sin(kPi * x) * std::cos(kPi * y) +
                   kPi * std::sin(2 * kPi * x) * std::cos(kPi * y);
        },
        [](double x, double y) {
            return kPi * std::cos(kPi * x) * std::sin(kPi * y) -
                   2 * kPi * std::cos(2 * kPi * x) * std::sin(kPi * y);
        });
    VectorField fd = kelvin_direct(m, h, 1.0);
    VectorField fc = kelvin_conservative(m, h, 1.0);
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double ex = fd.x[k] - fc.x[k];
        const double ey = fd.y[k] - fc.y[k];
        cell[k] = ex * ex + ey * ey;
    }
    return std::sqrt(integrate(g, cell));
}

/// Max deviation of the implicit relaxation from the exact ODE
/// m(t) = kappa0 h + (m0 - kappa0 h) exp(-t/tau) with frozen h, u = w = 0.
inline double relaxation_ode_error(const Grid& g, double tau, double dt, double t_end,
                                   double& bound_out) {
    Params p;
    p.tau = tau;
    p.mode = SystemMode::Full;
    p.dt = dt;
    p.t_end = t_end;
    StepperConfig cfg;
    cfg.frozen.advection = true;
    FullStepper stepper(g, p, cfg);
    VectorField h(g, 0.7, -0.3);
    VectorField m0(g, 1.3, 0.4);
    ScalarField w(g);
    VectorField u(g);
    VectorField m = m0;
    double max_err = 0.0;
    const int nsteps = int(std::llround(t_end / dt));
    for (int k = 1; k <= nsteps; ++k) {
        RelaxationResult rr = stepper.relax_magnetization(m, u, w, k * dt, dt, &h);
        m = rr.m;
        const double t = k * dt;
        const double decay = std::exp(-t / tau);
        double err = 0.0;
        for (std::size_t c = 0; c < m.x.size(); ++c) {
            const double ex = p.kappa0 * h.x[c] + (m0.x[c] - p.kappa0 * h.x[c]) * decay;
            const double ey = p.kappa0 * h.y[c] + (m0.y[c] - p.kappa0 * h.y[c]) * decay;
            err = std::max(err, std::hypot(m.x[c] - ex, m.y[c] - ey));
        }
        max_err = std::max(max_err, err);
    }
    double dev0 = 0.0;
    for (std::size_t c = 0; c < m0.x.size(); ++c)
        dev0 = std::max(dev0, std::hypot(m0.x[c] - p.kappa0 * h.x[c],
                                         m0.y[c] - p.kappa0 * h.y[c]));
    // |(1+theta)^{-n} - e^{-n theta}| <= 0.2 min(theta, 1) uniformly in n
    bound_out = 0.2 * std::min(dt / tau, 1.0) * dev0;
    return max_err;
}

}  // namespace verify

/**
 * Built-in verification battery for the `check` CLI subcommand: operator
 * orders, the manufactured Neumann solution, the Kelvin-form equivalence, a
 * short energy-inequality run, and the stiff relaxation ODE oracle.
 */
inline std::vector<CheckResult> run_check_battery(const Params& base_params,
                                                  const StepperConfig& base_cfg) {
    using namespace verify;
    std::vector<CheckResult> out;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        out.push_back({name, pass, detail});
    };
    auto fmt = [](double v) {
        std::ostringstream os;
        os.precision(3);
        os << v;
        return os.str();
    };

    {
        std::vector<double> eg = {grad_error(32), grad_error(64), grad_error(128)};
        std::vector<double> ed = {div_error(32), div_error(64), div_error(128)};
        std::vector<double> ec = {curl_error(32), curl_error(64), curl_error(128)};
        std::vector<double> el = {laplacian_error(32), laplacian_error(64), laplacian_error(128)};
        const double og = observed_order(eg), od = observed_order(ed), oc = observed_order(ec),
                     ol = observed_order(el);
        add("operator_orders", og >= 1.8 && od >= 1.8 && oc >= 1.8 && ol >= 1.8,
            "grad " + fmt(og) + ", div " + fmt(od) + ", curl " + fmt(oc) + ", laplacian " +
                fmt(ol));
    }
    {
        std::vector<double> e = {manufactured_potential_error(32), manufactured_potential_error(64),
                                 manufactured_potential_error(128)};
        const double o = observed_order(e);
        add("poisson_manufactured", o >= 1.8, "order " + fmt(o));
    }
    {
        std::vector<double> e = {kelvin_gap(32), kelvin_gap(64), kelvin_gap(128)};
        const double o = observed_order(e);
        add("kelvin_equivalence", o >= 1.0, "order " + fmt(o));
    }
    {
        Grid g(32, 32);
        double bound = 0.0;
        bool ok = true;
        std::string detail;
        for (double ratio : {10.0, 1.0, 0.01}) {
            const double dt = 0.02;
            const double tau = ratio * dt;
            const double err = relaxation_ode_error(g, tau, dt, 0.2, bound);
            ok = ok && err <= bound && std::isfinite(err);
            detail += "tau/dt=" + fmt(ratio) + ": err " + fmt(err) + " <= " + fmt(bound) + "; ";
        }
        add("relaxation_ode", ok, detail);
    }
    {
        // short full-system run with static h_a: energy residual stays small
        Grid g(32, 32);
        Params p = base_params;
        p.mode = SystemMode::Full;
        if (!p.tau) p.tau = 5e-2;
        p.sigma = 0.0;
        p.t_end = 0.2;
        p.dt = 4e-3;
        p.applied_field = AppliedField{};
        p.applied_field.cx = 0.6;
        p.applied_field.cy = 0.2;
        p.applied_field.g2b = 0.4;
        StepperConfig cfg = base_cfg;
        cfg.frozen = FrozenFields{};
        InitialData init;
        FullStepper stepper(g, p, cfg);
        NeumannPoissonSolver pois(g, cfg.poisson_tol);
        PotentialSolution lim = solve_limit_potential(g, p.applied_field, p.kappa0, 0.0, pois);
        VectorField m0 = init.magnetization(g, lim.h, p.kappa0, std::sqrt(*p.tau));
        State s0 = stepper.prepare_initial(init.velocity(g), init.spin(g), m0);
        Trajectory traj = run_full(s0, p, cfg);
        double max_res = -1e300;
        for (const DiagnosticsSample& d : traj.series) max_res = std::max(max_res, d.energy_residual);
        const double e0 = traj.series.front().energy;
        add("energy_residual", max_res <= 1e-2 * e0,
            "max residual " + fmt(max_res) + " vs bound " + fmt(1e-2 * e0));
    }
    return out;
}

}  // namespace ferroflow
