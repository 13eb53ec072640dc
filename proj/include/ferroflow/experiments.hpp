#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ferroflow/diagnostics.hpp"
#include "ferroflow/initial_data.hpp"
#include "ferroflow/stepper.hpp"

namespace ferroflow {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept; log_log applies log to both
/// coordinates first.  Requires at least two distinct x values.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& points, bool log_log) {
    if (points.size() < 2) throw std::invalid_argument("fit_rate: need at least 2 points");
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [x, y] : points) {
        if (log_log) {
            if (x <= 0.0 || y <= 0.0)
                throw std::invalid_argument("fit_rate: log-log needs positive coordinates");
            xs.push_back(std::log(x));
            ys.push_back(std::log(y));
        } else {
            xs.push_back(x);
            ys.push_back(y);
        }
    }
    const double n = double(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sx += xs[k];
        sy += ys[k];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: need at least 2 distinct x values");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - (fit.slope * xs[k] + fit.intercept);
        ss_res += r * r;
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

/// Worker-thread cap: FERROFLOW_THREADS, 0 or unset = hardware auto.
inline unsigned worker_threads(std::size_t jobs) {
    unsigned cap = 0;
    if (const char* env = std::getenv("FERROFLOW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) cap = unsigned(v);
    }
    if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
    return unsigned(std::min<std::size_t>(cap, jobs));
}

struct SweepEntry {
    double tau = 0.0;
    double sup_sqrt_re = 0.0;    ///< sup over sample times of sqrt(relative entropy)
    double final_sqrt_re = 0.0;
    double int_rel_dissipation = 0.0;  ///< int_0^T relative dissipation dt
};

struct SweepReport {
    std::vector<SweepEntry> entries;  ///< sorted by tau descending
    RateFit fit;                      ///< log-log fit of sup_sqrt_re vs tau
};

struct SweepConfig {
    Grid grid{48, 48};
    Params params;             ///< tau is overwritten per run
    StepperConfig stepper;
    InitialData initial;
    int diagnostics_every = 1;
};

/**
 * Relaxation-limit sweep: runs the full system for each tau from
 * well-prepared data (m0 = kappa0 H0 + sqrt(tau) p, matched u0, w0) against
 * one shared limit-system run, and fits the log-log rate of the relative
 * entropy error.  Runs execute in parallel across taus.
 */
inline SweepReport relaxation_sweep(const SweepConfig& base, std::vector<double> taus) {
    if (taus.size() < 4) throw std::invalid_argument("need >= 4 taus");
    for (double t : taus)
        if (!(t > 0.0)) throw std::invalid_argument("taus must be positive");
    std::sort(taus.begin(), taus.end(), std::greater<>());
    if (taus.front() / taus.back() < 100.0)
        throw std::invalid_argument("taus must span at least two decades");
    if (!base.params.applied_field.is_static())
        throw std::invalid_argument("relaxation sweep requires a static applied field");

    // shared limit run, states stored at the sample cadence
    Params lim_params = base.params;
    lim_params.mode = SystemMode::Limit;
    lim_params.tau.reset();
    lim_params.sigma = 0.0;
    LimitStepper lim_stepper(base.grid, lim_params, base.stepper);
    LimitState lim0 = lim_stepper.prepare_initial(base.initial.velocity(base.grid),
                                                  base.initial.spin(base.grid));
    LimitTrajectory lim_traj = run_limit(lim0, lim_params, base.stepper, base.diagnostics_every,
                                         0, /*store_states=*/true);

    SweepReport report;
    report.entries.resize(taus.size());
    std::vector<std::string> errors(taus.size());

    auto run_one = [&](std::size_t idx) {
        const double tau = taus[idx];
        try {
            Params p = base.params;
            p.mode = (base.params.sigma > 0.0) ? SystemMode::Regularized : SystemMode::Full;
            p.tau = tau;
            FullStepper stepper(base.grid, p, base.stepper);
            VectorField m0 = base.initial.magnetization(base.grid, lim_traj.sampled_states[0].H,
                                                        p.kappa0, std::sqrt(tau));
            State s0 = stepper.prepare_initial(base.initial.velocity(base.grid),
                                               base.initial.spin(base.grid), m0);

            SweepEntry entry;
            entry.tau = tau;
            double prev_rd = 0.0, prev_t = 0.0;
            bool have_prev = false;
            RunHooks hooks;
            hooks.on_full_sample = [&](const State& st, int sidx, DiagnosticsSample& d) {
                const LimitState& ls = lim_traj.sampled_states.at(std::size_t(sidx));
                const double re = relative_entropy(st, ls, p);
                const double rd = relative_dissipation(st, ls, p);
                d.rel_entropy = re;
                d.rel_dissipation = rd;
                const double sq = std::sqrt(std::max(0.0, re));
                entry.sup_sqrt_re = std::max(entry.sup_sqrt_re, sq);
                entry.final_sqrt_re = sq;
                if (have_prev)
                    entry.int_rel_dissipation += 0.5 * (st.time - prev_t) * (prev_rd + rd);
                prev_rd = rd;
                prev_t = st.time;
                have_prev = true;
            };
            run_full(s0, p, base.stepper, base.diagnostics_every, 0, hooks);
            report.entries[idx] = entry;
        } catch (const std::exception& e) {
            errors[idx] = "tau = " + std::to_string(tau) + ": " + e.what();
        }
    };

    const unsigned nthreads = worker_threads(taus.size());
    if (nthreads <= 1) {
        for (std::size_t k = 0; k < taus.size(); ++k) run_one(k);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < nthreads; ++t)
            pool.emplace_back([&, t]() {
                for (std::size_t k = t; k < taus.size(); k += nthreads) run_one(k);
            });
        for (auto& th : pool) th.join();
    }
    for (const std::string& e : errors)
        if (!e.empty()) throw std::runtime_error("relaxation_sweep failed: " + e);

    std::vector<std::pair<double, double>> pts;
    for (const SweepEntry& e : report.entries) pts.emplace_back(e.tau, e.sup_sqrt_re);
    report.fit = fit_rate(pts, /*log_log=*/true);
    return report;
}

/// 2:1 restriction of a fine cell field to the coarse grid (4-cell average).
inline std::vector<double> restrict_field(const Grid& fine, const Grid& coarse,
                                          const std::vector<double>& f) {
    std::vector<double> out(coarse.cells());
    for (int j = 0; j < coarse.ny; ++j)
        for (int i = 0; i < coarse.nx; ++i)
            out[coarse.idx(i, j)] =
                0.25 * (f[fine.idx(2 * i, 2 * j)] + f[fine.idx(2 * i + 1, 2 * j)] +
                        f[fine.idx(2 * i, 2 * j + 1)] + f[fine.idx(2 * i + 1, 2 * j + 1)]);
    return out;
}

struct SelfConvergenceResult {
    std::vector<double> differences;  ///< L2 of successive restricted differences
    std::vector<double> orders;       ///< Richardson log2 ratios
    double observed_order = 0.0;      ///< finest ratio
};

/**
 * Richardson self-convergence of the full system under simultaneous grid and
 * time refinement: runs `levels` resolutions (nx, dt), (2nx, dt/2), ... from
 * the same analytic initial data and compares restricted final velocities.
 */
inline SelfConvergenceResult self_convergence(const Grid& base_grid, const Params& base_params,
                                              const StepperConfig& cfg, const InitialData& init,
                                              int levels = 3) {
    if (levels < 3) throw std::invalid_argument("self_convergence: need at least 3 levels");
    std::vector<Grid> grids;
    std::vector<State> finals;
    for (int l = 0; l < levels; ++l) {
        const int f = 1 << l;
        Grid g(base_grid.nx * f, base_grid.ny * f, base_grid.lx, base_grid.ly);
        Params p = base_params;
        p.dt = base_params.dt / f;
        FullStepper stepper(g, p, cfg);
        NeumannPoissonSolver pois(g, cfg.poisson_tol);
        PotentialSolution lim =
            solve_limit_potential(g, p.applied_field, p.kappa0, 0.0, pois);
        VectorField m0 = init.magnetization(g, lim.h, p.kappa0,
                                            p.tau ? std::sqrt(*p.tau) : 0.0);
        State s0 = stepper.prepare_initial(init.velocity(g), init.spin(g), m0);
        Trajectory t = run_full(s0, p, cfg, std::max(1, step_count(p)));
        grids.push_back(g);
        finals.push_back(std::move(t.final_state));
    }
    SelfConvergenceResult res;
    for (int l = 0; l + 1 < levels; ++l) {
        // restrict level l+1 down to level l and compare velocities
        std::vector<double> rx = restrict_field(grids[l + 1], grids[l], finals[l + 1].u.x);
        std::vector<double> ry = restrict_field(grids[l + 1], grids[l], finals[l + 1].u.y);
        std::vector<double> cell(grids[l].cells());
        for (std::size_t k = 0; k < cell.size(); ++k) {
            const double ex = rx[k] - finals[l].u.x[k];
            const double ey = ry[k] - finals[l].u.y[k];
            cell[k] = ex * ex + ey * ey;
        }
        res.differences.push_back(std::sqrt(integrate(grids[l], cell)));
    }
    for (std::size_t k = 0; k + 1 < res.differences.size(); ++k)
        res.orders.push_back(std::log2(res.differences[k] / res.differences[k + 1]));
    if (!res.orders.empty()) res.observed_order = res.orders.back();
    return res;
}

}  // namespace ferroflow
