#pragma once

#include <vector>

#include "ferroflow/fields.hpp"
#include "ferroflow/operators.hpp"
#include "ferroflow/params.hpp"
#include "ferroflow/state.hpp"

namespace ferroflow {

// Discrete versions of the functionals controlling the system: the energy
//   E = 1/2 (|u|^2 + |w|^2 + mu0/kappa0 |m|^2 + mu0 |h|^2),
// the dissipation
//   D = nu|grad u|^2 + c1|grad w|^2 + c2|div w|^2 + nu_r|curl u - 2w|^2
//       + mu0/(tau kappa0) |m - kappa0 h|^2,
// and their relative counterparts between a tau-solution and the
// quasi-equilibrium solution.  In the 2D scalar-spin reduction the c2|div w|^2
// contribution has no analogue and is identically zero.  All integrals are
// midpoint quadrature with pairwise summation.

namespace detail {

inline double energy_integral(const Grid& g, const std::vector<double>& ux,
                              const std::vector<double>& uy, const std::vector<double>& w,
                              const std::vector<double>& mx, const std::vector<double>& my,
                              const std::vector<double>& hx, const std::vector<double>& hy,
                              double mu0, double kappa0) {
    std::vector<double> cell(g.cells());
    const double cm = mu0 / kappa0;
    for (std::size_t k = 0; k < cell.size(); ++k)
        cell[k] = 0.5 * (ux[k] * ux[k] + uy[k] * uy[k] + w[k] * w[k] +
                         cm * (mx[k] * mx[k] + my[k] * my[k]) +
                         mu0 * (hx[k] * hx[k] + hy[k] * hy[k]));
    return integrate(g, cell);
}

}  // namespace detail

inline double energy(const State& s, const Params& p) {
    return detail::energy_integral(s.grid(), s.u.x, s.u.y, s.w.v, s.m.x, s.m.y, s.h.x, s.h.y,
                                   p.mu0, p.kappa0);
}

inline double energy(const LimitState& s, const Params& p) {
    VectorField m = s.magnetization(p.kappa0);
    return detail::energy_integral(s.grid(), s.U.x, s.U.y, s.W.v, m.x, m.y, s.H.x, s.H.y, p.mu0,
                                   p.kappa0);
}

namespace detail {

inline double dissipation_integral(const Grid& g, const VectorField& u, const ScalarField& w,
                                   const VectorField& m, const VectorField& h, const Params& p,
                                   bool with_relaxation_term) {
    const std::size_t n = g.cells();
    std::vector<double> dux(n), duy(n), dvx(n), dvy(n), dwx(n), dwy(n);
    ddx(g, u.x, dux);
    ddy(g, u.x, duy);
    ddx(g, u.y, dvx);
    ddy(g, u.y, dvy);
    ddx(g, w.v, dwx);
    ddy(g, w.v, dwy);
    const double crel =
        with_relaxation_term ? p.mu0 / (p.tau_value() * p.kappa0) : 0.0;
    std::vector<double> cell(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double gradu2 = dux[k] * dux[k] + duy[k] * duy[k] + dvx[k] * dvx[k] + dvy[k] * dvy[k];
        const double gradw2 = dwx[k] * dwx[k] + dwy[k] * dwy[k];
        const double curl_u = dvx[k] - duy[k];
        const double spin = curl_u - 2.0 * w.v[k];
        double rel = 0.0;
        if (with_relaxation_term) {
            const double rx = m.x[k] - p.kappa0 * h.x[k];
            const double ry = m.y[k] - p.kappa0 * h.y[k];
            rel = crel * (rx * rx + ry * ry);
        }
        cell[k] = p.nu * gradu2 + p.c1 * gradw2 + p.nu_r * spin * spin + rel;
    }
    return integrate(g, cell);
}

}  // namespace detail

inline double dissipation(const State& s, const Params& p) {
    return detail::dissipation_integral(s.grid(), s.u, s.w, s.m, s.h, p, true);
}

/// For the limit system m = kappa0 H identically, so the relaxation term is 0.
inline double dissipation(const LimitState& s, const Params& p) {
    return detail::dissipation_integral(s.grid(), s.U, s.W, s.H, s.H, p, false);
}

/**
 * Relative entropy between a tau-solution and the limit solution:
 *   1/2 (|u-U|^2 + |w-W|^2 + mu0/kappa0 |m-M|^2 + mu0 |h-H|^2),  M = kappa0 H.
 */
inline double relative_entropy(const State& s, const LimitState& l, const Params& p) {
    const Grid& g = s.grid();
    std::vector<double> cell(g.cells());
    const double cm = p.mu0 / p.kappa0;
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double du = s.u.x[k] - l.U.x[k];
        const double dv = s.u.y[k] - l.U.y[k];
        const double dw = s.w.v[k] - l.W.v[k];
        const double dmx = s.m.x[k] - p.kappa0 * l.H.x[k];
        const double dmy = s.m.y[k] - p.kappa0 * l.H.y[k];
        const double dhx = s.h.x[k] - l.H.x[k];
        const double dhy = s.h.y[k] - l.H.y[k];
        cell[k] = 0.5 * (du * du + dv * dv + dw * dw + cm * (dmx * dmx + dmy * dmy) +
                         p.mu0 * (dhx * dhx + dhy * dhy));
    }
    return integrate(g, cell);
}

/// Same quadratic form written as E(U_tau) + E(U_0) - dE(U_0) . U_tau.
inline double relative_entropy_via_energy(const State& s, const LimitState& l, const Params& p) {
    const Grid& g = s.grid();
    const double e_tau = energy(s, p);
    const double e_lim = energy(l, p);
    std::vector<double> cell(g.cells());
    const double cm = p.mu0 / p.kappa0;
    for (std::size_t k = 0; k < cell.size(); ++k) {
        // dE(U_0) = (U, W, mu0/kappa0 M, mu0 H) with M = kappa0 H
        cell[k] = l.U.x[k] * s.u.x[k] + l.U.y[k] * s.u.y[k] + l.W.v[k] * s.w.v[k] +
                  cm * p.kappa0 * (l.H.x[k] * s.m.x[k] + l.H.y[k] * s.m.y[k]) +
                  p.mu0 * (l.H.x[k] * s.h.x[k] + l.H.y[k] * s.h.y[k]);
    }
    return e_tau + e_lim - integrate(g, cell);
}

/**
 * Relative dissipation
 *   nu|grad(u-U)|^2 + mu0/(2 kappa0 tau)|m - kappa0 h|^2 + c1|grad(w-W)|^2
 *   + nu_r|2(w-W) - curl(u-U)|^2           (c2 term vanishes in 2D).
 */
inline double relative_dissipation(const State& s, const LimitState& l, const Params& p) {
    const Grid& g = s.grid();
    const std::size_t n = g.cells();
    std::vector<double> dux(n), duy(n), dwx(n), dwy(n);
    VectorField du(g);
    ScalarField dw(g);
    for (std::size_t k = 0; k < n; ++k) {
        du.x[k] = s.u.x[k] - l.U.x[k];
        du.y[k] = s.u.y[k] - l.U.y[k];
        dw.v[k] = s.w.v[k] - l.W.v[k];
    }
    std::vector<double> ax(n), ay(n), bx(n), by(n), wx(n), wy(n);
    detail::ddx(g, du.x, ax);
    detail::ddy(g, du.x, ay);
    detail::ddx(g, du.y, bx);
    detail::ddy(g, du.y, by);
    detail::ddx(g, dw.v, wx);
    detail::ddy(g, dw.v, wy);
    const double crel = p.mu0 / (2.0 * p.kappa0 * p.tau_value());
    std::vector<double> cell(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double gradu2 = ax[k] * ax[k] + ay[k] * ay[k] + bx[k] * bx[k] + by[k] * by[k];
        const double gradw2 = wx[k] * wx[k] + wy[k] * wy[k];
        const double spin = 2.0 * dw.v[k] - (bx[k] - ay[k]);
        const double rx = s.m.x[k] - p.kappa0 * s.h.x[k];
        const double ry = s.m.y[k] - p.kappa0 * s.h.y[k];
        cell[k] = p.nu * gradu2 + p.c1 * gradw2 + p.nu_r * spin * spin +
                  crel * (rx * rx + ry * ry);
    }
    return integrate(g, cell);
}

/// Integrand of the magnetization L2 identity: (1/tau) int (|m|^2 - kappa0 h.m).
inline double m_l2_relaxation_rate(const State& s, const Params& p) {
    const Grid& g = s.grid();
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        const double m2 = s.m.x[k] * s.m.x[k] + s.m.y[k] * s.m.y[k];
        const double hm = s.h.x[k] * s.m.x[k] + s.h.y[k] * s.m.y[k];
        cell[k] = m2 - p.kappa0 * hm;
    }
    return integrate(g, cell) / p.tau_value();
}

inline double m_l2_half_norm(const State& s) {
    const Grid& g = s.grid();
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < cell.size(); ++k)
        cell[k] = 0.5 * (s.m.x[k] * s.m.x[k] + s.m.y[k] * s.m.y[k]);
    return integrate(g, cell);
}

/// Power fed by a time-dependent applied field: mu0 int dt(h_a) . h dx.
inline double applied_field_power(const Grid& g, const AppliedField& ha,
                                  const VectorField& h, double mu0) {
    if (ha.is_static()) return 0.0;
    std::vector<double> cell(g.cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double ax, ay;
            ha.dt_at(g.xc(i), g.yc(j), ax, ay);
            const std::size_t c = g.idx(i, j);
            cell[c] = ax * h.x[c] + ay * h.y[c];
        }
    return mu0 * integrate(g, cell);
}

/**
 * Left-hand side of the energy inequality per sample,
 *   E(t_n) + int_0^{t_n} D ds - E(0) - [mu0 int_0^{t_n} int dt(h_a) . h],
 * with the time integral of D accumulated by the trapezoid rule over the
 * sample times and the applied-field work read from the stored accumulator.
 */
inline std::vector<double> energy_residual(const DiagnosticsSeries& series) {
    std::vector<double> out(series.size(), 0.0);
    if (series.empty()) return out;
    const double e0 = series.front().energy;
    double int_d = 0.0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (k > 0) {
            const double dt = series[k].time - series[k - 1].time;
            int_d += 0.5 * dt * (series[k].dissipation + series[k - 1].dissipation);
        }
        out[k] = series[k].energy + int_d - e0 - series[k].ha_coupling_integral;
    }
    return out;
}

}  // namespace ferroflow
