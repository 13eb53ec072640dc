#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

#include "ferroflow/fields.hpp"
#include "ferroflow/operators.hpp"
#include "ferroflow/params.hpp"
#include "ferroflow/poisson.hpp"

namespace ferroflow {

namespace detail {

/// RHS of the potential problem: finite-volume div(m) plus the Neumann flux
/// data (h_a - m).n through boundary faces.  Face values of m are centered
/// averages inside and linear extrapolations at the boundary, so the discrete
/// compatibility condition reduces to the boundary sum of h_a . n, which
/// vanishes to roundoff for the harmonic applied-field family.
inline std::vector<double> potential_rhs(const Grid& g, const VectorField* m,
                                         const std::function<void(double, double, double&, double&)>& ha) {
    const int nx = g.nx, ny = g.ny;
    std::vector<double> b(g.cells(), 0.0);
    // x-faces
    for (int j = 0; j < ny; ++j) {
        for (int f = 0; f <= nx; ++f) {
            double mxf = 0.0;
            if (m) {
                if (f == 0)
                    mxf = 1.5 * m->x[g.idx(0, j)] - 0.5 * m->x[g.idx(1, j)];
                else if (f == nx)
                    mxf = 1.5 * m->x[g.idx(nx - 1, j)] - 0.5 * m->x[g.idx(nx - 2, j)];
                else
                    mxf = 0.5 * (m->x[g.idx(f - 1, j)] + m->x[g.idx(f, j)]);
            }
            if (f > 0) b[g.idx(f - 1, j)] += mxf / g.hx;   // east face of cell f-1
            if (f < nx) b[g.idx(f, j)] -= mxf / g.hx;      // west face of cell f
        }
        // boundary flux data g_n = (h_a - m).n
        double hax, hay;
        double mxf = m ? 1.5 * m->x[g.idx(0, j)] - 0.5 * m->x[g.idx(1, j)] : 0.0;
        ha(0.0, g.yc(j), hax, hay);
        b[g.idx(0, j)] += -(hax - mxf) / g.hx;
        mxf = m ? 1.5 * m->x[g.idx(nx - 1, j)] - 0.5 * m->x[g.idx(nx - 2, j)] : 0.0;
        ha(g.lx, g.yc(j), hax, hay);
        b[g.idx(nx - 1, j)] += (hax - mxf) / g.hx;
    }
    // y-faces
    for (int i = 0; i < nx; ++i) {
        for (int f = 0; f <= ny; ++f) {
            double myf = 0.0;
            if (m) {
                if (f == 0)
                    myf = 1.5 * m->y[g.idx(i, 0)] - 0.5 * m->y[g.idx(i, 1)];
                else if (f == ny)
                    myf = 1.5 * m->y[g.idx(i, ny - 1)] - 0.5 * m->y[g.idx(i, ny - 2)];
                else
                    myf = 0.5 * (m->y[g.idx(i, f - 1)] + m->y[g.idx(i, f)]);
            }
            if (f > 0) b[g.idx(i, f - 1)] += myf / g.hy;
            if (f < ny) b[g.idx(i, f)] -= myf / g.hy;
        }
        double hax, hay;
        double myf = m ? 1.5 * m->y[g.idx(i, 0)] - 0.5 * m->y[g.idx(i, 1)] : 0.0;
        ha(g.xc(i), 0.0, hax, hay);
        b[g.idx(i, 0)] += -(hay - myf) / g.hy;
        myf = m ? 1.5 * m->y[g.idx(i, ny - 1)] - 0.5 * m->y[g.idx(i, ny - 2)] : 0.0;
        ha(g.xc(i), g.ly, hax, hay);
        b[g.idx(i, ny - 1)] += (hay - myf) / g.hy;
    }
    return b;
}

}  // namespace detail

struct PotentialSolution {
    ScalarField phi;
    VectorField h;
    PoissonSolveReport report;
};

namespace detail {

inline PotentialSolution solve_potential_impl(
    const Grid& g, const VectorField* m,
    const std::function<void(double, double, double&, double&)>& ha,
    const NeumannPoissonSolver& solver) {
    std::vector<double> b = potential_rhs(g, m, ha);
    const double defect = std::abs(pairwise_sum(b) * g.cell_area());
    double l1 = 0.0;
    for (double v : b) l1 += std::abs(v);
    l1 *= g.cell_area();
    if (defect > 1e2 * solver.tolerance() * std::max(1.0, l1)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", defect);
        throw std::runtime_error(std::string("incompatible Neumann data: defect ") + buf);
    }
    PotentialSolution out;
    out.phi = solver.solve(b, out.report);
    out.h = grad(out.phi);
    return out;
}

}  // namespace detail

/**
 * Solves the magnetostatic Neumann problem
 *   -Laplace(phi) = div m,   dphi/dn = (h_a - m).n,   mean(phi) = 0,
 * and returns h = grad(phi).  `ha` evaluates the applied field at a point.
 * Throws if the compatibility defect exceeds 100 * tol or CG fails.
 */
inline PotentialSolution solve_potential(
    const VectorField& m, const std::function<void(double, double, double&, double&)>& ha,
    const NeumannPoissonSolver& solver) {
    return detail::solve_potential_impl(m.grid, &m, ha, solver);
}

inline PotentialSolution solve_potential(const VectorField& m, const AppliedField& ha, double t,
                                         const NeumannPoissonSolver& solver) {
    return solve_potential(
        m, [&](double x, double y, double& hx, double& hy) { ha.at(x, y, t, hx, hy); }, solver);
}

/**
 * Potential of the quasi-equilibrium system:
 *   Laplace(Phi) = 0,   dPhi/dn = h_a.n / (1 + kappa0),   mean(Phi) = 0,
 * with H = grad(Phi).  Decoupled from the flow, so it is solved once for
 * static applied fields.
 */
inline PotentialSolution solve_limit_potential(const Grid& g, const AppliedField& ha,
                                               double kappa0, double t,
                                               const NeumannPoissonSolver& solver) {
    const double s = 1.0 / (1.0 + kappa0);
    return detail::solve_potential_impl(
        g, nullptr,
        [&](double x, double y, double& hx, double& hy) {
            ha.at(x, y, t, hx, hy);
            hx *= s;
            hy *= s;
        },
        solver);
}

}  // namespace ferroflow
