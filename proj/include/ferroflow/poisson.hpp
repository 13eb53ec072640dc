#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferroflow/fields.hpp"

namespace ferroflow {

struct PoissonSolveReport {
    int iterations = 0;
    double final_residual_norm = 0.0;  ///< relative L2 residual
    double compatibility_defect = 0.0; ///< | sum of RHS * cell area |
    bool converged = false;
};

/**
 * Finite-volume 5-point Laplacian with Neumann (flux) boundary data on the
 * cell-centered grid: rows of -Laplace(phi); fluxes through boundary faces are
 * data and belong to the right-hand side.  Singular with nullspace = constants;
 * solved by CG in the zero-mean subspace with Jacobi preconditioning and mean
 * deflation each iteration.
 */
class NeumannPoissonSolver {
public:
    explicit NeumannPoissonSolver(const Grid& g, double tol = 1e-10, int max_iter = 0)
        : grid_(g), tol_(tol), max_iter_(max_iter > 0 ? max_iter : 40 * (g.nx + g.ny)) {
        diag_.assign(g.cells(), 0.0);
        const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                double d = 0.0;
                if (i > 0) d += cx;
                if (i < g.nx - 1) d += cx;
                if (j > 0) d += cy;
                if (j < g.ny - 1) d += cy;
                diag_[g.idx(i, j)] = d;
            }
    }

    void apply(const std::vector<double>& phi, std::vector<double>& out) const {
        const Grid& g = grid_;
        const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t c = g.idx(i, j);
                double s = diag_[c] * phi[c];
                if (i > 0) s -= cx * phi[c - 1];
                if (i < g.nx - 1) s -= cx * phi[c + 1];
                if (j > 0) s -= cy * phi[c - g.nx];
                if (j < g.ny - 1) s -= cy * phi[c + g.nx];
                out[c] = s;
            }
    }

    /// Solves A phi = b for zero-mean phi.  Throws on non-convergence.
    ScalarField solve(const std::vector<double>& b, PoissonSolveReport& report) const {
        const Grid& g = grid_;
        const std::size_t n = g.cells();
        report = PoissonSolveReport{};
        report.compatibility_defect = std::abs(pairwise_sum(b) * g.cell_area());

        std::vector<double> rhs = b;
        subtract_mean(g, rhs);
        const double bnorm = l2_norm(g, rhs);
        ScalarField phi(g);
        if (bnorm == 0.0) {
            report.converged = true;
            return phi;
        }

        std::vector<double> r = rhs, z(n), p(n), Ap(n);
        auto precond = [&](const std::vector<double>& in, std::vector<double>& out_) {
            for (std::size_t k = 0; k < n; ++k) out_[k] = in[k] / diag_[k];
        };
        precond(r, z);
        subtract_mean(g, z);
        p = z;
        double rz = 0.0;
        {
            std::vector<double> prod(n);
            for (std::size_t k = 0; k < n; ++k) prod[k] = r[k] * z[k];
            rz = pairwise_sum(prod);
        }
        double rnorm = l2_norm(g, r);
        int it = 0;
        std::vector<double> prod(n);
        while (rnorm > tol_ * bnorm && it < max_iter_) {
            apply(p, Ap);
            for (std::size_t k = 0; k < n; ++k) prod[k] = p[k] * Ap[k];
            const double pAp = pairwise_sum(prod);
            if (pAp <= 0.0) break;  // numerically null direction
            const double alpha = rz / pAp;
            for (std::size_t k = 0; k < n; ++k) phi.v[k] += alpha * p[k];
            for (std::size_t k = 0; k < n; ++k) r[k] -= alpha * Ap[k];
            subtract_mean(g, r);
            subtract_mean(g, phi.v);
            precond(r, z);
            subtract_mean(g, z);
            for (std::size_t k = 0; k < n; ++k) prod[k] = r[k] * z[k];
            const double rz_new = pairwise_sum(prod);
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
            rnorm = l2_norm(g, r);
            ++it;
        }
        report.iterations = it;
        report.final_residual_norm = rnorm / bnorm;
        report.converged = rnorm <= tol_ * bnorm;
        if (!report.converged)
            throw std::runtime_error("Neumann Poisson solve did not converge: residual " +
                                     std::to_string(report.final_residual_norm) + " after " +
                                     std::to_string(it) + " iterations");
        subtract_mean(g, phi.v);
        return phi;
    }

    [[nodiscard]] double tolerance() const { return tol_; }

private:
    Grid grid_;
    double tol_;
    int max_iter_;
    std::vector<double> diag_;
};

}  // namespace ferroflow
