#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ferroflow/fields.hpp"
#include "ferroflow/separable.hpp"

namespace ferroflow {

struct ProjectionResult {
    VectorField u;       ///< divergence-free velocity
    ScalarField q;       ///< potential of the removed gradient part (zero-mean)
    double residual = 0; ///< achieved ||div u|| / ||u_star|| on interior cells
};

/**
 * Helmholtz projection on the cell-centered grid with wall-pinned velocity.
 *
 * The discrete divergence D is the centered stencil evaluated at interior
 * cells (boundary-cell values enter as data; they are zero for masked fields).
 * The correction subtracted from u* is the adjoint gradient D^T q supported on
 * interior cells, so the Dirichlet mask is preserved, and q solves
 *
 *     D D^T q = D u*.
 *
 * D D^T is a Kronecker sum of 1D Gram matrices and is solved directly by
 * eigendecomposition, so for masked inputs the interior divergence of the
 * result is zero to roundoff and the projection is exactly idempotent.
 */
class Projection {
public:
    explicit Projection(const Grid& g, double tol = 1e-10)
        : grid_(g), mx_(g.nx - 2), my_(g.ny - 2), tol_(tol) {
        solver_ = SeparableSolver(gram_1d(mx_, g.hx), gram_1d(my_, g.hy));
        null_cut_ = 1e-12 * solver_.eig_scale();
    }

    /// Centered divergence of u at the interior cells ((nx-2) x (ny-2) array).
    [[nodiscard]] std::vector<double> interior_divergence(const VectorField& u) const {
        const Grid& g = grid_;
        std::vector<double> b(std::size_t(mx_) * my_);
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                const std::size_t c = g.idx(i, j);
                b[std::size_t(j - 1) * mx_ + (i - 1)] =
                    (u.x[c + 1] - u.x[c - 1]) / (2.0 * g.hx) +
                    (u.y[c + g.nx] - u.y[c - g.nx]) / (2.0 * g.hy);
            }
        return b;
    }

    /// Adjoint gradient D^T q of an interior-cell scalar, as a full-grid field
    /// supported on interior cells.  This is the discrete gradient the
    /// projection annihilates exactly.
    [[nodiscard]] VectorField adjoint_gradient(const std::vector<double>& q) const {
        const Grid& g = grid_;
        VectorField out(g);
        auto qa = [&](int ii, int jj) -> double {
            if (ii < 0 || jj < 0 || ii >= mx_ || jj >= my_) return 0.0;
            return q[std::size_t(jj) * mx_ + ii];
        };
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                const std::size_t c = g.idx(i, j);
                // transpose of the centered difference with zero padding
                out.x[c] = (qa(i - 2, j - 1) - qa(i, j - 1)) / (2.0 * g.hx);
                out.y[c] = (qa(i - 1, j - 2) - qa(i - 1, j)) / (2.0 * g.hy);
            }
        return out;
    }

    /**
     * Projects u* onto the discretely divergence-free space:
     * u = u* - D^T q.  Throws if the achieved interior divergence exceeds
     * tol * ||u*|| (possible only when boundary cells of u* are nonzero,
     * which makes part of the divergence uncorrectable).
     */
    ProjectionResult project(const VectorField& u_star) const {
        if (!all_finite(u_star.x) || !all_finite(u_star.y))
            throw std::invalid_argument("project: u_star has non-finite entries");
        const Grid& g = grid_;
        std::vector<double> b = interior_divergence(u_star);
        std::vector<double> q;
        solver_.solve(b, q, 0.0, null_cut_);

        ProjectionResult out;
        out.u = u_star;
        VectorField corr = adjoint_gradient(q);
        for (std::size_t k = 0; k < out.u.x.size(); ++k) {
            out.u.x[k] -= corr.x[k];
            out.u.y[k] -= corr.y[k];
        }
        // achieved residual, measured with the same interior divergence
        std::vector<double> d = interior_divergence(out.u);
        double dn = 0.0, un = 0.0;
        for (double v : d) dn += v * v;
        for (std::size_t k = 0; k < u_star.x.size(); ++k)
            un += u_star.x[k] * u_star.x[k] + u_star.y[k] * u_star.y[k];
        dn = std::sqrt(dn * g.cell_area());
        un = std::sqrt(un * g.cell_area());
        out.residual = (un > 0.0) ? dn / un : dn;
        if (un > 0.0 && dn > tol_ * un)
            throw std::runtime_error("projection residual above tolerance: " +
                                     std::to_string(out.residual));

        out.q = ScalarField(g);
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i)
                out.q(i, j) = q[std::size_t(j - 1) * mx_ + (i - 1)];
        subtract_mean(g, out.q.v);
        return out;
    }

    [[nodiscard]] double tolerance() const { return tol_; }
    [[nodiscard]] const Grid& grid() const { return grid_; }

private:
    /// Gram matrix d d^T of the 1D centered derivative with zero padding.
    static SymMatrix gram_1d(int m, double h) {
        // d[i, i+1] = 1/(2h), d[i, i-1] = -1/(2h) inside the m interior cells
        SymMatrix G(m);
        const double c = 1.0 / (2.0 * h);
        std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
        for (int i = 0; i < m; ++i) {
            if (i + 1 < m) d[i][i + 1] = c;
            if (i - 1 >= 0) d[i][i - 1] = -c;
        }
        for (int r = 0; r < m; ++r)
            for (int s = 0; s < m; ++s) {
                double acc = 0.0;
                for (int k = 0; k < m; ++k) acc += d[r][k] * d[s][k];
                G(r, s) = acc;
            }
        return G;
    }

    Grid grid_;
    int mx_, my_;
    double tol_;
    double null_cut_ = 0.0;
    SeparableSolver solver_;
};

}  // namespace ferroflow
