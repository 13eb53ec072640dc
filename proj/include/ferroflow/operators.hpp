#pragma once

#include "ferroflow/fields.hpp"

namespace ferroflow {

// Discrete differential operators on the cell-centered grid: second-order
// centered differences in the interior, one-sided second-order at the two
// extreme cells of the differencing direction.  Exact on quadratics.

namespace detail {

inline void ddx(const Grid& g, const std::vector<double>& f, std::vector<double>& out) {
    const int nx = g.nx, ny = g.ny;
    const double c = 1.0 / (2.0 * g.hx);
    for (int j = 0; j < ny; ++j) {
        const std::size_t r = g.idx(0, j);
        out[r] = c * (-3.0 * f[r] + 4.0 * f[r + 1] - f[r + 2]);
        for (int i = 1; i < nx - 1; ++i) out[r + i] = c * (f[r + i + 1] - f[r + i - 1]);
        out[r + nx - 1] = c * (3.0 * f[r + nx - 1] - 4.0 * f[r + nx - 2] + f[r + nx - 3]);
    }
}

inline void ddy(const Grid& g, const std::vector<double>& f, std::vector<double>& out) {
    const int nx = g.nx, ny = g.ny;
    const double c = 1.0 / (2.0 * g.hy);
    for (int i = 0; i < nx; ++i) {
        out[g.idx(i, 0)] = c * (-3.0 * f[g.idx(i, 0)] + 4.0 * f[g.idx(i, 1)] - f[g.idx(i, 2)]);
        out[g.idx(i, ny - 1)] =
            c * (3.0 * f[g.idx(i, ny - 1)] - 4.0 * f[g.idx(i, ny - 2)] + f[g.idx(i, ny - 3)]);
    }
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 0; i < nx; ++i)
            out[g.idx(i, j)] = c * (f[g.idx(i, j + 1)] - f[g.idx(i, j - 1)]);
}

}  // namespace detail

inline ScalarField ddx(const ScalarField& s) {
    ScalarField out(s.grid);
    detail::ddx(s.grid, s.v, out.v);
    return out;
}

inline ScalarField ddy(const ScalarField& s) {
    ScalarField out(s.grid);
    detail::ddy(s.grid, s.v, out.v);
    return out;
}

inline VectorField grad(const ScalarField& s) {
    VectorField out(s.grid);
    detail::ddx(s.grid, s.v, out.x);
    detail::ddy(s.grid, s.v, out.y);
    return out;
}

inline ScalarField div(const VectorField& v) {
    ScalarField out(v.grid);
    std::vector<double> tmp(v.grid.cells());
    detail::ddx(v.grid, v.x, out.v);
    detail::ddy(v.grid, v.y, tmp);
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] += tmp[k];
    return out;
}

/// Scalar curl of a planar field: dv_y/dx - dv_x/dy.
inline ScalarField curl_vec(const VectorField& v) {
    ScalarField out(v.grid);
    std::vector<double> tmp(v.grid.cells());
    detail::ddx(v.grid, v.y, out.v);
    detail::ddy(v.grid, v.x, tmp);
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] -= tmp[k];
    return out;
}

/// Planar curl of out-of-plane scalar spin: (dw/dy, -dw/dx).
inline VectorField curl_scalar(const ScalarField& w) {
    VectorField out(w.grid);
    detail::ddy(w.grid, w.v, out.x);
    detail::ddx(w.grid, w.v, out.y);
    for (std::size_t k = 0; k < out.y.size(); ++k) out.y[k] = -out.y[k];
    return out;
}

/// Boundary closure of the 5-point Laplacian, chosen per the field's condition.
enum class LaplacianClosure {
    Dirichlet,  ///< ghost = -f (zero at the wall face); for u and w
    Neumann,    ///< ghost = f (zero normal derivative); for phi and p
    Natural     ///< ghost linearly extrapolated; for m (zero curvature at the wall)
};

inline ScalarField laplacian(const ScalarField& f, LaplacianClosure bc) {
    const Grid& g = f.grid;
    ScalarField out(g);
    const double cx = 1.0 / (g.hx * g.hx), cy = 1.0 / (g.hy * g.hy);
    auto ghost = [bc](double inner, double next) {
        switch (bc) {
            case LaplacianClosure::Dirichlet: return -inner;
            case LaplacianClosure::Neumann: return inner;
            case LaplacianClosure::Natural: return 2.0 * inner - next;
        }
        return 0.0;
    };
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double c = f(i, j);
            const double fw = (i > 0) ? f(i - 1, j) : ghost(c, f(i + 1, j));
            const double fe = (i < g.nx - 1) ? f(i + 1, j) : ghost(c, f(i - 1, j));
            const double fs = (j > 0) ? f(i, j - 1) : ghost(c, f(i, j + 1));
            const double fn = (j < g.ny - 1) ? f(i, j + 1) : ghost(c, f(i, j - 1));
            out(i, j) = cx * (fe - 2.0 * c + fw) + cy * (fn - 2.0 * c + fs);
        }
    return out;
}

enum class AdvectionScheme { Upwind, Centered };

/// (u . grad) f with first-order upwinding; one-sided fallback at the rim.
inline void advect_upwind(const Grid& g, const std::vector<double>& ux,
                          const std::vector<double>& uy, const std::vector<double>& f,
                          std::vector<double>& out) {
    const int nx = g.nx, ny = g.ny;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = g.idx(i, j);
            const double a = ux[c], b = uy[c];
            double dfx, dfy;
            if (a >= 0.0)
                dfx = (i > 0) ? (f[c] - f[c - 1]) / g.hx : (f[c + 1] - f[c]) / g.hx;
            else
                dfx = (i < nx - 1) ? (f[c + 1] - f[c]) / g.hx : (f[c] - f[c - 1]) / g.hx;
            if (b >= 0.0)
                dfy = (j > 0) ? (f[c] - f[c - nx]) / g.hy : (f[c + nx] - f[c]) / g.hy;
            else
                dfy = (j < ny - 1) ? (f[c + nx] - f[c]) / g.hy : (f[c] - f[c - nx]) / g.hy;
            out[c] = a * dfx + b * dfy;
        }
}

inline void advect_centered(const Grid& g, const std::vector<double>& ux,
                            const std::vector<double>& uy, const std::vector<double>& f,
                            std::vector<double>& out) {
    std::vector<double> dfx(g.cells()), dfy(g.cells());
    detail::ddx(g, f, dfx);
    detail::ddy(g, f, dfy);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = ux[k] * dfx[k] + uy[k] * dfy[k];
}

inline ScalarField advect(const VectorField& u, const ScalarField& f, AdvectionScheme scheme) {
    ScalarField out(f.grid);
    if (scheme == AdvectionScheme::Upwind)
        advect_upwind(f.grid, u.x, u.y, f.v, out.v);
    else
        advect_centered(f.grid, u.x, u.y, f.v, out.v);
    return out;
}

inline VectorField advect(const VectorField& u, const VectorField& f, AdvectionScheme scheme) {
    VectorField out(f.grid);
    if (scheme == AdvectionScheme::Upwind) {
        advect_upwind(f.grid, u.x, u.y, f.x, out.x);
        advect_upwind(f.grid, u.x, u.y, f.y, out.y);
    } else {
        advect_centered(f.grid, u.x, u.y, f.x, out.x);
        advect_centered(f.grid, u.x, u.y, f.y, out.y);
    }
    return out;
}

}  // namespace ferroflow
