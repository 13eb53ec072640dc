#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ferroflow {

/**
 * Uniform cell-centered rectangular grid on [0,lx] x [0,ly].
 * Cell (i,j) has center ((i+1/2)hx, (j+1/2)hy); storage is row-major j*nx+i.
 */
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;
    double hx = 0.0;
    double hy = 0.0;

    Grid() = default;

    Grid(int nx_, int ny_, double lx_ = 1.0, double ly_ = 1.0)
        : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
        if (nx < 8 || ny < 8) throw std::invalid_argument("Grid: nx, ny must be >= 8");
        if (lx <= 0.0 || ly <= 0.0) throw std::invalid_argument("Grid: lx, ly must be > 0");
        hx = lx / nx;
        hy = ly / ny;
    }

    [[nodiscard]] std::size_t cells() const { return std::size_t(nx) * std::size_t(ny); }
    [[nodiscard]] std::size_t idx(int i, int j) const { return std::size_t(j) * nx + i; }
    [[nodiscard]] double xc(int i) const { return (i + 0.5) * hx; }
    [[nodiscard]] double yc(int j) const { return (j + 0.5) * hy; }
    [[nodiscard]] double cell_area() const { return hx * hy; }

    [[nodiscard]] bool is_boundary(int i, int j) const {
        return i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
    }

    bool operator==(const Grid& o) const {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
};

/// Scalar field on the cell centers of a Grid.
struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.cells(), fill) {}

    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }

    template <class F>
    void fill_with(F&& f) {
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                v[grid.idx(i, j)] = f(grid.xc(i), grid.yc(j));
    }
};

/// Two-component (planar) vector field, components stored as separate arrays.
struct VectorField {
    Grid grid;
    std::vector<double> x;
    std::vector<double> y;

    VectorField() = default;
    explicit VectorField(const Grid& g, double fx = 0.0, double fy = 0.0)
        : grid(g), x(g.cells(), fx), y(g.cells(), fy) {}

    template <class FX, class FY>
    void fill_with(FX&& fx, FY&& fy) {
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                const std::size_t c = grid.idx(i, j);
                x[c] = fx(grid.xc(i), grid.yc(j));
                y[c] = fy(grid.xc(i), grid.yc(j));
            }
    }
};

/// Pairwise (cascade) summation: deterministic and O(eps log n) accurate.
inline double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += a[k];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& a) {
    return pairwise_sum(a.data(), a.size());
}

/// Integral over the domain (midpoint quadrature) of a cell-wise integrand.
inline double integrate(const Grid& g, const std::vector<double>& cellwise) {
    return pairwise_sum(cellwise) * g.cell_area();
}

inline double mean(const Grid& g, const std::vector<double>& f) {
    return pairwise_sum(f) / double(g.cells());
}

inline void subtract_mean(const Grid& g, std::vector<double>& f) {
    const double m = mean(g, f);
    for (double& x : f) x -= m;
}

inline double l2_norm(const Grid& g, const std::vector<double>& f) {
    std::vector<double> sq(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) sq[k] = f[k] * f[k];
    return std::sqrt(integrate(g, sq));
}

inline double l2_norm(const ScalarField& f) { return l2_norm(f.grid, f.v); }

inline double l2_norm(const VectorField& f) {
    std::vector<double> sq(f.x.size());
    for (std::size_t k = 0; k < f.x.size(); ++k) sq[k] = f.x[k] * f.x[k] + f.y[k] * f.y[k];
    return std::sqrt(integrate(f.grid, sq));
}

inline double max_abs(const std::vector<double>& f) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    return m;
}

inline bool all_finite(const std::vector<double>& f) {
    for (double x : f)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Zero out the outermost cell ring (Dirichlet mask for u and w).
inline void mask_boundary(const Grid& g, std::vector<double>& f) {
    for (int i = 0; i < g.nx; ++i) {
        f[g.idx(i, 0)] = 0.0;
        f[g.idx(i, g.ny - 1)] = 0.0;
    }
    for (int j = 0; j < g.ny; ++j) {
        f[g.idx(0, j)] = 0.0;
        f[g.idx(g.nx - 1, j)] = 0.0;
    }
}

inline void mask_boundary(VectorField& f) {
    mask_boundary(f.grid, f.x);
    mask_boundary(f.grid, f.y);
}

inline void mask_boundary(ScalarField& f) { mask_boundary(f.grid, f.v); }

}  // namespace ferroflow
