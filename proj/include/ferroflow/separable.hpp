#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ferroflow/fields.hpp"

namespace ferroflow {

/// Dense symmetric n x n matrix, row-major.
struct SymMatrix {
    int n = 0;
    std::vector<double> a;

    SymMatrix() = default;
    explicit SymMatrix(int n_) : n(n_), a(std::size_t(n_) * n_, 0.0) {}
    double& operator()(int r, int c) { return a[std::size_t(r) * n + c]; }
    double operator()(int r, int c) const { return a[std::size_t(r) * n + c]; }
};

/**
 * Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
 * Returns orthonormal eigenvectors as columns of V.  Adequate for the 1D
 * operator matrices used here (n up to a few hundred).
 */
inline void jacobi_eigh(SymMatrix A, std::vector<double>& eigvals, SymMatrix& V) {
    const int n = A.n;
    V = SymMatrix(n);
    for (int i = 0; i < n; ++i) V(i, i) = 1.0;
    double off = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = r + 1; c < n; ++c) off += A(r, c) * A(r, c);
    double norm = 0.0;
    for (double x : A.a) norm = std::max(norm, std::abs(x));
    const double tol = (norm > 0.0 ? norm : 1.0) * 1e-15;

    for (int sweep = 0; sweep < 100 && off > tol * tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= tol * 1e-3) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        off = 0.0;
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c) off += A(r, c) * A(r, c);
    }
    eigvals.resize(n);
    for (int i = 0; i < n; ++i) eigvals[i] = A(i, i);
}

/**
 * Direct solver for Kronecker-sum systems (Ax (+) Ay + c I) X = B on an
 * ny x nx row-major array, with Ax acting along i (columns) and Ay along j.
 * Ax, Ay must be symmetric.  Eigen-pairs with |lambda_x + lambda_y + c| below
 * null_cut are treated as exact null directions (minimal-norm pseudo-solve).
 */
class SeparableSolver {
public:
    SeparableSolver() = default;

    SeparableSolver(const SymMatrix& Ax, const SymMatrix& Ay) : nx_(Ax.n), ny_(Ay.n) {
        jacobi_eigh(Ax, lam_x_, Vx_);
        jacobi_eigh(Ay, lam_y_, Vy_);
        double lmax = 0.0;
        for (double l : lam_x_) lmax = std::max(lmax, std::abs(l));
        for (double l : lam_y_) lmax = std::max(lmax, std::abs(l));
        scale_ = lmax;
    }

    [[nodiscard]] double eig_scale() const { return scale_; }

    /// Solve into `x` (may alias b).  Layout: b[j*nx + i].
    void solve(const std::vector<double>& b, std::vector<double>& x, double shift = 0.0,
               double null_cut = 0.0) const {
        if (int(b.size()) != nx_ * ny_) throw std::invalid_argument("SeparableSolver: size mismatch");
        std::vector<double> t1(b.size()), t2(b.size());
        apply_x_t(b, t1);        // t1 = B Vx
        apply_y_t(t1, t2);       // t2 = Vy^T B Vx
        for (int j = 0; j < ny_; ++j)
            for (int i = 0; i < nx_; ++i) {
                const double den = lam_x_[i] + lam_y_[j] + shift;
                double& e = t2[std::size_t(j) * nx_ + i];
                e = (std::abs(den) <= null_cut) ? 0.0 : e / den;
            }
        apply_x(t2, t1);         // t1 = T Vx^T
        x.resize(b.size());
        apply_y(t1, x);          // x = Vy T Vx^T
    }

private:
    // out[j,i] = sum_k V[k,i] in[j,k]   (right-multiply by Vx)
    void apply_x_t(const std::vector<double>& in, std::vector<double>& out) const {
        for (int j = 0; j < ny_; ++j) {
            const double* r = &in[std::size_t(j) * nx_];
            double* o = &out[std::size_t(j) * nx_];
            for (int i = 0; i < nx_; ++i) o[i] = 0.0;
            for (int k = 0; k < nx_; ++k) {
                const double v = r[k];
                const double* Vrow = &Vx_.a[std::size_t(k) * nx_];
                for (int i = 0; i < nx_; ++i) o[i] += Vrow[i] * v;
            }
        }
    }

    // out[j,i] = sum_k V[i,k] in[j,k]   (right-multiply by Vx^T)
    void apply_x(const std::vector<double>& in, std::vector<double>& out) const {
        for (int j = 0; j < ny_; ++j) {
            const double* r = &in[std::size_t(j) * nx_];
            double* o = &out[std::size_t(j) * nx_];
            for (int i = 0; i < nx_; ++i) {
                const double* Vrow = &Vx_.a[std::size_t(i) * nx_];
                double s = 0.0;
                for (int k = 0; k < nx_; ++k) s += Vrow[k] * r[k];
                o[i] = s;
            }
        }
    }

    // out[j,i] = sum_k V[k,j] in[k,i]   (left-multiply by Vy^T)
    void apply_y_t(const std::vector<double>& in, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (int k = 0; k < ny_; ++k) {
            const double* r = &in[std::size_t(k) * nx_];
            const double* Vrow = &Vy_.a[std::size_t(k) * ny_];
            for (int j = 0; j < ny_; ++j) {
                const double v = Vrow[j];
                double* o = &out[std::size_t(j) * nx_];
                for (int i = 0; i < nx_; ++i) o[i] += v * r[i];
            }
        }
    }

    // out[j,i] = sum_k V[j,k] in[k,i]   (left-multiply by Vy)
    void apply_y(const std::vector<double>& in, std::vector<double>& out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (int k = 0; k < ny_; ++k) {
            const double* r = &in[std::size_t(k) * nx_];
            for (int j = 0; j < ny_; ++j) {
                const double v = Vy_.a[std::size_t(j) * ny_ + k];
                double* o = &out[std::size_t(j) * nx_];
                for (int i = 0; i < nx_; ++i) o[i] += v * r[i];
            }
        }
    }

    int nx_ = 0, ny_ = 0;
    std::vector<double> lam_x_, lam_y_;
    SymMatrix Vx_, Vy_;
    double scale_ = 0.0;
};

/// 1D positive second-difference matrix (-d^2/dx^2) with zero Dirichlet data
/// just outside the n cells.
inline SymMatrix second_difference_dirichlet(int n, double h) {
    SymMatrix A(n);
    const double c = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        A(i, i) = 2.0 * c;
        if (i > 0) A(i, i - 1) = -c;
        if (i + 1 < n) A(i, i + 1) = -c;
    }
    return A;
}

}  // namespace ferroflow
