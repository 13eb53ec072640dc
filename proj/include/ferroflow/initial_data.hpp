#pragma once

#include <cmath>
#include <random>

#include "ferroflow/fields.hpp"
#include "ferroflow/state.hpp"

namespace ferroflow {

/// Smooth initial data for the runs and the relaxation sweep: a vortex pair
/// from a stream function vanishing (with its gradient) on the walls, a spin
/// bump, and a seeded smooth unit-L2 magnetization perturbation.
struct InitialData {
    double psi_amp = 0.12;  ///< stream-function amplitude (vortex pair)
    double w_amp = 0.3;     ///< spin bump amplitude
    unsigned seed = 12345;  ///< perturbation coefficients

    [[nodiscard]] VectorField velocity(const Grid& g) const {
        const double pi = std::acos(-1.0);
        // u = curl(psi) evaluated analytically; psi = A sin^2(pi x/lx) sin^2(pi y/ly) sin(2 pi y/ly)
        VectorField u(g);
        const double kx = pi / g.lx, ky = pi / g.ly;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double x = g.xc(i), y = g.yc(j);
                const double sx = std::sin(kx * x), sy = std::sin(ky * y);
                const double sx2 = sx * sx, sy2 = sy * sy;
                const double s2y = std::sin(2.0 * ky * y);
                const double dpsi_dy = psi_amp * sx2 *
                                       (2.0 * ky * sy * std::cos(ky * y) * s2y +
                                        sy2 * 2.0 * ky * std::cos(2.0 * ky * y));
                const double dpsi_dx = psi_amp * 2.0 * kx * sx * std::cos(kx * x) * sy2 * s2y;
                const std::size_t c = g.idx(i, j);
                u.x[c] = dpsi_dy;
                u.y[c] = -dpsi_dx;
            }
        return u;
    }

    [[nodiscard]] ScalarField spin(const Grid& g) const {
        const double pi = std::acos(-1.0);
        ScalarField w(g);
        const double kx = pi / g.lx, ky = pi / g.ly;
        w.fill_with([&](double x, double y) {
            const double sx = std::sin(kx * x), sy = std::sin(ky * y);
            return w_amp * sx * sx * sy * sy;
        });
        return w;
    }

    /// Smooth perturbation with unit L2 norm, deterministic for a given seed.
    [[nodiscard]] VectorField perturbation(const Grid& g) const {
        const double pi = std::acos(-1.0);
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> coef(-1.0, 1.0);
        double ax[3], ay[3];
        for (double& c : ax) c = coef(rng);
        for (double& c : ay) c = coef(rng);
        VectorField p(g);
        const double kx = pi / g.lx, ky = pi / g.ly;
        p.fill_with(
            [&](double x, double y) {
                return ax[0] * std::sin(2 * kx * x) * std::sin(ky * y) +
                       ax[1] * std::sin(kx * x) * std::sin(ky * y) +
                       ax[2] * std::sin(kx * x) * std::sin(2 * ky * y);
            },
            [&](double x, double y) {
                return ay[0] * std::sin(kx * x) * std::sin(2 * ky * y) +
                       ay[1] * std::sin(2 * kx * x) * std::sin(2 * ky * y) +
                       ay[2] * std::sin(kx * x) * std::sin(ky * y);
            });
        const double nrm = l2_norm(p);
        for (std::size_t k = 0; k < p.x.size(); ++k) {
            p.x[k] /= nrm;
            p.y[k] /= nrm;
        }
        return p;
    }

    /// Well-prepared magnetization m0 = kappa0 H0 + dev * p with ||p||_L2 = 1.
    [[nodiscard]] VectorField magnetization(const Grid& g, const VectorField& h_limit,
                                            double kappa0, double dev) const {
        VectorField m = perturbation(g);
        for (std::size_t k = 0; k < m.x.size(); ++k) {
            m.x[k] = kappa0 * h_limit.x[k] + dev * m.x[k];
            m.y[k] = kappa0 * h_limit.y[k] + dev * m.y[k];
        }
        return m;
    }
};

}  // namespace ferroflow
