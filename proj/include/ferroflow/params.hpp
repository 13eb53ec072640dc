#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "ferroflow/fields.hpp"

namespace ferroflow {

/**
 * Applied magnetizing field h_a: a constant plus a combination of gradients of
 * harmonic polynomials (degree <= 3, centered on the domain), optionally scaled
 * by a linear time ramp (1 + ramp_rate * t).  This family is divergence- and
 * curl-free exactly, so the Neumann compatibility condition holds to roundoff.
 */
struct AppliedField {
    double cx = 0.0;          ///< constant x-component
    double cy = 0.0;          ///< constant y-component
    double g2a = 0.0;         ///< coefficient of grad(x^2 - y^2) = (2x, -2y)
    double g2b = 0.0;         ///< coefficient of grad(xy) = (y, x)
    double g3a = 0.0;         ///< coefficient of grad(x^3 - 3xy^2) = (3x^2-3y^2, -6xy)
    double g3b = 0.0;         ///< coefficient of grad(3x^2y - y^3) = (6xy, 3x^2-3y^2)
    double ramp_rate = 0.0;   ///< h_a(t) = (1 + ramp_rate * t) * h_a(0)
    double x0 = 0.5;          ///< polynomial center
    double y0 = 0.5;

    [[nodiscard]] bool is_static() const { return ramp_rate == 0.0; }

    [[nodiscard]] bool is_zero() const {
        return cx == 0.0 && cy == 0.0 && g2a == 0.0 && g2b == 0.0 && g3a == 0.0 && g3b == 0.0;
    }

    void base_at(double x, double y, double& hx, double& hy) const {
        const double X = x - x0;
        const double Y = y - y0;
        hx = cx + g2a * 2.0 * X + g2b * Y + g3a * 3.0 * (X * X - Y * Y) + g3b * 6.0 * X * Y;
        hy = cy - g2a * 2.0 * Y + g2b * X - g3a * 6.0 * X * Y + g3b * 3.0 * (X * X - Y * Y);
    }

    void at(double x, double y, double t, double& hx, double& hy) const {
        base_at(x, y, hx, hy);
        const double f = 1.0 + ramp_rate * t;
        hx *= f;
        hy *= f;
    }

    /// Time derivative d(h_a)/dt at (x, y); zero for static fields.
    void dt_at(double x, double y, double& hx, double& hy) const {
        base_at(x, y, hx, hy);
        hx *= ramp_rate;
        hy *= ramp_rate;
    }

    [[nodiscard]] VectorField sample(const Grid& g, double t) const {
        VectorField f(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                at(g.xc(i), g.yc(j), t, f.x[g.idx(i, j)], f.y[g.idx(i, j)]);
        return f;
    }
};

enum class SystemMode { Full, Regularized, Limit };

inline const char* to_string(SystemMode m) {
    switch (m) {
        case SystemMode::Full: return "full";
        case SystemMode::Regularized: return "regularized";
        case SystemMode::Limit: return "limit";
    }
    return "?";
}

/**
 * Physical and numerical constants of the Rosensweig system.
 * tau is absent in the quasi-equilibrium (limit) mode where m = kappa0 * h
 * holds instantaneously.
 */
struct Params {
    double nu = 1e-2;      ///< shear viscosity, > 0
    double nu_r = 5e-3;    ///< vortex viscosity, >= 0
    double c1 = 1e-2;      ///< spin diffusion, > 0
    double c2 = 1e-2;      ///< spin div-diffusion, >= 0 (no 2D scalar-spin analogue)
    double mu0 = 1.0;      ///< permeability, > 0
    double kappa0 = 1.0;   ///< magnetic susceptibility, > 0
    std::optional<double> tau;  ///< relaxation time, > 0; absent in limit mode
    double sigma = 0.0;    ///< magnetization diffusion, >= 0 (0 unless regularized)
    double t_end = 0.5;
    double dt = 2.5e-3;
    SystemMode mode = SystemMode::Full;
    AppliedField applied_field;

    [[nodiscard]] double tau_value() const {
        if (!tau) throw std::logic_error("tau is not set (limit mode)");
        return *tau;
    }
};

/// Returns p unchanged if all invariants hold; otherwise names the first violation.
inline Params validate_params(const Params& p) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
    if (!(p.nu > 0.0)) fail("nu must be > 0");
    if (!(p.nu_r >= 0.0)) fail("nu_r must be >= 0");
    if (!(p.c1 > 0.0)) fail("c1 must be > 0");
    if (!(p.c2 >= 0.0)) fail("c2 must be >= 0");
    if (!(p.mu0 > 0.0)) fail("mu0 must be > 0");
    if (!(p.kappa0 > 0.0)) fail("kappa0 must be > 0");
    if (p.mode != SystemMode::Limit) {
        if (!p.tau) fail("tau is required unless mode = limit");
        if (!(*p.tau > 0.0)) fail("tau must be > 0");
    }
    if (!(p.sigma >= 0.0)) fail("sigma must be >= 0");
    if (p.mode == SystemMode::Regularized && !(p.sigma > 0.0))
        fail("sigma must be > 0 in regularized mode");
    if (p.mode != SystemMode::Regularized && p.sigma != 0.0)
        fail("sigma > 0 requires regularized mode");
    if (!(p.t_end >= 0.0)) fail("t_end must be >= 0");
    if (!(p.dt > 0.0)) fail("dt must be > 0");
    if (!std::isfinite(p.dt) || !std::isfinite(p.t_end)) fail("dt, t_end must be finite");
    return p;
}

}  // namespace ferroflow
