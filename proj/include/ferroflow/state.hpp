#pragma once

#include <optional>
#include <vector>

#include "ferroflow/fields.hpp"

namespace ferroflow {

/**
 * Full-system field tuple at one time level: velocity u, scalar spin w,
 * magnetization m, magnetizing field h = grad(phi), potential phi and
 * pressure p (both zero-mean).  u and w vanish on the boundary cell ring.
 */
struct State {
    VectorField u;
    ScalarField w;
    VectorField m;
    VectorField h;
    ScalarField phi;
    ScalarField p;
    double time = 0.0;

    State() = default;
    explicit State(const Grid& g) : u(g), w(g), m(g), h(g), phi(g), p(g) {}

    [[nodiscard]] const Grid& grid() const { return u.grid; }
};

/**
 * Quasi-equilibrium (tau = 0) state.  The magnetization is never stored:
 * M = kappa0 * H holds by construction and is materialized on demand.
 */
struct LimitState {
    VectorField U;
    ScalarField W;
    VectorField H;
    ScalarField Phi;
    ScalarField P;
    double time = 0.0;

    LimitState() = default;
    explicit LimitState(const Grid& g) : U(g), W(g), H(g), Phi(g), P(g) {}

    [[nodiscard]] const Grid& grid() const { return U.grid; }

    [[nodiscard]] VectorField magnetization(double kappa0) const {
        VectorField m(H.grid);
        for (std::size_t k = 0; k < m.x.size(); ++k) {
            m.x[k] = kappa0 * H.x[k];
            m.y[k] = kappa0 * H.y[k];
        }
        return m;
    }
};

/// One row of the diagnostics time series.
struct DiagnosticsSample {
    double time = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double energy_residual = 0.0;
    std::optional<double> m_l2_residual;    ///< defect of the magnetization L2 identity
    std::optional<double> rel_entropy;      ///< filled by sweep hooks
    std::optional<double> rel_dissipation;
    double ha_coupling_integral = 0.0;      ///< accumulated mu0 * int dt(h_a) . h (not serialized)
};

using DiagnosticsSeries = std::vector<DiagnosticsSample>;

struct Trajectory {
    DiagnosticsSeries series;
    State final_state;
};

struct LimitTrajectory {
    DiagnosticsSeries series;
    LimitState final_state;
    std::vector<LimitState> sampled_states;  ///< filled when store_states was requested
};

}  // namespace ferroflow
