#pragma once

#include "ferroflow/fields.hpp"
#include "ferroflow/operators.hpp"

namespace ferroflow {

/// Kelvin force mu0 (m . grad) h, componentwise centered differences.
inline VectorField kelvin_direct(const VectorField& m, const VectorField& h, double mu0) {
    const Grid& g = m.grid;
    VectorField out(g);
    std::vector<double> dxh(g.cells()), dyh(g.cells());
    detail::ddx(g, h.x, dxh);
    detail::ddy(g, h.x, dyh);
    for (std::size_t k = 0; k < out.x.size(); ++k)
        out.x[k] = mu0 * (m.x[k] * dxh[k] + m.y[k] * dyh[k]);
    detail::ddx(g, h.y, dxh);
    detail::ddy(g, h.y, dyh);
    for (std::size_t k = 0; k < out.y.size(); ++k)
        out.y[k] = mu0 * (m.x[k] * dxh[k] + m.y[k] * dyh[k]);
    return out;
}

/**
 * Kelvin force in conservative form,
 *   mu0 [ div((m+h) (x) h) - 1/2 grad(|h|^2) ],
 * which coincides with the direct form on fields satisfying curl h = 0 and
 * div(m + h) = 0.  Used by the momentum stepper (the form that stays defined
 * for rough h).
 */
inline VectorField kelvin_conservative(const VectorField& m, const VectorField& h, double mu0) {
    const Grid& g = m.grid;
    const std::size_t n = g.cells();
    VectorField out(g);
    std::vector<double> ax(n), ay(n), t1(n), t2(n), h2(n);
    for (std::size_t k = 0; k < n; ++k) {
        ax[k] = m.x[k] + h.x[k];
        ay[k] = m.y[k] + h.y[k];
        h2[k] = h.x[k] * h.x[k] + h.y[k] * h.y[k];
    }
    // component j of div((m+h) (x) h) is div((m+h) h_j)
    std::vector<double> fx(n), fy(n);
    for (std::size_t k = 0; k < n; ++k) {
        fx[k] = ax[k] * h.x[k];
        fy[k] = ay[k] * h.x[k];
    }
    detail::ddx(g, fx, t1);
    detail::ddy(g, fy, t2);
    for (std::size_t k = 0; k < n; ++k) out.x[k] = t1[k] + t2[k];
    for (std::size_t k = 0; k < n; ++k) {
        fx[k] = ax[k] * h.y[k];
        fy[k] = ay[k] * h.y[k];
    }
    detail::ddx(g, fx, t1);
    detail::ddy(g, fy, t2);
    for (std::size_t k = 0; k < n; ++k) out.y[k] = t1[k] + t2[k];

    detail::ddx(g, h2, t1);
    detail::ddy(g, h2, t2);
    for (std::size_t k = 0; k < n; ++k) {
        out.x[k] = mu0 * (out.x[k] - 0.5 * t1[k]);
        out.y[k] = mu0 * (out.y[k] - 0.5 * t2[k]);
    }
    return out;
}

/// Magnetic torque mu0 (m x h) = mu0 (m_x h_y - m_y h_x), scalar in 2D.
inline ScalarField torque(const VectorField& m, const VectorField& h, double mu0) {
    ScalarField out(m.grid);
    for (std::size_t k = 0; k < out.v.size(); ++k)
        out.v[k] = mu0 * (m.x[k] * h.y[k] - m.y[k] * h.x[k]);
    return out;
}

struct SpinCoupling {
    VectorField force;       ///< 2 nu_r curl(w), enters the momentum equation
    ScalarField torque_term; ///< 2 nu_r curl(u) - 4 nu_r w, enters the spin equation
};

inline SpinCoupling spin_coupling(const VectorField& u, const ScalarField& w, double nu_r) {
    SpinCoupling out{curl_scalar(w), curl_vec(u)};
    for (std::size_t k = 0; k < out.force.x.size(); ++k) {
        out.force.x[k] *= 2.0 * nu_r;
        out.force.y[k] *= 2.0 * nu_r;
        out.torque_term.v[k] = 2.0 * nu_r * out.torque_term.v[k] - 4.0 * nu_r * w.v[k];
    }
    return out;
}

}  // namespace ferroflow
