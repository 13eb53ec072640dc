#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ferroflow/diagnostics.hpp"
#include "ferroflow/fields.hpp"
#include "ferroflow/forces.hpp"
#include "ferroflow/magnetostatics.hpp"
#include "ferroflow/operators.hpp"
#include "ferroflow/params.hpp"
#include "ferroflow/poisson.hpp"
#include "ferroflow/projection.hpp"
#include "ferroflow/separable.hpp"
#include "ferroflow/state.hpp"

namespace ferroflow {

/// Test-mode switches: disable selected couplings of the full system.
struct FrozenFields {
    bool advection = false;   ///< drop (u.grad) transport everywhere
    bool forces = false;      ///< drop Kelvin, spin coupling and torque
    bool magnetics = false;   ///< skip the m / h update entirely
    bool h = false;           ///< keep h fixed during the magnetization update
    bool relaxation = false;  ///< drop the (1/tau)(m - kappa0 h) term
    bool rotation = false;    ///< drop the w x m term
};

struct StepperConfig {
    double cfl_number = 0.4;       ///< in (0,1)
    double picard_tol = 1e-10;
    int picard_max_iter = 50;
    int anderson_depth = 5;        ///< 0 = plain Picard sweeps
    double projection_tol = 1e-10;
    double poisson_tol = 1e-10;
    AdvectionScheme advection = AdvectionScheme::Upwind;
    bool limit_explicit_kelvin = false;  ///< step_limit: add the Kelvin gradient instead of folding it into P
    FrozenFields frozen;
};

inline StepperConfig validate_stepper_config(const StepperConfig& c) {
    if (!(c.cfl_number > 0.0 && c.cfl_number < 1.0))
        throw std::invalid_argument("cfl_number must be in (0,1)");
    if (!(c.picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be > 0");
    if (!(c.projection_tol > 0.0)) throw std::invalid_argument("projection_tol must be > 0");
    if (!(c.poisson_tol > 0.0)) throw std::invalid_argument("poisson_tol must be > 0");
    if (c.picard_max_iter < 1) throw std::invalid_argument("picard_max_iter must be >= 1");
    if (c.anderson_depth < 0) throw std::invalid_argument("anderson_depth must be >= 0");
    return c;
}

struct RelaxationResult {
    VectorField m;
    ScalarField phi;
    VectorField h;
    int picard_iterations = 0;
};

namespace detail {

/// Anderson mixing over fixed-point sweeps x -> g(x); depth 0 returns g.
class AndersonMixer {
public:
    explicit AndersonMixer(int depth) : depth_(depth) {}

    std::vector<double> next(const std::vector<double>& x, const std::vector<double>& gx) {
        if (depth_ == 0) return gx;
        std::vector<double> f(gx.size());
        for (std::size_t k = 0; k < f.size(); ++k) f[k] = gx[k] - x[k];
        gs_.push_back(gx);
        fs_.push_back(std::move(f));
        if (int(gs_.size()) > depth_ + 1) {
            gs_.pop_front();
            fs_.pop_front();
        }
        const int m = int(gs_.size()) - 1;
        if (m < 1) return gx;

        // least squares: min over gamma of || f_k - dF gamma ||, dF columns f_j+1 - f_j
        std::vector<std::vector<double>> dF(m);
        for (int c = 0; c < m; ++c) {
            dF[c].resize(gx.size());
            for (std::size_t k = 0; k < gx.size(); ++k) dF[c][k] = fs_[c + 1][k] - fs_[c][k];
        }
        std::vector<double> A(std::size_t(m) * m, 0.0), rhs(m, 0.0);
        for (int r = 0; r < m; ++r) {
            for (int c = r; c < m; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < gx.size(); ++k) s += dF[r][k] * dF[c][k];
                A[std::size_t(r) * m + c] = s;
                A[std::size_t(c) * m + r] = s;
            }
            double s = 0.0;
            for (std::size_t k = 0; k < gx.size(); ++k) s += dF[r][k] * fs_.back()[k];
            rhs[r] = s;
        }
        // regularized Cholesky-free Gaussian elimination; fall back to plain sweep
        double diag_max = 0.0;
        for (int r = 0; r < m; ++r) diag_max = std::max(diag_max, A[std::size_t(r) * m + r]);
        for (int r = 0; r < m; ++r) A[std::size_t(r) * m + r] += 1e-12 * diag_max;
        std::vector<double> gamma = rhs;
        if (!solve_dense(A, gamma, m)) return gx;

        std::vector<double> out = gs_.back();
        for (int c = 0; c < m; ++c) {
            const double gc = gamma[c];
            if (gc == 0.0) continue;
            for (std::size_t k = 0; k < out.size(); ++k)
                out[k] -= gc * (gs_[c + 1][k] - gs_[c][k]);
        }
        return out;
    }

private:
    static bool solve_dense(std::vector<double>& A, std::vector<double>& b, int n) {
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(A[std::size_t(r) * n + col]) > std::abs(A[std::size_t(piv) * n + col]))
                    piv = r;
            if (A[std::size_t(piv) * n + col] == 0.0) return false;
            if (piv != col) {
                for (int c = 0; c < n; ++c)
                    std::swap(A[std::size_t(piv) * n + c], A[std::size_t(col) * n + c]);
                std::swap(b[piv], b[col]);
            }
            const double d = A[std::size_t(col) * n + col];
            for (int r = col + 1; r < n; ++r) {
                const double f = A[std::size_t(r) * n + col] / d;
                if (f == 0.0) continue;
                for (int c = col; c < n; ++c) A[std::size_t(r) * n + c] -= f * A[std::size_t(col) * n + c];
                b[r] -= f * b[col];
            }
        }
        for (int r = n - 1; r >= 0; --r) {
            double s = b[r];
            for (int c = r + 1; c < n; ++c) s -= A[std::size_t(r) * n + c] * b[c];
            b[r] = s / A[std::size_t(r) * n + r];
        }
        return true;
    }

    int depth_;
    std::deque<std::vector<double>> gs_, fs_;
};

/// Thomas algorithm for the tridiagonal factors of the ADI sigma-diffusion.
inline void thomas_solve(const std::vector<double>& lower, const std::vector<double>& diag,
                         const std::vector<double>& upper, std::vector<double>& x) {
    const std::size_t n = diag.size();
    static thread_local std::vector<double> cp, dp;
    cp.assign(n, 0.0);
    dp.assign(n, 0.0);
    cp[0] = upper[0] / diag[0];
    dp[0] = x[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - lower[i] * cp[i - 1];
        cp[i] = upper[i] / m;
        dp[i] = (x[i] - lower[i] * dp[i - 1]) / m;
    }
    x[n - 1] = dp[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
}

}  // namespace detail

/**
 * Time integrator for the full Rosensweig system (tau > 0, sigma >= 0).
 * One step: explicit upwind advection and force terms, backward-Euler
 * diffusion for u and w, implicit relaxation of m with Picard sweeps over the
 * m-phi coupling, optional implicit sigma-diffusion of m with natural boundary
 * conditions, and a final pressure projection.  u = w = 0 is maintained on the
 * boundary cell ring.
 */
class FullStepper {
public:
    FullStepper(const Grid& g, const Params& params, const StepperConfig& cfg)
        : grid_(g),
          params_(validate_params(params)),
          cfg_(validate_stepper_config(cfg)),
          poisson_(g, cfg.poisson_tol),
          projection_(g, cfg.projection_tol) {
        const double dt = params_.dt;
        const int mx = g.nx - 2, my = g.ny - 2;
        {
            SymMatrix ax = second_difference_dirichlet(mx, g.hx);
            SymMatrix ay = second_difference_dirichlet(my, g.hy);
            const double cu = (params_.nu + params_.nu_r) * dt;
            for (double& v : ax.a) v *= cu;
            for (double& v : ay.a) v *= cu;
            diffuse_u_ = SeparableSolver(ax, ay);
        }
        {
            SymMatrix ax = second_difference_dirichlet(mx, g.hx);
            SymMatrix ay = second_difference_dirichlet(my, g.hy);
            for (double& v : ax.a) v *= params_.c1 * dt;
            for (double& v : ay.a) v *= params_.c1 * dt;
            diffuse_w_ = SeparableSolver(ax, ay);
        }
    }

    [[nodiscard]] const Params& params() const { return params_; }
    [[nodiscard]] const StepperConfig& config() const { return cfg_; }
    [[nodiscard]] const NeumannPoissonSolver& poisson() const { return poisson_; }
    [[nodiscard]] const Projection& projection() const { return projection_; }
    [[nodiscard]] int last_picard_iterations() const { return last_picard_; }

    /// Builds a consistent initial state: solves the potential for the given m
    /// and enforces the boundary masks and the divergence constraint.
    State prepare_initial(const VectorField& u0, const ScalarField& w0, const VectorField& m0,
                          double t0 = 0.0) const {
        State s(grid_);
        s.u = u0;
        s.w = w0;
        s.m = m0;
        s.time = t0;
        mask_boundary(s.u);
        mask_boundary(s.w);
        ProjectionResult pr = projection_.project(s.u);
        s.u = pr.u;
        mask_boundary(s.u);
        PotentialSolution ps = solve_potential(s.m, params_.applied_field, t0, poisson_);
        s.phi = ps.phi;
        s.h = ps.h;
        return s;
    }

    /**
     * Implicit update of the magnetization over one dt:
     *   m_new = m_adv + dt [ w x m_new - (1/tau)(m_new - kappa0 h(m_new)) ],
     * with h re-solved from the potential problem every sweep (optionally
     * Anderson-accelerated).  Exact on the fixed point m = kappa0 h.
     */
    RelaxationResult relax_magnetization(const VectorField& m, const VectorField& u,
                                         const ScalarField& w, double t_new, double dt,
                                         const VectorField* frozen_h = nullptr) const {
        const Grid& g = grid_;
        const std::size_t n = g.cells();
        const bool use_relax = !cfg_.frozen.relaxation;
        const bool use_rot = !cfg_.frozen.rotation;
        const double tau = use_relax ? params_.tau_value() : 1.0;
        const double a = use_relax ? 1.0 + dt / tau : 1.0;
        const double beta = use_relax ? dt * params_.kappa0 / tau : 0.0;

        VectorField m_adv = m;
        if (!cfg_.frozen.advection) {
            VectorField tr = advect(u, m, cfg_.advection);
            for (std::size_t k = 0; k < n; ++k) {
                m_adv.x[k] = m.x[k] - dt * tr.x[k];
                m_adv.y[k] = m.y[k] - dt * tr.y[k];
            }
        }

        auto pointwise_solve = [&](const VectorField& hk, VectorField& out) {
            for (std::size_t k = 0; k < n; ++k) {
                const double b = use_rot ? dt * w.v[k] : 0.0;
                const double rx = m_adv.x[k] + beta * hk.x[k];
                const double ry = m_adv.y[k] + beta * hk.y[k];
                const double det = a * a + b * b;
                // (a I - b J) m = r with J the rotation generator (w x m = w(-m_y, m_x))
                out.x[k] = (a * rx - b * ry) / det;
                out.y[k] = (b * rx + a * ry) / det;
            }
        };

        RelaxationResult res;
        if (frozen_h || cfg_.frozen.h) {
            // fixed field: the pointwise solve is exact, no coupling loop
            VectorField zero_h(g);
            const VectorField& hk = frozen_h ? *frozen_h : zero_h;
            res.m = VectorField(g);
            pointwise_solve(hk, res.m);
            res.h = hk;
            res.phi = ScalarField(g);
            res.picard_iterations = 1;
            return res;
        }

        if (!use_relax) {
            // pure rotation (and advection): no h feedback in the update
            res.m = VectorField(g);
            pointwise_solve(VectorField(g), res.m);
            PotentialSolution ps = solve_potential(res.m, params_.applied_field, t_new, poisson_);
            res.phi = ps.phi;
            res.h = ps.h;
            res.picard_iterations = 1;
            return res;
        }

        detail::AndersonMixer mixer(cfg_.anderson_depth);
        VectorField mk = m;
        VectorField gk(g);
        int it = 0;
        bool converged = false;
        const double tol = cfg_.picard_tol;
        while (it < cfg_.picard_max_iter) {
            ++it;
            PotentialSolution ps = solve_potential(mk, params_.applied_field, t_new, poisson_);
            pointwise_solve(ps.h, gk);
            double dn = 0.0, sn = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double ex = gk.x[k] - mk.x[k];
                const double ey = gk.y[k] - mk.y[k];
                dn += ex * ex + ey * ey;
                sn += gk.x[k] * gk.x[k] + gk.y[k] * gk.y[k];
            }
            dn = std::sqrt(dn * g.cell_area());
            sn = std::sqrt(sn * g.cell_area());
            if (dn <= tol * std::max(1.0, sn)) {
                mk = gk;
                converged = true;
                break;
            }
            // Anderson mixing over the stacked components
            std::vector<double> xs(2 * n), gs(2 * n);
            std::copy(mk.x.begin(), mk.x.end(), xs.begin());
            std::copy(mk.y.begin(), mk.y.end(), xs.begin() + n);
            std::copy(gk.x.begin(), gk.x.end(), gs.begin());
            std::copy(gk.y.begin(), gk.y.end(), gs.begin() + n);
            std::vector<double> nx = mixer.next(xs, gs);
            std::copy(nx.begin(), nx.begin() + n, mk.x.begin());
            std::copy(nx.begin() + n, nx.end(), mk.y.begin());
        }
        if (!converged)
            throw std::runtime_error("relax_magnetization: Picard did not converge in " +
                                     std::to_string(cfg_.picard_max_iter) + " sweeps");
        PotentialSolution ps = solve_potential(mk, params_.applied_field, t_new, poisson_);
        res.m = std::move(mk);
        res.phi = std::move(ps.phi);
        res.h = std::move(ps.h);
        res.picard_iterations = it;
        return res;
    }

    /// One time step; throws on CFL violation, solver failure, or NaN.
    void step(State& s, int step_index = -1) const {
        const Grid& g = grid_;
        const double dt = params_.dt;
        const std::size_t n = g.cells();
        if (!cfg_.frozen.advection) check_cfl(s.u, dt, step_index);

        // explicit advection + forces on u
        VectorField u_star = s.u;
        if (!cfg_.frozen.advection) {
            VectorField tr = advect(s.u, s.u, cfg_.advection);
            for (std::size_t k = 0; k < n; ++k) {
                u_star.x[k] -= dt * tr.x[k];
                u_star.y[k] -= dt * tr.y[k];
            }
        }
        if (!cfg_.frozen.forces) {
            VectorField kel = cfg_.frozen.magnetics ? VectorField(g)
                                                    : kelvin_conservative(s.m, s.h, params_.mu0);
            VectorField spin = curl_scalar(s.w);
            for (std::size_t k = 0; k < n; ++k) {
                u_star.x[k] += dt * (kel.x[k] + 2.0 * params_.nu_r * spin.x[k]);
                u_star.y[k] += dt * (kel.y[k] + 2.0 * params_.nu_r * spin.y[k]);
            }
        }
        implicit_diffuse(diffuse_u_, u_star.x, 1.0);
        implicit_diffuse(diffuse_u_, u_star.y, 1.0);

        // spin
        ScalarField w_star = s.w;
        if (!cfg_.frozen.advection) {
            ScalarField tr = advect(s.u, s.w, cfg_.advection);
            for (std::size_t k = 0; k < n; ++k) w_star.v[k] -= dt * tr.v[k];
        }
        double w_shift = 1.0;
        if (!cfg_.frozen.forces) {
            ScalarField cu = curl_vec(s.u);
            ScalarField tq = cfg_.frozen.magnetics ? ScalarField(g)
                                                   : torque(s.m, s.h, params_.mu0);
            for (std::size_t k = 0; k < n; ++k)
                w_star.v[k] += dt * (2.0 * params_.nu_r * cu.v[k] + tq.v[k]);
            w_shift += 4.0 * params_.nu_r * dt;  // -4 nu_r w treated implicitly
        }
        implicit_diffuse(diffuse_w_, w_star.v, w_shift);

        // magnetization and field
        if (!cfg_.frozen.magnetics) {
            RelaxationResult rr =
                relax_magnetization(s.m, s.u, w_star, s.time + dt, dt,
                                    cfg_.frozen.h ? &s.h : nullptr);
            s.m = std::move(rr.m);
            if (!cfg_.frozen.h) {
                s.phi = std::move(rr.phi);
                s.h = std::move(rr.h);
            }
            last_picard_ = rr.picard_iterations;
            if (params_.sigma > 0.0) {
                sigma_diffuse(s.m.x, dt);
                sigma_diffuse(s.m.y, dt);
                PotentialSolution ps =
                    solve_potential(s.m, params_.applied_field, s.time + dt, poisson_);
                s.phi = std::move(ps.phi);
                s.h = std::move(ps.h);
            }
        }
        s.w = std::move(w_star);

        // projection
        ProjectionResult pr = projection_.project(u_star);
        s.u = std::move(pr.u);
        // u = u* - D^T q corresponds to u = u* - dt grad p with p = -q/dt
        for (std::size_t k = 0; k < n; ++k) s.p.v[k] = -pr.q.v[k] / dt;
        subtract_mean(g, s.p.v);

        s.time += dt;
        check_finite(s, step_index);
    }

    void check_cfl(const VectorField& u, double dt, int step_index) const {
        double rate = 0.0;
        for (std::size_t k = 0; k < u.x.size(); ++k)
            rate = std::max(rate, std::abs(u.x[k]) / grid_.hx + std::abs(u.y[k]) / grid_.hy);
        if (dt * rate > cfg_.cfl_number)
            throw std::runtime_error("advective CFL violated at step " +
                                     std::to_string(step_index) + ": dt*max(|u|/h) = " +
                                     std::to_string(dt * rate) + " > " +
                                     std::to_string(cfg_.cfl_number));
    }

    void check_finite(const State& s, int step_index) const {
        if (!all_finite(s.u.x) || !all_finite(s.u.y) || !all_finite(s.w.v) ||
            !all_finite(s.m.x) || !all_finite(s.m.y) || !all_finite(s.phi.v))
            throw std::runtime_error("non-finite field values after step " +
                                     std::to_string(step_index));
    }

    /// Backward-Euler solve (shift I + coef dt (-Laplace)) on the interior block,
    /// Dirichlet data 0 on the boundary ring.
    void implicit_diffuse(const SeparableSolver& sol, std::vector<double>& f, double shift) const {
        const Grid& g = grid_;
        const int mx = g.nx - 2, my = g.ny - 2;
        std::vector<double> b(std::size_t(mx) * my);
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) b[std::size_t(j) * mx + i] = f[g.idx(i + 1, j + 1)];
        std::vector<double> x;
        sol.solve(b, x, shift);
        std::fill(f.begin(), f.end(), 0.0);
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) f[g.idx(i + 1, j + 1)] = x[std::size_t(j) * mx + i];
    }

private:
    /// ADI-split (I + sigma dt Lx)(I + sigma dt Ly) with the natural-condition
    /// closure: the second difference vanishes at boundary cells, so the
    /// boundary rows of each factor are identities.
    void sigma_diffuse(std::vector<double>& f, double dt) const {
        const Grid& g = grid_;
        const double cx = params_.sigma * dt / (g.hx * g.hx);
        const double cy = params_.sigma * dt / (g.hy * g.hy);
        std::vector<double> lo(std::max(g.nx, g.ny)), di(std::max(g.nx, g.ny)),
            up(std::max(g.nx, g.ny)), rhs(std::max(g.nx, g.ny));
        // x sweeps
        lo.assign(g.nx, -cx);
        di.assign(g.nx, 1.0 + 2.0 * cx);
        up.assign(g.nx, -cx);
        lo[0] = up[0] = 0.0;
        di[0] = 1.0;
        lo[g.nx - 1] = up[g.nx - 1] = 0.0;
        di[g.nx - 1] = 1.0;
        for (int j = 0; j < g.ny; ++j) {
            rhs.resize(g.nx);
            for (int i = 0; i < g.nx; ++i) rhs[i] = f[g.idx(i, j)];
            detail::thomas_solve(lo, di, up, rhs);
            for (int i = 0; i < g.nx; ++i) f[g.idx(i, j)] = rhs[i];
        }
        // y sweeps
        lo.assign(g.ny, -cy);
        di.assign(g.ny, 1.0 + 2.0 * cy);
        up.assign(g.ny, -cy);
        lo[0] = up[0] = 0.0;
        di[0] = 1.0;
        lo[g.ny - 1] = up[g.ny - 1] = 0.0;
        di[g.ny - 1] = 1.0;
        for (int i = 0; i < g.nx; ++i) {
            rhs.resize(g.ny);
            for (int j = 0; j < g.ny; ++j) rhs[j] = f[g.idx(i, j)];
            detail::thomas_solve(lo, di, up, rhs);
            for (int j = 0; j < g.ny; ++j) f[g.idx(i, j)] = rhs[j];
        }
    }

    Grid grid_;
    Params params_;
    StepperConfig cfg_;
    NeumannPoissonSolver poisson_;
    Projection projection_;
    SeparableSolver diffuse_u_, diffuse_w_;
    mutable int last_picard_ = 0;
};

/**
 * Time integrator for the quasi-equilibrium system.  H = grad(Phi) is
 * decoupled from the flow; by default the Kelvin force is folded into the
 * pressure (it is a pure gradient), optionally it is added explicitly and
 * removed again by the projection.
 */
class LimitStepper {
public:
    LimitStepper(const Grid& g, const Params& params, const StepperConfig& cfg)
        : grid_(g),
          params_(validate_params(params)),
          cfg_(validate_stepper_config(cfg)),
          poisson_(g, cfg.poisson_tol),
          projection_(g, cfg.projection_tol) {
        const double dt = params_.dt;
        const int mx = g.nx - 2, my = g.ny - 2;
        {
            SymMatrix ax = second_difference_dirichlet(mx, g.hx);
            SymMatrix ay = second_difference_dirichlet(my, g.hy);
            const double cu = (params_.nu + params_.nu_r) * dt;
            for (double& v : ax.a) v *= cu;
            for (double& v : ay.a) v *= cu;
            diffuse_u_ = SeparableSolver(ax, ay);
        }
        {
            SymMatrix ax = second_difference_dirichlet(mx, g.hx);
            SymMatrix ay = second_difference_dirichlet(my, g.hy);
            for (double& v : ax.a) v *= params_.c1 * dt;
            for (double& v : ay.a) v *= params_.c1 * dt;
            diffuse_w_ = SeparableSolver(ax, ay);
        }
    }

    [[nodiscard]] const Params& params() const { return params_; }
    [[nodiscard]] const Projection& projection() const { return projection_; }
    [[nodiscard]] const NeumannPoissonSolver& poisson() const { return poisson_; }

    LimitState prepare_initial(const VectorField& u0, const ScalarField& w0,
                               double t0 = 0.0) const {
        LimitState s(grid_);
        s.U = u0;
        s.W = w0;
        s.time = t0;
        mask_boundary(s.U);
        mask_boundary(s.W);
        ProjectionResult pr = projection_.project(s.U);
        s.U = pr.u;
        mask_boundary(s.U);
        PotentialSolution ps =
            solve_limit_potential(grid_, params_.applied_field, params_.kappa0, t0, poisson_);
        s.Phi = ps.phi;
        s.H = ps.h;
        return s;
    }

    void step(LimitState& s, int step_index = -1) const {
        const Grid& g = grid_;
        const double dt = params_.dt;
        const std::size_t n = g.cells();

        {
            double rate = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                rate = std::max(rate, std::abs(s.U.x[k]) / g.hx + std::abs(s.U.y[k]) / g.hy);
            if (dt * rate > cfg_.cfl_number)
                throw std::runtime_error("advective CFL violated at step " +
                                         std::to_string(step_index));
        }

        VectorField u_star = s.U;
        if (!cfg_.frozen.advection) {
            VectorField tr = advect(s.U, s.U, cfg_.advection);
            for (std::size_t k = 0; k < n; ++k) {
                u_star.x[k] -= dt * tr.x[k];
                u_star.y[k] -= dt * tr.y[k];
            }
        }
        if (!cfg_.frozen.forces) {
            VectorField spin = curl_scalar(s.W);
            for (std::size_t k = 0; k < n; ++k) {
                u_star.x[k] += dt * 2.0 * params_.nu_r * spin.x[k];
                u_star.y[k] += dt * 2.0 * params_.nu_r * spin.y[k];
            }
            if (cfg_.limit_explicit_kelvin) {
                // Kelvin force (mu0 kappa0 / 2) grad |H|^2 in the discrete-gradient
                // form the projection annihilates exactly
                const int mx = g.nx - 2;
                std::vector<double> qk(std::size_t(mx) * (g.ny - 2));
                for (int j = 1; j < g.ny - 1; ++j)
                    for (int i = 1; i < g.nx - 1; ++i) {
                        const std::size_t c = g.idx(i, j);
                        qk[std::size_t(j - 1) * mx + (i - 1)] =
                            0.5 * params_.mu0 * params_.kappa0 *
                            (s.H.x[c] * s.H.x[c] + s.H.y[c] * s.H.y[c]);
                    }
                VectorField grad_k = projection_.adjoint_gradient(qk);
                for (std::size_t k = 0; k < n; ++k) {
                    u_star.x[k] -= dt * grad_k.x[k];  // grad s = -D^T s
                    u_star.y[k] -= dt * grad_k.y[k];
                }
            }
        }
        implicit_diffuse(diffuse_u_, u_star.x, 1.0);
        implicit_diffuse(diffuse_u_, u_star.y, 1.0);

        ScalarField w_star = s.W;
        if (!cfg_.frozen.advection) {
            ScalarField tr = advect(s.U, s.W, cfg_.advection);
            for (std::size_t k = 0; k < n; ++k) w_star.v[k] -= dt * tr.v[k];
        }
        double w_shift = 1.0;
        if (!cfg_.frozen.forces) {
            ScalarField cu = curl_vec(s.U);
            for (std::size_t k = 0; k < n; ++k)
                w_star.v[k] += dt * 2.0 * params_.nu_r * cu.v[k];
            w_shift += 4.0 * params_.nu_r * dt;
        }
        implicit_diffuse(diffuse_w_, w_star.v, w_shift);
        s.W = std::move(w_star);

        if (!params_.applied_field.is_static()) {
            PotentialSolution ps = solve_limit_potential(grid_, params_.applied_field,
                                                         params_.kappa0, s.time + dt, poisson_);
            s.Phi = std::move(ps.phi);
            s.H = std::move(ps.h);
        }

        ProjectionResult pr = projection_.project(u_star);
        s.U = std::move(pr.u);
        for (std::size_t k = 0; k < n; ++k) s.P.v[k] = -pr.q.v[k] / dt;
        subtract_mean(g, s.P.v);

        s.time += dt;
        if (!all_finite(s.U.x) || !all_finite(s.U.y) || !all_finite(s.W.v))
            throw std::runtime_error("non-finite field values after step " +
                                     std::to_string(step_index));
    }

    void implicit_diffuse(const SeparableSolver& sol, std::vector<double>& f, double shift) const {
        const Grid& g = grid_;
        const int mx = g.nx - 2, my = g.ny - 2;
        std::vector<double> b(std::size_t(mx) * my);
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) b[std::size_t(j) * mx + i] = f[g.idx(i + 1, j + 1)];
        std::vector<double> x;
        sol.solve(b, x, shift);
        std::fill(f.begin(), f.end(), 0.0);
        for (int j = 0; j < my; ++j)
            for (int i = 0; i < mx; ++i) f[g.idx(i + 1, j + 1)] = x[std::size_t(j) * mx + i];
    }

private:
    Grid grid_;
    Params params_;
    StepperConfig cfg_;
    NeumannPoissonSolver poisson_;
    Projection projection_;
    SeparableSolver diffuse_u_, diffuse_w_;
};

// ---------------------------------------------------------------------------
// run loops

struct RunHooks {
    /// Called at every diagnostics sample; may enrich the sample (e.g. with
    /// relative-entropy values) before it is stored.
    std::function<void(const State&, int, DiagnosticsSample&)> on_full_sample;
    std::function<void(const LimitState&, int, DiagnosticsSample&)> on_limit_sample;
    /// Called every `snapshot_every` steps (and at the end) when set.
    std::function<void(const State&, int)> on_full_snapshot;
    std::function<void(const LimitState&, int)> on_limit_snapshot;
};

inline int step_count(const Params& p) {
    return int(std::llround(p.t_end / p.dt));
}

/// Steps the full system to t_end, sampling diagnostics at the given cadence
/// (the initial state is always sample 0).  Deterministic for fixed inputs.
inline Trajectory run_full(const State& initial, const Params& params, const StepperConfig& cfg,
                           int diagnostics_every = 1, int snapshot_every = 0,
                           const RunHooks& hooks = {}) {
    if (diagnostics_every < 1) throw std::invalid_argument("diagnostics_every must be >= 1");
    FullStepper stepper(initial.grid(), params, cfg);
    State s = initial;
    Trajectory traj;
    const int nsteps = step_count(params);
    const double m2_0 = m_l2_half_norm(s);

    double int_d = 0.0, int_relax = 0.0, int_ha = 0.0;
    double d_prev = dissipation(s, params);
    double relax_prev = m_l2_relaxation_rate(s, params);
    double hap_prev = applied_field_power(s.grid(), params.applied_field, s.h, params.mu0);
    const double e0 = energy(s, params);

    int sample_idx = 0;
    auto sample = [&](const State& st) {
        DiagnosticsSample d;
        d.time = st.time;
        d.energy = energy(st, params);
        d.dissipation = dissipation(st, params);
        d.energy_residual = d.energy + int_d - e0 - int_ha;
        d.m_l2_residual =
            (params.sigma == 0.0)
                ? std::optional<double>(std::abs(m_l2_half_norm(st) - m2_0 + int_relax))
                : std::nullopt;
        d.ha_coupling_integral = int_ha;
        if (hooks.on_full_sample) hooks.on_full_sample(st, sample_idx, d);
        traj.series.push_back(d);
        ++sample_idx;
    };

    sample(s);
    if (snapshot_every > 0 && hooks.on_full_snapshot) hooks.on_full_snapshot(s, 0);
    for (int k = 1; k <= nsteps; ++k) {
        stepper.step(s, k);
        const double d_new = dissipation(s, params);
        const double relax_new = m_l2_relaxation_rate(s, params);
        const double hap_new = applied_field_power(s.grid(), params.applied_field, s.h, params.mu0);
        int_d += 0.5 * params.dt * (d_prev + d_new);
        int_relax += 0.5 * params.dt * (relax_prev + relax_new);
        int_ha += 0.5 * params.dt * (hap_prev + hap_new);
        d_prev = d_new;
        relax_prev = relax_new;
        hap_prev = hap_new;
        if (k % diagnostics_every == 0 || k == nsteps) sample(s);
        if (snapshot_every > 0 && hooks.on_full_snapshot &&
            (k % snapshot_every == 0 || k == nsteps))
            hooks.on_full_snapshot(s, k);
    }
    traj.final_state = std::move(s);
    return traj;
}

/// Limit-system analogue of run_full; optionally stores the sampled states
/// (used by the relaxation sweep for synchronized comparisons).
inline LimitTrajectory run_limit(const LimitState& initial, const Params& params,
                                 const StepperConfig& cfg, int diagnostics_every = 1,
                                 int snapshot_every = 0, bool store_states = false,
                                 const RunHooks& hooks = {}) {
    if (diagnostics_every < 1) throw std::invalid_argument("diagnostics_every must be >= 1");
    LimitStepper stepper(initial.grid(), params, cfg);
    LimitState s = initial;
    LimitTrajectory traj;
    const int nsteps = step_count(params);

    double int_d = 0.0, int_ha = 0.0;
    double d_prev = dissipation(s, params);
    double hap_prev = applied_field_power(s.grid(), params.applied_field, s.H, params.mu0);
    const double e0 = energy(s, params);

    int sample_idx = 0;
    auto sample = [&](const LimitState& st) {
        DiagnosticsSample d;
        d.time = st.time;
        d.energy = energy(st, params);
        d.dissipation = dissipation(st, params);
        d.energy_residual = d.energy + int_d - e0 - int_ha;
        d.ha_coupling_integral = int_ha;
        if (hooks.on_limit_sample) hooks.on_limit_sample(st, sample_idx, d);
        traj.series.push_back(d);
        if (store_states) traj.sampled_states.push_back(st);
        ++sample_idx;
    };

    sample(s);
    if (snapshot_every > 0 && hooks.on_limit_snapshot) hooks.on_limit_snapshot(s, 0);
    for (int k = 1; k <= nsteps; ++k) {
        stepper.step(s, k);
        const double d_new = dissipation(s, params);
        const double hap_new = applied_field_power(s.grid(), params.applied_field, s.H, params.mu0);
        int_d += 0.5 * params.dt * (d_prev + d_new);
        int_ha += 0.5 * params.dt * (hap_prev + hap_new);
        d_prev = d_new;
        hap_prev = hap_new;
        if (k % diagnostics_every == 0 || k == nsteps) sample(s);
        if (snapshot_every > 0 && hooks.on_limit_snapshot &&
            (k % snapshot_every == 0 || k == nsteps))
            hooks.on_limit_snapshot(s, k);
    }
    traj.final_state = std::move(s);
    return traj;
}

}  // namespace ferroflow
