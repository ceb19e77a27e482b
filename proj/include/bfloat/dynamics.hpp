/**
 * @file dynamics.hpp
 * @brief The evolution's right-hand side: Phi, Gamma, the nonlocal map R,
 *        the d<q>/dt closure, the full dispersive vector field, and the
 *        delta = 0 hyperbolic vector field with its contact-point closure.
 */

#pragma once

#include <span>

#include "bfloat/core.hpp"
#include "bfloat/elliptic.hpp"

namespace bfloat {

/// Immutable bundle a right-hand-side evaluation needs. The solver handle is
/// shared and concurrency-safe; Model itself is cheap to copy.
struct Model {
    Parameters params;
    GridSpec grid;
    std::shared_ptr<const HelmholtzSolver> helm;  // null in hyperbolic mode

    static Model dispersive(const Parameters& p, const GridSpec& g) {
        return {p, g, std::make_shared<HelmholtzSolver>(g, p.delta)};
    }
    static Model hyperbolic(const Parameters& p, const GridSpec& g) { return {p, g, nullptr}; }
};

/// One evaluation of the vector field, with Gamma retained for diagnostics.
struct RhsEvaluation {
    ExteriorField dtheta;       // -Phi
    ExteriorField dq;           // -R(Gamma, [[theta]])
    Real d_avg_q = 0.0;         // d<q>/dt, equals average(dq) identically
    ExteriorField gamma_field;  // Gamma = dx(theta + eps q^2)
};

/// Phi = dx q / (1 + eps c'(theta)). Throws BlowupSignal when the
/// denominator drops below c0.
inline ExteriorField compute_Phi(const State& U, Real eps, Real c0 = 0.05) {
    ExteriorField out = derivative(U.q);
    for (Side s : {Side::minus, Side::plus}) {
        const auto& th = U.theta.values(s);
        auto& o = out.values(s);
        for (std::size_t i = 0; i < th.size(); ++i) {
            const Real disc = 1.0 + 2.0 * eps * th[i];
            if (!(disc > 0.0) || 1.0 / std::sqrt(disc) < c0)
                throw BlowupSignal("compute_Phi: 1+eps*c'(theta) below floor", U.t);
            // 1/(1+eps c') = sqrt(1+2 eps theta)
            o[i] *= std::sqrt(disc);
        }
    }
    return out;
}

/// Gamma = dx(theta + eps q^2).
inline ExteriorField compute_Gamma(const State& U, Real eps) {
    ExteriorField work = U.theta;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& qv = U.q.values(s);
        auto& w = work.values(s);
        for (std::size_t i = 0; i < qv.size(); ++i) w[i] += eps * qv[i] * qv[i];
    }
    return derivative(work);
}

/// Jump of the one-sided derivative at the contact points, with the same
/// 3-point stencils the rest of the trace machinery uses.
inline Real contact_derivative_jump(const ExteriorField& f) {
    const auto& g = f.grid();
    const Real dx = g.dx;
    auto one_sided = [&](Side s) {
        const Real d = (-3.0 * f.from_boundary(s, 0) + 4.0 * f.from_boundary(s, 1) -
                        f.from_boundary(s, 2)) /
                       (2.0 * dx);
        return s == Side::plus ? d : -d;  // boundary-ordered direction flips on E-
    };
    return one_sided(Side::plus) - one_sided(Side::minus);
}

/// R(gamma, rho) = R0 gamma + (delta^2 [[dx R0 gamma]] + rho)/(alpha + 2 delta)
///                 * e^(-|x|_R/delta).
/// The layer coefficient makes the output's jump vanish identically and its
/// boundary value equal the coefficient itself.
inline ExteriorField apply_R_operator(const ExteriorField& gamma, Real rho, const Model& m) {
    if (!m.helm)
        throw Error("apply_R_operator: delta = 0, use the hyperbolic path");
    const Real delta = m.params.delta;
    ExteriorField r0 = m.helm->solve_R0(gamma);
    const Real sigma =
        (delta * delta * contact_derivative_jump(r0) + rho) / (m.params.alpha + 2.0 * delta);
    ExteriorField out = boundary_layer(sigma, delta, m.grid);
    out += r0;
    return out;
}

/// d<q>/dt = -(delta^2 [[dx R0 Gamma]] + [[theta]]) / (alpha + 2 delta).
inline Real dt_avg_q(const State& U, const Model& m) {
    if (!m.helm) throw Error("dt_avg_q: delta = 0, use the hyperbolic path");
    const Real delta = m.params.delta;
    ExteriorField r0 = m.helm->solve_R0(compute_Gamma(U, m.params.epsilon));
    return -(delta * delta * contact_derivative_jump(r0) + jump(U.theta)) /
           (m.params.alpha + 2.0 * delta);
}

/// The dispersive vector field dt U = (-Phi, -R(Gamma, [[theta]])).
inline RhsEvaluation rhs(const State& U, const Model& m, Real c0 = 0.05) {
    if (!m.helm) throw Error("rhs: delta = 0, use rhs_hyperbolic");
    const Real eps = m.params.epsilon;
    const Real delta = m.params.delta;

    RhsEvaluation out;
    out.gamma_field = compute_Gamma(U, eps);
    out.dtheta = compute_Phi(U, eps, c0);
    out.dtheta *= -1.0;

    ExteriorField r0 = m.helm->solve_R0(out.gamma_field);
    const Real sigma = (delta * delta * contact_derivative_jump(r0) + jump(U.theta)) /
                       (m.params.alpha + 2.0 * delta);
    out.dq = boundary_layer(-sigma, delta, m.grid);
    out.dq.axpy(-1.0, r0);
    out.d_avg_q = -sigma;
    return out;
}

/**
 * delta = 0 vector field (-dx q/(1+eps c'), -dx(theta + eps q^2)) with the
 * contact closure: <q> obeys alpha d<q>/dt = -[[theta]] and is imposed as
 * the common discharge at both contact nodes, while theta at a contact node
 * rides the outgoing linearized Riemann invariant (first-order upwind).
 * Far-field rows at +-L are frozen.
 */
inline RhsEvaluation rhs_hyperbolic(const State& U, const Model& m, Real c0 = 0.05) {
    const Real eps = m.params.epsilon;
    const Real dx = m.grid.dx;
    const int n = m.grid.n_per_side;

    RhsEvaluation out;
    out.gamma_field = compute_Gamma(U, eps);
    out.dtheta = compute_Phi(U, eps, c0);
    out.dtheta *= -1.0;
    out.dq = out.gamma_field;
    out.dq *= -1.0;

    const Real dqi = -jump(U.theta) / m.params.alpha;  // common contact discharge rate

    // Contact node on E+ (segment start): the left-moving invariant q-theta
    // carries interior information to the boundary.
    {
        auto inv = [&](int i) {
            return U.q.from_boundary(Side::plus, i) - U.theta.from_boundary(Side::plus, i);
        };
        const Real dinv = (inv(1) - inv(0)) / dx;  // dt(q-theta) = +dx(q-theta)
        out.dq.from_boundary(Side::plus, 0) = dqi;
        out.dtheta.from_boundary(Side::plus, 0) = dqi - dinv;
    }
    // Contact node on E- (segment end): the right-moving invariant q+theta.
    {
        auto inv = [&](int i) {
            return U.q.from_boundary(Side::minus, i) + U.theta.from_boundary(Side::minus, i);
        };
        const Real dinv = -(inv(0) - inv(1)) / dx;  // dt(q+theta) = -dx(q+theta)
        out.dq.from_boundary(Side::minus, 0) = dqi;
        out.dtheta.from_boundary(Side::minus, 0) = dinv - dqi;
    }
    // Far field: homogeneous Dirichlet data held fixed.
    for (Side s : {Side::minus, Side::plus}) {
        out.dq.from_boundary(s, n - 1) = 0.0;
        out.dtheta.from_boundary(s, n - 1) = 0.0;
    }

    out.d_avg_q = dqi;
    return out;
}

// ---------------------------------------------------------------------------
// Trajectory diagnostics
// ---------------------------------------------------------------------------

using StateWindow = std::span<const State>;

namespace detail {

inline void require_uniform_dt(StateWindow w, std::size_t min_len) {
    if (w.size() < min_len) throw Error("state window too short");
    const Real dt = w[1].t - w[0].t;
    for (std::size_t i = 1; i + 1 < w.size(); ++i)
        if (std::abs((w[i + 1].t - w[i].t) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw Error("state window is not uniformly spaced in time");
}

}  // namespace detail

/// Residuals of the two transmission conditions over a stored window:
/// r1 = max |[[q]]|, r2 = |-delta^2 dt[[dx q]] + [[theta]] + alpha d<q>/dt|
/// with time derivatives by centered differences at the window's midpoint.
inline std::pair<Real, Real> transmission_residuals(StateWindow w, const Parameters& p) {
    detail::require_uniform_dt(w, 3);
    Real r1 = 0.0;
    for (const State& s : w) r1 = std::max(r1, std::abs(jump(s.q)));

    const std::size_t c = w.size() / 2;
    const std::size_t lo = c > 0 ? c - 1 : 0, hi = std::min(w.size() - 1, c + 1);
    const Real span_t = w[hi].t - w[lo].t;
    ExteriorField dq_dt = w[hi].q;
    dq_dt.axpy(-1.0, w[lo].q);
    dq_dt *= 1.0 / span_t;
    const Real davg = (average(w[hi].q) - average(w[lo].q)) / span_t;
    const Real r2 = std::abs(-p.delta * p.delta * contact_derivative_jump(dq_dt) +
                             jump(w[c].theta) + p.alpha * davg);
    return {r1, r2};
}

/**
 * Pointwise residual of the second-order oscillator equation satisfied by
 * Y = dx theta,
 *
 *   a0 delta^2 dtt Y + eps delta^2 a1 dt Y + (1 + eps delta a2) Y = chi + eps psi,
 *
 * evaluated in the equivalent flux grouping
 *   Gamma + (1 - delta^2 dxx) dt q,
 * which coincides with the Y form through the mass equation and keeps the
 * spatial operators identical to the solver's. Time derivatives are centered
 * at the window midpoint; resolved runs (dt << delta) drive this to
 * O(dt^2), under-resolved runs alias the 1/delta oscillations and blow it up.
 */
inline ExteriorField y_ode_residual(StateWindow w, const Parameters& p) {
    detail::require_uniform_dt(w, 5);
    const std::size_t c = w.size() / 2;
    const Real dt = w[c + 1].t - w[c].t;

    ExteriorField dq_dt = w[c + 1].q;
    dq_dt.axpy(-1.0, w[c - 1].q);
    dq_dt *= 1.0 / (2.0 * dt);

    State center = w[c];
    ExteriorField out = compute_Gamma(center, p.epsilon);
    out += apply_helmholtz(dq_dt, p.delta);
    return out;
}

}  // namespace bfloat
