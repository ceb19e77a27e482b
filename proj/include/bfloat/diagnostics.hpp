/**
 * @file diagnostics.hpp
 * @brief Conserved and monitored quantities: exterior/interior energies and
 *        fluxes, the linearized energy, the truncated time-derivative energy,
 *        the blow-up monitor, the boundary-layer width fit, and the interior
 *        pressure reconstruction.
 *
 * The physical energies are stated in (zeta, q) variables; callers convert
 * theta -> zeta with theta_to_zeta. Everything here is a pure function.
 */

#pragma once

#include "bfloat/core.hpp"
#include "bfloat/dynamics.hpp"

namespace bfloat {

struct EnergyRecord {
    Real t = 0.0;
    Real e_ext = 0.0;       // int of zeta^2/2 + eps zeta^3/6 + q^2/2 + mu (dx q)^2/6
    Real e_int = 0.0;       // int of zeta_w^2/2 + <q>^2/(2 h_w)
    Real e_tot = 0.0;
    Real flux_jump = 0.0;   // [[F_ext]]
    Real m0 = 0.0;          // sup-norm blow-up monitor
    Real layer_width = std::numeric_limits<Real>::quiet_NaN();
    Real frakE = std::numeric_limits<Real>::quiet_NaN();  // needs a 5-state window
};

struct ExteriorEnergy {
    Real e = 0.0;
    Real flux_plus = 0.0;   // F_ext at +R
    Real flux_minus = 0.0;  // F_ext at -R
};

/// Exterior density and flux, fields already in (zeta, q) variables; dt q is
/// supplied by the caller (one rhs evaluation).
inline ExteriorEnergy energy_exterior(const ExteriorField& zeta, const ExteriorField& q,
                                      const ExteriorField& dq_dt, const Parameters& p) {
    const Real eps = p.epsilon, mu = p.mu;
    ExteriorField dens(zeta.grid());
    ExteriorField dqx = derivative(q);
    for (Side s : {Side::minus, Side::plus}) {
        const auto& z = zeta.values(s);
        const auto& qv = q.values(s);
        const auto& dx = dqx.values(s);
        auto& d = dens.values(s);
        for (std::size_t i = 0; i < z.size(); ++i)
            d[i] = 0.5 * z[i] * z[i] + eps * z[i] * z[i] * z[i] / 6.0 +
                   0.5 * qv[i] * qv[i] + mu * dx[i] * dx[i] / 6.0;
    }
    ExteriorField dtq_x = derivative(dq_dt);
    auto flux = [&](Side s) {
        const Real z = zeta.trace(s), qv = q.trace(s), dd = dtq_x.trace(s);
        return qv * (z + eps * (2.0 / 3.0) * qv * qv + 0.5 * eps * z * z - (mu / 3.0) * dd);
    };
    return {integrate(dens), flux(Side::plus), flux(Side::minus)};
}

/// int_{-R}^{R} [ zeta_w^2/2 + <q>^2/(2 h_w) ]; the discharge term is
/// <q>^2 alpha / 2 by the definition of alpha.
inline Real energy_interior(Real avg_q, const Parameters& p) {
    const Real zw2 = detail::simpson(
        [&](Real x) {
            const Real z = p.zeta_w(x);
            return 0.5 * z * z;
        },
        -p.R, p.R, 201);
    return zw2 + 0.5 * avg_q * avg_q * p.alpha;
}

/// Quadratic energy of the linearized system around a reference state:
/// E = 1/2 int (1+eps c'(ref)) theta^2 + q^2 + delta^2 (dx q)^2 + alpha <q>^2 / 2.
inline Real linearized_energy(const State& U, Real avg_q, const State& ref,
                              const Parameters& p) {
    ExteriorField dqx = derivative(U.q);
    ExteriorField dens(U.theta.grid());
    for (Side s : {Side::minus, Side::plus}) {
        const auto& th = U.theta.values(s);
        const auto& qv = U.q.values(s);
        const auto& dq = dqx.values(s);
        const auto& rf = ref.theta.values(s);
        auto& d = dens.values(s);
        for (std::size_t i = 0; i < th.size(); ++i) {
            const Real w = 1.0 + p.epsilon * c_prime_of_theta(rf[i], p.epsilon);
            d[i] = 0.5 * (w * th[i] * th[i] + qv[i] * qv[i] +
                          p.delta * p.delta * dq[i] * dq[i]);
        }
    }
    return integrate(dens) + 0.5 * p.alpha * avg_q * avg_q;
}

/// m0 = max sup-norm of (theta, q, dx q, 1/(1+eps c'(theta))). The last
/// entry equals sqrt(1+2 eps theta) and diverges as the evolution
/// degenerates; rest state gives exactly 1.
inline Real blowup_monitor(const State& U, Real eps) {
    Real m = 0.0;
    for (Side s : {Side::minus, Side::plus}) {
        for (Real v : U.theta.values(s)) {
            m = std::max(m, std::abs(v));
            const Real disc = 1.0 + 2.0 * eps * v;
            if (!(disc > 0.0)) return std::numeric_limits<Real>::infinity();
            m = std::max(m, std::sqrt(disc));
        }
        for (Real v : U.q.values(s)) m = std::max(m, std::abs(v));
    }
    ExteriorField dq = derivative(U.q);
    m = std::max(m, dq.max_abs());
    return m;
}

/// Truncated time-derivative energy
///   sum_{j<=2} ||dt^j U||^2 + delta^2 ||dt^j dx q||^2 + alpha <dt^j q>^2
/// with centered differences at the midpoint of a uniform window (>= 5 states).
inline Real frak_E(StateWindow w, const Parameters& p) {
    detail::require_uniform_dt(w, 5);
    const std::size_t c = w.size() / 2;
    const Real dt = w[c + 1].t - w[c].t;

    auto contribution = [&](const ExteriorField& th, const ExteriorField& q, Real avg) {
        return l2_norm_sq(th) + l2_norm_sq(q) +
               p.delta * p.delta * l2_norm_sq(derivative(q)) + p.alpha * avg * avg;
    };

    Real acc = contribution(w[c].theta, w[c].q, average(w[c].q));
    {
        ExteriorField th = w[c + 1].theta;
        th.axpy(-1.0, w[c - 1].theta);
        th *= 1.0 / (2.0 * dt);
        ExteriorField q = w[c + 1].q;
        q.axpy(-1.0, w[c - 1].q);
        q *= 1.0 / (2.0 * dt);
        acc += contribution(th, q, average(q));
    }
    {
        ExteriorField th = w[c + 1].theta;
        th.axpy(-2.0, w[c].theta);
        th += w[c - 1].theta;
        th *= 1.0 / (dt * dt);
        ExteriorField q = w[c + 1].q;
        q.axpy(-2.0, w[c].q);
        q += w[c - 1].q;
        q *= 1.0 / (dt * dt);
        acc += contribution(th, q, average(q));
    }
    return acc;
}

/// Least-squares e-folding length of |dx q - far slope| over the first
/// max(8, 4 delta/dx) nodes from the contact point. Returns NaN when the
/// signal sits below the noise floor ("no layer").
inline Real layer_width(const ExteriorField& q, Side side, Real delta) {
    const GridSpec& g = q.grid();
    ExteriorField dq = derivative(q);
    const int nw = std::max(8, static_cast<int>(std::ceil(4.0 * delta / g.dx)));
    if (nw + 1 >= g.n_per_side) return std::numeric_limits<Real>::quiet_NaN();

    // smooth background slope, sampled beyond the layer so the subtraction
    // does not bend the fit inside the window
    const Real far = dq.from_boundary(side, std::min(2 * nw, g.n_per_side - 1));
    Real peak = 0.0;
    for (int i = 0; i < nw; ++i)
        peak = std::max(peak, std::abs(dq.from_boundary(side, i) - far));
    if (peak < 1e-12) return std::numeric_limits<Real>::quiet_NaN();

    // linear fit of log|dx q - far| against distance from the boundary
    Real sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (int i = 0; i < nw; ++i) {
        const Real v = std::abs(dq.from_boundary(side, i) - far);
        if (v < 1e-300) continue;
        const Real x = i * g.dx, y = std::log(v);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt < 3) return std::numeric_limits<Real>::quiet_NaN();
    const Real slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    // at least one e-fold across the window, otherwise there is no layer
    if (!(slope * (nw * g.dx) < -1.0)) return std::numeric_limits<Real>::quiet_NaN();
    return -1.0 / slope;
}

/// Interior pressure head P_i + zeta_w on [-R,R]:
///   P_i(x) + zeta_w(x) = C - (d<q>/dt) int_{-R}^x dy/h_w,
/// with C fixed by flux continuity at the left contact point, so the flux
/// q_i (zeta_w + P_i) matches the exterior energy flux there.
struct InteriorPressure {
    std::vector<Real> x;
    std::vector<Real> head;  // P_i + zeta_w
    Real drop() const { return head.back() - head.front(); }
};

inline InteriorPressure interior_pressure(Real avg_q_dot, const State& U,
                                          const ExteriorField& dq_dt, const Parameters& p,
                                          int nodes = 801) {
    const Real eps = p.epsilon, mu = p.mu;
    // exterior trace of zeta + eps/2 zeta^2 + 2/3 eps q^2 - mu/3 dx dt q at -R
    ExteriorField dtq_x = derivative(dq_dt);
    const Real z = theta_to_zeta(U.theta.trace(Side::minus), eps);
    const Real qv = U.q.trace(Side::minus);
    const Real C = z + 0.5 * eps * z * z + (2.0 / 3.0) * eps * qv * qv -
                   (mu / 3.0) * dtq_x.trace(Side::minus);

    InteriorPressure out;
    out.x.resize(nodes);
    out.head.resize(nodes);
    const Real h = 2.0 * p.R / (nodes - 1);
    Real cum = 0.0;
    Real prev = 1.0 / (1.0 + eps * p.zeta_w(-p.R));
    for (int i = 0; i < nodes; ++i) {
        const Real x = -p.R + i * h;
        const Real cur = 1.0 / (1.0 + eps * p.zeta_w(x));
        if (i > 0) cum += 0.5 * (prev + cur) * h;
        prev = cur;
        out.x[i] = x;
        out.head[i] = C - avg_q_dot * cum;
    }
    return out;
}

}  // namespace bfloat
