/**
 * @file compat.hpp
 * @brief Time-derivative ladders of the initial data, the exact (nonlocal)
 *        and approximate (boundary-Taylor) compatibility checks, their
 *        delta = 0 hyperbolic degeneration, and generators of compatible
 *        initial data.
 *
 * Both ladders follow the induction
 *     theta_{j+1} = -dt^j Phi|_{t=0},   q_{j+1} = -R(dt^j Gamma|_{t=0}, [[theta_j]]),
 * the exact one on grid fields, the approximate one on boundary Taylor
 * coefficients with R replaced by its truncated Neumann expansion. The time
 * derivatives of Phi = sqrt(1+2 eps theta) * dx q and Gamma = dx(theta+eps q^2)
 * are expanded by product-rule convolutions over the ladder entries; the
 * square root is generated by the quadratic recursion for b = sqrt(1+2 eps theta),
 * which is exact at machine precision and avoids expression swell.
 */

#pragma once

#include <array>
#include <cstdio>

#include "bfloat/core.hpp"
#include "bfloat/dynamics.hpp"
#include "bfloat/elliptic.hpp"

namespace bfloat {

namespace detail {

inline Real binom(int n, int k) {
    Real acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Exact ladder (grid fields)
// ---------------------------------------------------------------------------

/// Initial values of the time derivatives U_j = dt^j (theta,q)|_{t=0},
/// j = 0..n+1, built by the induction (never by time stepping), together
/// with the averages <q_j>.
struct DerivativeLadder {
    int n = 0;
    std::vector<ExteriorField> theta;  // size n+2
    std::vector<ExteriorField> q;      // size n+2
    std::vector<Real> avg_q;           // size n+2
};

inline DerivativeLadder exact_ladder(const State& U_in, int n, const Model& m) {
    if (!m.helm) throw Error("exact_ladder: delta = 0, ladder requires the dispersive path");
    if (std::abs(jump(U_in.q)) > 1e-10)
        throw Error("exact_ladder: initial discharge jump must vanish");
    const Real eps = m.params.epsilon;
    const Real delta = m.params.delta;
    const GridSpec& g = m.grid;
    const int levels = n + 2;

    DerivativeLadder lad;
    lad.n = n;
    lad.theta.assign(levels, ExteriorField(g));
    lad.q.assign(levels, ExteriorField(g));
    lad.avg_q.assign(levels, 0.0);
    lad.theta[0] = U_in.theta;
    lad.q[0] = U_in.q;
    lad.avg_q[0] = average(U_in.q);

    // b_j = dt^j sqrt(1+2 eps theta)|_{t=0}, filled level by level.
    std::vector<ExteriorField> b(levels, ExteriorField(g));
    auto fill_b = [&](int j) {
        for (Side s : {Side::minus, Side::plus}) {
            const int nn = g.n_per_side;
            auto& bj = b[j].values(s);
            const auto& thj = lad.theta[j].values(s);
            for (int i = 0; i < nn; ++i) {
                if (j == 0) {
                    const Real disc = 1.0 + 2.0 * eps * thj[i];
                    if (!(disc > 0.0))
                        throw Error("exact_ladder: 1+2*eps*theta not positive");
                    bj[i] = std::sqrt(disc);
                } else {
                    Real inner = 0.0;
                    for (int l = 1; l < j; ++l)
                        inner += detail::binom(j, l) * b[l].values(s)[i] *
                                 b[j - l].values(s)[i];
                    bj[i] = (2.0 * eps * thj[i] - inner) / (2.0 * b[0].values(s)[i]);
                }
            }
        }
    };

    for (int j = 0; j <= n; ++j) {
        fill_b(j);

        // Phi_j = sum_m C(j,m) b_m dx q_{j-m}
        ExteriorField phi(g);
        for (int mm = 0; mm <= j; ++mm) {
            ExteriorField dq = derivative(lad.q[j - mm]);
            const Real cjm = detail::binom(j, mm);
            for (Side s : {Side::minus, Side::plus}) {
                auto& pv = phi.values(s);
                const auto& bv = b[mm].values(s);
                const auto& dv = dq.values(s);
                for (std::size_t i = 0; i < pv.size(); ++i) pv[i] += cjm * bv[i] * dv[i];
            }
        }

        // Gamma_j = dx(theta_j + eps sum_m C(j,m) q_m q_{j-m})
        ExteriorField inner = lad.theta[j];
        for (int mm = 0; mm <= j; ++mm) {
            const Real cjm = eps * detail::binom(j, mm);
            for (Side s : {Side::minus, Side::plus}) {
                auto& iv = inner.values(s);
                const auto& a = lad.q[mm].values(s);
                const auto& c = lad.q[j - mm].values(s);
                for (std::size_t i = 0; i < iv.size(); ++i) iv[i] += cjm * a[i] * c[i];
            }
        }
        ExteriorField gamma = derivative(inner);

        ExteriorField r0 = m.helm->solve_R0(gamma);
        const Real sigma = (delta * delta * contact_derivative_jump(r0) +
                            jump(lad.theta[j])) /
                           (m.params.alpha + 2.0 * delta);
        lad.theta[j + 1] = phi;
        lad.theta[j + 1] *= -1.0;
        lad.q[j + 1] = boundary_layer(-sigma, delta, g);
        lad.q[j + 1].axpy(-1.0, r0);
        lad.avg_q[j + 1] = -sigma;
    }
    return lad;
}

// ---------------------------------------------------------------------------
// Approximate ladder (boundary Taylor data)
// ---------------------------------------------------------------------------

/// Plain one-sided Taylor traces dx^k (theta,q) at the two contact points,
/// k = 0..n. Either measured from a State or supplied directly.
struct BoundaryTraces {
    int n = 0;
    // [side][k], side 0 = minus, side 1 = plus
    std::array<std::vector<Real>, 2> theta;
    std::array<std::vector<Real>, 2> q;

    static BoundaryTraces from_state(const State& U, int n, Real delta) {
        BoundaryTraces out;
        out.n = n;
        for (Side s : {Side::minus, Side::plus}) {
            TraceSet th(U.theta, s, n, delta);
            TraceSet qq(U.q, s, n, delta);
            auto& tv = out.theta[s == Side::plus ? 1 : 0];
            auto& qv = out.q[s == Side::plus ? 1 : 0];
            tv.resize(n + 1);
            qv.resize(n + 1);
            for (int k = 0; k <= n; ++k) {
                tv[k] = th.derivative_trace(k);
                qv[k] = qq.derivative_trace(k);
            }
        }
        return out;
    }
};

/// Hat entries U^_{j,k} ~ dx^k dt^j U|_{t=0,x=+-R} for j+k <= n, defined by
/// the local induction with the Neumann-expanded inverse. Polynomial in
/// delta, hence valid down to delta = 0 where it becomes the classical
/// hyperbolic recursion.
struct TaylorLadder {
    int n = 0;
    Real delta = 0.0;
    // [side](j,k) flattened as j*(n+1)+k, valid for j+k <= n
    std::array<std::vector<Real>, 2> theta_hat;
    std::array<std::vector<Real>, 2> q_hat;

    Real th(Side s, int j, int k) const {
        return theta_hat[s == Side::plus ? 1 : 0][j * (n + 1) + k];
    }
    Real qh(Side s, int j, int k) const {
        return q_hat[s == Side::plus ? 1 : 0][j * (n + 1) + k];
    }
    /// q^_{j,k} with the out-of-range convention: an exhausted Neumann
    /// expansion is the empty sum, i.e. zero.
    Real qh_or_zero(Side s, int j, int k) const {
        return j + k <= n ? qh(s, j, k) : 0.0;
    }
};

inline TaylorLadder taylor_ladder(const BoundaryTraces& tr, int n, const Parameters& p) {
    if (tr.n < n) throw Error("taylor_ladder: traces do not reach order n");
    const Real eps = p.epsilon;
    const Real delta = p.delta;
    const int w = n + 1;

    TaylorLadder lad;
    lad.n = n;
    lad.delta = delta;
    for (auto& v : lad.theta_hat) v.assign(w * w, 0.0);
    for (auto& v : lad.q_hat) v.assign(w * w, 0.0);

    for (int side = 0; side < 2; ++side) {
        auto& th = lad.theta_hat[side];
        auto& qh = lad.q_hat[side];
        std::vector<Real> bh(w * w, 0.0);   // dt^m dx^i sqrt(1+2 eps theta)
        auto at = [w](int j, int k) { return j * w + k; };

        for (int k = 0; k <= n; ++k) {
            th[at(0, k)] = tr.theta[side][k];
            qh[at(0, k)] = tr.q[side][k];
        }

        // b-hat over total degree; needs theta-hat rows as they appear.
        auto fill_b_row = [&](int m) {
            for (int i = 0; m + i <= n; ++i) {
                if (m == 0 && i == 0) {
                    const Real disc = 1.0 + 2.0 * eps * th[at(0, 0)];
                    if (!(disc > 0.0))
                        throw Error("taylor_ladder: 1+2*eps*theta not positive at the contact point");
                    bh[at(0, 0)] = std::sqrt(disc);
                    continue;
                }
                Real inner = 0.0;
                for (int mp = 0; mp <= m; ++mp)
                    for (int ip = 0; ip <= i; ++ip) {
                        if ((mp == 0 && ip == 0) || (mp == m && ip == i)) continue;
                        inner += detail::binom(m, mp) * detail::binom(i, ip) *
                                 bh[at(mp, ip)] * bh[at(m - mp, i - ip)];
                    }
                bh[at(m, i)] = (2.0 * eps * th[at(m, i)] - inner) / (2.0 * bh[at(0, 0)]);
            }
        };

        // Phi^_{j,k} = sum_{m<=j} sum_{i<=k} C(j,m) C(k,i) b^_{m,i} q^_{j-m,k-i+1}
        auto phi_hat = [&](int j, int k) {
            Real acc = 0.0;
            for (int mm = 0; mm <= j; ++mm)
                for (int i = 0; i <= k; ++i)
                    acc += detail::binom(j, mm) * detail::binom(k, i) * bh[at(mm, i)] *
                           qh[at(j - mm, k - i + 1)];
            return acc;
        };
        // Gamma^_{j,k} = theta^_{j,k+1} + eps dt^j dx^{k+1}(q^2) via convolution
        auto gamma_hat = [&](int j, int k) {
            Real acc = th[at(j, k + 1)];
            for (int mm = 0; mm <= j; ++mm)
                for (int i = 0; i <= k + 1; ++i)
                    acc += eps * detail::binom(j, mm) * detail::binom(k + 1, i) *
                           qh[at(mm, i)] * qh[at(j - mm, k + 1 - i)];
            return acc;
        };

        std::vector<Real> gh(w * w, 0.0);
        for (int j = 0; j < n; ++j) {
            fill_b_row(j);
            for (int k = 0; k + j < n; ++k) gh[at(j, k)] = gamma_hat(j, k);
            for (int k = 0; k + j < n; ++k) {
                th[at(j + 1, k)] = -phi_hat(j, k);
                Real acc = 0.0, d2l = 1.0;
                for (int l = 0; 2 * l < n - k - j; ++l, d2l *= delta * delta)
                    acc += d2l * gh[at(j, k + 2 * l)];
                qh[at(j + 1, k)] = -acc;
            }
        }
    }
    return lad;
}

inline TaylorLadder taylor_ladder(const State& U_in, int n, const Parameters& p) {
    return taylor_ladder(BoundaryTraces::from_state(U_in, n, p.delta), n, p);
}

// ---------------------------------------------------------------------------
// Compatibility reports
// ---------------------------------------------------------------------------

enum class CompatMode { exact, approximate, hyperbolic };

/// Per-order residuals of the two transmission conditions against the
/// thresholds M delta^(n-j-1/2).
struct CompatReport {
    struct Row {
        int j = 0;
        Real r1 = 0.0;
        Real r2 = 0.0;
        Real threshold = 0.0;
        bool pass = false;
    };
    CompatMode mode = CompatMode::exact;
    int n = 0;
    Real delta = 0.0;
    Real M = 0.0;
    std::vector<Row> rows;
    bool pass = true;

    std::string to_json() const {
        const char* mode_name = mode == CompatMode::exact          ? "exact"
                                : mode == CompatMode::approximate ? "approximate"
                                                                   : "hyperbolic";
        char buf[256];
        std::string out = "{";
        std::snprintf(buf, sizeof buf, "\"mode\":\"%s\",\"n\":%d,\"delta\":%.17g,\"M\":%.17g,",
                      mode_name, n, delta, M);
        out += buf;
        out += "\"rows\":[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const Row& r = rows[i];
            std::snprintf(buf, sizeof buf,
                          "%s{\"j\":%d,\"r1\":%.17g,\"r2\":%.17g,\"threshold\":%.17g,\"pass\":%s}",
                          i ? "," : "", r.j, r.r1, r.r2, r.threshold, r.pass ? "true" : "false");
            out += buf;
        }
        out += "],\"pass\":";
        out += pass ? "true" : "false";
        out += "}";
        return out;
    }
};

/// Default threshold constant: M = 10 (||U_in||_{H^{n+1}} + 1).
inline Real default_threshold_M(const State& U_in, int n) {
    const Real nrm = std::sqrt(std::pow(sobolev_norm(U_in.theta, n + 1), 2) +
                               std::pow(sobolev_norm(U_in.q, n + 1), 2));
    return 10.0 * (nrm + 1.0);
}

inline Real compat_threshold(Real M, Real delta, int n, int j) {
    return delta > 0.0 ? M * std::pow(delta, n - j - 0.5) : 0.0;
}

/// Exact conditions on the field ladder:
///   r1 = |[[q_{j+1}]]|,  r2 = |alpha <q_{j+1}> + [[theta_j]] - delta^2 [[dx q_{j+1}]]|.
inline CompatReport check_exact(const DerivativeLadder& lad, Real M, int n,
                                const Parameters& p) {
    if (lad.n < n) throw Error("check_exact: ladder not deep enough");
    CompatReport rep;
    rep.mode = CompatMode::exact;
    rep.n = n;
    rep.delta = p.delta;
    rep.M = M;
    for (int j = 0; j < n; ++j) {
        CompatReport::Row row;
        row.j = j;
        row.r1 = std::abs(jump(lad.q[j + 1]));
        row.r2 = std::abs(p.alpha * average(lad.q[j + 1]) + jump(lad.theta[j]) -
                          p.delta * p.delta * contact_derivative_jump(lad.q[j + 1]));
        row.threshold = compat_threshold(M, p.delta, n, j);
        row.pass = row.r1 <= row.threshold && row.r2 <= row.threshold;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

/// Approximate (local) conditions on the Taylor ladder:
///   r1 = |[[q^_{j+1,0}]]|,
///   r2 = |alpha <q^_{j+1,0}> + [[theta^_{j,0}]] - delta^2 [[q^_{j+1,1}]]|.
/// Valid down to delta = 0, where they are the hyperbolic corner conditions.
inline CompatReport check_approx(const TaylorLadder& lad, Real M, int n,
                                 const Parameters& p) {
    if (lad.n < n) throw Error("check_approx: ladder not deep enough");
    CompatReport rep;
    rep.mode = p.delta > 0.0 ? CompatMode::approximate : CompatMode::hyperbolic;
    rep.n = n;
    rep.delta = p.delta;
    rep.M = M;
    for (int j = 0; j < n; ++j) {
        CompatReport::Row row;
        row.j = j;
        const Real qj = lad.qh(Side::plus, j + 1, 0) - lad.qh(Side::minus, j + 1, 0);
        const Real qa = 0.5 * (lad.qh(Side::plus, j + 1, 0) + lad.qh(Side::minus, j + 1, 0));
        const Real tj = lad.th(Side::plus, j, 0) - lad.th(Side::minus, j, 0);
        const Real dqj =
            lad.qh_or_zero(Side::plus, j + 1, 1) - lad.qh_or_zero(Side::minus, j + 1, 1);
        row.r1 = std::abs(qj);
        row.r2 = std::abs(p.alpha * qa + tj - p.delta * p.delta * dqj);
        row.threshold = compat_threshold(M, p.delta, n, j);
        row.pass = row.r1 <= row.threshold && row.r2 <= row.threshold;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Scenario generators
// ---------------------------------------------------------------------------

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
inline Real smoothstep_cinf(Real s) {
    auto psi = [](Real u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; };
    const Real a = psi(s), b = psi(1.0 - s);
    return a / (a + b);
}

struct ScenarioSpec {
    std::string kind = "rest";
    Real amplitude = 0.08;
    Real center = 7.0;   // |x| of the pulse center
    Real width = 1.2;    // Gaussian width
    Real margin = 1.0;   // cutoff: zero within margin of +-R, full by 2*margin
};

/// Initial data for a named scenario. The compatible kinds multiply Gaussian
/// pulses by a C-infinity cutoff vanishing on [+-R, +-(R+margin)], so every
/// boundary Taylor trace is exactly zero; "boundary-jump" is deliberately
/// incompatible ([[theta]] = amplitude, q = 0).
inline State generate_scenario(const ScenarioSpec& sc, const GridSpec& g) {
    State U = State::rest(g);
    auto gauss = [&](Real x, Real c) {
        const Real z = (x - c) / sc.width;
        return std::exp(-0.5 * z * z);
    };
    auto cutoff = [&](Real dist_from_contact) {
        return smoothstep_cinf((dist_from_contact - sc.margin) / sc.margin);
    };

    if (sc.kind == "rest") return U;

    if (sc.kind == "pulse-right") {
        for (Side s : {Side::minus, Side::plus})
            for (int i = 0; i < g.n_per_side; ++i) {
                const Real x = s == Side::plus ? g.R + i * g.dx : -g.R - i * g.dx;
                const Real v = sc.amplitude * gauss(x, sc.center) * cutoff(i * g.dx);
                U.theta.from_boundary(s, i) = v;
                U.q.from_boundary(s, i) = v;  // unit-speed right mover
            }
        return U;
    }

    if (sc.kind == "colliding-pulses") {
        for (Side s : {Side::minus, Side::plus})
            for (int i = 0; i < g.n_per_side; ++i) {
                const Real x = s == Side::plus ? g.R + i * g.dx : -g.R - i * g.dx;
                const Real gp = gauss(x, sc.center), gm = gauss(x, -sc.center);
                const Real cut = cutoff(i * g.dx);
                U.theta.from_boundary(s, i) = sc.amplitude * (gp + gm) * cut;
                // outer pulses travel toward the obstacle
                U.q.from_boundary(s, i) = sc.amplitude * (gm - gp) * cut;
            }
        return U;
    }

    if (sc.kind == "theta-jump") {
        // pure elevation jump, no initial discharge; the cleanest driver of
        // the dispersive boundary layer
        for (int i = 0; i < g.n_per_side; ++i) {
            const Real s = i * g.dx;
            U.theta.from_boundary(Side::plus, i) =
                sc.amplitude * std::exp(-0.5 * (s / sc.width) * (s / sc.width));
        }
        return U;
    }

    if (sc.kind == "boundary-jump") {
        // [[theta]] = amplitude at t = 0, with odd content at the contact
        // points so the mismatch feeds every ladder level; q is continuous
        // (odd in x) and vanishes at +-R.
        for (int i = 0; i < g.n_per_side; ++i) {
            const Real s = i * g.dx;
            const Real G = std::exp(-0.5 * (s / sc.width) * (s / sc.width));
            U.theta.from_boundary(Side::plus, i) =
                sc.amplitude * (1.0 + s / sc.width) * G;
            U.q.from_boundary(Side::plus, i) = 0.5 * sc.amplitude * (s / sc.width) * G;
            U.q.from_boundary(Side::minus, i) = -0.5 * sc.amplitude * (s / sc.width) * G;
        }
        return U;
    }

    throw ConfigError("unknown scenario kind '" + sc.kind + "'");
}

/// Compatible-by-construction data only.
inline State generate_compatible(const std::string& kind, const Parameters& p,
                                 const GridSpec& g, ScenarioSpec sc = {}) {
    (void)p;
    if (kind != "rest" && kind != "pulse-right" && kind != "colliding-pulses")
        throw ConfigError("generate_compatible: scenario '" + kind + "' is not compatible data");
    sc.kind = kind;
    return generate_scenario(sc, g);
}

}  // namespace bfloat
