/**
 * @file timestepper.hpp
 * @brief Explicit RK4 integration of the ODE form, run orchestration, and
 *        the stability/termination policy.
 *
 * The dispersive right-hand side is bounded (spectral radius ~ sqrt(C0)/delta
 * thanks to the Helmholtz smoothing), so the transport CFL bound
 * dt <= cfl dx / c_max is an accuracy rule rather than a hard stability
 * limit; it is enforced by default and can be overridden for coarse-in-time
 * oscillation diagnostics. Runs terminate either at t_final or when the
 * sup-norm monitor crosses its ceiling (the blow-up criterion).
 */

#pragma once

#include <deque>
#include <optional>

#include "bfloat/compat.hpp"
#include "bfloat/diagnostics.hpp"
#include "bfloat/dynamics.hpp"

namespace bfloat {

/// Classical 4-stage explicit step for an autonomous system. `adv(y, c, k)`
/// must return y + c*k.
template <class Y, class RHS, class ADV>
Y rk4_step_generic(const Y& y, Real dt, RHS&& f, ADV&& adv) {
    const auto k1 = f(y);
    const auto k2 = f(adv(y, 0.5 * dt, k1));
    const auto k3 = f(adv(y, 0.5 * dt, k2));
    const auto k4 = f(adv(y, dt, k3));
    Y out = adv(y, dt / 6.0, k1);
    out = adv(out, dt / 3.0, k2);
    out = adv(out, dt / 3.0, k3);
    out = adv(out, dt / 6.0, k4);
    return out;
}

namespace detail {

inline State advance_state(const State& U, Real c, const RhsEvaluation& k) {
    State out = U;
    out.theta.axpy(c, k.dtheta);
    out.q.axpy(c, k.dq);
    return out;
}

}  // namespace detail

/// One RK4 step of the transmission problem. Every stage's dq has zero jump
/// by construction, so [[q]] is preserved to rounding.
inline State step_rk4(const State& U, Real dt, const Model& m, Real c0 = 0.05) {
    auto f = [&](const State& s) {
        return m.helm ? rhs(s, m, c0) : rhs_hyperbolic(s, m, c0);
    };
    State out = rk4_step_generic(U, dt, f, detail::advance_state);
    out.t = U.t + dt;
    return out;
}

// ---------------------------------------------------------------------------
// Run orchestration
// ---------------------------------------------------------------------------

enum class RunMode { dispersive, hyperbolic };

struct RunConfig {
    Real t_final = 0.0;         // 0 -> tau/(eps+delta^2)
    Real tau = 0.5;             // horizon constant when t_final is derived
    Real dt = 0.0;              // 0 -> cfl * dx / c_max
    Real cfl = 0.9;
    bool enforce_cfl = true;    // override only for oscillation diagnostics
    bool y_diagnostics = false; // caps dt at delta/4 in dispersive mode
    int snapshot_stride = 50;
    Real monitor_ceiling = 1e3;
    RunMode mode = RunMode::dispersive;
    Real c0 = 0.05;
};

/// Linearized characteristic speed bound |eps q| + sqrt(eps^2 q^2 + sqrt(1+2 eps theta))
/// maximized over the initial data (never below 1).
inline Real estimate_c_max(const State& U, const Parameters& p) {
    Real c = 1.0;
    for (Side s : {Side::minus, Side::plus}) {
        const auto& th = U.theta.values(s);
        const auto& qv = U.q.values(s);
        for (std::size_t i = 0; i < th.size(); ++i) {
            const Real a = std::sqrt(std::max(0.0, 1.0 + 2.0 * p.epsilon * th[i]));
            const Real eq = p.epsilon * qv[i];
            c = std::max(c, std::abs(eq) + std::sqrt(eq * eq + a));
        }
    }
    return c;
}

/// Fill derived run quantities; throws ConfigError on violated step rules.
inline void finalize_run_config(RunConfig& cfg, const Parameters& p, const GridSpec& g,
                                const State& U0) {
    if (cfg.t_final <= 0.0) {
        const Real denom = p.epsilon + p.delta * p.delta;
        if (denom <= 0.0) throw ConfigError("t_final must be given when eps = delta = 0");
        cfg.t_final = cfg.tau / denom;
    }
    const Real c_max = estimate_c_max(U0, p);
    if (cfg.dt <= 0.0) {
        cfg.dt = cfg.cfl * g.dx / c_max;
        if (cfg.mode == RunMode::dispersive && cfg.y_diagnostics)
            cfg.dt = std::min(cfg.dt, p.delta / 4.0);
    } else if (cfg.enforce_cfl && cfg.dt > cfg.cfl * g.dx / c_max * (1.0 + 1e-12)) {
        throw ConfigError("dt exceeds the transport CFL rule; set enforce_cfl=false to override");
    }
    if (cfg.mode == RunMode::dispersive && cfg.y_diagnostics && cfg.dt > p.delta / 4.0 + 1e-14)
        throw ConfigError("y-ode diagnostics require dt <= delta/4");
}

struct RunResult {
    std::string status;       // "completed" or "blow-up criterion tripped at t=..."
    bool blew_up = false;
    Real stop_time = 0.0;
    long steps = 0;
    std::vector<State> snapshots;
    std::vector<EnergyRecord> energies;   // one per step (including t=0)
    Real r1_max = 0.0;                    // transmission residuals over the run
    Real r2_max = 0.0;
    State final_state;
};

/// Integrate to t_final or until the monitor trips, emitting snapshots every
/// stride and an EnergyRecord every step.
inline RunResult run(const RunConfig& cfg_in, const State& U_in, const Model& m) {
    RunConfig cfg = cfg_in;
    finalize_run_config(cfg, m.params, m.grid, U_in);
    validate_state(U_in, m.params, 1e-12, cfg.c0);

    const Real eps = m.params.epsilon;
    const long n_steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-12));

    RunResult res;
    res.status = "completed";
    State U = U_in;
    std::deque<State> window;  // trailing states for time-derivative diagnostics

    auto uniform_tail = [&](std::size_t len) {
        if (window.size() < len) return false;
        const auto begin = window.end() - len;
        const Real dt0 = (begin + 1)->t - begin->t;
        for (std::size_t i = 1; i + 1 < len; ++i)
            if (std::abs(((begin + i + 1)->t - (begin + i)->t) - dt0) > 1e-9 * dt0)
                return false;  // the final clamped step breaks uniformity
        return true;
    };


    auto record = [&](const State& s, const RhsEvaluation& eval) {
        EnergyRecord rec;
        rec.t = s.t;
        ExteriorField zeta(s.theta.grid());
        for (Side sd : {Side::minus, Side::plus}) {
            const auto& th = s.theta.values(sd);
            auto& z = zeta.values(sd);
            for (std::size_t i = 0; i < th.size(); ++i) z[i] = theta_to_zeta(th[i], eps);
        }
        const ExteriorEnergy ee = energy_exterior(zeta, s.q, eval.dq, m.params);
        rec.e_ext = ee.e;
        rec.e_int = energy_interior(average(s.q), m.params);
        rec.e_tot = rec.e_ext + rec.e_int;
        rec.flux_jump = ee.flux_plus - ee.flux_minus;
        rec.m0 = blowup_monitor(s, eps);
        rec.layer_width = layer_width(s.q, Side::plus, m.params.delta);
        if (uniform_tail(5)) {
            std::vector<State> w(window.end() - 5, window.end());
            rec.frakE = frak_E(w, m.params);
        }
        res.energies.push_back(rec);
        return rec.m0;
    };

    auto push_window = [&](const State& s) {
        window.push_back(s);
        if (window.size() > 5) window.pop_front();
        if (uniform_tail(3)) {
            std::vector<State> w(window.end() - 3, window.end());
            const auto [r1, r2] = transmission_residuals(w, m.params);
            res.r1_max = std::max(res.r1_max, r1);
            res.r2_max = std::max(res.r2_max, r2);
        }
    };

    try {
        push_window(U);
        {
            const RhsEvaluation ev =
                m.helm ? rhs(U, m, cfg.c0) : rhs_hyperbolic(U, m, cfg.c0);
            const Real m0 = record(U, ev);
            if (!std::isfinite(m0) || m0 >= cfg.monitor_ceiling)
                throw BlowupSignal("initial data already beyond the monitor ceiling", U.t);
        }
        res.snapshots.push_back(U);

        for (long k = 0; k < n_steps; ++k) {
            const Real dt = std::min(cfg.dt, cfg.t_final - U.t);
            if (dt <= 0.0) break;
            U = step_rk4(U, dt, m, cfg.c0);
            ++res.steps;
            push_window(U);

            const RhsEvaluation ev =
                m.helm ? rhs(U, m, cfg.c0) : rhs_hyperbolic(U, m, cfg.c0);
            const Real m0 = record(U, ev);
            if (!std::isfinite(m0) || m0 >= cfg.monitor_ceiling)
                throw BlowupSignal("monitor ceiling crossed", U.t);

            if (res.steps % cfg.snapshot_stride == 0) res.snapshots.push_back(U);
        }
    } catch (const BlowupSignal& sig) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "blow-up criterion tripped at t=%.12g", sig.time);
        res.status = buf;
        res.blew_up = true;
    }

    if (res.snapshots.empty() || res.snapshots.back().t != U.t) res.snapshots.push_back(U);
    res.stop_time = U.t;
    res.final_state = std::move(U);
    return res;
}

}  // namespace bfloat
