#include <catch2/catch_amalgamated.hpp>

#include "bfloat/timestepper.hpp"

using namespace bfloat;

namespace {

Model pulse_model(Real eps, Real delta, Real L = 14.0) {
    Parameters p = Parameters::from_delta(eps, delta, 1.0);
    const int n = static_cast<int>(std::ceil((L - p.R) / (delta / 4.0))) + 1;
    return Model::dispersive(p, GridSpec(p.R, L, n));
}

State pulse_state(const GridSpec& g, Real amp = 0.1) {
    ScenarioSpec sc;
    sc.kind = "pulse-right";
    sc.amplitude = amp;
    sc.center = 6.0;
    sc.width = 1.0;
    sc.margin = 1.0;
    return generate_scenario(sc, g);
}

}  // namespace

TEST_CASE("the generic RK4 kernel reproduces the classical exponential value") {
    // u' = -u, u(0) = 1, one step dt = 0.1: truncated series value 0.9048375
    const Real u1 = rk4_step_generic(
        1.0, 0.1, [](Real u) { return -u; },
        [](Real u, Real c, Real k) { return u + c * k; });
    CHECK(u1 == Catch::Approx(0.9048375).epsilon(1e-12));
    CHECK(std::abs(u1 - std::exp(-0.1)) < 2e-7);  // 4th-order local error
}

TEST_CASE("rest state is a fixed point of the stepper") {
    Model m = pulse_model(0.3, 0.25);
    State rest = State::rest(m.grid);
    State next = step_rk4(rest, 0.01, m);
    CHECK(next.theta.max_abs() == 0.0);
    CHECK(next.q.max_abs() == 0.0);
    CHECK(next.t == Catch::Approx(0.01));
}

TEST_CASE("discharge jump stays at rounding level over 1e4 steps") {
    Parameters p = Parameters::from_delta(0.2, 0.3, 1.0);
    GridSpec g(1.0, 9.0, 161);  // coarse-in-space long run
    Model m = Model::dispersive(p, g);
    ScenarioSpec sc;
    sc.kind = "colliding-pulses";
    sc.amplitude = 0.1;
    sc.center = 4.5;
    sc.width = 1.0;
    sc.margin = 0.8;
    State U = generate_scenario(sc, g);
    const Real dt = 0.2 * g.dx;
    Real worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
        U = step_rk4(U, dt, m);
        worst = std::max(worst, std::abs(jump(U.q)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("self-convergence at order 4 in dt") {
    Model m = pulse_model(0.2, 0.3, 12.0);
    State U0 = pulse_state(m.grid, 0.12);
    const Real T = 0.4;

    auto advance = [&](Real dt) {
        State U = U0;
        const long n = std::lround(T / dt);
        for (long k = 0; k < n; ++k) U = step_rk4(U, dt, m);
        return U;
    };
    State a = advance(T / 8), b = advance(T / 16), c = advance(T / 32);

    auto dist = [](const State& x, const State& y) {
        ExteriorField dth = x.theta;
        dth.axpy(-1.0, y.theta);
        ExteriorField dq = x.q;
        dq.axpy(-1.0, y.q);
        return std::max(dth.max_abs(), dq.max_abs());
    };
    const Real e1 = dist(a, b), e2 = dist(b, c);
    CHECK(std::log2(e1 / e2) == Catch::Approx(4.0).margin(0.5));
}

TEST_CASE("reflection symmetry is preserved along the run") {
    Model m = pulse_model(0.25, 0.25, 12.0);
    ScenarioSpec sc;
    sc.kind = "colliding-pulses";
    sc.amplitude = 0.12;
    sc.center = 5.0;
    sc.width = 1.0;
    sc.margin = 1.0;
    State U = generate_scenario(sc, m.grid);

    const Real dt = 0.4 * m.grid.dx;
    for (int k = 0; k < 200; ++k) U = step_rk4(U, dt, m);
    for (int i = 0; i < m.grid.n_per_side; ++i) {
        REQUIRE(U.theta.from_boundary(Side::plus, i) ==
                Catch::Approx(U.theta.from_boundary(Side::minus, i)).margin(1e-11));
        REQUIRE(U.q.from_boundary(Side::plus, i) ==
                Catch::Approx(-U.q.from_boundary(Side::minus, i)).margin(1e-11));
    }
}

TEST_CASE("run configuration rules") {
    Model m = pulse_model(0.09, std::sqrt(0.03));
    State U = pulse_state(m.grid);

    RunConfig cfg;
    finalize_run_config(cfg, m.params, m.grid, U);
    CHECK(cfg.t_final == Catch::Approx(0.5 / (0.09 + 0.03)));
    CHECK(cfg.dt > 0.0);
    CHECK(cfg.dt <= 0.9 * m.grid.dx / 1.0 * 1.2);

    RunConfig bad;
    bad.dt = 10.0 * m.grid.dx;
    CHECK_THROWS_AS(finalize_run_config(bad, m.params, m.grid, U), ConfigError);

    RunConfig coarse;
    coarse.dt = 10.0 * m.grid.dx;
    coarse.enforce_cfl = false;
    CHECK_NOTHROW(finalize_run_config(coarse, m.params, m.grid, U));

    RunConfig ydiag;
    ydiag.y_diagnostics = true;
    ydiag.dt = m.params.delta / 2.0;
    CHECK_THROWS_AS(finalize_run_config(ydiag, m.params, m.grid, U), ConfigError);
}

TEST_CASE("run on rest data produces trivial diagnostics") {
    Model m = pulse_model(0.2, 0.3, 8.0);
    RunConfig cfg;
    cfg.t_final = 0.2;
    cfg.snapshot_stride = 5;
    RunResult res = run(cfg, State::rest(m.grid), m);
    CHECK(res.status == "completed");
    CHECK_FALSE(res.blew_up);
    CHECK(res.stop_time == Catch::Approx(0.2).margin(1e-12));
    for (const auto& rec : res.energies) {
        CHECK(rec.e_tot == 0.0);
        CHECK(rec.m0 == 1.0);
    }
    CHECK(res.r1_max == 0.0);
    CHECK(res.r2_max == 0.0);
    CHECK(res.snapshots.size() >= 2);
}

TEST_CASE("run completes on a compatible pulse with bounded monitor") {
    Model m = pulse_model(0.09, std::sqrt(0.03), 12.0);
    State U = pulse_state(m.grid, 0.08);
    RunConfig cfg;
    cfg.t_final = 1.0;
    cfg.dt = m.grid.dx / 2.0;
    RunResult res = run(cfg, U, m);
    CHECK(res.status == "completed");
    CHECK(res.steps > 10);
    for (const auto& rec : res.energies) CHECK(rec.m0 < 2.0);
    // transmission conditions hold along the trajectory
    CHECK(res.r1_max < 1e-10);
    CHECK(res.r2_max < 5e-3);
}

TEST_CASE("monitor ceiling converts growth into a blow-up status") {
    Model m = pulse_model(0.9, 0.2, 10.0);
    ScenarioSpec sc;
    sc.kind = "colliding-pulses";
    sc.amplitude = 0.9;
    sc.center = 4.0;
    sc.width = 1.5;
    sc.margin = 0.8;
    State U = generate_scenario(sc, m.grid);

    RunConfig cfg;
    cfg.t_final = 6.0;
    cfg.monitor_ceiling = blowup_monitor(U, m.params.epsilon) * 1.1;
    RunResult res = run(cfg, U, m);
    CHECK(res.blew_up);
    CHECK(res.status.find("blow-up criterion tripped at t=") == 0);
    CHECK(res.stop_time < 6.0);
}

TEST_CASE("immediate rejection of inadmissible data") {
    Model m = pulse_model(0.5, 0.2, 8.0);
    State U = State::rest(m.grid);
    for (auto& v : U.theta.values(Side::plus)) v = 1e5;  // 1+eps c' below floor
    RunConfig cfg;
    cfg.t_final = 0.5;
    CHECK_THROWS_AS(run(cfg, U, m), BlowupSignal);
}

TEST_CASE("hyperbolic mode transports at unit speed at eps = 0") {
    Parameters p = Parameters::from_delta(0.0, 0.0, 1.0);
    GridSpec g(1.0, 14.0, 2001);
    Model m = Model::hyperbolic(p, g);
    State U = pulse_state(g, 0.1);

    RunConfig cfg;
    cfg.mode = RunMode::hyperbolic;
    cfg.t_final = 1.5;
    cfg.dt = 0.4 * g.dx;
    RunResult res = run(cfg, U, m);
    CHECK(res.status == "completed");

    // the pulse center moved right by t_final
    Real err = 0.0;
    for (int i = 0; i < g.n_per_side; ++i) {
        const Real x = g.x(Side::plus, i);
        if (x < 3.0 || x > 12.5) continue;
        const Real expect = 0.1 * std::exp(-0.5 * std::pow(x - 1.5 - 6.0, 2));
        err = std::max(err, std::abs(res.final_state.theta.values(Side::plus)[i] - expect));
    }
    CHECK(err < 2e-3);  // first-order boundary closure, O(dx) overall
}
