#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bfloat/compat.hpp"
#include "series_oracle.hpp"

using namespace bfloat;

namespace {

Model compat_model(Real eps, Real delta, Real L = 14.0) {
    Parameters p = Parameters::from_delta(eps, delta, 1.0);
    const int n = static_cast<int>(std::ceil((L - p.R) / (delta / 4.0))) + 1;
    return Model::dispersive(p, GridSpec(p.R, L, n));
}

}  // namespace

TEST_CASE("exact ladder of rest data is identically zero") {
    Model m = compat_model(0.4, 0.25);
    DerivativeLadder lad = exact_ladder(State::rest(m.grid), 5, m);
    for (int j = 0; j <= 6; ++j) {
        CHECK(lad.theta[j].max_abs() == 0.0);
        CHECK(lad.q[j].max_abs() == 0.0);
        CHECK(lad.avg_q[j] == 0.0);
    }
}

TEST_CASE("exact ladder level 1 equals the vector field (two code paths)") {
    Model m = compat_model(0.35, 0.3);
    ScenarioSpec sc;
    sc.kind = "pulse-right";
    sc.amplitude = 0.15;
    sc.center = 5.0;
    sc.width = 1.0;
    sc.margin = 1.0;
    State U = generate_scenario(sc, m.grid);

    DerivativeLadder lad = exact_ladder(U, 3, m);
    RhsEvaluation ev = rhs(U, m);

    ExteriorField dth = lad.theta[1];
    dth.axpy(-1.0, ev.dtheta);
    ExteriorField dq = lad.q[1];
    dq.axpy(-1.0, ev.dq);
    CHECK(dth.max_abs() < 1e-13);
    CHECK(dq.max_abs() < 1e-13);
    CHECK(lad.avg_q[1] == Catch::Approx(ev.d_avg_q).margin(1e-14));
}

TEST_CASE("exact ladder at eps = 0 matches the direct linear recursion") {
    Model m = compat_model(0.0, 0.3);
    ScenarioSpec sc;
    sc.kind = "colliding-pulses";
    sc.amplitude = 0.2;
    sc.center = 6.0;
    sc.width = 1.0;
    State U = generate_scenario(sc, m.grid);

    DerivativeLadder lad = exact_ladder(U, 2, m);
    // theta_1 = -dx q_0, q_1 = -R(dx theta_0, [[theta_0]])
    ExteriorField t1 = derivative(U.q);
    t1.axpy(1.0, lad.theta[1]);
    CHECK(t1.max_abs() < 1e-13);
    ExteriorField q1 = apply_R_operator(derivative(U.theta), jump(U.theta), m);
    q1.axpy(1.0, lad.q[1]);
    CHECK(q1.max_abs() < 1e-13);
    // theta_2 = -dx q_1
    ExteriorField t2 = derivative(lad.q[1]);
    t2.axpy(1.0, lad.theta[2]);
    CHECK(t2.max_abs() < 1e-13);
}

TEST_CASE("ladder of away-supported data keeps tiny boundary traces") {
    Model m = compat_model(0.3, 0.1);
    ScenarioSpec sc;
    sc.kind = "pulse-right";
    sc.amplitude = 0.2;
    sc.center = 7.0;
    sc.width = 1.0;
    sc.margin = 2.0;
    State U = generate_scenario(sc, m.grid);

    DerivativeLadder lad = exact_ladder(U, 5, m);
    CHECK(std::abs(jump(lad.q[1])) < 1e-13);
    // <q_1> = -(delta^2 [[dx R0 Gamma_0]] + [[theta_0]])/(alpha+2 delta) ~ 0
    CHECK(std::abs(lad.avg_q[1]) < 1e-10);
    // <q_j> stays uniformly small through the ladder
    for (int j = 0; j <= 6; ++j) CHECK(std::abs(lad.avg_q[j]) < 1e-6);
}

TEST_CASE("taylor ladder on rest and constant data") {
    Parameters p = Parameters::from_delta(0.0, 0.5, 1.0);
    const int n = 5;

    BoundaryTraces zero;
    zero.n = n;
    for (int s = 0; s < 2; ++s) {
        zero.theta[s].assign(n + 1, 0.0);
        zero.q[s].assign(n + 1, 0.0);
    }
    TaylorLadder lz = taylor_ladder(zero, n, p);
    for (int j = 0; j <= n; ++j)
        for (int k = 0; j + k <= n; ++k)
            for (Side sd : {Side::minus, Side::plus}) {
                CHECK(lz.th(sd, j, k) == 0.0);
                CHECK(lz.qh(sd, j, k) == 0.0);
            }

    // locally constant data: theta = 0.3, q = 0 -> level 1 vanishes
    BoundaryTraces flat = zero;
    flat.theta[0][0] = 0.3;
    flat.theta[1][0] = 0.3;
    TaylorLadder lf = taylor_ladder(flat, n, p);
    CHECK(lf.th(Side::plus, 1, 0) == 0.0);
    CHECK(lf.qh(Side::plus, 1, 0) == 0.0);
}

TEST_CASE("taylor ladder at delta = 0 equals the independent series recursion") {
    const int n = 5;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<Real> val(-0.5, 0.5), ep(0.0, 1.0);

    for (int trial = 0; trial < 30; ++trial) {
        const Real eps = ep(rng);
        Parameters p = Parameters::from_delta(eps, 0.0, 1.0);
        BoundaryTraces tr;
        tr.n = n;
        for (int s = 0; s < 2; ++s) {
            tr.theta[s].resize(n + 1);
            tr.q[s].resize(n + 1);
            for (int k = 0; k <= n; ++k) {
                tr.theta[s][k] = val(rng);
                tr.q[s][k] = val(rng);
            }
        }
        tr.q[1][0] = tr.q[0][0];  // [[q_0]] = 0

        TaylorLadder lad = taylor_ladder(tr, n, p);
        oracle::SideSeries minus = oracle::evolve_side(tr.theta[0], tr.q[0], eps, n);
        oracle::SideSeries plus = oracle::evolve_side(tr.theta[1], tr.q[1], eps, n);

        for (int j = 0; j <= n; ++j)
            for (int k = 0; j + k <= n; ++k) {
                CHECK(lad.th(Side::plus, j, k) ==
                      Catch::Approx(oracle::corner(plus.theta, j, k)).margin(1e-9));
                CHECK(lad.qh(Side::minus, j, k) ==
                      Catch::Approx(oracle::corner(minus.q, j, k)).margin(1e-9));
            }
    }
}

TEST_CASE("hyperbolic verdicts at delta = 0 match the independent checker") {
    const int n = 5;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<Real> val(-0.5, 0.5), ep(0.0, 1.0);

    int agreements = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const Real eps = ep(rng);
        Parameters p = Parameters::from_delta(eps, 0.0, 1.0);
        BoundaryTraces tr;
        tr.n = n;
        const bool zero_case = trial % 10 == 0;
        for (int s = 0; s < 2; ++s) {
            tr.theta[s].assign(n + 1, 0.0);
            tr.q[s].assign(n + 1, 0.0);
            if (!zero_case)
                for (int k = 0; k <= n; ++k) {
                    tr.theta[s][k] = val(rng);
                    tr.q[s][k] = val(rng);
                }
        }
        tr.q[1][0] = tr.q[0][0];

        CompatReport rep = check_approx(taylor_ladder(tr, n, p), 1.0, n, p);
        REQUIRE(rep.mode == CompatMode::hyperbolic);
        oracle::HypResiduals ref = oracle::hyperbolic_residuals(tr, eps, p.alpha, n);

        for (int j = 0; j < n; ++j) {
            const bool oracle_pass = ref.r1[j] <= 0.0 && ref.r2[j] <= 0.0;
            CHECK(rep.rows[j].pass == oracle_pass);
            CHECK(rep.rows[j].r1 == Catch::Approx(ref.r1[j]).margin(1e-9));
            CHECK(rep.rows[j].r2 == Catch::Approx(ref.r2[j]).margin(1e-9));
        }
        ++agreements;
    }
    CHECK(agreements == 50);
}

TEST_CASE("checkers on away-supported compatible data") {
    Model m = compat_model(0.25, 0.1);
    ScenarioSpec sc;
    sc.kind = "pulse-right";
    sc.amplitude = 0.2;
    sc.center = 8.0;
    sc.width = 1.0;
    sc.margin = 2.5;
    State U = generate_scenario(sc, m.grid);
    const int n = 5;
    const Real M = default_threshold_M(U, n);

    CompatReport ex = check_exact(exact_ladder(U, n, m), M, n, m.params);
    CHECK(ex.pass);
    for (const auto& row : ex.rows) {
        CHECK(row.r1 <= 1e-10);
        CHECK(row.r2 <= 1e-10);
    }

    CompatReport ap = check_approx(taylor_ladder(U, n, m.params), M, n, m.params);
    CHECK(ap.pass);
    for (const auto& row : ap.rows) {
        CHECK(row.r1 <= 1e-10);
        CHECK(row.r2 <= 1e-10);
    }
}

TEST_CASE("deliberately incompatible data fails both checkers") {
    Model m = compat_model(0.9, 0.05);
    ScenarioSpec sc;
    sc.kind = "boundary-jump";
    sc.amplitude = 1.5;  // [[theta_0]] = 1.5 on this profile
    sc.width = 1.0;
    State U = generate_scenario(sc, m.grid);
    const int n = 5;
    const Real M = 1.0;

    CompatReport ap = check_approx(taylor_ladder(U, n, m.params), M, n, m.params);
    CHECK_FALSE(ap.pass);
    CHECK_FALSE(ap.rows[1].pass);  // row j = 1 carries the O(1) mismatch

    CompatReport ex = check_exact(exact_ladder(U, n, m), M, n, m.params);
    CHECK_FALSE(ex.pass);
    CHECK_FALSE(ex.rows[1].pass);
}

TEST_CASE("exact and taylor ladders agree on boundary traces for compatible data") {
    const int n = 4;
    Model m = compat_model(0.3, 0.2);
    ScenarioSpec sc;
    sc.kind = "colliding-pulses";
    sc.amplitude = 0.15;
    sc.center = 7.5;
    sc.width = 1.0;
    sc.margin = 2.5;
    State U = generate_scenario(sc, m.grid);

    DerivativeLadder ex = exact_ladder(U, n, m);
    TaylorLadder ap = taylor_ladder(U, n, m.params);

    // both ladders keep near-zero corner data for away-supported inputs
    for (int j = 1; j <= n; ++j) {
        TraceSet t(ex.theta[j], Side::plus, 1, m.params.delta);
        CHECK(std::abs(t.derivative_trace(0) - ap.th(Side::plus, j, 0)) < 2e-5);
    }
}

TEST_CASE("compat report serializes to the documented JSON shape") {
    Parameters p = Parameters::from_delta(0.1, 0.2, 1.0);
    CompatReport rep;
    rep.mode = CompatMode::approximate;
    rep.n = 2;
    rep.delta = p.delta;
    rep.M = 3.0;
    rep.rows.push_back({0, 1e-3, 2e-3, 5e-2, true});
    rep.rows.push_back({1, 0.5, 0.0, 1e-2, false});
    rep.pass = false;
    const std::string js = rep.to_json();
    CHECK(js.find("\"mode\":\"approximate\"") != std::string::npos);
    CHECK(js.find("\"rows\":[{\"j\":0") != std::string::npos);
    CHECK(js.find("\"pass\":false}") != std::string::npos);
}

TEST_CASE("scenario generators honor support and symmetry") {
    Parameters p = Parameters::from_delta(0.3, 0.2, 1.0);
    GridSpec g(1.0, 12.0, 441);

    State rest = generate_compatible("rest", p, g);
    CHECK(rest.theta.max_abs() == 0.0);
    CHECK(rest.q.max_abs() == 0.0);

    ScenarioSpec sc;
    sc.amplitude = 0.3;
    sc.center = 6.0;
    sc.width = 1.0;
    sc.margin = 1.0;
    State pulse = generate_compatible("pulse-right", p, g, sc);
    CHECK(jump(pulse.q) == 0.0);
    // exactly zero inside the cutoff margin
    for (Side s : {Side::minus, Side::plus})
        for (int i = 0; i * g.dx <= sc.margin; ++i) {
            CHECK(pulse.theta.from_boundary(s, i) == 0.0);
            CHECK(pulse.q.from_boundary(s, i) == 0.0);
        }

    State coll = generate_compatible("colliding-pulses", p, g, sc);
    for (int i = 0; i < g.n_per_side; ++i) {
        CHECK(coll.theta.from_boundary(Side::plus, i) ==
              Catch::Approx(coll.theta.from_boundary(Side::minus, i)).margin(1e-15));
        CHECK(coll.q.from_boundary(Side::plus, i) ==
              Catch::Approx(-coll.q.from_boundary(Side::minus, i)).margin(1e-15));
    }

    CHECK_THROWS_AS(generate_compatible("boundary-jump", p, g), ConfigError);
    CHECK_THROWS_AS(generate_scenario(ScenarioSpec{"nope"}, g), ConfigError);
}
