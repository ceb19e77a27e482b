/**
 * @file cli.hpp
 * @brief Config parsing/validation, scenario construction, and the
 *        subcommands behind the bfloat executable: run, check-compat,
 *        gen-data, sweep, limit-study.
 *
 * Everything here is deterministic: fixed iteration orders, fixed "%.17g"
 * number formatting, no wall-clock anywhere in the outputs. Identical
 * configs produce byte-identical files.
 *
 * Exit-code contract: 0 success, 2 configuration error, 3 run terminated by
 * the blow-up monitor, 4 compatibility check failed.
 */

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include <json.hpp>

#include "bfloat/compat.hpp"
#include "bfloat/diagnostics.hpp"
#include "bfloat/timestepper.hpp"

namespace bfloat {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Formatting helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_real(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// FNV-1a 64-bit over the canonical (key-sorted) JSON dump.
inline std::string config_hash(const json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

struct CompatConfig {
    std::string mode = "both";  // exact | approx | both | skip
    int n = 5;
    Real M = 0.0;  // 0 -> default_threshold_M
};

struct SweepConfig {
    std::vector<Real> delta;
    std::vector<Real> epsilon;
    Real t_final = 0.0;
    Real t_final_per_delta = 0.0;  // > 0: member horizon = value * delta
};

struct CliConfig {
    Parameters params;
    Real grid_L = 0.0;
    int grid_n = 0;  // 0 -> from the dx <= delta/4 rule
    bool allow_coarse = false;
    RunConfig run;
    ScenarioSpec scenario;
    CompatConfig compat;
    SweepConfig sweep;
    std::string out_dir = "out";
    unsigned seed = 0;
    std::string hash;
};

namespace detail {

inline void reject_unknown(const json& obj, const std::string& path,
                           const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.count(item.key()))
            throw ConfigError("config: unknown key '" + path + item.key() + "'");
}

template <class T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for key '" + path + key + "'");
    }
}

inline ObstacleProfile parse_obstacle(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError("config: '" + path + "' must be an object");
    const std::string type = get_or<std::string>(j, "type", path + ".", "flat");
    if (type == "flat") {
        reject_unknown(j, path + ".", {"type", "value"});
        return ObstacleProfile::flat(get_or<Real>(j, "value", path + ".", 0.0));
    }
    if (type == "poly") {
        reject_unknown(j, path + ".", {"type", "coeffs"});
        return ObstacleProfile::poly(
            get_or<std::vector<Real>>(j, "coeffs", path + ".", {0.0}));
    }
    if (type == "table") {
        reject_unknown(j, path + ".", {"type", "x", "value"});
        return ObstacleProfile::table(
            get_or<std::vector<Real>>(j, "x", path + ".", {}),
            get_or<std::vector<Real>>(j, "value", path + ".", {}));
    }
    throw ConfigError("config: unknown obstacle type '" + type + "'");
}

}  // namespace detail

/// Parse and validate a config document. Unknown keys are rejected with the
/// offending key named; derived quantities (alpha, grid size) are filled in.
inline CliConfig parse_config(const json& doc) {
    using detail::get_or;
    using detail::reject_unknown;
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(doc, "", {"params", "grid", "run", "scenario", "compat", "sweep", "output"});

    CliConfig cfg;

    // params
    if (!doc.contains("params")) throw ConfigError("config: missing 'params'");
    const json& jp = doc.at("params");
    reject_unknown(jp, "params.", {"epsilon", "mu", "delta", "R", "h_min", "obstacle"});
    const Real eps = get_or<Real>(jp, "epsilon", "params.", -1.0);
    if (eps < 0.0) throw ConfigError("config: missing or negative 'params.epsilon'");
    const Real R = get_or<Real>(jp, "R", "params.", 1.0);
    const Real h_min = get_or<Real>(jp, "h_min", "params.", 0.1);
    ObstacleProfile prof = jp.contains("obstacle")
                               ? detail::parse_obstacle(jp.at("obstacle"), "params.obstacle")
                               : ObstacleProfile::flat(0.0);
    if (jp.contains("delta") && jp.contains("mu")) {
        const Real d = jp.at("delta").get<Real>(), mu = jp.at("mu").get<Real>();
        if (std::abs(d * d - mu / 3.0) > 1e-12)
            throw ConfigError("config: 'params.delta' and 'params.mu' disagree (delta^2 = mu/3)");
        cfg.params = Parameters::from_delta(eps, d, R, std::move(prof), h_min);
    } else if (jp.contains("delta")) {
        cfg.params = Parameters::from_delta(eps, jp.at("delta").get<Real>(), R,
                                            std::move(prof), h_min);
    } else if (jp.contains("mu")) {
        cfg.params = Parameters::from_mu(eps, jp.at("mu").get<Real>(), R,
                                         std::move(prof), h_min);
    } else {
        throw ConfigError("config: one of 'params.delta' or 'params.mu' is required");
    }

    // grid
    const json jg = doc.contains("grid") ? doc.at("grid") : json::object();
    reject_unknown(jg, "grid.", {"L", "n_per_side", "allow_coarse"});
    cfg.grid_L = get_or<Real>(jg, "L", "grid.", cfg.params.R + 12.0);
    cfg.grid_n = get_or<int>(jg, "n_per_side", "grid.", 0);
    cfg.allow_coarse = get_or<bool>(jg, "allow_coarse", "grid.", false);
    if (cfg.grid_n == 0) {
        const Real target_dx = cfg.params.delta > 0.0 ? cfg.params.delta / 4.0
                                                      : (cfg.grid_L - cfg.params.R) / 800.0;
        cfg.grid_n = static_cast<int>(std::ceil((cfg.grid_L - cfg.params.R) / target_dx)) + 1;
    }

    // run
    const json jr = doc.contains("run") ? doc.at("run") : json::object();
    reject_unknown(jr, "run.",
                   {"mode", "t_final", "tau", "dt", "cfl", "enforce_cfl", "y_diagnostics",
                    "snapshot_stride", "monitor_ceiling", "c0"});
    const std::string mode = get_or<std::string>(jr, "mode", "run.", "dispersive");
    if (mode == "dispersive") cfg.run.mode = RunMode::dispersive;
    else if (mode == "hyperbolic") cfg.run.mode = RunMode::hyperbolic;
    else throw ConfigError("config: 'run.mode' must be dispersive or hyperbolic");
    cfg.run.t_final = get_or<Real>(jr, "t_final", "run.", 0.0);
    cfg.run.tau = get_or<Real>(jr, "tau", "run.", 0.5);
    cfg.run.dt = get_or<Real>(jr, "dt", "run.", 0.0);
    cfg.run.cfl = get_or<Real>(jr, "cfl", "run.", 0.9);
    cfg.run.enforce_cfl = get_or<bool>(jr, "enforce_cfl", "run.", true);
    cfg.run.y_diagnostics = get_or<bool>(jr, "y_diagnostics", "run.", false);
    cfg.run.snapshot_stride = get_or<int>(jr, "snapshot_stride", "run.", 50);
    cfg.run.monitor_ceiling = get_or<Real>(jr, "monitor_ceiling", "run.", 1e3);
    cfg.run.c0 = get_or<Real>(jr, "c0", "run.", 0.05);

    // scenario
    const json js = doc.contains("scenario") ? doc.at("scenario") : json::object();
    reject_unknown(js, "scenario.", {"kind", "amplitude", "center", "width", "margin"});
    cfg.scenario.kind = get_or<std::string>(js, "kind", "scenario.", "rest");
    cfg.scenario.amplitude = get_or<Real>(js, "amplitude", "scenario.", 0.08);
    cfg.scenario.center = get_or<Real>(js, "center", "scenario.", cfg.params.R + 6.0);
    cfg.scenario.width = get_or<Real>(js, "width", "scenario.", 1.2);
    cfg.scenario.margin = get_or<Real>(js, "margin", "scenario.", 1.0);

    // compat
    const json jc = doc.contains("compat") ? doc.at("compat") : json::object();
    reject_unknown(jc, "compat.", {"mode", "n", "M"});
    cfg.compat.mode = get_or<std::string>(jc, "mode", "compat.", "both");
    if (cfg.compat.mode != "exact" && cfg.compat.mode != "approx" &&
        cfg.compat.mode != "both" && cfg.compat.mode != "skip")
        throw ConfigError("config: 'compat.mode' must be exact, approx, both or skip");
    cfg.compat.n = get_or<int>(jc, "n", "compat.", 5);
    cfg.compat.M = get_or<Real>(jc, "M", "compat.", 0.0);

    // sweep
    const json jw = doc.contains("sweep") ? doc.at("sweep") : json::object();
    reject_unknown(jw, "sweep.", {"delta", "epsilon", "t_final", "t_final_per_delta"});
    cfg.sweep.delta = get_or<std::vector<Real>>(jw, "delta", "sweep.", {});
    cfg.sweep.epsilon = get_or<std::vector<Real>>(jw, "epsilon", "sweep.", {});
    cfg.sweep.t_final = get_or<Real>(jw, "t_final", "sweep.", 0.0);
    cfg.sweep.t_final_per_delta = get_or<Real>(jw, "t_final_per_delta", "sweep.", 0.0);

    // output
    const json jo = doc.contains("output") ? doc.at("output") : json::object();
    reject_unknown(jo, "output.", {"directory"});
    cfg.out_dir = get_or<std::string>(jo, "directory", "output.", "out");

    cfg.hash = detail::config_hash(doc);
    return cfg;
}

/// Output directory precedence: BFLOAT_OUT env, then the --out flag, then
/// the config's output.directory.
inline std::string resolve_out_dir(const std::string& flag_value,
                                   const std::string& config_value) {
    if (const char* env = std::getenv("BFLOAT_OUT")) return env;
    if (!flag_value.empty()) return flag_value;
    return config_value;
}

inline CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Scenario -> initial state
// ---------------------------------------------------------------------------

/// Seeded variant for property studies: a few random compatible pulses.
inline State generate_random_pulses(const ScenarioSpec& sc, const GridSpec& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<Real> amp(-sc.amplitude, sc.amplitude), wid(0.8, 1.5),
        pos(g.R + 2.0 * sc.margin + 2.0, std::max(g.R + 2.0 * sc.margin + 2.5, g.L - 4.0));
    State U = State::rest(g);
    for (int b = 0; b < 3; ++b) {
        const Real a = amp(rng), w = wid(rng), cl = -pos(rng), cr = pos(rng);
        for (Side s : {Side::minus, Side::plus})
            for (int i = 0; i < g.n_per_side; ++i) {
                const Real x = g.x(s, i);
                const Real cut = smoothstep_cinf((i * g.dx - sc.margin) / sc.margin);
                const Real gl = std::exp(-0.5 * std::pow((x - cl) / w, 2));
                const Real gr = std::exp(-0.5 * std::pow((x - cr) / w, 2));
                U.theta.from_boundary(s, i) += a * (gl + gr) * cut;
                U.q.from_boundary(s, i) += a * (gr - gl) * cut;
            }
    }
    return U;
}

inline State make_initial_state(const CliConfig& cfg, const GridSpec& g) {
    if (cfg.scenario.kind == "random-pulses")
        return generate_random_pulses(cfg.scenario, g, cfg.seed);
    return generate_scenario(cfg.scenario, g);
}

inline GridSpec make_grid_from(const CliConfig& cfg, Real delta) {
    return make_grid(cfg.params.R, cfg.grid_L, cfg.grid_n, delta, cfg.allow_coarse);
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

namespace detail {

inline std::string snapshot_csv(const State& s, Real eps) {
    std::string out = "x,theta,q,zeta\n";
    const GridSpec& g = s.theta.grid();
    auto emit = [&](Side side, int i) {
        const Real th = s.theta.values(side)[i];
        out += fmt_real(g.x(side, i)) + "," + fmt_real(th) + "," +
               fmt_real(s.q.values(side)[i]) + "," + fmt_real(theta_to_zeta(th, eps)) + "\n";
    };
    for (int i = 0; i < g.n_per_side; ++i) emit(Side::minus, i);
    for (int i = 0; i < g.n_per_side; ++i) emit(Side::plus, i);
    return out;
}

inline std::string energies_csv(const std::vector<EnergyRecord>& recs) {
    std::string out = "t,e_ext,e_int,e_tot,flux_jump,m0,layer_width,frakE\n";
    for (const auto& r : recs)
        out += fmt_real(r.t) + "," + fmt_real(r.e_ext) + "," + fmt_real(r.e_int) + "," +
               fmt_real(r.e_tot) + "," + fmt_real(r.flux_jump) + "," + fmt_real(r.m0) + "," +
               fmt_real(r.layer_width) + "," + fmt_real(r.frakE) + "\n";
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

/// run: integrate the configured scenario, write snapshots, energies.csv and
/// manifest.json. Returns 0 on completion, 3 when the blow-up monitor
/// terminated the run.
inline int cmd_run(const CliConfig& cfg) {
    namespace fs = std::filesystem;
    const GridSpec g = make_grid_from(cfg, cfg.run.mode == RunMode::dispersive
                                               ? cfg.params.delta
                                               : 0.0);
    const Model m = cfg.run.mode == RunMode::dispersive ? Model::dispersive(cfg.params, g)
                                                        : Model::hyperbolic(cfg.params, g);
    if (m.helm && m.helm->far_field_truncation() > 1e-12)
        std::fprintf(stderr,
                     "warning: far-field truncation error %.3g exceeds 1e-12; increase grid.L\n",
                     m.helm->far_field_truncation());

    State U0 = make_initial_state(cfg, g);

    // advisory compatibility check
    if (cfg.compat.mode != "skip" && cfg.run.mode == RunMode::dispersive) {
        const Real M = cfg.compat.M > 0.0 ? cfg.compat.M
                                          : default_threshold_M(U0, cfg.compat.n);
        CompatReport rep = check_approx(taylor_ladder(U0, cfg.compat.n, cfg.params), M,
                                        cfg.compat.n, cfg.params);
        if (!rep.pass)
            std::fprintf(stderr,
                         "warning: initial data fails the approximate compatibility check\n");
    }

    RunResult res = run(cfg.run, U0, m);

    fs::create_directories(fs::path(cfg.out_dir) / "snapshots");
    json manifest;
    manifest["config_hash"] = cfg.hash;
    manifest["status"] = res.status;
    manifest["final_time"] = res.stop_time;
    manifest["steps"] = res.steps;
    manifest["transmission"] = {{"r1_max", res.r1_max}, {"r2_max", res.r2_max}};
    std::vector<std::string> names;
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "snapshot_%06zu.csv", i);
        detail::write_file(fs::path(cfg.out_dir) / "snapshots" / name,
                           detail::snapshot_csv(res.snapshots[i], cfg.params.epsilon));
        names.emplace_back(name);
    }
    manifest["snapshots"] = names;
    detail::write_file(fs::path(cfg.out_dir) / "energies.csv",
                       detail::energies_csv(res.energies));
    detail::write_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    return res.blew_up ? 3 : 0;
}

/// check-compat: run the requested checker(s) on the scenario's initial data
/// and write compat_report.json. Exit 0 on pass, 4 on fail.
inline int cmd_check_compat(const CliConfig& cfg) {
    namespace fs = std::filesystem;
    const GridSpec g = make_grid_from(cfg, cfg.params.delta);
    State U0 = make_initial_state(cfg, g);
    const int n = cfg.compat.n;

    const bool want_exact = cfg.compat.mode == "exact" || cfg.compat.mode == "both";
    const bool want_approx = cfg.compat.mode == "approx" || cfg.compat.mode == "both" ||
                             cfg.compat.mode == "skip";
    if (want_exact && !(cfg.params.delta > 0.0))
        throw ConfigError("check-compat: the exact (nonlocal) checker needs delta > 0");

    json out;
    bool pass = true;
    try {
        const Real M = cfg.compat.M > 0.0 ? cfg.compat.M : default_threshold_M(U0, n);
        if (want_exact) {
            const Model m = Model::dispersive(cfg.params, g);
            CompatReport rep = check_exact(exact_ladder(U0, n, m), M, n, cfg.params);
            out["exact"] = json::parse(rep.to_json());
            pass = pass && rep.pass;
        }
        if (want_approx) {
            CompatReport rep = check_approx(taylor_ladder(U0, n, cfg.params), M, n, cfg.params);
            out["approx"] = json::parse(rep.to_json());
            pass = pass && rep.pass;
        }
    } catch (const Error& e) {
        // infeasible trace order for the grid is a configuration problem
        if (std::string(e.what()).find("stencil") != std::string::npos)
            throw ConfigError(e.what());
        throw;
    }
    out["mode"] = cfg.compat.mode;
    out["pass"] = pass;

    fs::create_directories(cfg.out_dir);
    detail::write_file(fs::path(cfg.out_dir) / "compat_report.json", out.dump(2) + "\n");
    return pass ? 0 : 4;
}

/// gen-data: write the scenario's initial state in snapshot format.
inline int cmd_gen_data(const CliConfig& cfg) {
    namespace fs = std::filesystem;
    const GridSpec g = make_grid_from(cfg, cfg.params.delta);
    State U0 = make_initial_state(cfg, g);
    fs::create_directories(cfg.out_dir);
    detail::write_file(fs::path(cfg.out_dir) / "initial_state.csv",
                       detail::snapshot_csv(U0, cfg.params.epsilon));
    return 0;
}

namespace detail {

struct SweepRow {
    Real delta = 0.0, epsilon = 0.0;
    Real e_tot0 = 0.0, e_tot1 = 0.0, drift = 0.0;
    Real m0 = 0.0;
    Real layer_width_minus = 0.0, layer_width_plus = 0.0;
    Real compat_r = 0.0;
    std::string status = "completed";
};

/// least-squares slope of log(y) against log(x), NaN-filtered
inline Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
    Real sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || std::isnan(y[i])) continue;
        const Real lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<Real>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace detail

/// sweep: one run per (delta, epsilon) pair, each on its own delta/4 grid;
/// emits sweep.csv plus slopes.json with the fitted log-log slopes of the
/// layer width and of the approximate-compatibility residual against delta.
inline int cmd_sweep(const CliConfig& cfg, int jobs = 1) {
    namespace fs = std::filesystem;
    if (cfg.sweep.delta.empty())
        throw ConfigError("sweep: 'sweep.delta' must list at least one value");
    std::vector<Real> eps_list =
        cfg.sweep.epsilon.empty() ? std::vector<Real>{cfg.params.epsilon} : cfg.sweep.epsilon;

    struct Member {
        Real delta, eps;
    };
    std::vector<Member> members;
    for (Real d : cfg.sweep.delta)
        for (Real e : eps_list) members.push_back({d, e});

    std::vector<detail::SweepRow> rows(members.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= members.size()) return;
            detail::SweepRow& row = rows[i];
            row.delta = members[i].delta;
            row.epsilon = members[i].eps;
            try {
                Parameters p = Parameters::from_delta(members[i].eps, members[i].delta,
                                                      cfg.params.R, cfg.params.zeta_w,
                                                      cfg.params.h_min);
                const int n =
                    static_cast<int>(std::ceil((cfg.grid_L - p.R) / (p.delta / 4.0))) + 1;
                const GridSpec g(p.R, cfg.grid_L, n);
                const Model m = Model::dispersive(p, g);
                CliConfig local = cfg;
                local.params = p;
                State U0 = make_initial_state(local, g);

                RunConfig rc = cfg.run;
                if (cfg.sweep.t_final > 0.0) rc.t_final = cfg.sweep.t_final;
                if (cfg.sweep.t_final_per_delta > 0.0)
                    rc.t_final = cfg.sweep.t_final_per_delta * p.delta;
                RunResult res = run(rc, U0, m);

                row.e_tot0 = res.energies.front().e_tot;
                row.e_tot1 = res.energies.back().e_tot;
                row.drift = std::abs(row.e_tot1 - row.e_tot0);
                row.m0 = res.energies.back().m0;
                row.layer_width_minus = layer_width(res.final_state.q, Side::minus, p.delta);
                row.layer_width_plus = layer_width(res.final_state.q, Side::plus, p.delta);
                CompatReport rep = check_approx(taylor_ladder(U0, cfg.compat.n, p), 1.0,
                                                cfg.compat.n, p);
                for (const auto& r : rep.rows)
                    row.compat_r = std::max({row.compat_r, r.r1, r.r2});
                row.status = res.status;
            } catch (const std::exception& e) {
                row.status = std::string("failed: ") + e.what();
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    std::string csv =
        "delta,epsilon,e_tot_initial,e_tot_final,drift,m0_final,layer_width_minus,"
        "layer_width_plus,compat_residual,status\n";
    for (const auto& r : rows)
        csv += detail::fmt_real(r.delta) + "," + detail::fmt_real(r.epsilon) + "," +
               detail::fmt_real(r.e_tot0) + "," + detail::fmt_real(r.e_tot1) + "," +
               detail::fmt_real(r.drift) + "," + detail::fmt_real(r.m0) + "," +
               detail::fmt_real(r.layer_width_minus) + "," +
               detail::fmt_real(r.layer_width_plus) + "," + detail::fmt_real(r.compat_r) +
               ",\"" + r.status + "\"\n";

    std::vector<Real> deltas, widths, compats;
    for (const auto& r : rows) {
        if (r.epsilon != rows.front().epsilon) continue;
        deltas.push_back(r.delta);
        widths.push_back(r.layer_width_minus);
        compats.push_back(r.compat_r);
    }
    json slopes;
    slopes["layer_width_slope"] = detail::loglog_slope(deltas, widths);
    slopes["compat_residual_slope"] = detail::loglog_slope(deltas, compats);

    fs::create_directories(cfg.out_dir);
    detail::write_file(fs::path(cfg.out_dir) / "sweep.csv", csv);
    detail::write_file(fs::path(cfg.out_dir) / "slopes.json", slopes.dump(2) + "\n");

    for (const auto& r : rows)
        if (r.status.rfind("failed:", 0) == 0) return 1;
    return 0;
}

/// limit-study: dispersive runs over sweep.delta against one hyperbolic run
/// on a common grid; reports the L2 distance outside |x| <= R + 5 delta.
inline int cmd_limit_study(const CliConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.sweep.delta.empty())
        throw ConfigError("limit-study: 'sweep.delta' must list at least one value");

    const Real dmin = *std::min_element(cfg.sweep.delta.begin(), cfg.sweep.delta.end());
    const int n = static_cast<int>(std::ceil((cfg.grid_L - cfg.params.R) / (dmin / 4.0))) + 1;
    const GridSpec g(cfg.params.R, cfg.grid_L, n);

    Parameters ph = Parameters::from_delta(cfg.params.epsilon, 0.0, cfg.params.R,
                                           cfg.params.zeta_w, cfg.params.h_min);
    CliConfig local = cfg;
    local.params = ph;
    State U0 = make_initial_state(local, g);

    RunConfig rc = cfg.run;
    rc.mode = RunMode::hyperbolic;
    RunResult hyp = run(rc, U0, Model::hyperbolic(ph, g));

    std::string csv = "delta,l2_distance\n";
    for (Real d : cfg.sweep.delta) {
        Parameters pd = Parameters::from_delta(cfg.params.epsilon, d, cfg.params.R,
                                               cfg.params.zeta_w, cfg.params.h_min);
        RunConfig rd = cfg.run;
        rd.mode = RunMode::dispersive;
        RunResult res = run(rd, U0, Model::dispersive(pd, g));

        Real acc = 0.0;
        for (Side s : {Side::minus, Side::plus})
            for (int i = 0; i < g.n_per_side; ++i) {
                if (i * g.dx <= 5.0 * d) continue;  // skip the layer zone
                const Real dth = res.final_state.theta.from_boundary(s, i) -
                                 hyp.final_state.theta.from_boundary(s, i);
                const Real dq = res.final_state.q.from_boundary(s, i) -
                                hyp.final_state.q.from_boundary(s, i);
                acc += (dth * dth + dq * dq) * g.dx;
            }
        csv += detail::fmt_real(d) + "," + detail::fmt_real(std::sqrt(acc)) + "\n";
    }

    fs::create_directories(cfg.out_dir);
    detail::write_file(fs::path(cfg.out_dir) / "limit_study.csv", csv);
    return 0;
}

}  // namespace bfloat
