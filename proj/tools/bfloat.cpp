// bfloat: simulator and initial-data toolkit for dispersive shallow-water
// waves interacting with a fixed partially immersed obstacle.

#include <cstdlib>

#include <CLI11.hpp>

#include "bfloat/cli.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    int jobs = 1;
    unsigned seed = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "configuration JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--jobs", args.jobs, "parallel sweep members");
    cmd->add_option("--seed", args.seed, "seed for randomized scenarios");
}

bfloat::CliConfig load(const CommonArgs& args) {
    bfloat::CliConfig cfg = bfloat::load_config(args.config_path);
    cfg.out_dir = bfloat::resolve_out_dir(args.out_dir, cfg.out_dir);
    cfg.seed = args.seed;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dispersive Boussinesq transmission problem toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* c_run = app.add_subcommand("run", "integrate a scenario");
    CLI::App* c_compat = app.add_subcommand("check-compat", "compatibility checks on initial data");
    CLI::App* c_gen = app.add_subcommand("gen-data", "write a scenario's initial state");
    CLI::App* c_sweep = app.add_subcommand("sweep", "parameter sweep with slope fits");
    CLI::App* c_limit = app.add_subcommand("limit-study", "dispersive vs hyperbolic comparison");
    for (CLI::App* c : {c_run, c_compat, c_gen, c_sweep, c_limit}) add_common(c, args);

    CLI11_PARSE(app, argc, argv);

    try {
        const bfloat::CliConfig cfg = load(args);
        if (c_run->parsed()) return bfloat::cmd_run(cfg);
        if (c_compat->parsed()) return bfloat::cmd_check_compat(cfg);
        if (c_gen->parsed()) return bfloat::cmd_gen_data(cfg);
        if (c_sweep->parsed()) return bfloat::cmd_sweep(cfg, args.jobs);
        if (c_limit->parsed()) return bfloat::cmd_limit_study(cfg);
    } catch (const bfloat::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
