// Command-line front end: simulate, kinetic-sweep, check, inspect-snapshot.
// Exit codes: 0 success, 2 configuration error, 3 blow-up or vacuum, 4 fit or
// self-check failure, 1 unexpected internal error.
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dragflow/dragflow.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    bool quiet = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

dragflow::RunConfig load(const CommonFlags& flags) {
    dragflow::RunConfig cfg = dragflow::load_config(flags.config_path);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.seed_set) cfg.seed = flags.seed;
    return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool needs_config) {
    auto* opt = cmd->add_option("--config", flags.config_path, "path to a run config file");
    if (needs_config) opt->required();
    cmd->add_option("--out-dir", flags.out_dir, "override the [output] dir from the config");
    cmd->add_option("--seed", flags.seed, "override the seed from the config")
        ->each([&flags](const std::string&) { flags.seed_set = true; });
    cmd->add_flag("--quiet", flags.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral two-phase flow simulator with a kinetic limit sweep"};
    app.require_subcommand(1);

    CommonFlags sim_flags, sweep_flags, check_flags;
    std::string snapshot_path;

    CLI::App* sim = app.add_subcommand("simulate", "run a simulation and write diagnostics");
    add_common(sim, sim_flags, true);

    CLI::App* sweep =
        app.add_subcommand("kinetic-sweep", "run the particle epsilon sweep and report");
    add_common(sweep, sweep_flags, true);

    CLI::App* check = app.add_subcommand("check", "run the headless property checks");
    check->add_flag("--quiet", check_flags.quiet, "suppress per-check output");

    CLI::App* inspect =
        app.add_subcommand("inspect-snapshot", "print a snapshot's header and field stats");
    inspect->add_option("snapshot", snapshot_path, "snapshot file to inspect")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            const dragflow::RunConfig cfg = load(sim_flags);
            const dragflow::SimulationSummary sum =
                dragflow::run_simulation(cfg, sim_flags.quiet);
            return sum.exit_code;
        }
        if (sweep->parsed()) {
            const dragflow::RunConfig cfg = load(sweep_flags);
            return dragflow::run_kinetic_sweep_cmd(cfg, sweep_flags.quiet);
        }
        if (check->parsed()) {
            if (check_flags.quiet) {
                std::ostringstream sink;
                return dragflow::run_checks(sink);
            }
            return dragflow::run_checks(std::cout);
        }
        if (inspect->parsed()) {
            std::cout << dragflow::inspect_snapshot(snapshot_path);
            return dragflow::exit_ok;
        }
    } catch (const dragflow::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return dragflow::exit_config_error;
    } catch (const dragflow::BlowupError& e) {
        std::cerr << "blow-up detected at t = " << e.time << ": " << e.what() << '\n';
        return dragflow::exit_blowup;
    } catch (const dragflow::VacuumError& e) {
        std::cerr << "vacuum detected: " << e.what() << '\n';
        return dragflow::exit_blowup;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
