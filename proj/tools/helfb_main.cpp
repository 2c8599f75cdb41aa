// Command-line driver: solve, analyze, reconstruct, validate.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "helfb/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Helical free boundary solver and diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");

    auto add_common = [&](CLI::App* cmd, bool with_out) {
        cmd->add_option("--config", config_path, "path to the run config")->required();
        if (with_out) cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* solve = app.add_subcommand("solve", "minimize the energy and write psi");
    add_common(solve, true);
    CLI::App* analyze = app.add_subcommand("analyze", "free boundary diagnostics");
    add_common(analyze, true);
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "3D velocity field");
    add_common(reconstruct, true);
    CLI::App* validate = app.add_subcommand("validate", "check config and profile only");
    add_common(validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? helfb::kExitOk : helfb::kExitConfigError;
    }

    std::ostream& log = std::cerr;
    if (solve->parsed()) return helfb::run_solve(config_path, out_dir, quiet, log);
    if (analyze->parsed()) return helfb::run_analyze(config_path, out_dir, quiet, log);
    if (reconstruct->parsed()) return helfb::run_reconstruct(config_path, out_dir, quiet, log);
    if (validate->parsed()) return helfb::run_validate(config_path, quiet, log);
    return helfb::kExitConfigError;
}
