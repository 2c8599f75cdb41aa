// Run configuration and the solve/analyze/reconstruct/validate pipelines
// behind the command-line tool. Outputs are written atomically and are
// byte-identical across reruns of the same config and build.
#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "helfb/exact_solutions.hpp"
#include "helfb/minimize.hpp"
#include "helfb/report_io.hpp"
#include "helfb/vorticity.hpp"

namespace helfb {

// Exit codes shared by the pipelines and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitInternalError = 3;

struct RunConfig {
    DomainSpec domain;
    double h = 0.0;
    Pitch pitch{1.0};
    double lambda = 1.0;
    VorticityProfile profile = VorticityProfile::zero();
    SolverConfig solver;

    // Declarative fixed-boundary entries (selector name -> value spec), kept
    // for echoing into grid.json so analyze/reconstruct can rebuild the grid.
    std::vector<std::pair<std::string, std::string>> fixed_boundary;

    enum class Mode { Minimize, ExactHalfPlane, ExactRadial };
    Mode mode = Mode::Minimize;
    double halfplane_h0 = 0.5;
    double radial_r0 = 1.0;

    // analyze
    double theta_factor = 0.5;  // extraction level theta = factor * h * lambda
    int fb_points = 3;
    double r_max = 0.0;  // 0: derived from the domain
    unsigned seed = 12345;

    // reconstruct
    double probe_spacing_factor = 2.0;
    int z_layers = 2;

    static RunConfig parse(const io::IniConfig& ini);

    CrossSectionGrid make_grid() const;
    nlohmann::json domain_json() const;
    nlohmann::json echo_json() const;
};

int run_solve(const std::string& config_path, const std::string& out_dir, bool quiet,
              std::ostream& log);
int run_analyze(const std::string& config_path, const std::string& out_dir, bool quiet,
                std::ostream& log);
int run_reconstruct(const std::string& config_path, const std::string& out_dir, bool quiet,
                    std::ostream& log);
int run_validate(const std::string& config_path, bool quiet, std::ostream& log);

}  // namespace helfb
