// Projected descent minimization of the regularized energy over the
// admissible set (psi >= 0, Dirichlet trace on the fixed boundary). The
// direction is the gradient scaled by the inverse of the assembled
// stiffness, so the trial step t = 1/2 solves the linear problem with the
// nonlinearity frozen and the free boundary can travel arbitrarily far per
// iteration; Armijo backtracking guards the energy, and the smoothing width
// continues geometrically down to a floor proportional to h.
#pragma once

#include <utility>
#include <vector>

#include "helfb/energy.hpp"

namespace helfb {

struct SolverConfig {
    double eps_start_factor = 8.0;  // eps0 = factor * h
    double eps_floor_factor = 2.0;  // final stage eps = factor * h
    double eps_shrink = 0.5;
    double grad_tol_rel = 1e-8;  // on the projected-gradient norm
    int max_iterations_per_stage = 5000;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    int max_backtracks = 60;
    bool keep_stage_fields = false;
};

struct StageReport {
    double epsilon = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_energy = 0.0;
    double final_pg_norm = 0.0;
    std::vector<double> energy_history;  // accepted steps, non-increasing
};

struct SolveReport {
    bool converged = false;
    std::vector<StageReport> stages;
    double initial_pg_norm = 0.0;
    double final_pg_norm = 0.0;
    // How often the psi >= 0 projection clipped a node (summed over accepted
    // steps); the admissible set only constrains the fixed boundary, so this
    // records how active the global constraint actually is.
    long long projection_activations = 0;
    // Admissibility audit over all iterates: should be 0 and >= 0.
    double max_dirichlet_violation = 0.0;
    double min_iterate_value = 0.0;
    std::vector<std::vector<double>> stage_fields;  // populated if requested
};

std::pair<StreamField, SolveReport> minimize(
    const std::shared_ptr<const CrossSectionGrid>& grid, const Pitch& pitch,
    const VorticityProfile& profile, double lambda, const SolverConfig& config = {});

struct StationarityReport {
    // Residual of -div(K grad psi) = f(psi) at interior nodes with psi > eps.
    double interior_max_abs = 0.0;
    double interior_rms = 0.0;
    int interior_nodes = 0;
    // min over interior hat functions of integral(-<K grad psi, grad phi> + f(psi) phi);
    // the weak subsolution property asks this to be >= -O(h).
    double subsolution_min = 0.0;
    int subsolution_nodes = 0;
};

StationarityReport check_stationarity(const StreamField& psi, const Pitch& pitch,
                                      const VorticityProfile& profile, double lambda,
                                      double eps);

}  // namespace helfb
