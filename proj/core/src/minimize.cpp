#include "helfb/minimize.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

namespace helfb {

namespace {

double projected_gradient_norm(const CrossSectionGrid& g, std::span<const double> psi,
                               std::span<const double> grad) {
    double acc = 0.0;
    for (int k = 0; k < g.n_nodes(); ++k) {
        if (!g.is_free(k)) continue;
        const double moved = std::max(psi[k] - grad[k], 0.0);
        const double d = psi[k] - moved;
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace

std::pair<StreamField, SolveReport> minimize(
    const std::shared_ptr<const CrossSectionGrid>& grid, const Pitch& pitch,
    const VorticityProfile& profile, double lambda, const SolverConfig& config) {
    const CrossSectionGrid& g = *grid;
    DiscreteFunctional fn(grid, pitch, profile, lambda);
    SolveReport report;

    // Projected Newton on the inactive set: the descent direction solves the
    // stiffness restricted to nodes that are positive or pushed upward, and
    // is the raw gradient on the clipped set (where a positive gradient is
    // the constraint multiplier, not an error). A plain projected gradient
    // moves the free boundary only one smoothing band per iteration; the
    // scaled step lets it travel freely and terminates once the active set
    // settles.
    const AssembledOperator op = assemble_operator(g, pitch);
    const int nu = static_cast<int>(op.node_of_unknown.size());

    // Supersolution-flavored start: linear Dirichlet solve, clipped at 0,
    // which keeps the positivity set too large rather than too small.
    StreamField psi = solve_dirichlet(grid, pitch, nullptr);
    for (int k = 0; k < g.n_nodes(); ++k) {
        if (g.is_free(k)) psi.values()[k] = std::max(psi.values()[k], 0.0);
    }
    report.min_iterate_value = 0.0;

    // Geometric continuation schedule eps0 -> floor.
    std::vector<double> schedule;
    const double floor_eps = config.eps_floor_factor * g.h;
    for (double eps = config.eps_start_factor * g.h; eps > floor_eps * (1.0 + 1e-9);
         eps *= config.eps_shrink) {
        schedule.push_back(eps);
    }
    schedule.push_back(floor_eps);

    const int n = g.n_nodes();
    std::vector<double> grad(n, 0.0), trial(n, 0.0), direction(n, 0.0);
    double tol_abs = -1.0;  // fixed after the first gradient evaluation

    // Inactive-set solver state, refactored only when the set changes.
    std::vector<std::uint8_t> inactive(nu, 1), prev_inactive(nu, 2);
    std::vector<int> inactive_index(nu, -1);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
    int n_inactive = 0;
    auto refactor = [&]() {
        n_inactive = 0;
        for (int u = 0; u < nu; ++u) {
            inactive_index[u] = inactive[u] ? n_inactive++ : -1;
        }
        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(op.A.nonZeros());
        for (int col = 0; col < op.A.outerSize(); ++col) {
            const int jc = inactive_index[col];
            if (jc < 0) continue;
            for (Eigen::SparseMatrix<double>::InnerIterator it(op.A, col); it; ++it) {
                const int ir = inactive_index[static_cast<int>(it.row())];
                if (ir >= 0) triplets.emplace_back(ir, jc, it.value());
            }
        }
        Eigen::SparseMatrix<double> Aii(n_inactive, n_inactive);
        Aii.setFromTriplets(triplets.begin(), triplets.end());
        llt.compute(Aii);
        if (llt.info() != Eigen::Success) {
            throw SolverError("stiffness factorization failed", {});
        }
    };

    auto audit = [&](std::span<const double> values) {
        for (int k = 0; k < n; ++k) {
            if (g.is_dirichlet(k)) {
                report.max_dirichlet_violation = std::max(
                    report.max_dirichlet_violation, std::abs(values[k] - g.dirichlet[k]));
            } else if (g.node_active[k]) {
                report.min_iterate_value = std::min(report.min_iterate_value, values[k]);
            }
        }
    };

    for (double eps : schedule) {
        StageReport stage;
        stage.epsilon = eps;
        double energy = fn.value(psi.values(), eps);
        stage.energy_history.push_back(energy);

        for (int it = 0; it < config.max_iterations_per_stage; ++it) {
            fn.gradient(psi.values(), eps, grad);
            const double pg = projected_gradient_norm(g, psi.values(), grad);
            if (tol_abs < 0.0) {
                report.initial_pg_norm = pg;
                tol_abs = config.grad_tol_rel * std::max(pg, 1e-300);
            }
            stage.final_pg_norm = pg;
            if (pg <= tol_abs) {
                stage.converged = true;
                break;
            }

            for (int u = 0; u < nu; ++u) gu[u] = grad[op.node_of_unknown[u]];
            du = llt.solve(gu);
            for (int u = 0; u < nu; ++u) direction[op.node_of_unknown[u]] = du[u];

            bool accepted = false;
            for (int pass = 0; pass < 2 && !accepted; ++pass) {
                // Scaled direction first: at t = 1/2 the step solves the
                // linear problem with the nonlinearity frozen, so the free
                // boundary can travel arbitrarily far in one iteration. The
                // second pass falls back to the raw gradient.
                const std::vector<double>& dir = pass == 0 ? direction : grad;
                double t = pass == 0 ? 0.5 : 1.0;
                for (int bt = 0; bt <= config.max_backtracks; ++bt) {
                    long long clipped = 0;
                    for (int k = 0; k < n; ++k) {
                        if (!g.is_free(k)) {
                            trial[k] = psi.values()[k];
                            continue;
                        }
                        const double moved = psi.values()[k] - t * dir[k];
                        trial[k] = moved < 0.0 ? 0.0 : moved;
                        if (moved < 0.0 && psi.values()[k] > 0.0) ++clipped;
                    }
                    double decrease = 0.0;  // <grad, psi - trial>
                    for (int k = 0; k < n; ++k) {
                        if (g.is_free(k)) decrease += grad[k] * (psi.values()[k] - trial[k]);
                    }
                    if (decrease <= 0.0) break;  // not a descent step after clipping
                    const double trial_energy = fn.value(trial, eps);
                    if (trial_energy <= energy - config.armijo_c * decrease) {
                        psi.values() = trial;
                        energy = trial_energy;
                        report.projection_activations += clipped;
                        accepted = true;
                        break;
                    }
                    t *= config.backtrack_factor;
                }
            }
            if (!accepted) {
                // No descent is possible at floating precision; honest
                // convergence still requires a small projected gradient.
                stage.converged = stage.final_pg_norm <= std::max(tol_abs, 1e-12);
                break;
            }
            stage.energy_history.push_back(energy);
            audit(psi.values());
            stage.iterations = it + 1;
        }

        stage.final_energy = energy;
        if (config.keep_stage_fields) report.stage_fields.push_back(psi.values());
        report.stages.push_back(std::move(stage));
    }

    report.final_pg_norm = report.stages.back().final_pg_norm;
    report.converged = report.stages.back().converged;
    return {std::move(psi), std::move(report)};
}

StationarityReport check_stationarity(const StreamField& psi, const Pitch& pitch,
                                      const VorticityProfile& profile, double lambda,
                                      double eps) {
    const CrossSectionGrid& g = psi.grid();
    StationarityReport rep;
    const std::vector<double> Lpsi = apply_operator(g, pitch, psi.values());
    const double h2 = g.h * g.h;
    double sq_sum = 0.0;
    bool first_sub = true;
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int k = g.node_index(i, j);
            if (!g.is_free(k) || g.node_boundary[k]) continue;
            const double fval = profile.f(psi.values()[k]);
            // Interior hats have full neighborhoods, so the lumped weight is 1.
            const double subsol = h2 * (fval - Lpsi[k]);
            if (first_sub || subsol < rep.subsolution_min) rep.subsolution_min = subsol;
            first_sub = false;
            ++rep.subsolution_nodes;
            if (psi.values()[k] > eps) {
                const double r = Lpsi[k] - fval;
                rep.interior_max_abs = std::max(rep.interior_max_abs, std::abs(r));
                sq_sum += r * r;
                ++rep.interior_nodes;
            }
        }
    }
    if (rep.interior_nodes > 0) rep.interior_rms = std::sqrt(sq_sum / rep.interior_nodes);
    return rep;
}

}  // namespace helfb
