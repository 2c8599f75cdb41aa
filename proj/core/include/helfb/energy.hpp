// Discrete regularized energy
//   J_eps(psi) = sum_cells [ <K grad psi, grad psi> - 2 F(psi) + lambda^2 H_eps(psi) ]
// with the gradient quadrature of the bilinear element (K at cell centers)
// and the nonlinear terms averaged over cell corners. H_eps is the
// piecewise-linear positivity ramp.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "helfb/operator.hpp"
#include "helfb/vorticity.hpp"

namespace helfb {

struct RegularizationParams {
    double epsilon = 0.0;  // > 0; the sharp indicator is the epsilon -> 0 limit
};

// H_eps: 0 for s <= 0, s/eps on (0, eps), 1 for s >= eps.
inline double positivity_ramp(double s, double eps) {
    if (s <= 0.0) return 0.0;
    if (s >= eps) return 1.0;
    return s / eps;
}

inline double positivity_ramp_derivative(double s, double eps) {
    return (s > 0.0 && s < eps) ? 1.0 / eps : 0.0;
}

// Caches the per-cell stiffness so repeated evaluations during minimization
// stay cheap. All evaluations are over active cells only.
class DiscreteFunctional {
  public:
    DiscreteFunctional(std::shared_ptr<const CrossSectionGrid> grid, const Pitch& pitch,
                       VorticityProfile profile, double lambda);

    const CrossSectionGrid& grid() const { return *grid_; }
    double lambda() const { return lambda_; }
    const VorticityProfile& profile() const { return profile_; }

    double value(std::span<const double> nodes, double eps) const;
    double value_sharp(std::span<const double> nodes) const;
    // Exact gradient of value(); entries at Dirichlet and inactive nodes are
    // zero. `out` must have n_nodes entries.
    void gradient(std::span<const double> nodes, double eps, std::span<double> out) const;
    // Energy contribution of one cell (zero for inactive cells).
    double cell_energy(std::span<const double> nodes, double eps, int ci, int cj) const;

  private:
    double accumulate(std::span<const double> nodes, double eps, bool sharp) const;

    std::shared_ptr<const CrossSectionGrid> grid_;
    Pitch pitch_;
    VorticityProfile profile_;
    double lambda_;
    std::vector<ElementMatrix> stiffness_;  // per cell, identity entries for inactive
};

double energy_value(const StreamField& psi, const Pitch& pitch,
                    const VorticityProfile& profile, double lambda,
                    const RegularizationParams& reg);

// Sharp-interface energy J_h (chi_{psi>0} in place of the ramp).
double energy_value_sharp(const StreamField& psi, const Pitch& pitch,
                          const VorticityProfile& profile, double lambda);

std::vector<double> energy_gradient(const StreamField& psi, const Pitch& pitch,
                                    const VorticityProfile& profile, double lambda,
                                    const RegularizationParams& reg);

}  // namespace helfb
