#include "helfb/energy.hpp"

#include <cmath>

namespace helfb {

namespace {
constexpr int kCornerDi[4] = {0, 1, 0, 1};
constexpr int kCornerDj[4] = {0, 0, 1, 1};
}  // namespace

DiscreteFunctional::DiscreteFunctional(std::shared_ptr<const CrossSectionGrid> grid,
                                       const Pitch& pitch, VorticityProfile profile,
                                       double lambda)
    : grid_(std::move(grid)), pitch_(pitch), profile_(std::move(profile)), lambda_(lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    const CrossSectionGrid& g = *grid_;
    stiffness_.resize(g.n_cells());
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            const int c = g.cell_index(ci, cj);
            if (g.cell_active[c]) {
                stiffness_[c] = element_stiffness(coeff_matrix(g.cell_center(ci, cj), pitch_));
            }
        }
    }
}

double DiscreteFunctional::cell_energy(std::span<const double> nodes, double eps, int ci,
                                       int cj) const {
    const CrossSectionGrid& g = *grid_;
    const int c = g.cell_index(ci, cj);
    if (!g.cell_active[c]) return 0.0;
    const ElementMatrix& e = stiffness_[c];
    double v[4];
    for (int a = 0; a < 4; ++a) {
        v[a] = nodes[g.node_index(ci + kCornerDi[a], cj + kCornerDj[a])];
    }
    double quad = 0.0;
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) quad += e.m[a][b] * v[a] * v[b];
    }
    const double lam2 = lambda_ * lambda_;
    double nonlin = 0.0;
    for (int a = 0; a < 4; ++a) {
        nonlin += -2.0 * profile_.primitive(v[a]) + lam2 * positivity_ramp(v[a], eps);
    }
    return quad + 0.25 * g.h * g.h * nonlin;
}

double DiscreteFunctional::accumulate(std::span<const double> nodes, double eps,
                                      bool sharp) const {
    const CrossSectionGrid& g = *grid_;
    const double lam2 = lambda_ * lambda_;
    const double quarter_h2 = 0.25 * g.h * g.h;
    double total = 0.0;
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            const int c = g.cell_index(ci, cj);
            if (!g.cell_active[c]) continue;
            const ElementMatrix& e = stiffness_[c];
            double v[4];
            for (int a = 0; a < 4; ++a) {
                v[a] = nodes[g.node_index(ci + kCornerDi[a], cj + kCornerDj[a])];
            }
            double quad = 0.0;
            for (int a = 0; a < 4; ++a) {
                quad += e.m[a][a] * v[a] * v[a];
                for (int b = a + 1; b < 4; ++b) quad += 2.0 * e.m[a][b] * v[a] * v[b];
            }
            double nonlin = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double ind =
                    sharp ? (v[a] > 0.0 ? 1.0 : 0.0) : positivity_ramp(v[a], eps);
                nonlin += -2.0 * profile_.primitive(v[a]) + lam2 * ind;
            }
            total += quad + quarter_h2 * nonlin;
        }
    }
    return total;
}

double DiscreteFunctional::value(std::span<const double> nodes, double eps) const {
    return accumulate(nodes, eps, false);
}

double DiscreteFunctional::value_sharp(std::span<const double> nodes) const {
    return accumulate(nodes, 0.0, true);
}

void DiscreteFunctional::gradient(std::span<const double> nodes, double eps,
                                  std::span<double> out) const {
    const CrossSectionGrid& g = *grid_;
    const double lam2 = lambda_ * lambda_;
    const double quarter_h2 = 0.25 * g.h * g.h;
    for (double& o : out) o = 0.0;
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            const int c = g.cell_index(ci, cj);
            if (!g.cell_active[c]) continue;
            const ElementMatrix& e = stiffness_[c];
            int idx[4];
            double v[4];
            for (int a = 0; a < 4; ++a) {
                idx[a] = g.node_index(ci + kCornerDi[a], cj + kCornerDj[a]);
                v[a] = nodes[idx[a]];
            }
            for (int a = 0; a < 4; ++a) {
                double acc = 0.0;
                for (int b = 0; b < 4; ++b) acc += e.m[a][b] * v[b];
                out[idx[a]] += 2.0 * acc +
                               quarter_h2 * (-2.0 * profile_.f(v[a]) +
                                             lam2 * positivity_ramp_derivative(v[a], eps));
            }
        }
    }
    for (int k = 0; k < g.n_nodes(); ++k) {
        if (!g.is_free(k)) out[k] = 0.0;
    }
}

double energy_value(const StreamField& psi, const Pitch& pitch,
                    const VorticityProfile& profile, double lambda,
                    const RegularizationParams& reg) {
    if (!(reg.epsilon > 0.0)) throw std::invalid_argument("regularization width must be positive");
    DiscreteFunctional fn(psi.grid_ptr(), pitch, profile, lambda);
    return fn.value(psi.values(), reg.epsilon);
}

double energy_value_sharp(const StreamField& psi, const Pitch& pitch,
                          const VorticityProfile& profile, double lambda) {
    DiscreteFunctional fn(psi.grid_ptr(), pitch, profile, lambda);
    return fn.value_sharp(psi.values());
}

std::vector<double> energy_gradient(const StreamField& psi, const Pitch& pitch,
                                    const VorticityProfile& profile, double lambda,
                                    const RegularizationParams& reg) {
    if (!(reg.epsilon > 0.0)) throw std::invalid_argument("regularization width must be positive");
    DiscreteFunctional fn(psi.grid_ptr(), pitch, profile, lambda);
    std::vector<double> out(psi.grid().n_nodes(), 0.0);
    fn.gradient(psi.values(), reg.epsilon, out);
    return out;
}

}  // namespace helfb
