// Second-order assembly of the anisotropic operator -div(K grad .) on the
// node lattice: bilinear elements with K frozen at cell centers, Dirichlet
// rows eliminated, and a preconditioned conjugate-gradient solve.
#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "helfb/coefficients.hpp"
#include "helfb/grid.hpp"

namespace helfb {

// 4x4 cell stiffness, corner order SW, SE, NW, NE. Exact integral of the
// bilinear element with constant K; equals the cell-centered-gradient
// quadrature plus the hourglass term that keeps the form definite.
struct ElementMatrix {
    double m[4][4];
};

ElementMatrix element_stiffness(const CoeffMatrix& K);

struct AssembledOperator {
    Eigen::SparseMatrix<double> A;   // unknowns x unknowns, SPD
    std::vector<int> unknown_index;  // per node, -1 where not an unknown
    std::vector<int> node_of_unknown;
    Eigen::VectorXd dirichlet_rhs;  // -A_ud * g, added to load vectors
    double h = 0.0;
};

AssembledOperator assemble_operator(const CrossSectionGrid& grid, const Pitch& pitch);

// Matrix-free application of the full stiffness form divided by h^2:
// approximates -div(K grad psi) at nodes with a complete cell neighborhood.
// Entries at inactive nodes are zero.
std::vector<double> apply_operator(const CrossSectionGrid& grid, const Pitch& pitch,
                                   std::span<const double> node_values);

class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> residual_history;
};

struct SolveOptions {
    double rel_tol = 1e-10;
    int max_iterations = 20000;
};

// Solves -div(K grad psi) = rhs with the grid's Dirichlet data; rhs sampled
// at nodes. Throws SolverError on non-convergence.
StreamField solve_dirichlet(const std::shared_ptr<const CrossSectionGrid>& grid,
                            const Pitch& pitch,
                            const std::function<double(const Vec2&)>& rhs,
                            const SolveOptions& options = {}, SolveStats* stats = nullptr);

StreamField solve_dirichlet(const std::shared_ptr<const CrossSectionGrid>& grid,
                            const Pitch& pitch, std::span<const double> rhs_nodes,
                            const SolveOptions& options = {}, SolveStats* stats = nullptr);

}  // namespace helfb
