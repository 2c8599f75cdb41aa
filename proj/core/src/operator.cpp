#include "helfb/operator.hpp"

#include <cmath>

namespace helfb {

ElementMatrix element_stiffness(const CoeffMatrix& K) {
    // 2x2 Gauss quadrature on the reference square, exact for the bilinear
    // gradient products. The result is h-independent.
    static const double gp[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
    ElementMatrix e{};
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) e.m[a][b] = 0.0;
    }
    for (double s : gp) {
        for (double t : gp) {
            // Reference gradients of the corner basis SW, SE, NW, NE.
            const double gx[4] = {-(1 - t), (1 - t), -t, t};
            const double gy[4] = {-(1 - s), -s, (1 - s), s};
            for (int a = 0; a < 4; ++a) {
                const Vec2 Kga = K.apply({gx[a], gy[a]});
                for (int b = 0; b < 4; ++b) {
                    e.m[a][b] += 0.25 * (Kga.x * gx[b] + Kga.y * gy[b]);
                }
            }
        }
    }
    return e;
}

namespace {

// Corner node offsets in SW, SE, NW, NE order.
constexpr int kCornerDi[4] = {0, 1, 0, 1};
constexpr int kCornerDj[4] = {0, 0, 1, 1};

}  // namespace

AssembledOperator assemble_operator(const CrossSectionGrid& grid, const Pitch& pitch) {
    AssembledOperator op;
    op.h = grid.h;
    op.unknown_index.assign(grid.n_nodes(), -1);
    for (int j = 0; j <= grid.ny; ++j) {
        for (int i = 0; i <= grid.nx; ++i) {
            const int node = grid.node_index(i, j);
            if (grid.is_free(node)) {
                op.unknown_index[node] = static_cast<int>(op.node_of_unknown.size());
                op.node_of_unknown.push_back(node);
            }
        }
    }
    const int n = static_cast<int>(op.node_of_unknown.size());
    op.dirichlet_rhs = Eigen::VectorXd::Zero(n);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(grid.count_active_cells()) * 16);
    for (int cj = 0; cj < grid.ny; ++cj) {
        for (int ci = 0; ci < grid.nx; ++ci) {
            if (!grid.cell_active[grid.cell_index(ci, cj)]) continue;
            const ElementMatrix e =
                element_stiffness(coeff_matrix(grid.cell_center(ci, cj), pitch));
            int nodes[4];
            for (int a = 0; a < 4; ++a) {
                nodes[a] = grid.node_index(ci + kCornerDi[a], cj + kCornerDj[a]);
            }
            for (int a = 0; a < 4; ++a) {
                const int ua = op.unknown_index[nodes[a]];
                if (ua < 0) continue;
                for (int b = 0; b < 4; ++b) {
                    const int ub = op.unknown_index[nodes[b]];
                    if (ub >= 0) {
                        triplets.emplace_back(ua, ub, e.m[a][b]);
                    } else if (grid.is_dirichlet(nodes[b])) {
                        op.dirichlet_rhs[ua] -= e.m[a][b] * grid.dirichlet[nodes[b]];
                    }
                }
            }
        }
    }
    op.A.resize(n, n);
    op.A.setFromTriplets(triplets.begin(), triplets.end());
    op.A.makeCompressed();
    return op;
}

std::vector<double> apply_operator(const CrossSectionGrid& grid, const Pitch& pitch,
                                   std::span<const double> node_values) {
    std::vector<double> out(grid.n_nodes(), 0.0);
    for (int cj = 0; cj < grid.ny; ++cj) {
        for (int ci = 0; ci < grid.nx; ++ci) {
            if (!grid.cell_active[grid.cell_index(ci, cj)]) continue;
            const ElementMatrix e =
                element_stiffness(coeff_matrix(grid.cell_center(ci, cj), pitch));
            int nodes[4];
            for (int a = 0; a < 4; ++a) {
                nodes[a] = grid.node_index(ci + kCornerDi[a], cj + kCornerDj[a]);
            }
            for (int a = 0; a < 4; ++a) {
                double acc = 0.0;
                for (int b = 0; b < 4; ++b) acc += e.m[a][b] * node_values[nodes[b]];
                out[nodes[a]] += acc;
            }
        }
    }
    const double inv_h2 = 1.0 / (grid.h * grid.h);
    for (double& v : out) v *= inv_h2;
    return out;
}

namespace {

// Jacobi-preconditioned CG recording the relative residual per iteration.
SolveStats conjugate_gradient(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                              Eigen::VectorXd& x, const SolveOptions& options) {
    SolveStats stats;
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        x.setZero();
        stats.residual_history.push_back(0.0);
        return stats;
    }
    Eigen::VectorXd diag = A.diagonal();
    for (int i = 0; i < diag.size(); ++i) {
        if (diag[i] <= 0.0) diag[i] = 1.0;
    }
    Eigen::VectorXd r = b - A * x;
    Eigen::VectorXd z = r.cwiseQuotient(diag);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    stats.residual_history.push_back(r.norm() / bnorm);
    for (int it = 0; it < options.max_iterations; ++it) {
        const Eigen::VectorXd Ap = A * p;
        const double alpha = rz / p.dot(Ap);
        x += alpha * p;
        r -= alpha * Ap;
        const double rel = r.norm() / bnorm;
        stats.residual_history.push_back(rel);
        stats.iterations = it + 1;
        stats.relative_residual = rel;
        if (rel <= options.rel_tol) return stats;
        z = r.cwiseQuotient(diag);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    throw SolverError("conjugate gradient failed to reach tolerance", stats.residual_history);
}

StreamField solve_impl(const std::shared_ptr<const CrossSectionGrid>& grid, const Pitch& pitch,
                       const std::function<double(int)>& rhs_at_node,
                       const SolveOptions& options, SolveStats* stats) {
    const AssembledOperator op = assemble_operator(*grid, pitch);
    const CrossSectionGrid& g = *grid;
    const int n = static_cast<int>(op.node_of_unknown.size());
    Eigen::VectorXd b(n);
    const double h2 = g.h * g.h;
    for (int u = 0; u < n; ++u) {
        const int node = op.node_of_unknown[u];
        const int i = node % (g.nx + 1);
        const int j = node / (g.nx + 1);
        // Lumped load: integral of the hat function over the active cells.
        int active = 0;
        for (int dj = -1; dj <= 0; ++dj) {
            for (int di = -1; di <= 0; ++di) {
                const int ci = i + di, cj = j + dj;
                if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
                if (g.cell_active[g.cell_index(ci, cj)]) ++active;
            }
        }
        b[u] = h2 * (active / 4.0) * rhs_at_node(node) + op.dirichlet_rhs[u];
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    SolveStats s = conjugate_gradient(op.A, b, x, options);
    if (stats) *stats = std::move(s);

    StreamField psi(grid);
    psi.apply_dirichlet();
    for (int u = 0; u < n; ++u) psi.values()[op.node_of_unknown[u]] = x[u];
    return psi;
}

}  // namespace

StreamField solve_dirichlet(const std::shared_ptr<const CrossSectionGrid>& grid,
                            const Pitch& pitch,
                            const std::function<double(const Vec2&)>& rhs,
                            const SolveOptions& options, SolveStats* stats) {
    const CrossSectionGrid& g = *grid;
    return solve_impl(
        grid, pitch,
        [&](int node) {
            const int i = node % (g.nx + 1);
            const int j = node / (g.nx + 1);
            return rhs ? rhs(g.node_pos(i, j)) : 0.0;
        },
        options, stats);
}

StreamField solve_dirichlet(const std::shared_ptr<const CrossSectionGrid>& grid,
                            const Pitch& pitch, std::span<const double> rhs_nodes,
                            const SolveOptions& options, SolveStats* stats) {
    return solve_impl(
        grid, pitch, [&](int node) { return rhs_nodes[node]; }, options, stats);
}

}  // namespace helfb
