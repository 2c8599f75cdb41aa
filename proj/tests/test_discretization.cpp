// Grid construction, operator assembly and consistency, the regularized
// energy and its gradient, and the Dirichlet solver.
#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <cmath>
#include <random>

#include "helfb/energy.hpp"
#include "helfb/exact_solutions.hpp"
#include "helfb/grid.hpp"
#include "helfb/operator.hpp"

using namespace helfb;

namespace {

std::shared_ptr<const CrossSectionGrid> make_square(double h, const char* edge = nullptr,
                                                    double g = 0.0) {
    const RectDomain rect{{0, 0}, {1, 1}};
    std::vector<DirichletPatch> patches;
    if (edge) {
        patches.push_back(rect_edge_patch(rect, edge, [g](const Vec2&) { return g; }, h / 4));
    }
    return std::make_shared<const CrossSectionGrid>(build_grid(rect, h, patches));
}

// Independent oracle for -div(K grad psi): central differences of the exact
// flux with a step far below the grid scales.
double minus_div_flux(const std::function<Vec2(const Vec2&)>& grad_psi, const Vec2& p,
                      const Pitch& pitch, double delta = 1e-6) {
    auto flux = [&](const Vec2& q) { return coeff_matrix(q, pitch).apply(grad_psi(q)); };
    const double dx = (flux({p.x + delta, p.y}).x - flux({p.x - delta, p.y}).x) / (2 * delta);
    const double dy = (flux({p.x, p.y + delta}).y - flux({p.x, p.y - delta}).y) / (2 * delta);
    return -(dx + dy);
}

double loglog_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(hs.size());
    for (int i = 0; i < n; ++i) {
        const double x = std::log(hs[i]);
        const double y = std::log(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("build_grid: unit square counts") {
    auto grid = make_square(0.25, "bottom", 1.0);
    CHECK(grid->nx == 4);
    CHECK(grid->ny == 4);
    CHECK(grid->n_nodes() == 25);
    CHECK(grid->count_active_nodes() == 25);
    CHECK(grid->count_dirichlet_nodes() == 5);
    for (int i = 0; i <= 4; ++i) {
        CHECK(grid->is_dirichlet(grid->node_index(i, 0)));
    }
}

TEST_CASE("build_grid: annulus ring classification") {
    const AnnulusDomain ann{{0, 0}, 0.2, 1.5};
    const double h = 1.0 / 32;
    std::vector<DirichletPatch> patches{
        annulus_ring_patch(ann, "inner", [](const Vec2&) { return 0.7; })};
    const CrossSectionGrid g = build_grid(ann, h, patches);
    int count = 0;
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int node = g.node_index(i, j);
            if (!g.is_dirichlet(node)) continue;
            ++count;
            const double r = g.node_pos(i, j).norm();
            // Geometric oracle: the inner Dirichlet nodes hug the inner circle.
            CHECK(g.node_boundary[node] == 1);
            CHECK(r >= 0.2 - 1e-12);
            CHECK(r <= 0.2 + 2.5 * h);
        }
    }
    CHECK(count > 8);
}

TEST_CASE("build_grid: error paths") {
    const RectDomain rect{{0, 0}, {1, 1}};
    SUBCASE("negative Dirichlet data violates admissibility") {
        std::vector<DirichletPatch> patches{
            rect_edge_patch(rect, "bottom", [](const Vec2&) { return -1.0; }, 0.05)};
        CHECK_THROWS_AS(build_grid(rect, 0.25, patches), ConfigError);
    }
    SUBCASE("patch off the boundary selects nothing") {
        std::vector<DirichletPatch> patches{
            {[](const Vec2& p) {
                 return std::abs(p.y - 0.5) < 0.01 && p.x > 0.2 && p.x < 0.8;
             },
             [](const Vec2&) { return 1.0; }}};
        CHECK_THROWS_AS(build_grid(rect, 0.25, patches), ConfigError);
    }
    SUBCASE("bad spacing") {
        CHECK_THROWS_AS(build_grid(rect, -0.1, {}), ConfigError);
    }
}

TEST_CASE("operator: Laplacian limit at large pitch") {
    auto grid = make_square(1.0 / 32);
    const Pitch pitch(1e6);
    std::vector<double> psi(grid->n_nodes());
    for (int j = 0; j <= grid->ny; ++j) {
        for (int i = 0; i <= grid->nx; ++i) {
            const Vec2 p = grid->node_pos(i, j);
            psi[grid->node_index(i, j)] = p.x * p.x + p.y * p.y;
        }
    }
    const auto L = apply_operator(*grid, pitch, psi);
    for (int j = 1; j < grid->ny; ++j) {
        for (int i = 1; i < grid->nx; ++i) {
            CHECK(std::abs(L[grid->node_index(i, j)] - (-4.0)) <= 1e-6);
        }
    }
}

TEST_CASE("operator: manufactured radial source at kappa = 1, order >= 1.9") {
    const Pitch pitch(1.0);
    std::vector<double> hs, errs;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        auto grid = make_square(h);
        std::vector<double> psi(grid->n_nodes());
        for (int j = 0; j <= grid->ny; ++j) {
            for (int i = 0; i <= grid->nx; ++i) {
                psi[grid->node_index(i, j)] = grid->node_pos(i, j).norm2();
            }
        }
        const auto L = apply_operator(*grid, pitch, psi);
        double err = 0.0;
        for (int j = 1; j < grid->ny; ++j) {
            for (int i = 1; i < grid->nx; ++i) {
                const double r2 = grid->node_pos(i, j).norm2();
                const double exact = -4.0 / ((1.0 + r2) * (1.0 + r2));
                err = std::max(err, std::abs(L[grid->node_index(i, j)] - exact));
            }
        }
        hs.push_back(h);
        errs.push_back(err);
    }
    const double slope = loglog_slope(hs, errs);
    CHECK(slope >= 1.8);
    CHECK(slope <= 2.2);
}

TEST_CASE("operator: consistency on a non-radial smooth field") {
    const Pitch pitch(1.0);
    auto grad = [](const Vec2& p) {
        return Vec2{1.3 * std::cos(1.3 * p.x + 0.4 * p.y) + 2.0 * p.x * p.y,
                    0.4 * std::cos(1.3 * p.x + 0.4 * p.y) + p.x * p.x};
    };
    auto value = [](const Vec2& p) {
        return std::sin(1.3 * p.x + 0.4 * p.y) + p.x * p.x * p.y;
    };
    std::vector<double> hs, errs;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        auto grid = make_square(h);
        std::vector<double> psi(grid->n_nodes());
        for (int j = 0; j <= grid->ny; ++j) {
            for (int i = 0; i <= grid->nx; ++i) {
                psi[grid->node_index(i, j)] = value(grid->node_pos(i, j));
            }
        }
        const auto L = apply_operator(*grid, pitch, psi);
        double err = 0.0;
        for (int j = 1; j < grid->ny; ++j) {
            for (int i = 1; i < grid->nx; ++i) {
                const double exact = minus_div_flux(grad, grid->node_pos(i, j), pitch);
                err = std::max(err, std::abs(L[grid->node_index(i, j)] - exact));
            }
        }
        hs.push_back(h);
        errs.push_back(err);
    }
    const double slope = loglog_slope(hs, errs);
    CHECK(slope >= 1.8);
    CHECK(slope <= 2.2);
}

TEST_CASE("operator: symmetry and positive definiteness") {
    auto grid = make_square(1.0 / 16, "all", 0.0);
    const AssembledOperator op = assemble_operator(*grid, Pitch(0.8));

    Eigen::SparseMatrix<double> diff = op.A - Eigen::SparseMatrix<double>(op.A.transpose());
    double max_entry = 0.0;
    for (int k = 0; k < diff.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it) {
            max_entry = std::max(max_entry, std::abs(it.value()));
        }
    }
    CHECK(max_entry <= 1e-14);

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op.A);
    REQUIRE(llt.info() == Eigen::Success);
    Eigen::VectorXd x = Eigen::VectorXd::Ones(op.A.rows());
    x.normalize();
    for (int it = 0; it < 50; ++it) {
        x = llt.solve(x);
        x.normalize();
    }
    const double ritz = x.dot(op.A * x);
    CHECK(ritz > 0.0);
}

TEST_CASE("energy: zero field has zero energy") {
    auto grid = make_square(1.0 / 16);
    StreamField psi(grid);
    CHECK(energy_value(psi, Pitch(1.0), VorticityProfile::zero(), 1.0, {0.05}) ==
          doctest::Approx(0.0));
    CHECK(energy_value(psi, Pitch(1.0), VorticityProfile::sigmoid(), 1.0, {0.05}) ==
          doctest::Approx(0.0));
}

TEST_CASE("energy: half-plane strip closed form") {
    // J -> 2 lambda^2 h0 = 1 as eps, h -> 0.
    const HalfPlaneSolution sol{1.0, 0.5};
    const Pitch pitch(1e6);
    double prev_gap = 1.0;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        auto grid = make_square(h);
        StreamField psi(grid);
        psi.sample([&](const Vec2& p) { return sol.value(p); });
        const double J = energy_value(psi, pitch, VorticityProfile::zero(), 1.0, {2.0 * h});
        const double gap = std::abs(J - 1.0);
        CHECK(gap <= 0.06);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;

        // Sharp vs regularized differ by at most eps * lambda * perimeter.
        const double Jsharp = energy_value_sharp(psi, pitch, VorticityProfile::zero(), 1.0);
        CHECK(std::abs(J - Jsharp) <= 2.0 * h * 1.0 * 1.2);
    }
}

TEST_CASE("energy: gradient matches finite differences in 20 random trials") {
    auto grid = make_square(1.0 / 20, "bottom", 0.3);
    const Pitch pitch(1.0);
    const VorticityProfile profile = VorticityProfile::sigmoid();
    const double lambda = 1.0;
    const RegularizationParams reg{0.1};

    std::mt19937 rng(271);
    std::uniform_real_distribution<double> val(0.05, 1.0);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        StreamField psi(grid);
        psi.apply_dirichlet();
        std::vector<double> d(grid->n_nodes(), 0.0);
        for (int k = 0; k < grid->n_nodes(); ++k) {
            if (!grid->is_free(k)) continue;
            double v = val(rng);
            // Stay clear of the ramp kink at eps so the FD window is smooth.
            if (std::abs(v - reg.epsilon) < 0.02) v += 0.05;
            psi.values()[k] = v;
            d[k] = dir(rng);
        }
        const auto grad = energy_gradient(psi, pitch, profile, lambda, reg);
        double directional = 0.0;
        for (int k = 0; k < grid->n_nodes(); ++k) directional += grad[k] * d[k];

        const double delta = 1e-6;
        StreamField plus(grid), minus(grid);
        plus.values() = psi.values();
        minus.values() = psi.values();
        for (int k = 0; k < grid->n_nodes(); ++k) {
            if (!grid->is_free(k)) continue;
            plus.values()[k] += delta * d[k];
            minus.values()[k] -= delta * d[k];
        }
        const double fd = (energy_value(plus, pitch, profile, lambda, reg) -
                           energy_value(minus, pitch, profile, lambda, reg)) /
                          (2 * delta);
        CHECK(std::abs(fd - directional) <= 1e-6 * std::max(1.0, std::abs(directional)));
    }
}

TEST_CASE("energy: gradient reduces to the operator away from the ramp") {
    auto grid = make_square(1.0 / 16, "bottom", 2.0);
    const Pitch pitch(1.2);
    const RegularizationParams reg{0.01};
    StreamField psi(grid);
    psi.sample([](const Vec2& p) { return 2.0 + p.x + 0.5 * p.y * p.y; });  // >> eps
    psi.apply_dirichlet();
    const auto grad = energy_gradient(psi, pitch, VorticityProfile::zero(), 1.0, reg);
    const auto L = apply_operator(*grid, pitch, psi.values());
    const double h2 = grid->h * grid->h;
    for (int j = 1; j < grid->ny; ++j) {
        for (int i = 1; i < grid->nx; ++i) {
            const int k = grid->node_index(i, j);
            if (!grid->is_free(k)) continue;
            CHECK(std::abs(grad[k] - 2.0 * h2 * L[k]) <=
                  1e-12 * std::max(1.0, std::abs(grad[k])));
        }
    }
}

TEST_CASE("energy: zero field has zero gradient when f(0) = 0") {
    auto grid = make_square(1.0 / 16);
    StreamField psi(grid);
    const auto grad =
        energy_gradient(psi, Pitch(1.0), VorticityProfile::zero(), 1.0, {0.05});
    for (double gk : grad) CHECK(gk == 0.0);
}

TEST_CASE("energy: coercive for f = 0") {
    auto grid = make_square(1.0 / 16);
    const Pitch pitch(1.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        StreamField psi(grid);
        double mass = 0.0;
        for (int k = 0; k < grid->n_nodes(); ++k) {
            psi.values()[k] = val(rng);
            mass += psi.values()[k];
        }
        const double J = energy_value(psi, pitch, VorticityProfile::zero(), 1.0, {0.05});
        if (mass > 0.0) CHECK(J > 0.0);
    }
    StreamField zero(grid);
    CHECK(energy_value(zero, pitch, VorticityProfile::zero(), 1.0, {0.05}) == 0.0);
}

TEST_CASE("solve_dirichlet: discrete harmonic polynomial is exact in the Laplacian limit") {
    const RectDomain rect{{0, 0}, {1, 1}};
    std::vector<DirichletPatch> patches{
        rect_edge_patch(rect, "all", [](const Vec2& p) { return p.x; }, 0.01)};
    auto grid = std::make_shared<const CrossSectionGrid>(build_grid(rect, 1.0 / 16, patches));
    SolveOptions opt;
    opt.rel_tol = 1e-13;
    const StreamField psi = solve_dirichlet(grid, Pitch(1e6), nullptr, opt);
    for (int j = 0; j <= grid->ny; ++j) {
        for (int i = 0; i <= grid->nx; ++i) {
            CHECK(std::abs(psi.at(i, j) - grid->node_pos(i, j).x) <= 1e-8);
        }
    }
}

TEST_CASE("solve_dirichlet: radial exact solution at order >= 1.9") {
    const RadialSolution sol{1.0, 1.0, 1.0};
    const AnnulusDomain ann{{0, 0}, 0.25, 0.9};
    std::vector<double> hs, errs;
    for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
        std::vector<DirichletPatch> patches{
            annulus_ring_patch(ann, "all", [&](const Vec2& p) { return sol.value(p); })};
        auto grid = std::make_shared<const CrossSectionGrid>(build_grid(ann, h, patches));
        const StreamField psi = solve_dirichlet(grid, Pitch(1.0), nullptr);
        double err = 0.0;
        for (int j = 0; j <= grid->ny; ++j) {
            for (int i = 0; i <= grid->nx; ++i) {
                const int k = grid->node_index(i, j);
                if (!grid->is_free(k)) continue;
                err = std::max(err,
                               std::abs(psi.values()[k] - sol.value(grid->node_pos(i, j))));
            }
        }
        hs.push_back(h);
        errs.push_back(err);
    }
    const double slope = loglog_slope(hs, errs);
    CHECK(slope >= 1.9);
}

TEST_CASE("solve_dirichlet: discrete maximum principle at large pitch") {
    const RectDomain rect{{0, 0}, {1, 1}};
    auto bdata = [](const Vec2& p) { return 0.5 + 0.5 * std::sin(7 * p.x + 3 * p.y); };
    std::vector<DirichletPatch> patches{rect_edge_patch(rect, "all", bdata, 0.01)};
    auto grid = std::make_shared<const CrossSectionGrid>(build_grid(rect, 1.0 / 24, patches));
    const StreamField psi = solve_dirichlet(grid, Pitch(1e6), nullptr);
    double glo = 1e300, ghi = -1e300;
    for (int k = 0; k < grid->n_nodes(); ++k) {
        if (grid->is_dirichlet(k)) {
            glo = std::min(glo, grid->dirichlet[k]);
            ghi = std::max(ghi, grid->dirichlet[k]);
        }
    }
    for (int k = 0; k < grid->n_nodes(); ++k) {
        if (grid->is_free(k)) {
            CHECK(psi.values()[k] >= glo - 1e-12);
            CHECK(psi.values()[k] <= ghi + 1e-12);
        }
    }
}

TEST_CASE("solve_dirichlet: non-convergence carries the residual history") {
    auto grid = make_square(1.0 / 32, "bottom", 1.0);
    SolveOptions opt;
    opt.max_iterations = 2;
    try {
        solve_dirichlet(grid, Pitch(1.0), [](const Vec2&) { return 1.0; }, opt);
        FAIL("expected SolverError");
    } catch (const SolverError& e) {
        CHECK(e.residual_history.size() >= 2);
    }
}
