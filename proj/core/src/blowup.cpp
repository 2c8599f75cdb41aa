#include "helfb/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace helfb {

namespace {

class RectifiedField final : public PlanarScalarField {
  public:
    RectifiedField(std::shared_ptr<const PlanarScalarField> base, Vec2 x0, CoeffMatrix sqrt_k)
        : base_(std::move(base)), x0_(x0), sqrt_k_(sqrt_k) {}

    std::optional<double> value(const Vec2& p) const override {
        return base_->value(x0_ + sqrt_k_.apply(p));
    }
    std::optional<Vec2> gradient(const Vec2& p) const override {
        auto g = base_->gradient(x0_ + sqrt_k_.apply(p));
        if (!g) return std::nullopt;
        return sqrt_k_.apply(*g);  // K^{1/2} is symmetric
    }
    double domain_radius(const Vec2& center) const override {
        // |K^{1/2} X| <= |X|, so the pullback of a radius-R disk about x0
        // contains the radius-R disk about the preimage of the center.
        return base_->domain_radius(x0_ + sqrt_k_.apply(center));
    }

  private:
    std::shared_ptr<const PlanarScalarField> base_;
    Vec2 x0_;
    CoeffMatrix sqrt_k_;
};

class RescaledField final : public PlanarScalarField {
  public:
    RescaledField(std::shared_ptr<const PlanarScalarField> base, Vec2 x0, double r)
        : base_(std::move(base)), x0_(x0), r_(r) {}

    std::optional<double> value(const Vec2& p) const override {
        auto v = base_->value(x0_ + r_ * p);
        if (!v) return std::nullopt;
        return *v / r_;
    }
    std::optional<Vec2> gradient(const Vec2& p) const override {
        return base_->gradient(x0_ + r_ * p);
    }
    double domain_radius(const Vec2& center) const override {
        return base_->domain_radius(x0_ + r_ * center) / r_;
    }

  private:
    std::shared_ptr<const PlanarScalarField> base_;
    Vec2 x0_;
    double r_;
};

}  // namespace

std::shared_ptr<PlanarScalarField> freeze_and_rectify(
    std::shared_ptr<const PlanarScalarField> psi, const Vec2& x0, const Pitch& pitch) {
    return std::make_shared<RectifiedField>(std::move(psi), x0, coeff_sqrt(x0, pitch).sqrt);
}

std::shared_ptr<PlanarScalarField> blowup_rescale(
    std::shared_ptr<const PlanarScalarField> field, const Vec2& x0, double r) {
    if (!(r > 0.0)) throw std::domain_error("blow-up radius must be positive");
    if (r > field->domain_radius(x0)) {
        throw std::domain_error("blow-up ball leaves the field domain");
    }
    return std::make_shared<RescaledField>(std::move(field), x0, r);
}

namespace {

double deficit_for_angle(const PlanarScalarField& v, const CoeffMatrix& inv_sqrt,
                         double lambda, double angle, std::span<const Vec2> lattice) {
    const Vec2 nu{std::cos(angle), std::sin(angle)};
    double sup = 0.0;
    for (const Vec2& X : lattice) {
        const double plane = lambda * std::max(inv_sqrt.apply(X).dot(nu), 0.0);
        const auto val = v.value(X);
        if (!val) continue;
        sup = std::max(sup, std::abs(*val - plane));
    }
    return sup / lambda;
}

}  // namespace

FlatnessResult flatness_deficit(const PlanarScalarField& rescaled,
                                const CoeffMatrix& inv_sqrt_at_x0, double lambda,
                                const FlatnessOptions& options) {
    // Probe lattice over the closed unit ball.
    std::vector<Vec2> lattice;
    lattice.reserve(static_cast<std::size_t>(options.lattice_n + 1) * (options.lattice_n + 1));
    for (int j = 0; j <= options.lattice_n; ++j) {
        for (int i = 0; i <= options.lattice_n; ++i) {
            const Vec2 X{-1.0 + 2.0 * i / options.lattice_n, -1.0 + 2.0 * j / options.lattice_n};
            if (X.norm2() <= 1.0) lattice.push_back(X);
        }
    }
    auto eval = [&](double angle) {
        return deficit_for_angle(rescaled, inv_sqrt_at_x0, lambda, angle, lattice);
    };

    constexpr double two_pi = 2.0 * std::numbers::pi;
    double best_angle = 0.0;
    double best = std::numeric_limits<double>::max();
    for (int k = 0; k < options.coarse_angles; ++k) {
        const double a = two_pi * k / options.coarse_angles;
        const double d = eval(a);
        if (d < best) {
            best = d;
            best_angle = a;
        }
    }

    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    auto golden_section = [&](double lo, double hi) {
        double x1 = hi - golden * (hi - lo);
        double x2 = lo + golden * (hi - lo);
        double f1 = eval(x1), f2 = eval(x2);
        while (hi - lo > options.angle_tol) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = eval(x2);
            }
        }
        const double mid = 0.5 * (lo + hi);
        return std::pair<double, double>(eval(mid), mid);
    };

    const double half_window = two_pi / options.coarse_angles;
    auto [deficit, angle] = golden_section(best_angle - half_window, best_angle + half_window);

    std::mt19937 rng(options.seed);
    std::uniform_real_distribution<double> uni(0.0, two_pi);
    for (int k = 0; k < options.restarts; ++k) {
        const double center = uni(rng);
        auto [d, a] = golden_section(center - half_window, center + half_window);
        if (d < deficit) {
            deficit = d;
            angle = a;
        }
    }
    return {deficit, Vec2{std::cos(angle), std::sin(angle)}};
}

FlatnessReport flatness_profile(const std::shared_ptr<const PlanarScalarField>& psi,
                                const Vec2& x0, const Pitch& pitch,
                                std::span<const double> radii, double lambda,
                                const FlatnessOptions& options) {
    FlatnessReport report;
    report.center = x0;
    const CoeffMatrix inv_sqrt = coeff_sqrt(x0, pitch).inv_sqrt;
    for (double r : radii) {
        auto rescaled = blowup_rescale(psi, x0, r);
        const FlatnessResult res = flatness_deficit(*rescaled, inv_sqrt, lambda, options);
        report.radii.push_back(r);
        report.deficits.push_back(res.deficit);
        report.directions.push_back(res.nu0);
    }
    return report;
}

namespace {

double weiss_area_integral(const PlanarScalarField& u, double r, double lambda,
                           const WeissOptions& opt) {
    const int n = opt.area_cells;
    const double delta = 2.0 * r / n;
    const double lam2 = lambda * lambda;
    const double cell_reach = 0.5 * delta * std::numbers::sqrt2;

    auto integrand = [&](const Vec2& p) {
        const auto val = u.value(p);
        if (!val) return 0.0;
        const auto grad = u.gradient(p);
        const double g2 = grad ? grad->norm2() : 0.0;
        return g2 + (*val > 0.0 ? lam2 : 0.0);
    };

    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const Vec2 lo{-r + i * delta, -r + j * delta};
            const Vec2 center{lo.x + 0.5 * delta, lo.y + 0.5 * delta};
            const double dc = center.norm();
            if (dc - cell_reach > r) continue;  // fully outside the ball
            bool needs_subsampling = dc + cell_reach >= r;
            if (!needs_subsampling) {
                // Positivity interface detection at the corners and center.
                const Vec2 corners[4] = {lo,
                                         {lo.x + delta, lo.y},
                                         {lo.x, lo.y + delta},
                                         {lo.x + delta, lo.y + delta}};
                int positive = 0, defined = 0;
                for (const Vec2& c : corners) {
                    if (auto cv = u.value(c)) {
                        ++defined;
                        if (*cv > 0.0) ++positive;
                    }
                }
                needs_subsampling = defined < 4 || (positive != 0 && positive != 4);
            }
            if (!needs_subsampling) {
                total += integrand(center) * delta * delta;
            } else {
                const int m = opt.subsamples;
                const double sub = delta / m;
                double acc = 0.0;
                for (int b = 0; b < m; ++b) {
                    for (int a = 0; a < m; ++a) {
                        const Vec2 p{lo.x + (a + 0.5) * sub, lo.y + (b + 0.5) * sub};
                        if (p.norm2() <= r * r) acc += integrand(p);
                    }
                }
                total += acc * sub * sub;
            }
        }
    }
    return total;
}

}  // namespace

WeissProfile weiss_energy(const PlanarScalarField& u, std::span<const double> radii,
                          double lambda, const WeissOptions& options) {
    WeissProfile profile;
    const double max_r = u.domain_radius({0.0, 0.0});
    for (double r : radii) {
        if (!(r > 0.0) || r > max_r) {
            throw std::domain_error("Weiss radius outside the rectified domain");
        }
        const double area = weiss_area_integral(u, r, lambda, options);
        double boundary = 0.0;
        for (int k = 0; k < options.boundary_points; ++k) {
            const double th = 2.0 * std::numbers::pi * k / options.boundary_points;
            const Vec2 p{r * std::cos(th), r * std::sin(th)};
            const auto val = u.value(p);
            if (val) boundary += *val * *val;
        }
        boundary *= 2.0 * std::numbers::pi * r / options.boundary_points;
        profile.radii.push_back(r);
        profile.values.push_back(area / (r * r) - boundary / (r * r * r));
    }
    return profile;
}

NondegeneracyProfile nondegeneracy_ratio(const PlanarScalarField& psi, const Vec2& x0,
                                         std::span<const double> radii, int quad_points) {
    NondegeneracyProfile profile;
    double c0 = std::numeric_limits<double>::max();
    for (double r : radii) {
        double mean_sq = 0.0;
        int counted = 0;
        for (int k = 0; k < quad_points; ++k) {
            const double th = 2.0 * std::numbers::pi * k / quad_points;
            const Vec2 p{x0.x + r * std::cos(th), x0.y + r * std::sin(th)};
            if (auto val = psi.value(p)) {
                mean_sq += *val * *val;
                ++counted;
            }
        }
        if (counted > 0) mean_sq /= counted;
        const double ratio = std::sqrt(mean_sq) / r;
        profile.radii.push_back(r);
        profile.ratios.push_back(ratio);
        c0 = std::min(c0, ratio);
    }
    profile.c0 = profile.radii.empty() ? 0.0 : c0;
    profile.degenerate = profile.c0 < 1e-12;
    return profile;
}

std::vector<double> distance_to_zero_set(const StreamField& psi) {
    const CrossSectionGrid& g = psi.grid();
    const int nx = g.nx + 1, ny = g.ny + 1;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Felzenszwalb-Huttenlocher exact squared Euclidean distance transform:
    // first per-row 1D distances to zero nodes, then the lower envelope of
    // parabolas per column.
    std::vector<double> rowdist(static_cast<std::size_t>(nx) * ny, kInf);
    for (int j = 0; j < ny; ++j) {
        double last = kInf;
        for (int i = 0; i < nx; ++i) {
            const int node = g.node_index(i, j);
            if (g.node_active[node] && psi.values()[node] <= 0.0) last = 0.0;
            else if (last < kInf) last += 1.0;
            rowdist[static_cast<std::size_t>(j) * nx + i] = last;
        }
        last = kInf;
        for (int i = nx - 1; i >= 0; --i) {
            const int node = g.node_index(i, j);
            if (g.node_active[node] && psi.values()[node] <= 0.0) last = 0.0;
            else if (last < kInf) last += 1.0;
            double& d = rowdist[static_cast<std::size_t>(j) * nx + i];
            d = std::min(d, last);
        }
    }

    std::vector<double> out(g.n_nodes(), kInf);
    std::vector<double> f(ny);
    std::vector<int> vhull(ny);
    std::vector<double> zbound(ny + 1);
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const double rd = rowdist[static_cast<std::size_t>(j) * nx + i];
            f[j] = rd == kInf ? kInf : rd * rd;
        }
        // Lower envelope over the finite parabolas only.
        int k = -1;
        auto intersect = [&](int q, int p) {
            return ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
        };
        for (int q = 0; q < ny; ++q) {
            if (f[q] == kInf) continue;
            if (k < 0) {
                k = 0;
                vhull[0] = q;
                zbound[0] = -kInf;
                zbound[1] = kInf;
                continue;
            }
            double s = intersect(q, vhull[k]);
            while (k >= 0 && s <= zbound[k]) {
                --k;
                if (k >= 0) s = intersect(q, vhull[k]);
            }
            if (k < 0) {
                k = 0;
                vhull[0] = q;
                zbound[0] = -kInf;
            } else {
                ++k;
                vhull[k] = q;
                zbound[k] = s;
            }
            zbound[k + 1] = kInf;
        }
        if (k < 0) continue;  // no zero node reaches this column
        int kk = 0;
        for (int j = 0; j < ny; ++j) {
            while (zbound[kk + 1] < j) ++kk;
            const int p = vhull[kk];
            out[g.node_index(i, j)] = std::sqrt(f[p] + (j - p) * (j - p)) * g.h;
        }
    }
    return out;
}

LipschitzReport lipschitz_report(const StreamField& psi) {
    const CrossSectionGrid& g = psi.grid();
    LipschitzReport rep;
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            if (!g.cell_active[g.cell_index(ci, cj)]) continue;
            const double gn = psi.cell_gradient(ci, cj).norm();
            if (gn > rep.sup_gradient) {
                rep.sup_gradient = gn;
                rep.sup_gradient_at = g.cell_center(ci, cj);
            }
        }
    }
    const std::vector<double> dist = distance_to_zero_set(psi);
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int node = g.node_index(i, j);
            if (!g.node_active[node]) continue;
            const double v = psi.values()[node];
            const double d = dist[node];
            if (v > 0.0 && d > 0.0 && std::isfinite(d)) {
                rep.ratio_defined = true;
                if (v / d > rep.sup_ratio) {
                    rep.sup_ratio = v / d;
                    rep.sup_ratio_at = g.node_pos(i, j);
                }
            }
        }
    }
    return rep;
}

std::vector<double> dyadic_radii(double r_max, double r_min) {
    std::vector<double> radii;
    for (double r = r_max; r >= r_min * (1.0 - 1e-12); r *= 0.5) radii.push_back(r);
    return radii;
}

}  // namespace helfb
