#include "helfb/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace helfb {

VelocityField::VelocityField(std::shared_ptr<const CrossSectionGrid> grid, const Pitch& pitch)
    : grid_(std::move(grid)),
      pitch_(pitch),
      u1_(grid_->n_nodes(), 0.0),
      u2_(grid_->n_nodes(), 0.0),
      u3_(grid_->n_nodes(), 0.0),
      defined_(grid_->n_nodes(), 0) {}

Vec3 VelocityField::at_node(int i, int j) const {
    const int k = grid_->node_index(i, j);
    return {u1_[k], u2_[k], u3_[k]};
}

bool VelocityField::node_defined(int i, int j) const {
    return defined_[grid_->node_index(i, j)] != 0;
}

std::optional<Vec3> VelocityField::sample(const Vec2& p) const {
    const CrossSectionGrid& g = *grid_;
    const double sx = (p.x - g.origin.x) / g.h;
    const double sy = (p.y - g.origin.y) / g.h;
    if (sx < 0.0 || sy < 0.0 || sx > g.nx || sy > g.ny) return std::nullopt;
    const int ci = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx - 1);
    const int cj = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny - 1);
    if (!g.cell_active[g.cell_index(ci, cj)]) return std::nullopt;
    const double s = sx - ci, t = sy - cj;
    const int n00 = g.node_index(ci, cj), n10 = g.node_index(ci + 1, cj);
    const int n01 = g.node_index(ci, cj + 1), n11 = g.node_index(ci + 1, cj + 1);
    auto lerp = [&](const std::vector<double>& f) {
        return f[n00] * (1 - s) * (1 - t) + f[n10] * s * (1 - t) + f[n01] * (1 - s) * t +
               f[n11] * s * t;
    };
    const double u1 = lerp(u1_);
    const double u2 = lerp(u2_);
    // Orthogonality u . xi = 0 re-imposed at the query point.
    const double u3 = (-p.y * u1 + p.x * u2) / pitch_.kappa();
    return Vec3{u1, u2, u3};
}

VelocityField velocity_cross_section(const StreamField& psi, const Pitch& pitch) {
    VelocityField field(psi.grid_ptr(), pitch);
    const CrossSectionGrid& g = psi.grid();
    const double kappa = pitch.kappa();
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            const int k = g.node_index(i, j);
            if (!g.node_active[k]) continue;
            const auto grad = psi.node_gradient(i, j);
            if (!grad) continue;
            const Vec2 p = g.node_pos(i, j);
            const Vec2 kg = coeff_matrix(p, pitch).apply(*grad);
            const double u1 = kg.y;
            const double u2 = -kg.x;
            const double u3 = (-p.y * u1 + p.x * u2) / kappa;

            // Closed matrix form stated with the normal-vector corollary.
            const double denom = kappa * kappa + p.x * p.x + p.y * p.y;
            const double c1 = (-p.x * p.y * grad->x + (kappa * kappa + p.x * p.x) * grad->y) / denom;
            const double c2 = (-(kappa * kappa + p.y * p.y) * grad->x + p.x * p.y * grad->y) / denom;
            const double c3 = (-kappa * p.x * grad->x - kappa * p.y * grad->y) / denom;
            field.max_form_discrepancy_ =
                std::max({field.max_form_discrepancy_, std::abs(c1 - u1), std::abs(c2 - u2),
                          std::abs(c3 - u3)});

            field.u1_[k] = u1;
            field.u2_[k] = u2;
            field.u3_[k] = u3;
            field.defined_[k] = 1;
        }
    }
    return field;
}

std::optional<HelicalVelocitySample> velocity_at(const Point3& p, const VelocityField& u0) {
    auto value = helical_extend_field(
        [&u0](const Vec2& q) { return u0.sample(q); }, p, u0.pitch());
    if (!value) return std::nullopt;
    return HelicalVelocitySample{p, *value};
}

FieldResidualReport field_residuals(const StreamField& psi, const Pitch& pitch,
                                    const VorticityProfile& profile,
                                    const FieldResidualOptions& options) {
    const CrossSectionGrid& g = psi.grid();
    const double spacing = options.probe_spacing > 0.0 ? options.probe_spacing : 2.0 * g.h;
    const double margin = options.positivity_margin > 0.0 ? options.positivity_margin : 2.0 * g.h;

    FieldResidualReport rep;
    rep.alignment_floor = options.alignment_floor;
    VelocityField u0 = velocity_cross_section(psi, pitch);

    // A probe is usable when the whole FD stencil pulls back into solidly
    // positive cross-section data.
    auto solid = [&](const Vec2& center, double radius) {
        const int reach = static_cast<int>(std::ceil(radius / g.h)) + 1;
        const int i0 = static_cast<int>(std::floor((center.x - g.origin.x) / g.h));
        const int j0 = static_cast<int>(std::floor((center.y - g.origin.y) / g.h));
        for (int j = j0 - reach; j <= j0 + reach + 1; ++j) {
            for (int i = i0 - reach; i <= i0 + reach + 1; ++i) {
                if (i < 0 || j < 0 || i > g.nx || j > g.ny) return false;
                const int node = g.node_index(i, j);
                if (!g.node_active[node]) return false;
                if (psi.values()[node] <= margin) return false;
            }
        }
        return true;
    };

    auto u_at = [&](const Point3& q) -> std::optional<Vec3> {
        auto s = velocity_at(q, u0);
        if (!s) return std::nullopt;
        return s->velocity;
    };

    const int stride = std::max(1, static_cast<int>(std::round(spacing / g.h)));
    std::vector<Point3> probes;
    for (int j = 0; j <= g.ny; j += stride) {
        for (int i = 0; i <= g.nx; i += stride) {
            const int node = g.node_index(i, j);
            if (!g.node_active[node]) continue;
            const Vec2 p = g.node_pos(i, j);
            // The z-offset stencil points pull back to rotated planar points.
            const double swing = spacing * (1.0 + p.norm() / std::abs(pitch.kappa()));
            if (!solid(p, swing + spacing)) continue;
            for (int l = -options.z_layers; l <= options.z_layers; ++l) {
                probes.push_back({p.x, p.y, l * spacing});
            }
        }
    }

    for (const Point3& q : probes) {
        const double s = spacing;
        const Vec3 ex{s, 0, 0}, ey{0, s, 0}, ez{0, 0, s};
        auto vxp = u_at(q + ex), vxm = u_at(q - ex);
        auto vyp = u_at(q + ey), vym = u_at(q - ey);
        auto vzp = u_at(q + ez), vzm = u_at(q - ez);
        auto vc = u_at(q);
        if (!vxp || !vxm || !vyp || !vym || !vzp || !vzm || !vc) continue;

        const double div = (vxp->x - vxm->x + vyp->y - vym->y + vzp->z - vzm->z) / (2.0 * s);
        rep.max_divergence = std::max(rep.max_divergence, std::abs(div));
        ++rep.divergence_probes;

        const Vec3 w{(vyp->z - vym->z - (vzp->y - vzm->y)) / (2.0 * s),
                     (vzp->x - vzm->x - (vxp->z - vxm->z)) / (2.0 * s),
                     (vxp->y - vxm->y - (vyp->x - vym->x)) / (2.0 * s)};
        const Vec3 xi = xi_field(q, pitch);
        const double wn = w.norm();
        if (wn >= options.alignment_floor) {
            const double defect = w.cross(xi).norm() / (wn * xi.norm());
            rep.max_alignment_defect = std::max(rep.max_alignment_defect, defect);
            ++rep.alignment_probes;
        } else {
            ++rep.alignment_below_floor;
        }

        rep.max_orthogonality = std::max(rep.max_orthogonality, std::abs(vc->dot(xi)));
    }

    // W = d(u2)/dx - d(u1)/dy against f(psi) on the cross-section.
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 1; i < g.nx; ++i) {
            const int node = g.node_index(i, j);
            if (!g.node_active[node] || psi.values()[node] <= margin) continue;
            bool ok = true;
            for (int dj = -1; dj <= 1 && ok; ++dj) {
                for (int di = -1; di <= 1 && ok; ++di) {
                    if (!u0.node_defined(i + di, j + dj)) ok = false;
                }
            }
            if (!ok) continue;
            const double W = (u0.at_node(i + 1, j).y - u0.at_node(i - 1, j).y) / (2.0 * g.h) -
                             (u0.at_node(i, j + 1).x - u0.at_node(i, j - 1).x) / (2.0 * g.h);
            const double mism = std::abs(W - profile.f(psi.values()[node]));
            rep.max_vorticity_mismatch = std::max(rep.max_vorticity_mismatch, mism);
            ++rep.vorticity_probes;
        }
    }

    // Helicity law spot check on a seeded sample of probes and angles.
    std::mt19937 rng(options.seed);
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> pick(0, probes.empty() ? 0 : probes.size() - 1);
    const int spots = probes.empty() ? 0 : 32;
    for (int k = 0; k < spots; ++k) {
        const Point3 p = probes[pick(rng)];
        const double rho = angle(rng);
        auto lhs = u_at(screw_transform(p, {rho, pitch}));
        auto rhs = u_at(p);
        if (!lhs || !rhs) continue;
        const Vec3 rot = rotate_z(*rhs, rho);
        rep.max_helicity_law_error =
            std::max(rep.max_helicity_law_error, (*lhs - rot).norm());
        ++rep.helicity_probes;
    }
    return rep;
}

std::optional<Vec3> boundary_normal(const Point3& p, const VelocityField& u0, double tol) {
    auto sample = velocity_at(p, u0);
    if (!sample) return std::nullopt;
    const Vec3 cross = sample->velocity.cross(xi_field(p, u0.pitch()));
    const double n = cross.norm();
    if (n < tol) return std::nullopt;
    return cross * (1.0 / n);
}

}  // namespace helfb
