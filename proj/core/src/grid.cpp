#include "helfb/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace helfb {

namespace {

bool point_in_rings(const std::vector<std::vector<Vec2>>& rings, const Vec2& p) {
    // Even-odd ray casting over all rings.
    bool inside = false;
    for (const auto& ring : rings) {
        const std::size_t n = ring.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& a = ring[i];
            const Vec2& b = ring[j];
            if ((a.y > p.y) != (b.y > p.y)) {
                const double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
                if (p.x < xint) inside = !inside;
            }
        }
    }
    return inside;
}

}  // namespace

bool domain_contains(const DomainSpec& domain, const Vec2& p, double tol) {
    return std::visit(
        [&](const auto& d) -> bool {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, RectDomain>) {
                return p.x >= d.lo.x - tol && p.x <= d.hi.x + tol && p.y >= d.lo.y - tol &&
                       p.y <= d.hi.y + tol;
            } else if constexpr (std::is_same_v<T, AnnulusDomain>) {
                const double r = (p - d.center).norm();
                return r >= d.r_inner - tol && r <= d.r_outer + tol;
            } else {
                return point_in_rings(d.rings, p);
            }
        },
        domain);
}

RectDomain domain_bounding_box(const DomainSpec& domain) {
    return std::visit(
        [](const auto& d) -> RectDomain {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, RectDomain>) {
                return d;
            } else if constexpr (std::is_same_v<T, AnnulusDomain>) {
                const Vec2 r{d.r_outer, d.r_outer};
                return {d.center - r, d.center + r};
            } else {
                Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
                Vec2 hi{std::numeric_limits<double>::lowest(),
                        std::numeric_limits<double>::lowest()};
                for (const auto& ring : d.rings) {
                    for (const Vec2& v : ring) {
                        lo.x = std::min(lo.x, v.x);
                        lo.y = std::min(lo.y, v.y);
                        hi.x = std::max(hi.x, v.x);
                        hi.y = std::max(hi.y, v.y);
                    }
                }
                return {lo, hi};
            }
        },
        domain);
}

int CrossSectionGrid::count_active_nodes() const {
    return static_cast<int>(std::count(node_active.begin(), node_active.end(), 1));
}

int CrossSectionGrid::count_active_cells() const {
    return static_cast<int>(std::count(cell_active.begin(), cell_active.end(), 1));
}

int CrossSectionGrid::count_dirichlet_nodes() const {
    int n = 0;
    for (int k = 0; k < n_nodes(); ++k) {
        if (is_dirichlet(k)) ++n;
    }
    return n;
}

CrossSectionGrid build_grid(const DomainSpec& domain, double h,
                            std::span<const DirichletPatch> fixed_boundary) {
    if (!(h > 0.0)) throw ConfigError("grid spacing h must be positive");
    const RectDomain bbox = domain_bounding_box(domain);
    const double wx = bbox.hi.x - bbox.lo.x;
    const double wy = bbox.hi.y - bbox.lo.y;
    if (!(wx > 0.0) || !(wy > 0.0)) throw ConfigError("domain is degenerate");

    CrossSectionGrid g;
    g.origin = bbox.lo;
    g.h = h;
    g.nx = std::max(1, static_cast<int>(std::ceil(wx / h - 1e-9)));
    g.ny = std::max(1, static_cast<int>(std::ceil(wy / h - 1e-9)));

    const double tol = 1e-9 * std::max(1.0, h);
    g.node_inside.assign(g.n_nodes(), 0);
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            g.node_inside[g.node_index(i, j)] =
                domain_contains(domain, g.node_pos(i, j), tol) ? 1 : 0;
        }
    }

    g.cell_active.assign(g.n_cells(), 0);
    int active_cells = 0;
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            const bool active = g.node_inside[g.node_index(ci, cj)] &&
                                g.node_inside[g.node_index(ci + 1, cj)] &&
                                g.node_inside[g.node_index(ci, cj + 1)] &&
                                g.node_inside[g.node_index(ci + 1, cj + 1)];
            g.cell_active[g.cell_index(ci, cj)] = active ? 1 : 0;
            active_cells += active;
        }
    }
    if (active_cells == 0) throw ConfigError("domain mask has no active cells at this h");

    g.node_active.assign(g.n_nodes(), 0);
    g.node_boundary.assign(g.n_nodes(), 0);
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i <= g.nx; ++i) {
            int adjacent = 0, active = 0;
            for (int dj = -1; dj <= 0; ++dj) {
                for (int di = -1; di <= 0; ++di) {
                    const int ci = i + di, cj = j + dj;
                    if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
                    ++adjacent;
                    if (g.cell_active[g.cell_index(ci, cj)]) ++active;
                }
            }
            const int node = g.node_index(i, j);
            g.node_active[node] = active > 0 ? 1 : 0;
            g.node_boundary[node] = (active > 0 && (active < 4 || adjacent < 4)) ? 1 : 0;
        }
    }

    g.dirichlet.assign(g.n_nodes(), std::numeric_limits<double>::quiet_NaN());
    for (const DirichletPatch& patch : fixed_boundary) {
        int selected = 0;
        for (int j = 0; j <= g.ny; ++j) {
            for (int i = 0; i <= g.nx; ++i) {
                const int node = g.node_index(i, j);
                if (!g.node_boundary[node]) continue;
                const Vec2 p = g.node_pos(i, j);
                if (!patch.on_patch(p)) continue;
                const double value = patch.value(p);
                if (!(value >= 0.0)) {
                    throw ConfigError("Dirichlet data must be nonnegative (psi >= 0 on S)");
                }
                g.dirichlet[node] = value;
                ++selected;
            }
        }
        if (selected == 0) {
            throw ConfigError("fixed boundary patch selects no boundary nodes");
        }
    }
    return g;
}

DirichletPatch rect_edge_patch(const RectDomain& rect, const std::string& edge,
                               std::function<double(const Vec2&)> value, double tol) {
    std::function<bool(const Vec2&)> sel;
    if (edge == "bottom") {
        sel = [rect, tol](const Vec2& p) { return std::abs(p.y - rect.lo.y) <= tol; };
    } else if (edge == "top") {
        sel = [rect, tol](const Vec2& p) { return std::abs(p.y - rect.hi.y) <= tol; };
    } else if (edge == "left") {
        sel = [rect, tol](const Vec2& p) { return std::abs(p.x - rect.lo.x) <= tol; };
    } else if (edge == "right") {
        sel = [rect, tol](const Vec2& p) { return std::abs(p.x - rect.hi.x) <= tol; };
    } else if (edge == "all") {
        sel = [](const Vec2&) { return true; };
    } else {
        throw ConfigError("unknown rectangle edge: " + edge);
    }
    return {std::move(sel), std::move(value)};
}

DirichletPatch annulus_ring_patch(const AnnulusDomain& ann, const std::string& ring,
                                  std::function<double(const Vec2&)> value) {
    const double split = 0.5 * (ann.r_inner + ann.r_outer);
    std::function<bool(const Vec2&)> sel;
    if (ring == "inner") {
        sel = [ann, split](const Vec2& p) { return (p - ann.center).norm() < split; };
    } else if (ring == "outer") {
        sel = [ann, split](const Vec2& p) { return (p - ann.center).norm() >= split; };
    } else if (ring == "all") {
        sel = [](const Vec2&) { return true; };
    } else {
        throw ConfigError("unknown annulus ring: " + ring);
    }
    return {std::move(sel), std::move(value)};
}

StreamField::StreamField(std::shared_ptr<const CrossSectionGrid> grid, double fill)
    : grid_(std::move(grid)), values_(grid_->n_nodes(), fill) {}

void StreamField::apply_dirichlet() {
    for (int k = 0; k < grid_->n_nodes(); ++k) {
        if (grid_->is_dirichlet(k)) values_[k] = grid_->dirichlet[k];
    }
}

void StreamField::sample(const std::function<double(const Vec2&)>& f) {
    for (int j = 0; j <= grid_->ny; ++j) {
        for (int i = 0; i <= grid_->nx; ++i) {
            const int node = grid_->node_index(i, j);
            if (grid_->node_active[node]) values_[node] = f(grid_->node_pos(i, j));
        }
    }
}

bool StreamField::locate(const Vec2& p, int& ci, int& cj) const {
    const CrossSectionGrid& g = *grid_;
    const double sx = (p.x - g.origin.x) / g.h;
    const double sy = (p.y - g.origin.y) / g.h;
    const double tol = 1e-12 * std::max(g.nx, g.ny);
    if (sx < -tol || sy < -tol || sx > g.nx + tol || sy > g.ny + tol) return false;
    ci = std::clamp(static_cast<int>(std::floor(sx)), 0, g.nx - 1);
    cj = std::clamp(static_cast<int>(std::floor(sy)), 0, g.ny - 1);
    return g.cell_active[g.cell_index(ci, cj)] != 0;
}

std::optional<double> StreamField::value(const Vec2& p) const {
    int ci, cj;
    if (!locate(p, ci, cj)) return std::nullopt;
    const CrossSectionGrid& g = *grid_;
    const double s = (p.x - g.origin.x) / g.h - ci;
    const double t = (p.y - g.origin.y) / g.h - cj;
    const double sw = values_[g.node_index(ci, cj)];
    const double se = values_[g.node_index(ci + 1, cj)];
    const double nw = values_[g.node_index(ci, cj + 1)];
    const double ne = values_[g.node_index(ci + 1, cj + 1)];
    return sw * (1 - s) * (1 - t) + se * s * (1 - t) + nw * (1 - s) * t + ne * s * t;
}

std::optional<Vec2> StreamField::gradient(const Vec2& p) const {
    int ci, cj;
    if (!locate(p, ci, cj)) return std::nullopt;
    const CrossSectionGrid& g = *grid_;
    const double s = (p.x - g.origin.x) / g.h - ci;
    const double t = (p.y - g.origin.y) / g.h - cj;
    const double sw = values_[g.node_index(ci, cj)];
    const double se = values_[g.node_index(ci + 1, cj)];
    const double nw = values_[g.node_index(ci, cj + 1)];
    const double ne = values_[g.node_index(ci + 1, cj + 1)];
    return Vec2{((se - sw) * (1 - t) + (ne - nw) * t) / g.h,
                ((nw - sw) * (1 - s) + (ne - se) * s) / g.h};
}

Vec2 StreamField::cell_gradient(int ci, int cj) const {
    const CrossSectionGrid& g = *grid_;
    const double sw = values_[g.node_index(ci, cj)];
    const double se = values_[g.node_index(ci + 1, cj)];
    const double nw = values_[g.node_index(ci, cj + 1)];
    const double ne = values_[g.node_index(ci + 1, cj + 1)];
    return Vec2{(se + ne - sw - nw) / (2.0 * g.h), (nw + ne - sw - se) / (2.0 * g.h)};
}

std::optional<Vec2> StreamField::node_gradient(int i, int j) const {
    const CrossSectionGrid& g = *grid_;
    Vec2 sum{0.0, 0.0};
    int count = 0;
    for (int dj = -1; dj <= 0; ++dj) {
        for (int di = -1; di <= 0; ++di) {
            const int ci = i + di, cj = j + dj;
            if (ci < 0 || cj < 0 || ci >= g.nx || cj >= g.ny) continue;
            if (!g.cell_active[g.cell_index(ci, cj)]) continue;
            sum = sum + cell_gradient(ci, cj);
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum * (1.0 / count);
}

double StreamField::domain_radius(const Vec2& center) const {
    const CrossSectionGrid& g = *grid_;
    // Distance to the lattice bounding box, measured from inside.
    const Vec2 hi{g.origin.x + g.nx * g.h, g.origin.y + g.ny * g.h};
    double radius = std::min(std::min(center.x - g.origin.x, hi.x - center.x),
                             std::min(center.y - g.origin.y, hi.y - center.y));
    // Distance to the nearest inactive cell rectangle.
    for (int cj = 0; cj < g.ny; ++cj) {
        for (int ci = 0; ci < g.nx; ++ci) {
            if (g.cell_active[g.cell_index(ci, cj)]) continue;
            const Vec2 lo = g.node_pos(ci, cj);
            const double dx = std::max({lo.x - center.x, center.x - (lo.x + g.h), 0.0});
            const double dy = std::max({lo.y - center.y, center.y - (lo.y + g.h), 0.0});
            radius = std::min(radius, std::sqrt(dx * dx + dy * dy));
        }
    }
    return std::max(radius, 0.0);
}

}  // namespace helfb
