// Uniform node-centered grid over the cross-section with a domain mask and
// Dirichlet data on the fixed portion of the boundary, plus the discrete
// stream function living on it.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "helfb/field.hpp"
#include "helfb/geometry.hpp"

namespace helfb {

struct RectDomain {
    Vec2 lo, hi;
};

// r_inner = 0 degenerates to a disk.
struct AnnulusDomain {
    Vec2 center;
    double r_inner = 0.0;
    double r_outer = 1.0;
};

// Even-odd rule over all rings, so a hole is just a second ring.
struct PolygonDomain {
    std::vector<std::vector<Vec2>> rings;
};

using DomainSpec = std::variant<RectDomain, AnnulusDomain, PolygonDomain>;

bool domain_contains(const DomainSpec& domain, const Vec2& p, double tol = 0.0);
RectDomain domain_bounding_box(const DomainSpec& domain);

// Selects discrete boundary nodes and assigns Dirichlet values g >= 0.
// Selectors are evaluated on boundary nodes only; selecting none is a
// configuration error (the requested fixed boundary is not on the domain
// boundary).
struct DirichletPatch {
    std::function<bool(const Vec2&)> on_patch;
    std::function<double(const Vec2&)> value;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CrossSectionGrid {
    Vec2 origin;
    double h = 0.0;
    int nx = 0, ny = 0;  // cell counts; nodes are (nx+1) x (ny+1)

    std::vector<std::uint8_t> node_inside;    // node lies in the continuum domain
    std::vector<std::uint8_t> cell_active;    // all 4 corners inside
    std::vector<std::uint8_t> node_active;    // corner of >= 1 active cell
    std::vector<std::uint8_t> node_boundary;  // active but not surrounded by 4 active cells
    std::vector<double> dirichlet;            // NaN where free

    int n_nodes() const { return (nx + 1) * (ny + 1); }
    int n_cells() const { return nx * ny; }
    int node_index(int i, int j) const { return j * (nx + 1) + i; }
    int cell_index(int ci, int cj) const { return cj * nx + ci; }
    Vec2 node_pos(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
    Vec2 cell_center(int ci, int cj) const {
        return {origin.x + (ci + 0.5) * h, origin.y + (cj + 0.5) * h};
    }
    bool is_dirichlet(int node) const { return !std::isnan(dirichlet[node]); }
    // Free degrees of freedom: active, not Dirichlet.
    bool is_free(int node) const { return node_active[node] && !is_dirichlet(node); }

    int count_active_nodes() const;
    int count_active_cells() const;
    int count_dirichlet_nodes() const;
};

CrossSectionGrid build_grid(const DomainSpec& domain, double h,
                            std::span<const DirichletPatch> fixed_boundary);

// Geometric selectors for the usual fixed-boundary choices.
DirichletPatch rect_edge_patch(const RectDomain& rect, const std::string& edge,
                               std::function<double(const Vec2&)> value, double tol);
DirichletPatch annulus_ring_patch(const AnnulusDomain& ann, const std::string& ring,
                                  std::function<double(const Vec2&)> value);

// Node-centered scalar field with bilinear interpolation over active cells.
class StreamField final : public PlanarScalarField {
  public:
    explicit StreamField(std::shared_ptr<const CrossSectionGrid> grid, double fill = 0.0);

    const CrossSectionGrid& grid() const { return *grid_; }
    const std::shared_ptr<const CrossSectionGrid>& grid_ptr() const { return grid_; }

    double& at(int i, int j) { return values_[grid_->node_index(i, j)]; }
    double at(int i, int j) const { return values_[grid_->node_index(i, j)]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    // Copies the grid's Dirichlet data into the nodal values.
    void apply_dirichlet();
    // Fills all active nodes from a closed-form function.
    void sample(const std::function<double(const Vec2&)>& f);

    std::optional<double> value(const Vec2& p) const override;
    std::optional<Vec2> gradient(const Vec2& p) const override;
    double domain_radius(const Vec2& center) const override;

    // Gradient of the bilinear patch at the center of an active cell.
    Vec2 cell_gradient(int ci, int cj) const;
    // Average of the adjacent active cell-center gradients (one-sided at the
    // mask boundary); nullopt for nodes with no active cell.
    std::optional<Vec2> node_gradient(int i, int j) const;

  private:
    bool locate(const Vec2& p, int& ci, int& cj) const;

    std::shared_ptr<const CrossSectionGrid> grid_;
    std::vector<double> values_;
};

}  // namespace helfb
