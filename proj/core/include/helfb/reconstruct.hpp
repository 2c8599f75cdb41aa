// Recovery of the 3D helical velocity field from the 2D stream function and
// the structural residuals of the Euler reduction.
#pragma once

#include <optional>
#include <vector>

#include "helfb/coefficients.hpp"
#include "helfb/grid.hpp"
#include "helfb/vorticity.hpp"

namespace helfb {

struct HelicalVelocitySample {
    Point3 position;
    Vec3 velocity;
};

// Cross-section velocity at the nodes:
//   (u1, u2)^T = [[0,1],[-1,0]] K grad(psi),  u3 = (-y u1 + x u2)/kappa,
// with nodal gradients averaged from the adjacent cell-center gradients.
// The closed matrix form of the corollary is evaluated alongside and the
// largest disagreement recorded.
class VelocityField {
  public:
    VelocityField(std::shared_ptr<const CrossSectionGrid> grid, const Pitch& pitch);

    const CrossSectionGrid& grid() const { return *grid_; }
    const Pitch& pitch() const { return pitch_; }
    double max_form_discrepancy() const { return max_form_discrepancy_; }

    Vec3 at_node(int i, int j) const;
    bool node_defined(int i, int j) const;

    // Bilinear in u1, u2 with u3 recomputed from the orthogonality relation
    // at the query point, so u . xi = 0 holds exactly at every sample.
    std::optional<Vec3> sample(const Vec2& p) const;

  private:
    friend VelocityField velocity_cross_section(const StreamField&, const Pitch&);

    std::shared_ptr<const CrossSectionGrid> grid_;
    Pitch pitch_;
    std::vector<double> u1_, u2_, u3_;
    std::vector<std::uint8_t> defined_;
    double max_form_discrepancy_ = 0.0;
};

VelocityField velocity_cross_section(const StreamField& psi, const Pitch& pitch);

// Helical extension: u(p) = R_{z/kappa} u0(S_{-z/kappa} p).
std::optional<HelicalVelocitySample> velocity_at(const Point3& p, const VelocityField& u0);

struct FieldResidualReport {
    double max_divergence = 0.0;
    int divergence_probes = 0;
    // |w x xi|/(|w||xi|) where w is the finite-difference curl; probes with
    // |w| below the floor carry no direction information and are counted
    // separately (f == 0 solutions have w == 0 identically).
    double max_alignment_defect = 0.0;
    int alignment_probes = 0;
    int alignment_below_floor = 0;
    double alignment_floor = 0.0;
    // max |W - f(psi)| over cross-section nodes with psi > margin, where
    // W = d(u2)/dx - d(u1)/dy.
    double max_vorticity_mismatch = 0.0;
    int vorticity_probes = 0;
    double max_orthogonality = 0.0;  // |u . xi| over the 3D probes
    // Spot check of the helicity law u(S_rho p) = R_rho u(p).
    double max_helicity_law_error = 0.0;
    int helicity_probes = 0;
};

struct FieldResidualOptions {
    double positivity_margin = 0.0;  // defaults to 2*h when <= 0
    double probe_spacing = 0.0;      // FD step and lattice pitch, defaults to 2*h
    double alignment_floor = 1e-8;
    int z_layers = 2;  // probe planes at z = -L..L times the spacing
    unsigned seed = 2027;
};

FieldResidualReport field_residuals(const StreamField& psi, const Pitch& pitch,
                                    const VorticityProfile& profile,
                                    const FieldResidualOptions& options = {});

// n = (u x xi)/|u x xi|; nullopt when |u x xi| < tol, which signals |u| ~ 0
// in violation of the free boundary condition.
std::optional<Vec3> boundary_normal(const Point3& p, const VelocityField& u0,
                                    double tol = 1e-10);

}  // namespace helfb
