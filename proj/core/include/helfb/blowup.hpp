// Blow-up machinery at free boundary points: frozen-coefficient
// rectification, rescaling, flatness against the half-plane family, the
// Weiss boundary-adjusted energy, non-degeneracy ratios, and the Lipschitz
// diagnostics.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "helfb/coefficients.hpp"
#include "helfb/field.hpp"
#include "helfb/grid.hpp"

namespace helfb {

// u(X) = psi(X0 + K^{1/2}(X0) X); gradient by the chain rule. The rectified
// domain radius about 0 is at least the source radius about X0 because the
// eigenvalues of K^{1/2} are <= 1.
std::shared_ptr<PlanarScalarField> freeze_and_rectify(
    std::shared_ptr<const PlanarScalarField> psi, const Vec2& x0, const Pitch& pitch);

// psi_r(X) = psi(X0 + r X)/r on the unit ball. Throws std::domain_error when
// B_r(X0) is not contained in the field's domain.
std::shared_ptr<PlanarScalarField> blowup_rescale(
    std::shared_ptr<const PlanarScalarField> field, const Vec2& x0, double r);

struct FlatnessOptions {
    int coarse_angles = 64;
    double angle_tol = 1e-6;
    int lattice_n = 64;  // probe lattice across the unit ball diameter
    int restarts = 3;
    unsigned seed = 12345;
};

struct FlatnessResult {
    double deficit = 0.0;
    Vec2 nu0{1.0, 0.0};
};

// deficit = min over unit nu of sup_{B_1} |v(X) - lambda (K^{-1/2} X . nu)^+| / lambda,
// searched over the angle of nu by golden section with seeded restarts.
FlatnessResult flatness_deficit(const PlanarScalarField& rescaled,
                                const CoeffMatrix& inv_sqrt_at_x0, double lambda,
                                const FlatnessOptions& options = {});

struct FlatnessReport {
    Vec2 center;
    std::vector<double> radii;
    std::vector<double> deficits;
    std::vector<Vec2> directions;
};

FlatnessReport flatness_profile(const std::shared_ptr<const PlanarScalarField>& psi,
                                const Vec2& x0, const Pitch& pitch,
                                std::span<const double> radii, double lambda,
                                const FlatnessOptions& options = {});

struct WeissOptions {
    int area_cells = 256;     // quadrature lattice across the ball diameter
    int subsamples = 16;      // per axis, in cells cut by an interface
    int boundary_points = 256;
};

struct WeissProfile {
    std::vector<double> radii;
    std::vector<double> values;
};

// W(u, r) = r^{-2} int_{B_r} (|grad u|^2 + lambda^2 chi_{u>0})
//           - r^{-3} int_{dB_r} u^2,
// area term by cell quadrature with interface subsampling, boundary term by
// the stated trapezoid rule. Constant in r for 1-homogeneous fields.
WeissProfile weiss_energy(const PlanarScalarField& u, std::span<const double> radii,
                          double lambda, const WeissOptions& options = {});

struct NondegeneracyProfile {
    std::vector<double> radii;
    std::vector<double> ratios;  // (mean of psi^2 over dB_r)^{1/2} / r
    double c0 = 0.0;             // min over radii
    bool degenerate = false;
};

NondegeneracyProfile nondegeneracy_ratio(const PlanarScalarField& psi, const Vec2& x0,
                                         std::span<const double> radii,
                                         int quad_points = 256);

struct LipschitzReport {
    double sup_gradient = 0.0;
    Vec2 sup_gradient_at;
    double sup_ratio = 0.0;  // sup psi / dist(., {psi = 0})
    Vec2 sup_ratio_at;
    bool ratio_defined = false;  // false when the zero set is empty
};

// sup |grad psi| over cell centers and sup psi/dist over nodes, with the
// exact Euclidean distance transform to the discrete zero set.
LipschitzReport lipschitz_report(const StreamField& psi);

// Per-node distance to the set of active nodes with psi <= 0 (infinity when
// that set is empty).
std::vector<double> distance_to_zero_set(const StreamField& psi);

// {r_max, r_max/2, ...} down to r_min.
std::vector<double> dyadic_radii(double r_max, double r_min);

}  // namespace helfb
