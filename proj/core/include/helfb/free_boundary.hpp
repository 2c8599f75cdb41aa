// Level-set extraction of the free boundary (marching squares on the node
// lattice) and the Bernoulli condition residual <K grad psi, grad psi> -
// lambda^2 along it.
#pragma once

#include <vector>

#include "helfb/coefficients.hpp"
#include "helfb/field.hpp"
#include "helfb/grid.hpp"

namespace helfb {

struct FreeBoundaryCurve {
    std::vector<Vec2> vertices;  // ordered, {psi > theta} on the left
    bool closed = false;
    std::vector<double> residuals;  // per-vertex FB condition residual, once sampled
};

// theta = h*lambda/2: the discrete psi is only O(h*lambda) accurate near the
// free boundary, and with the ramp floor eps = 2h this level sits on the
// extrapolated sharp profile.
inline double default_extraction_level(double h, double lambda) { return 0.5 * h * lambda; }

// Marching-squares polylines of {psi = theta} over active cells. Saddle
// cells are disambiguated by the cell-average value. Returns an empty list
// when the level is not crossed.
std::vector<FreeBoundaryCurve> extract_free_boundary(const StreamField& psi, double theta);

struct FbConditionStats {
    double max_abs = 0.0;
    double mean = 0.0;
    double rms = 0.0;
    int sampled = 0;
    int skipped = 0;
};

// Residual along the curve with the gradient taken one-sided from the
// positivity side: at each vertex the gradient is read at the center of the
// nearest cell whose corners all exceed `solid_level`, which keeps the
// sample clear of the smoothing band of the regularized solve. Pass
// solid_level < 0 for the default 2*h*lambda. Vertices with no solid cell
// within the search radius are skipped and counted.
FbConditionStats fb_condition_residual(const StreamField& psi, FreeBoundaryCurve& curve,
                                       const Pitch& pitch, double lambda,
                                       double solid_level = -1.0);

// Residual sampling the field gradient directly at the vertices; suited to
// closed-form fields whose gradient is exact on the positivity side.
FbConditionStats fb_condition_residual_at_vertices(const PlanarScalarField& psi,
                                                   FreeBoundaryCurve& curve,
                                                   const Pitch& pitch, double lambda);

}  // namespace helfb
