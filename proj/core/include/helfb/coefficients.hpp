// Coefficient matrix K(x,y) of the reduced elliptic operator, its inverse
// and positive square root, and ellipticity bounds on a disk.
#pragma once

#include "helfb/geometry.hpp"

namespace helfb {

// Symmetric 2x2 coefficient matrix. For K(x,y) the eigenvalues are 1
// (tangential direction) and kappa^2/(kappa^2+|X|^2) (radial direction).
struct CoeffMatrix {
    double k11 = 1.0;
    double k12 = 0.0;
    double k22 = 1.0;

    Vec2 apply(const Vec2& g) const {
        return {k11 * g.x + k12 * g.y, k12 * g.x + k22 * g.y};
    }
    // <K g, g>
    double quad(const Vec2& g) const {
        return k11 * g.x * g.x + 2.0 * k12 * g.x * g.y + k22 * g.y * g.y;
    }
    double det() const { return k11 * k22 - k12 * k12; }
    double trace() const { return k11 + k22; }

    CoeffMatrix mul(const CoeffMatrix& o) const;

    static CoeffMatrix identity() { return {1.0, 0.0, 1.0}; }
};

// K(X) = 1/(kappa^2+|X|^2) * [[kappa^2+y^2, -xy], [-xy, kappa^2+x^2]].
CoeffMatrix coeff_matrix(const Vec2& X, const Pitch& pitch);

// Closed-form inverse: (1/kappa^2) * [[kappa^2+x^2, xy], [xy, kappa^2+y^2]].
CoeffMatrix coeff_matrix_inverse(const Vec2& X, const Pitch& pitch);

struct CoeffSqrt {
    CoeffMatrix sqrt;      // K^{1/2}
    CoeffMatrix inv_sqrt;  // K^{-1/2}
};

// Positive square root from the radial/tangential eigendecomposition;
// identity at X = 0.
CoeffSqrt coeff_sqrt(const Vec2& X, const Pitch& pitch);

struct EllipticityBounds {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
};

// Eigenvalue range of K over the disk |X| <= R.
EllipticityBounds ellipticity_bounds(double R, const Pitch& pitch);

}  // namespace helfb
