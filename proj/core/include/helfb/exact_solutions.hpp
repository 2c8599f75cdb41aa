// Closed-form solutions of the free boundary problem used as test problems
// and by the exact-field generator: the 1D half-plane profile (Laplacian
// limit) and the radial solution on a helical annulus.
#pragma once

#include <memory>

#include "helfb/field.hpp"
#include "helfb/geometry.hpp"

namespace helfb {

// psi = lambda * (h0 - y)^+ on a vertical strip; free boundary at y = h0,
// |grad psi| = lambda on it. Exact for K = I (kappa -> infinity).
struct HalfPlaneSolution {
    double lambda = 1.0;
    double h0 = 0.5;

    double value(const Vec2& p) const {
        const double s = h0 - p.y;
        return s > 0.0 ? lambda * s : 0.0;
    }
    Vec2 gradient(const Vec2& p) const {
        return p.y < h0 ? Vec2{0.0, -lambda} : Vec2{0.0, 0.0};
    }
    std::shared_ptr<PlanarScalarField> field() const;
};

// One-homogeneous half-plane profile u = lambda * ((X - X0) . nu - d)^+ used
// by the Weiss and flatness oracles.
struct TiltedHalfPlane {
    double lambda = 1.0;
    Vec2 nu{0.0, 1.0};  // unit
    Vec2 x0{0.0, 0.0};
    double d = 0.0;

    double value(const Vec2& p) const {
        const double s = (p - x0).dot(nu) - d;
        return s > 0.0 ? lambda * s : 0.0;
    }
    Vec2 gradient(const Vec2& p) const {
        return ((p - x0).dot(nu) - d) > 0.0 ? lambda * nu : Vec2{0.0, 0.0};
    }
    std::shared_ptr<PlanarScalarField> field() const;
};

// Radial solution psi(r) = C [ln(R0/r) + (R0^2 - r^2)/(2 kappa^2)] for
// r < R0, zero beyond. -div(K grad psi) = 0 in the positivity set and the
// free boundary condition <K grad psi, grad psi> = lambda^2 holds at r = R0
// exactly when C = lambda R0 kappa / sqrt(kappa^2 + R0^2).
struct RadialSolution {
    double lambda = 1.0;
    double kappa = 1.0;
    double r0 = 1.0;

    double C() const { return lambda * r0 * kappa / std::sqrt(kappa * kappa + r0 * r0); }

    double value_radial(double r) const {
        if (r >= r0 || r <= 0.0) return 0.0;
        const double k2 = kappa * kappa;
        return C() * (std::log(r0 / r) + (r0 * r0 - r * r) / (2.0 * k2));
    }
    // d psi / d r on the positivity side (r < R0).
    double derivative_radial(double r) const {
        return -C() * (1.0 / r + r / (kappa * kappa));
    }
    double value(const Vec2& p) const { return value_radial(p.norm()); }
    Vec2 gradient(const Vec2& p) const {
        const double r = p.norm();
        if (r >= r0 || r <= 0.0) return {0.0, 0.0};
        return (derivative_radial(r) / r) * p;
    }
    std::shared_ptr<PlanarScalarField> field() const;
};

}  // namespace helfb
