#include "helfb/coefficients.hpp"

namespace helfb {

CoeffMatrix CoeffMatrix::mul(const CoeffMatrix& o) const {
    // Product of two symmetric matrices is not symmetric in general, but the
    // factors commute whenever they share eigenvectors (as K and K^{1/2} do);
    // the symmetric entries are all we ever need.
    return {k11 * o.k11 + k12 * o.k12, k11 * o.k12 + k12 * o.k22,
            k12 * o.k12 + k22 * o.k22};
}

CoeffMatrix coeff_matrix(const Vec2& X, const Pitch& pitch) {
    const double k2 = pitch.kappa() * pitch.kappa();
    const double denom = k2 + X.x * X.x + X.y * X.y;
    return {(k2 + X.y * X.y) / denom, -X.x * X.y / denom, (k2 + X.x * X.x) / denom};
}

CoeffMatrix coeff_matrix_inverse(const Vec2& X, const Pitch& pitch) {
    const double k2 = pitch.kappa() * pitch.kappa();
    return {(k2 + X.x * X.x) / k2, X.x * X.y / k2, (k2 + X.y * X.y) / k2};
}

CoeffSqrt coeff_sqrt(const Vec2& X, const Pitch& pitch) {
    const double r2 = X.norm2();
    if (r2 == 0.0) return {CoeffMatrix::identity(), CoeffMatrix::identity()};
    const double k2 = pitch.kappa() * pitch.kappa();
    const double mu = std::sqrt(k2 / (k2 + r2));  // radial eigenvalue of K^{1/2}
    // K^{1/2} = I + (mu - 1) rr^T/|X|^2, tangential eigenvalue 1.
    auto build = [&](double ev) {
        const double a = (ev - 1.0) / r2;
        return CoeffMatrix{1.0 + a * X.x * X.x, a * X.x * X.y, 1.0 + a * X.y * X.y};
    };
    return {build(mu), build(1.0 / mu)};
}

EllipticityBounds ellipticity_bounds(double R, const Pitch& pitch) {
    if (!(R >= 0.0)) throw std::invalid_argument("domain radius must be nonnegative");
    const double k2 = pitch.kappa() * pitch.kappa();
    return {k2 / (k2 + R * R), 1.0};
}

}  // namespace helfb
