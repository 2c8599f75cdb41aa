#include "helfb/exact_solutions.hpp"

namespace helfb {

std::shared_ptr<PlanarScalarField> HalfPlaneSolution::field() const {
    const HalfPlaneSolution s = *this;
    return std::make_shared<AnalyticField>([s](const Vec2& p) { return s.value(p); },
                                           [s](const Vec2& p) { return s.gradient(p); });
}

std::shared_ptr<PlanarScalarField> TiltedHalfPlane::field() const {
    const TiltedHalfPlane s = *this;
    return std::make_shared<AnalyticField>([s](const Vec2& p) { return s.value(p); },
                                           [s](const Vec2& p) { return s.gradient(p); });
}

std::shared_ptr<PlanarScalarField> RadialSolution::field() const {
    const RadialSolution s = *this;
    return std::make_shared<AnalyticField>(
        [s](const Vec2& p) { return s.value(p); },
        [s](const Vec2& p) { return s.gradient(p); },
        // Defined away from the logarithmic singularity at the origin.
        [](const Vec2& center) { return center.norm(); });
}

}  // namespace helfb
