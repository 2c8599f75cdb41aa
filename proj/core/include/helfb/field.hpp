// Planar scalar fields consumed by the free-boundary diagnostics: either
// grid-backed (bilinear) or closed-form.
#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

#include "helfb/geometry.hpp"

namespace helfb {

class PlanarScalarField {
  public:
    virtual ~PlanarScalarField() = default;

    virtual std::optional<double> value(const Vec2& p) const = 0;
    virtual std::optional<Vec2> gradient(const Vec2& p) const = 0;
    // Radius of the largest disk about `center` on which the field is defined.
    virtual double domain_radius(const Vec2& center) const = 0;
};

class AnalyticField final : public PlanarScalarField {
  public:
    using ValueFn = std::function<double(const Vec2&)>;
    using GradFn = std::function<Vec2(const Vec2&)>;
    using RadiusFn = std::function<double(const Vec2&)>;

    AnalyticField(ValueFn value, GradFn grad, RadiusFn radius = nullptr)
        : value_(std::move(value)), grad_(std::move(grad)), radius_(std::move(radius)) {}

    std::optional<double> value(const Vec2& p) const override { return value_(p); }
    std::optional<Vec2> gradient(const Vec2& p) const override { return grad_(p); }
    double domain_radius(const Vec2& center) const override {
        return radius_ ? radius_(center) : std::numeric_limits<double>::infinity();
    }

  private:
    ValueFn value_;
    GradFn grad_;
    RadiusFn radius_;
};

}  // namespace helfb
