// Screw-group geometry: screw transformations, the symmetry tangent field,
// numerical helicity verification, and helical extension of cross-section
// data into 3D.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>

namespace helfb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

using Point3 = Vec3;

// Length scale of the helix; the geometric pitch is 2*pi*kappa.
class Pitch {
  public:
    explicit Pitch(double kappa) : kappa_(kappa) {
        if (!(kappa != 0.0) || !std::isfinite(kappa)) {
            throw std::invalid_argument("pitch must be nonzero");
        }
    }
    double kappa() const { return kappa_; }

  private:
    double kappa_;
};

struct ScrewMotion {
    double rho;   // rotation angle, radians
    Pitch pitch;
};

// Rotation about the z-axis: (x cos r + y sin r, -x sin r + y cos r, z).
Vec3 rotate_z(const Vec3& v, double rho);
Vec2 rotate_z(const Vec2& v, double rho);

// Screw transformation: rotate by rho about the z-axis and translate by
// kappa*rho along it.
Point3 screw_transform(const Point3& p, const ScrewMotion& m);

// Tangent of the symmetry lines: (y, -x, kappa).
Vec3 xi_field(const Point3& p, const Pitch& pitch);

// Samplers may return nullopt where the underlying data is undefined; such
// probes are reported as skipped.
using ScalarSampler3 = std::function<std::optional<double>(const Point3&)>;
using VectorSampler3 = std::function<std::optional<Vec3>(const Point3&)>;
using ScalarGradient3 = std::function<Vec3(const Point3&)>;

struct HelicityReport {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
};

struct VectorHelicityReport {
    // Residuals of the three identities grad(v1).xi - v2, grad(v2).xi + v1,
    // grad(v3).xi.
    HelicityReport comp1, comp2, comp3;
    std::size_t skipped = 0;

    double max_residual() const {
        return std::max({comp1.max_residual, comp2.max_residual, comp3.max_residual});
    }
};

// Default finite-difference step for the helicity checks.
inline double default_fd_step(double domain_diameter) { return 1e-4 * domain_diameter; }

// Residual |grad(f).xi| over the probe set, gradients by second-order
// central differences of step `step`.
HelicityReport verify_helical_function(const ScalarSampler3& f,
                                       std::span<const Point3> probes,
                                       const Pitch& pitch, double step);

// Same residual with a caller-supplied exact gradient.
HelicityReport verify_helical_function(const ScalarGradient3& grad_f,
                                       std::span<const Point3> probes,
                                       const Pitch& pitch);

VectorHelicityReport verify_helical_vector_field(const VectorSampler3& v,
                                                 std::span<const Point3> probes,
                                                 const Pitch& pitch, double step);

// Extends planar cross-section data {z=0} helically: the value at p is the
// cross-section value at the pulled-back point S_{-z/kappa}(p), rotated by
// R_{z/kappa}. Returns nullopt when the pulled-back point leaves the
// cross-section support.
std::optional<Vec3> helical_extend_field(
    const std::function<std::optional<Vec3>(const Vec2&)>& cross_section,
    const Point3& p, const Pitch& pitch);

}  // namespace helfb
