#include "helfb/geometry.hpp"

#include <algorithm>

namespace helfb {

Vec3 rotate_z(const Vec3& v, double rho) {
    const double c = std::cos(rho), s = std::sin(rho);
    return {v.x * c + v.y * s, -v.x * s + v.y * c, v.z};
}

Vec2 rotate_z(const Vec2& v, double rho) {
    const double c = std::cos(rho), s = std::sin(rho);
    return {v.x * c + v.y * s, -v.x * s + v.y * c};
}

Point3 screw_transform(const Point3& p, const ScrewMotion& m) {
    Point3 q = rotate_z(p, m.rho);
    q.z += m.pitch.kappa() * m.rho;
    return q;
}

Vec3 xi_field(const Point3& p, const Pitch& pitch) {
    return {p.y, -p.x, pitch.kappa()};
}

namespace {

// Central-difference gradient; nullopt when any stencil point is undefined.
std::optional<Vec3> fd_gradient(const ScalarSampler3& f, const Point3& p, double step) {
    const Vec3 e[3] = {{step, 0, 0}, {0, step, 0}, {0, 0, step}};
    Vec3 g;
    double* comp[3] = {&g.x, &g.y, &g.z};
    for (int d = 0; d < 3; ++d) {
        auto fp = f(p + e[d]);
        auto fm = f(p - e[d]);
        if (!fp || !fm) return std::nullopt;
        *comp[d] = (*fp - *fm) / (2.0 * step);
    }
    return g;
}

void accumulate(HelicityReport& rep, double r) {
    r = std::abs(r);
    rep.max_residual = std::max(rep.max_residual, r);
    rep.mean_residual += r;
    ++rep.evaluated;
}

void finalize(HelicityReport& rep) {
    if (rep.evaluated > 0) rep.mean_residual /= static_cast<double>(rep.evaluated);
}

}  // namespace

HelicityReport verify_helical_function(const ScalarSampler3& f,
                                       std::span<const Point3> probes,
                                       const Pitch& pitch, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("helicity check step must be positive");
    HelicityReport rep;
    for (const Point3& p : probes) {
        auto g = fd_gradient(f, p, step);
        if (!g) {
            ++rep.skipped;
            continue;
        }
        accumulate(rep, g->dot(xi_field(p, pitch)));
    }
    finalize(rep);
    return rep;
}

HelicityReport verify_helical_function(const ScalarGradient3& grad_f,
                                       std::span<const Point3> probes,
                                       const Pitch& pitch) {
    HelicityReport rep;
    for (const Point3& p : probes) {
        accumulate(rep, grad_f(p).dot(xi_field(p, pitch)));
    }
    finalize(rep);
    return rep;
}

VectorHelicityReport verify_helical_vector_field(const VectorSampler3& v,
                                                 std::span<const Point3> probes,
                                                 const Pitch& pitch, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("helicity check step must be positive");
    VectorHelicityReport rep;
    for (const Point3& p : probes) {
        auto v0 = v(p);
        bool ok = v0.has_value();
        double jac[3][3];  // jac[i][d] = d v_i / d x_d
        const Vec3 e[3] = {{step, 0, 0}, {0, step, 0}, {0, 0, step}};
        for (int d = 0; d < 3 && ok; ++d) {
            auto vp = v(p + e[d]);
            auto vm = v(p - e[d]);
            if (!vp || !vm) {
                ok = false;
                break;
            }
            jac[0][d] = (vp->x - vm->x) / (2.0 * step);
            jac[1][d] = (vp->y - vm->y) / (2.0 * step);
            jac[2][d] = (vp->z - vm->z) / (2.0 * step);
        }
        if (!ok) {
            ++rep.skipped;
            continue;
        }
        const Vec3 xi = xi_field(p, pitch);
        auto dot_xi = [&](const double* row) {
            return row[0] * xi.x + row[1] * xi.y + row[2] * xi.z;
        };
        accumulate(rep.comp1, dot_xi(jac[0]) - v0->y);
        accumulate(rep.comp2, dot_xi(jac[1]) + v0->x);
        accumulate(rep.comp3, dot_xi(jac[2]));
    }
    finalize(rep.comp1);
    finalize(rep.comp2);
    finalize(rep.comp3);
    return rep;
}

std::optional<Vec3> helical_extend_field(
    const std::function<std::optional<Vec3>(const Vec2&)>& cross_section,
    const Point3& p, const Pitch& pitch) {
    const double rho = p.z / pitch.kappa();
    // Pull back to the plane: S_{-z/kappa}(p) has zero z-component.
    const Point3 pulled = rotate_z(p, -rho);
    auto value = cross_section(Vec2{pulled.x, pulled.y});
    if (!value) return std::nullopt;
    return rotate_z(*value, rho);
}

}  // namespace helfb
