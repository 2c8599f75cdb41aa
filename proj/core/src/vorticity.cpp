#include "helfb/vorticity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace helfb {

namespace {

// Overflow-safe sigmoid family f(s) = 1/(1+e^{4s}) - 1/2.
double sigmoid_f(double s) {
    if (s >= 0.0) {
        const double t = std::exp(-4.0 * s);
        return t / (1.0 + t) - 0.5;
    }
    const double t = std::exp(4.0 * s);
    return 1.0 / (1.0 + t) - 0.5;
}

double sigmoid_fprime(double s) {
    // e^{4s}/(1+e^{4s})^2 equals e^{-4|s|}/(1+e^{-4|s|})^2.
    const double t = std::exp(-4.0 * std::abs(s));
    const double d = 1.0 + t;
    return -4.0 * t / (d * d);
}

double sigmoid_F(double s) {
    // F(s) = s/2 - (1/4) ln((1+e^{4s})/2), F(0) = 0.
    constexpr double quarter_ln2 = 0.25 * 0.6931471805599453094;
    if (s >= 0.0) {
        return -0.5 * s - 0.25 * std::log1p(std::exp(-4.0 * s)) + quarter_ln2;
    }
    return 0.5 * s - 0.25 * std::log1p(std::exp(4.0 * s)) + quarter_ln2;
}

}  // namespace

VorticityProfile VorticityProfile::zero() {
    VorticityProfile p;
    p.kind_ = Kind::Zero;
    p.f0_ = 1.0;
    return p;
}

VorticityProfile VorticityProfile::sigmoid(double f0) {
    if (!(f0 > 0.0)) throw std::invalid_argument("F0 must be positive");
    VorticityProfile p;
    p.kind_ = Kind::Sigmoid;
    p.f0_ = f0;
    return p;
}

VorticityProfile VorticityProfile::tabulated(std::vector<double> s, std::vector<double> f,
                                             double f0) {
    if (!(f0 > 0.0)) throw std::invalid_argument("F0 must be positive");
    const std::size_t n = s.size();
    if (n < 2 || f.size() != n) {
        throw std::invalid_argument("tabulated profile needs >= 2 samples of equal length");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(s[i] > s[i - 1])) {
            throw std::invalid_argument("tabulated profile abscissae must be strictly increasing");
        }
    }

    VorticityProfile p;
    p.kind_ = Kind::Tabulated;
    p.f0_ = f0;
    p.xs_ = std::move(s);
    p.ys_ = std::move(f);

    // Fritsch-Carlson slopes: monotone on each segment.
    p.slopes_.assign(n, 0.0);
    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = p.xs_[i + 1] - p.xs_[i];
        delta[i] = (p.ys_[i + 1] - p.ys_[i]) / h[i];
    }
    if (n == 2) {
        p.slopes_[0] = p.slopes_[1] = delta[0];
    } else {
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (delta[i - 1] * delta[i] <= 0.0) {
                p.slopes_[i] = 0.0;
            } else {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                p.slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        auto end_slope = [](double h0, double h1, double d0, double d1) {
            double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if (d * d0 <= 0.0) return 0.0;
            if (d0 * d1 <= 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
            return d;
        };
        p.slopes_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
        p.slopes_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    }

    // Cumulative analytic integral of the interpolant at the breakpoints.
    p.cumint_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double seg = h[i] * (p.ys_[i] + p.ys_[i + 1]) / 2.0 +
                           h[i] * h[i] * (p.slopes_[i] - p.slopes_[i + 1]) / 12.0;
        p.cumint_[i + 1] = p.cumint_[i] + seg;
    }

    p.f_shift_ = 0.0;
    p.f_shift_ = p.eval_tabulated(0.0).F;
    return p;
}

VorticityProfile VorticityProfile::tabulated_from_csv(const std::string& path, double f0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile table: " + path);
    std::vector<double> s, f;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (!(ls >> a >> b)) {
            if (lineno == 1) continue;  // header row
            throw std::runtime_error("malformed profile table line " + std::to_string(lineno) +
                                     " in " + path);
        }
        s.push_back(a);
        f.push_back(b);
    }
    return tabulated(std::move(s), std::move(f), f0);
}

ProfileSample VorticityProfile::eval_tabulated(double s) const {
    const std::size_t n = xs_.size();
    ProfileSample out;
    if (s <= xs_.front()) {
        out.f = ys_.front();
        out.fprime = 0.0;
        out.F = ys_.front() * (s - xs_.front()) - f_shift_;
        return out;
    }
    if (s >= xs_.back()) {
        out.f = ys_.back();
        out.fprime = 0.0;
        out.F = cumint_.back() + ys_.back() * (s - xs_.back()) - f_shift_;
        return out;
    }
    const std::size_t i =
        static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), s) - xs_.begin()) - 1;
    const double hseg = xs_[i + 1] - xs_[i];
    const double t = (s - xs_[i]) / hseg;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    const double y0 = ys_[i], y1 = ys_[i + 1];
    const double d0 = slopes_[i], d1 = slopes_[i + 1];

    out.f = y0 * (2 * t3 - 3 * t2 + 1) + hseg * d0 * (t3 - 2 * t2 + t) +
            y1 * (-2 * t3 + 3 * t2) + hseg * d1 * (t3 - t2);
    out.fprime = (y0 * (6 * t2 - 6 * t) + hseg * d0 * (3 * t2 - 4 * t + 1) +
                  y1 * (-6 * t2 + 6 * t) + hseg * d1 * (3 * t2 - 2 * t)) /
                 hseg;
    const double partial = hseg * (y0 * (t4 / 2 - t3 + t) + hseg * d0 * (t4 / 4 - 2 * t3 / 3 + t2 / 2) +
                                   y1 * (-t4 / 2 + t3) + hseg * d1 * (t4 / 4 - t3 / 3));
    out.F = cumint_[i] + partial - f_shift_;
    return out;
}

ProfileSample VorticityProfile::eval(double s) const {
    switch (kind_) {
        case Kind::Zero:
            return {0.0, 0.0, 0.0};
        case Kind::Sigmoid:
            return {sigmoid_f(s), sigmoid_fprime(s), sigmoid_F(s)};
        case Kind::Tabulated:
            return eval_tabulated(s);
    }
    return {};
}

ProfileValidation validate_profile(const VorticityProfile& profile,
                                   std::span<const double> mesh) {
    if (mesh.empty()) throw std::invalid_argument("validation mesh must be nonempty");
    constexpr double tol = 1e-12;
    const double f0 = profile.f0_bound();
    for (double s : mesh) {
        const ProfileSample v = profile.eval(s);
        if (s <= 0.0 && v.f < -tol) {
            return {false, s, "f(s) < 0 at s <= 0"};
        }
        if (s <= 0.0 && v.f > f0 + tol) {
            return {false, s, "f(s) > F0 at s <= 0"};
        }
        if (v.fprime > tol) {
            return {false, s, "f'(s) > 0"};
        }
        if (v.fprime < -f0 - tol) {
            return {false, s, "f'(s) < -F0"};
        }
    }
    return {};
}

}  // namespace helfb
