// Vorticity profile f with exact primitive F (F(0) = 0) and the
// admissibility checks 0 <= f(s) <= F0 for s <= 0, -F0 <= f'(s) <= 0.
#pragma once

#include <span>
#include <string>
#include <vector>

namespace helfb {

struct ProfileSample {
    double f = 0.0;
    double fprime = 0.0;
    double F = 0.0;  // primitive with F(0) = 0
};

class VorticityProfile {
  public:
    enum class Kind { Zero, Sigmoid, Tabulated };

    static VorticityProfile zero();
    // f(s) = 1/(1+e^{4s}) - 1/2. F0 defaults to 1, the smallest integer
    // bound covering both sup f = 1/2 and sup |f'| = 1.
    static VorticityProfile sigmoid(double f0 = 1.0);
    // Monotone cubic (PCHIP) interpolant of samples (s_i, f_i), strictly
    // increasing s. Constant extension outside the table. The primitive is
    // the analytic integral of the interpolant, shifted so F(0) = 0.
    static VorticityProfile tabulated(std::vector<double> s, std::vector<double> f,
                                      double f0);
    // Two-column CSV (s, f(s)); an optional header row is skipped.
    static VorticityProfile tabulated_from_csv(const std::string& path, double f0);

    ProfileSample eval(double s) const;
    double f(double s) const { return eval(s).f; }
    double fprime(double s) const { return eval(s).fprime; }
    double primitive(double s) const { return eval(s).F; }

    Kind kind() const { return kind_; }
    double f0_bound() const { return f0_; }

  private:
    VorticityProfile() = default;

    Kind kind_ = Kind::Zero;
    double f0_ = 1.0;
    // Tabulated data: breakpoints, values, PCHIP slopes, cumulative integral
    // at breakpoints, and the shift making F(0) = 0.
    std::vector<double> xs_, ys_, slopes_, cumint_;
    double f_shift_ = 0.0;

    ProfileSample eval_tabulated(double s) const;
};

struct ProfileValidation {
    bool ok = true;
    double s_violation = 0.0;
    std::string what;
};

// Checks the admissibility conditions on the given mesh of s-values; stops
// at the first violation.
ProfileValidation validate_profile(const VorticityProfile& profile,
                                   std::span<const double> mesh);

}  // namespace helfb
