#pragma once

#include <cmath>
#include <stdexcept>

namespace ckn {

/// Gamma function for positive real arguments, Lanczos approximation
/// (g = 7, 9 coefficients).  Relative accuracy is ~1e-14 on (0, 60],
/// validated against factorials in the test suite.
///
/// Templated on the floating type so oracle cross-checks can run the
/// same series in extended precision.
template <class Real>
Real gamma_positive(Real x) {
    if (!(x > Real(0)))
        throw std::domain_error("gamma_positive: argument must be > 0");

    // Lanczos coefficients for g = 7.
    static const Real coef[9] = {
        Real(0.99999999999980993L),
        Real(676.5203681218851L),
        Real(-1259.1392167224028L),
        Real(771.32342877765313L),
        Real(-176.61502916214059L),
        Real(12.507343278686905L),
        Real(-0.13857109526572012L),
        Real(9.9843695780195716e-6L),
        Real(1.5056327351493116e-7L),
    };
    const Real g = Real(7);

    const Real z = x - Real(1);
    Real a = coef[0];
    for (int i = 1; i < 9; ++i) a += coef[i] / (z + Real(i));
    const Real t = z + g + Real(0.5);
    const Real sqrt_two_pi = Real(2.50662827463100050241576528481104525L);
    return sqrt_two_pi * std::pow(t, z + Real(0.5)) * std::exp(-t) * a;
}

inline double gamma_fn(double x) { return gamma_positive<double>(x); }

/// Volume of the Euclidean unit ball in R^n: omega_n = pi^{n/2} / Gamma(n/2 + 1).
template <class Real>
Real unit_ball_volume_t(int n) {
    if (n < 1)
        throw std::domain_error("unit_ball_volume: dimension must be >= 1");
    const Real pi = Real(3.14159265358979323846264338327950288L);
    return std::pow(pi, Real(n) / Real(2)) / gamma_positive<Real>(Real(n) / Real(2) + Real(1));
}

inline double unit_ball_volume(int n) { return unit_ball_volume_t<double>(n); }

/// Area of the unit sphere S^{n-1} in R^n: alpha_n = n * omega_n.
inline double unit_sphere_area(int n) { return double(n) * unit_ball_volume(n); }

} // namespace ckn
