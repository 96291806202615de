#include "ckn/params.hpp"

#include <cmath>
#include <string>

namespace ckn {

CknParams make_params(int n, double a) {
    if (n < 3)
        throw std::domain_error("make_params: dimension n must satisfy n >= 3, got n = " +
                                std::to_string(n));
    if (!(a >= 0.0))
        throw std::domain_error("make_params: weight parameter must satisfy a >= 0, got a = " +
                                std::to_string(a));
    if (!(a < 1.0))
        throw std::domain_error("make_params: weight parameter must satisfy a < 1, got a = " +
                                std::to_string(a));

    CknParams prm;
    prm.n = n;
    prm.a = a;
    prm.p = 2.0 * n / (n - 2.0 + 2.0 * a);
    prm.ap = a * prm.p;

    prm.exp_profile = (2.0 - n) / (2.0 - prm.ap);
    prm.exp_kernel = n / (a - 1.0);
    prm.exp_integrand = (n - 1.0 + a) / (a - 1.0);
    prm.exp_scaling = (n - 2.0 + 2.0 * a) / (2.0 * (a - 1.0));
    prm.front_coef = (1.0 - a) / (n - 1.0 + a);
    prm.bracket_coef = (n - 1.0 + a) * (2.0 - prm.ap) / (1.0 - a) + prm.ap;
    return prm;
}

SharpConstant sharp_constant(const CknParams& prm) {
    const int n = prm.n;
    const double ap = prm.ap;
    const double omega_n = unit_ball_volume(n);

    const double lead = std::pow((n - 2.0) * (n - ap), -0.5);
    const double g1 = gamma_fn((2.0 * n - 2.0 * ap) / (2.0 - ap));
    const double g2 = gamma_fn((n - ap) / (2.0 - ap));
    const double inner = (2.0 - ap) * g1 / (n * omega_n * g2 * g2);
    const double value = lead * std::pow(inner, (2.0 - ap) / (2.0 * n - 2.0 * ap));
    return SharpConstant{value, prm};
}

long double sharp_constant_xprec(int n, double a) {
    // Log-domain evaluation with libm's long-double lgamma; shares no code
    // with the Lanczos path above.
    const long double nn = n;
    const long double aa = a;
    const long double p = 2.0L * nn / (nn - 2.0L + 2.0L * aa);
    const long double ap = aa * p;
    const long double pi = 3.14159265358979323846264338327950288L;

    const long double log_omega_n = (nn / 2.0L) * std::log(pi) - lgammal(nn / 2.0L + 1.0L);
    const long double log_lead = -0.5L * std::log((nn - 2.0L) * (nn - ap));
    const long double log_inner = std::log(2.0L - ap) + lgammal((2.0L * nn - 2.0L * ap) / (2.0L - ap)) -
                                  std::log(nn) - log_omega_n -
                                  2.0L * lgammal((nn - ap) / (2.0L - ap));
    return std::exp(log_lead + log_inner * (2.0L - ap) / (2.0L * nn - 2.0L * ap));
}

double extremal_profile(const CknParams& prm, double lambda, double rho) {
    if (!(lambda > 0.0))
        throw std::domain_error("extremal_profile: lambda must be > 0");
    if (!(rho >= 0.0))
        throw std::domain_error("extremal_profile: rho must be >= 0");
    return std::pow(lambda + std::pow(rho, 2.0 - prm.ap), prm.exp_profile);
}

} // namespace ckn
