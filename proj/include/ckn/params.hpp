#pragma once

#include <cmath>
#include <stdexcept>

#include "ckn/special.hpp"

namespace ckn {

/// Parameter triple (n, a, p) of the weighted Sobolev inequality, with the
/// derived quantities precomputed once at construction so hot loops never
/// re-derive them:
///
///   p  = 2n / (n - 2 + 2a),     ap = a * p < 2,
///   exponent of the extremal profile      (2-n)/(2-ap),
///   exponent of the Q integrand kernel    n/(a-1),
///   exponent of the Q integrand itself    (n-1+a)/(a-1),
///   scaling exponent of Q(lambda)         (n-2+2a)/(2(a-1)).
///
/// All four derived exponents are finite and negative on the admissible
/// range n >= 3, 0 <= a < 1.
struct CknParams {
    int n = 0;
    double a = 0.0;
    double p = 0.0;
    double ap = 0.0;

    double exp_profile = 0.0;   // (2-n)/(2-ap)
    double exp_kernel = 0.0;    // n/(a-1)
    double exp_integrand = 0.0; // (n-1+a)/(a-1)
    double exp_scaling = 0.0;   // (n-2+2a)/(2(a-1))
    double front_coef = 0.0;    // (1-a)/(n-1+a)
    double bracket_coef = 0.0;  // (n-1+a)(2-ap)/(1-a) + ap
};

/// Validated construction. Throws std::domain_error naming the violated
/// bound when n < 3 or a is outside [0, 1).
CknParams make_params(int n, double a);

/// The sharp constant of the inequality together with the parameters it
/// was computed from. Recomputation is deterministic (pure closed form).
struct SharpConstant {
    double value = 0.0;
    CknParams params;
};

/// K_a = ((n-2)(n-ap))^{-1/2}
///       * ( (2-ap) Gamma((2n-2ap)/(2-ap)) / (n omega_n Gamma^2((n-ap)/(2-ap))) )^{(2-ap)/(2n-2ap)}
SharpConstant sharp_constant(const CknParams& params);

/// Same formula evaluated in extended precision through an independent
/// special-function stack (lgammal from libm, log-domain arithmetic).
/// Used as the second-implementation oracle.
long double sharp_constant_xprec(int n, double a);

/// Radial extremal h_lambda(rho) = (lambda + rho^{2-ap})^{(2-n)/(2-ap)}.
/// Strictly decreasing in rho, and in lambda for every rho >= 0.
double extremal_profile(const CknParams& params, double lambda, double rho);

} // namespace ckn
