#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

namespace ckn {

/// A 1D integrand on (0, inf). The evaluator must be finite on (0, inf)
/// except possibly for a power singularity at 0 with exponent > -1
/// (declared through singular_at_zero / zero_exponent, e.g. -ap weights).
/// tail_exponent, when set, is the asymptotic power-law decay exponent at
/// infinity; it must be < -1 or the improper integral is rejected.
struct Integrand {
    std::function<double(double)> eval;
    bool singular_at_zero = false;
    double zero_exponent = 0.0;
    std::optional<double> tail_exponent;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

/// Thrown when adaptive refinement hits the subdivision budget without
/// meeting the tolerance; carries the best estimate so far.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, QuadratureResult best_estimate)
        : std::runtime_error(what), best(best_estimate) {}
    QuadratureResult best;
};

enum class TailHandling {
    Substitution, // rho = t/(1-t), integrate on (0,1)
    AnalyticTail, // finite adaptive part + power-law tail from the hint
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    int max_subdivisions = 20000;
    TailHandling tail = TailHandling::Substitution;
};

/// Adaptive Gauss-Kronrod (G7, K15) on a finite interval.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double rel_tol, int max_subdivisions = 20000);

/// Improper integral of f over (0, inf). rel_tol must lie in (1e-14, 1e-2).
/// Tail handled per options; zero singularities regularized by the
/// substitution rho = s^{1/(1+zero_exponent)}.
QuadratureResult integrate_improper(const Integrand& f, double rel_tol,
                                    const QuadratureOptions& opts = {});

/// Integral of f over (lo, hi); hi may be +infinity.
QuadratureResult integrate_range(const Integrand& f, double lo, double hi, double rel_tol,
                                 const QuadratureOptions& opts = {});

/// Integrates the caller-certified analytic lambda-derivative of an
/// integrand family at fixed lambda over (lo, hi). The family itself is
/// only used by tests, which difference it to cross-check the derivative.
QuadratureResult differentiate_under_integral(
    const std::function<double(double, double)>& family,
    const std::function<double(double, double)>& dlambda_integrand, double lambda, double rel_tol,
    double lo = 0.0, double hi = std::numeric_limits<double>::infinity(),
    const QuadratureOptions& opts = {});

} // namespace ckn
