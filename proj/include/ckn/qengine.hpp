#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckn/mmspace.hpp"
#include "ckn/params.hpp"
#include "ckn/quadrature.hpp"

namespace ckn {

/// One evaluation of a Q-function: value, analytic lambda-derivative and
/// the propagated quadrature error. The derivative is always computed by
/// integrating the analytic derivative kernel, never by differencing
/// quadrature output.
struct QEvaluation {
    double lambda = 0.0;
    double value = 0.0;
    double derivative = 0.0; // strictly negative
    double quadrature_error = 0.0;
};

/// Layer-cake kernel
///   f(lambda, rho) = (lambda + rho^{2-ap})^{n/(a-1)} rho^{-(ap+1)}
///                    * [ rho^{2-ap} ((n-1+a)(2-ap)/(1-a) + ap) + ap lambda ],
/// i.e. -d/drho of (lambda + rho^{2-ap})^{(n-1+a)/(a-1)} rho^{-ap};
/// strictly positive on (0, inf)^2.
double f_kernel(const CknParams& prm, double lambda, double rho);

/// -d/drho of (lambda + rho^{2-ap})^{n/(a-1)} rho^{-ap}; the layer-cake
/// kernel of the derivative integrand (strictly positive as well).
double df_kernel(const CknParams& prm, double lambda, double rho);

/// Q against the Euclidean profile omega_n rho^n:
///   Q_E(lambda) = (1-a)/(n-1+a) int_0^inf omega_n rho^n f(lambda, rho) drho,
/// derivative via the radial form
///   Q_E'(lambda) = -n omega_n int_0^inf (lambda + rho^{2-ap})^{n/(a-1)} rho^{n-1-ap} drho.
QEvaluation q_e(const CknParams& prm, double lambda, double rel_tol = 1e-10);

/// Q against an arbitrary space's volume profile:
///   Q~(lambda) = (1-a)/(n-1+a) int_0^inf mu(B(x0, rho)) f(lambda, rho) drho,
/// derivative by the layer-cake derivative kernel. Requires an unbounded
/// space with a tail model; rejects non-integrable tails.
QEvaluation q_tilde(const MetricMeasureSpace& space, const CknParams& prm, double lambda,
                    double rel_tol = 1e-10);

/// Max over the grid of the relative residual of the identity
///   (-Q_E')^{2/p} = K_a^2 (n-2)^2 ((n-1+a)/(1-a) Q_E + lambda Q_E').
double verify_euclidean_identity(const CknParams& prm, const std::vector<double>& lambda_grid,
                                 double rel_tol = 1e-10);

struct ComparisonVerdict {
    std::vector<double> lambda_grid;
    std::vector<double> q_tilde_values;
    std::vector<double> q_values;
    std::vector<double> diff_ineq_slack; // relative slack of the differential inequality
    double min_gap = 0.0;                // min of (Q~ - q)/|q|
    bool holds = false;
    bool c_equals_ka = false; // flagged closed-limit case |C-K_a|/K_a < 1e-12
};

/// Step-3 comparison: Q~(lambda) >= q(lambda) on the grid, with
/// q = (K_a/C)^{n/(1-a)} Q_E, plus the pointwise differential inequality
///   (-Q~')^{2/p} <= C^2 (n-2)^2 ((n-1+a)/(1-a) Q~ + lambda Q~')
/// reported as relative slack (RHS - LHS)/|RHS|.
ComparisonVerdict verify_comparison(const MetricMeasureSpace& space, const CknParams& prm,
                                    double C, const std::vector<double>& lambda_grid,
                                    double rel_tol = 1e-10, double gap_tol = 1e-8);

/// Inverse of z_lambda(rho) = C^{-2} (n-2)^{-2} rho^{2/p} + lambda rho at y,
/// by bracketing + Newton; |z(rho) - y| <= 1e-12 y.
double z_lambda_inverse(const CknParams& prm, double C, double lambda, double y);

/// Volume growth floor C0^{-1} (K_a/C)^{n/(1-a)} omega_n rho^n; requires
/// C >= K_a.
double volume_lower_bound(const CknParams& prm, double C, double c0, double rho);

/// Smallest C for which the floor would hold at rho given the measured
/// profile: K_a (omega_n rho^n / (C0 mu(B(rho))))^{(1-a)/n}.
double implied_constant(const CknParams& prm, const MetricMeasureSpace& space, double c0,
                        double rho);

/// Step-4 reductio diagnostic: constants of
///   M1 lambda^{(n-2+2a)/(2(a-1))} <= M2 lambda^{n/(a-1)} + M3 lambda^{n/(a-1)+1}
/// for given r0, delta0, and the lambda* beyond which it fails.
struct ContradictionDiagnostic {
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    double exp_lhs = 0.0, exp_rhs = 0.0;
    double lambda_star = 0.0;
};

ContradictionDiagnostic contradiction_diagnostic(const CknParams& prm, double C, double c0,
                                                 double r0, double delta0);

struct StageResult {
    std::string name;
    bool pass = false;
    bool ran = false;
    std::string detail;
};

struct Theorem1Report {
    std::string space;
    int n = 0;
    double a = 0.0;
    double C = 0.0;
    double c0 = 1.0;
    StageResult unbounded, vd, ar, comparison, lower_bound, upper_bound;
    std::vector<double> rho_grid;
    std::vector<double> mu_values;
    std::vector<double> bound_values;   // lower bounds
    std::vector<double> implied_c;      // smallest admissible C per rho
    double lower_bound_max_violation = 0.0; // max of (bound - mu)/bound
    double lower_bound_max_gap = 0.0;       // max of |mu - bound|/bound
    std::optional<ComparisonVerdict> verdict;
    std::optional<ContradictionDiagnostic> step4;
    bool all_pass = false;

    std::string to_json() const;
    std::string to_table() const;
    std::string stage_csv() const;  // lambda, Qtilde, q, gap
    std::string volume_csv() const; // rho, mu, bound, implied C
};

struct Theorem1Options {
    std::vector<double> lambda_grid; // default: 41 log points on 10^-2..10^2
    std::vector<double> rho_grid;    // default: {0.1, 1, 10, 100, 1000}
    double rel_tol = 1e-10;
    double bound_slack = 1e-8;
    std::optional<double> ar_tol;
    double step4_r0 = 1.0;
    std::optional<double> step4_delta0;
};

std::vector<double> log_lambda_grid(double lo = 1e-2, double hi = 1e2, int points = 41);

/// Full Theorem-1 style pipeline: audits, comparison, two-sided volume
/// growth, divergence witness. Stages report independently; later stages
/// still run when earlier ones fail, as long as they remain meaningful.
Theorem1Report theorem1_pipeline(const MetricMeasureSpace& space, const CknParams& prm, double C,
                                 double c0, const Theorem1Options& opts = {});

} // namespace ckn
