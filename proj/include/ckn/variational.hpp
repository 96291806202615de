#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckn/params.hpp"

namespace ckn {

/// A one-dimensional radial profile h on a grid 0 = rho_0 < ... < rho_M,
/// continued for rho > rho_M by the declared power tail
/// h(rho) = h_M (rho/rho_M)^{tail_exponent}. Integrability of the
/// Rayleigh quotient requires tail_exponent <= 2 - n.
struct RadialProfile {
    std::vector<double> grid;
    std::vector<double> values;
    double tail_exponent = 0.0;
};

RadialProfile make_radial_profile(std::vector<double> grid, std::vector<double> values,
                                  double tail_exponent);

struct RadialGridSpec {
    int nodes = 2000;              // log-spaced nodes (plus the origin)
    double rho_min_factor = 1e-4;  // times lambda^{1/(2-ap)}
    double rho_max_factor = 1e3;   // times lambda^{1/(2-ap)}
};

/// Sample of the closed-form extremal on a log grid, with its exact decay
/// exponent 2-n declared for the tail.
RadialProfile sample_extremal(const CknParams& prm, double lambda,
                              const RadialGridSpec& spec = {});

/// Rayleigh quotient
///   alpha_n^{1/2 - 1/p} (int h'(rho)^2 rho^{n-1} drho)^{1/2}
///                     / (int h(rho)^p rho^{n-1-ap} drho)^{1/p}
/// with h' taken from the monotone spline through the grid values and the
/// tail integrals added analytically.
double rayleigh_quotient(const CknParams& prm, const RadialProfile& h);

struct ExtremalCheck {
    double quotient = 0.0;
    double target = 0.0; // 1/K_a
    double relative_gap = 0.0;
};

/// Samples h_lambda and reports |quotient - K_a^{-1}| / K_a^{-1}.
ExtremalCheck verify_extremal(const CknParams& prm, double lambda,
                              const RadialGridSpec& spec = {});

/// The discretized quotient the minimizer actually descends: piecewise
/// linear in the grid values with Gauss-Legendre cell quadrature and
/// analytic tail terms. Exposed so tests can difference its analytic
/// gradient.
double discrete_quotient(const CknParams& prm, const RadialProfile& h);
std::vector<double> discrete_quotient_gradient(const CknParams& prm, const RadialProfile& h);

struct TraceRow {
    int iter = 0;
    double quotient = 0.0;
    double step = 0.0;
};

struct MinimizeResult {
    RadialProfile profile;
    double quotient = 0.0;          // spline-graded quotient of the final profile
    double discrete_quotient = 0.0; // internal objective at termination
    int iterations = 0;
    std::vector<TraceRow> trace;

    std::string trace_csv() const;
};

struct MinimizeOptions {
    int max_iters = 600;
    double stop_tol = 1e-11; // relative per-step improvement threshold
};

/// Projected gradient descent on the grid values: denominator normalized
/// each step, monotone non-increasing cone enforced by pool-adjacent-
/// violators, non-negativity by clamping. The quotient trace is
/// non-increasing up to the line-search tolerance.
MinimizeResult minimize_quotient(const CknParams& prm, const RadialProfile& init,
                                 std::uint64_t seed, int iters,
                                 const MinimizeOptions& opts = {});

/// Named initial profiles for the CLI and tests:
///   "gauss"        exp(-(rho/s)^2)-type bump
///   "plateau"      smoothed indicator
///   "extremal:L"   sampled extremal at lambda = L
///   "random"       seeded random admissible profile (bump mixture)
RadialProfile initial_profile(const CknParams& prm, const std::string& kind, std::uint64_t seed,
                              const RadialGridSpec& spec = {.nodes = 800,
                                                            .rho_min_factor = 1e-3,
                                                            .rho_max_factor = 1e3});

/// Least-squares fit of c * h_lambda to the profile over (lambda, c);
/// returns the relative L2 distance on the grid at the best fit.
double extremal_fit_distance(const CknParams& prm, const RadialProfile& h);

std::string profile_to_csv(const RadialProfile& h);
RadialProfile profile_from_csv(const std::string& text);

} // namespace ckn
