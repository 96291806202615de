#include "ckn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace ckn {
namespace {

// Gauss-Kronrod (G7, K15) nodes and weights on [-1, 1]. Nodes are the
// non-negative half; odd indices are the embedded Gauss points.
constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};
constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};
constexpr double kGauss7W[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct IntervalEstimate {
    double lo, hi;
    double value;
    double error;
};

// Single (G7,K15) pass with the QUADPACK-style error estimator.
IntervalEstimate gk15(const std::function<double(double)>& f, double lo, double hi, long& evals) {
    const double c = 0.5 * (lo + hi);
    const double h = 0.5 * (hi - lo);

    double fv[15];
    // index layout: 0..6 negative side (outermost first), 7 center, 8..14 positive side
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kGK15Nodes[i]);
        fv[14 - i] = f(c + h * kGK15Nodes[i]);
    }
    fv[7] = f(c);
    evals += 15;

    double res_kronrod = kKronrodW[7] * fv[7];
    double res_gauss = kGauss7W[3] * fv[7];
    double res_abs = std::abs(res_kronrod);
    for (int i = 0; i < 7; ++i) {
        const double pair = fv[i] + fv[14 - i];
        res_kronrod += kKronrodW[i] * pair;
        res_abs += kKronrodW[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
        if (i % 2 == 1) res_gauss += kGauss7W[i / 2] * pair;
    }
    const double mean = 0.5 * res_kronrod;
    double res_asc = kKronrodW[7] * std::abs(fv[7] - mean);
    for (int i = 0; i < 7; ++i)
        res_asc += kKronrodW[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

    res_kronrod *= h;
    res_gauss *= h;
    res_abs *= h;
    res_asc *= h;

    double err = std::abs(res_kronrod - res_gauss);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    const double eps50 = 50.0 * std::numeric_limits<double>::epsilon();
    if (res_abs > std::numeric_limits<double>::min() / eps50)
        err = std::max(err, eps50 * res_abs);
    return {lo, hi, res_kronrod, err};
}

struct CompareError {
    bool operator()(const IntervalEstimate& a, const IntervalEstimate& b) const {
        return a.error < b.error;
    }
};

QuadratureResult adaptive(const std::function<double(double)>& f, double lo, double hi,
                          double rel_tol, int max_subdivisions) {
    long evals = 0;
    std::priority_queue<IntervalEstimate, std::vector<IntervalEstimate>, CompareError> q;
    q.push(gk15(f, lo, hi, evals));

    double total = q.top().value;
    double total_err = q.top().error;
    int splits = 0;
    const double abs_floor = 1e-300;

    while (total_err > std::max(rel_tol * std::abs(total), abs_floor)) {
        if (splits >= max_subdivisions) {
            QuadratureResult best{total, total_err, evals};
            throw ConvergenceError("integrate: no convergence after max subdivisions", best);
        }
        IntervalEstimate worst = q.top();
        q.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (mid <= worst.lo || mid >= worst.hi) {
            // interval at floating-point resolution; accept its estimate
            total_err = std::max(0.0, total_err - worst.error);
            if (q.empty()) break;
            continue;
        }
        IntervalEstimate left = gk15(f, worst.lo, mid, evals);
        IntervalEstimate right = gk15(f, mid, worst.hi, evals);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        q.push(left);
        q.push(right);
        ++splits;
    }
    return {total, total_err, evals};
}

void check_rel_tol(double rel_tol) {
    if (!(rel_tol > 1e-14 && rel_tol < 1e-2))
        throw std::domain_error("quadrature: rel_tol must lie in (1e-14, 1e-2)");
}

// Map the zero singularity away: rho = s^{e}, e = 1/(1 + zero_exponent).
std::function<double(double)> desingularized(const Integrand& f) {
    if (!f.singular_at_zero || f.zero_exponent == 0.0) return f.eval;
    if (!(f.zero_exponent > -1.0))
        throw std::domain_error("quadrature: zero-singularity exponent must be > -1 (integrable)");
    const double e = 1.0 / (1.0 + f.zero_exponent);
    auto eval = f.eval;
    return [eval, e](double s) {
        const double rho = std::pow(s, e);
        return eval(rho) * e * std::pow(s, e - 1.0);
    };
}

} // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double lo, double hi,
                                    double rel_tol, int max_subdivisions) {
    check_rel_tol(rel_tol);
    if (!(lo < hi)) throw std::domain_error("integrate_adaptive: need lo < hi");
    return adaptive(f, lo, hi, rel_tol, max_subdivisions);
}

QuadratureResult integrate_range(const Integrand& f, double lo, double hi, double rel_tol,
                                 const QuadratureOptions& opts) {
    check_rel_tol(rel_tol);
    if (!(lo >= 0.0)) throw std::domain_error("integrate_range: need lo >= 0");
    const bool improper = std::isinf(hi);
    if (!improper && !(lo < hi)) throw std::domain_error("integrate_range: need lo < hi");

    if (improper && f.tail_exponent && !(*f.tail_exponent < -1.0))
        throw std::domain_error(
            "integrate_range: declared tail exponent >= -1, integral cannot converge");

    QuadratureResult acc{0.0, 0.0, 0};

    // Finite head with the zero singularity (if any) mapped away.
    const double head_hi = improper ? 1.0 : std::min(hi, 1.0);
    if (lo < head_hi && f.singular_at_zero && f.zero_exponent != 0.0) {
        const double e = 1.0 / (1.0 + f.zero_exponent);
        auto g = desingularized(f);
        // rho in [lo, head_hi] corresponds to s in [lo^{1/e}, head_hi^{1/e}]
        const double s_lo = std::pow(lo, 1.0 / e);
        const double s_hi = std::pow(head_hi, 1.0 / e);
        auto r = adaptive(g, s_lo, s_hi, rel_tol, opts.max_subdivisions);
        acc.value += r.value;
        acc.abs_error_estimate += r.abs_error_estimate;
        acc.evaluations += r.evaluations;
    } else if (lo < head_hi) {
        auto r = adaptive(f.eval, lo, head_hi, rel_tol, opts.max_subdivisions);
        acc.value += r.value;
        acc.abs_error_estimate += r.abs_error_estimate;
        acc.evaluations += r.evaluations;
    }

    const double mid = std::max(lo, head_hi);
    if (!improper) {
        if (mid < hi) {
            auto r = adaptive(f.eval, mid, hi, rel_tol, opts.max_subdivisions);
            acc.value += r.value;
            acc.abs_error_estimate += r.abs_error_estimate;
            acc.evaluations += r.evaluations;
        }
        return acc;
    }

    if (opts.tail == TailHandling::AnalyticTail && f.tail_exponent) {
        // Adaptive part to a cutoff T, then the fitted power-law tail
        // c rho^k with c matched to f at T; T grows until the tail is
        // negligible against the running total.
        const double k = *f.tail_exponent;
        double T = std::max(16.0, 2.0 * mid);
        auto eval = f.eval;
        for (int round = 0; round < 60; ++round) {
            const double fT = eval(T);
            const double tail_mag = std::abs(fT) * T / (-k - 1.0);
            if (tail_mag <= 0.25 * rel_tol * (std::abs(acc.value) + tail_mag) || round == 59) {
                auto r = adaptive(eval, mid, T, rel_tol, opts.max_subdivisions);
                const double c = fT / std::pow(T, k);
                const double tail = -c * std::pow(T, k + 1.0) / (k + 1.0);
                acc.value += r.value + tail;
                acc.abs_error_estimate += r.abs_error_estimate + std::abs(tail) * 0.5;
                acc.evaluations += r.evaluations + 1;
                return acc;
            }
            T *= 2.0;
        }
        return acc; // unreachable
    }

    // Default: rho = t/(1-t) maps (mid, inf) to (t_mid, 1).
    auto eval = f.eval;
    auto g = [eval](double t) {
        const double u = 1.0 - t;
        const double rho = t / u;
        return eval(rho) / (u * u);
    };
    const double t_mid = mid / (1.0 + mid);
    auto r = adaptive(g, t_mid, 1.0, rel_tol, opts.max_subdivisions);
    acc.value += r.value;
    acc.abs_error_estimate += r.abs_error_estimate;
    acc.evaluations += r.evaluations;
    return acc;
}

QuadratureResult integrate_improper(const Integrand& f, double rel_tol,
                                    const QuadratureOptions& opts) {
    return integrate_range(f, 0.0, std::numeric_limits<double>::infinity(), rel_tol, opts);
}

QuadratureResult differentiate_under_integral(
    const std::function<double(double, double)>& /*family*/,
    const std::function<double(double, double)>& dlambda_integrand, double lambda, double rel_tol,
    double lo, double hi, const QuadratureOptions& opts) {
    if (!(lambda > 0.0))
        throw std::domain_error("differentiate_under_integral: lambda must be > 0");
    Integrand g;
    g.eval = [dlambda_integrand, lambda](double rho) { return dlambda_integrand(lambda, rho); };
    return integrate_range(g, lo, hi, rel_tol, opts);
}

} // namespace ckn
