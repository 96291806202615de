#include "ckn/qengine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ckn/special.hpp"

namespace ckn {
namespace {

// Power-law exponent of f(lambda, .) at infinity.
double f_tail_exponent(const CknParams& prm) {
    return (2.0 - prm.ap) * (prm.exp_kernel + 1.0) - prm.ap - 1.0;
}

// Power-law exponent of df_kernel(lambda, .) at infinity.
double df_tail_exponent(const CknParams& prm) {
    return (2.0 - prm.ap) * prm.exp_kernel - prm.ap - 1.0;
}

// Tail integrability guard for int mu(rho) f(lambda, rho) drho: the profile
// tail exponent must stay below 2n - 2.
void check_profile_tail(const CknParams& prm, double mu_tail_exp) {
    if (!(mu_tail_exp + f_tail_exponent(prm) < -1.0))
        throw std::domain_error(
            "q_tilde: profile tail exponent " + std::to_string(mu_tail_exp) +
            " makes the Q integral divergent (needs < " + std::to_string(2.0 * prm.n - 2.0) + ")");
}

} // namespace

double f_kernel(const CknParams& prm, double lambda, double rho) {
    if (!(lambda > 0.0) || !(rho > 0.0))
        throw std::domain_error("f_kernel: lambda and rho must be > 0");
    const double base = lambda + std::pow(rho, 2.0 - prm.ap);
    const double bracket = std::pow(rho, 2.0 - prm.ap) * prm.bracket_coef + prm.ap * lambda;
    return std::pow(base, prm.exp_kernel) * std::pow(rho, -(prm.ap + 1.0)) * bracket;
}

double df_kernel(const CknParams& prm, double lambda, double rho) {
    if (!(lambda > 0.0) || !(rho > 0.0))
        throw std::domain_error("df_kernel: lambda and rho must be > 0");
    const double s = std::pow(rho, 2.0 - prm.ap);
    const double base = lambda + s;
    const double n_over = prm.n / (1.0 - prm.a); // -exp_kernel
    return n_over * (2.0 - prm.ap) * std::pow(rho, 1.0 - 2.0 * prm.ap) *
               std::pow(base, prm.exp_kernel - 1.0) +
           prm.ap * std::pow(rho, -prm.ap - 1.0) * std::pow(base, prm.exp_kernel);
}

QEvaluation q_e(const CknParams& prm, double lambda, double rel_tol) {
    if (!(lambda > 0.0)) throw std::domain_error("q_e: lambda must be > 0");
    const double omega = unit_ball_volume(prm.n);

    Integrand value_integrand;
    value_integrand.eval = [&prm, lambda, omega](double rho) {
        return omega * std::pow(rho, prm.n) * f_kernel(prm, lambda, rho);
    };
    value_integrand.tail_exponent = prm.n + f_tail_exponent(prm);
    const auto value = integrate_improper(value_integrand, rel_tol);

    // radial form of the analytic lambda-derivative of the n-dimensional
    // integrand: -(lambda + rho^{2-ap})^{n/(a-1)} rho^{-ap}
    Integrand deriv_integrand;
    deriv_integrand.eval = [&prm, lambda](double rho) {
        return std::pow(lambda + std::pow(rho, 2.0 - prm.ap), prm.exp_kernel) *
               std::pow(rho, prm.n - 1.0 - prm.ap);
    };
    deriv_integrand.tail_exponent =
        (2.0 - prm.ap) * prm.exp_kernel + prm.n - 1.0 - prm.ap;
    const auto deriv = integrate_improper(deriv_integrand, rel_tol);

    QEvaluation out;
    out.lambda = lambda;
    out.value = prm.front_coef * value.value;
    out.derivative = -prm.n * omega * deriv.value;
    out.quadrature_error = prm.front_coef * value.abs_error_estimate +
                           prm.n * omega * deriv.abs_error_estimate;
    return out;
}

QEvaluation q_tilde(const MetricMeasureSpace& space, const CknParams& prm, double lambda,
                    double rel_tol) {
    if (!(lambda > 0.0)) throw std::domain_error("q_tilde: lambda must be > 0");
    if (!space.unbounded)
        throw std::domain_error("q_tilde: space is flagged bounded; a bounded space cannot "
                                "support the inequality (adding constants violates it)");
    if (!space.profile.has_tail_model())
        throw InsufficientData("q_tilde: profile has no tail model; refusing to extrapolate");
    check_profile_tail(prm, space.profile.tail_exponent());

    const VolumeProfile& mu = space.profile;

    Integrand value_integrand;
    value_integrand.eval = [&mu, &prm, lambda](double rho) {
        return mu(rho) * f_kernel(prm, lambda, rho);
    };
    value_integrand.tail_exponent = mu.tail_exponent() + f_tail_exponent(prm);
    const auto value = integrate_improper(value_integrand, rel_tol);

    Integrand deriv_integrand;
    deriv_integrand.eval = [&mu, &prm, lambda](double rho) {
        return mu(rho) * df_kernel(prm, lambda, rho);
    };
    deriv_integrand.tail_exponent = mu.tail_exponent() + df_tail_exponent(prm);
    const auto deriv = integrate_improper(deriv_integrand, rel_tol);

    QEvaluation out;
    out.lambda = lambda;
    out.value = prm.front_coef * value.value;
    out.derivative = -deriv.value;
    out.quadrature_error =
        prm.front_coef * value.abs_error_estimate + deriv.abs_error_estimate;
    return out;
}

double verify_euclidean_identity(const CknParams& prm, const std::vector<double>& lambda_grid,
                                 double rel_tol) {
    const double K = sharp_constant(prm).value;
    const double k2n2 = K * K * (prm.n - 2.0) * (prm.n - 2.0);
    double worst = 0.0;
    for (double lambda : lambda_grid) {
        const QEvaluation q = q_e(prm, lambda, rel_tol);
        const double lhs = std::pow(-q.derivative, 2.0 / prm.p);
        const double rhs = k2n2 * (q.value / prm.front_coef + lambda * q.derivative);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

ComparisonVerdict verify_comparison(const MetricMeasureSpace& space, const CknParams& prm,
                                    double C, const std::vector<double>& lambda_grid,
                                    double rel_tol, double gap_tol) {
    const double K = sharp_constant(prm).value;
    if (C < K * (1.0 - 1e-12))
        throw std::domain_error("verify_comparison: C must be >= K_a");

    ComparisonVerdict v;
    v.lambda_grid = lambda_grid;
    v.c_equals_ka = std::abs(C - K) / K < 1e-12;
    const double factor = std::pow(K / C, prm.n / (1.0 - prm.a));
    const double c2n2 = C * C * (prm.n - 2.0) * (prm.n - 2.0);

    v.min_gap = std::numeric_limits<double>::infinity();
    for (double lambda : lambda_grid) {
        const QEvaluation qt = q_tilde(space, prm, lambda, rel_tol);
        const QEvaluation qe = q_e(prm, lambda, rel_tol);
        const double qv = factor * qe.value;
        v.q_tilde_values.push_back(qt.value);
        v.q_values.push_back(qv);
        v.min_gap = std::min(v.min_gap, (qt.value - qv) / std::abs(qv));

        const double lhs = std::pow(-qt.derivative, 2.0 / prm.p);
        const double rhs = c2n2 * (qt.value / prm.front_coef + lambda * qt.derivative);
        v.diff_ineq_slack.push_back((rhs - lhs) / std::abs(rhs));
    }
    v.holds = v.min_gap >= -gap_tol;
    return v;
}

double z_lambda_inverse(const CknParams& prm, double C, double lambda, double y) {
    if (!(y > 0.0)) throw std::domain_error("z_lambda_inverse: y must be > 0");
    if (!(lambda > 0.0)) throw std::domain_error("z_lambda_inverse: lambda must be > 0");
    if (!(C > 0.0)) throw std::domain_error("z_lambda_inverse: C must be > 0");
    const double coef = 1.0 / (C * C * (prm.n - 2.0) * (prm.n - 2.0));
    const double e = 2.0 / prm.p;
    auto z = [&](double rho) { return coef * std::pow(rho, e) + lambda * rho; };

    // bracket the strictly increasing z
    double hi = std::max(y / lambda, std::pow(y / coef, 1.0 / e));
    hi = std::max(hi, 1e-300);
    while (z(hi) < y) hi *= 2.0;
    double lo = 0.0;

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (z(mid) < y)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-6 * hi) break;
    }
    // Newton polish from the midpoint
    double rho = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double g = z(rho) - y;
        if (std::abs(g) <= 1e-13 * y) break;
        const double dz = coef * e * std::pow(rho, e - 1.0) + lambda;
        double next = rho - g / dz;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (z(next) < y)
            lo = next;
        else
            hi = next;
        rho = next;
    }
    if (std::abs(z(rho) - y) > 1e-12 * y)
        throw std::runtime_error("z_lambda_inverse: residual above tolerance");
    return rho;
}

double volume_lower_bound(const CknParams& prm, double C, double c0, double rho) {
    const double K = sharp_constant(prm).value;
    if (C < K * (1.0 - 1e-12))
        throw std::domain_error("volume_lower_bound: the bound requires C >= K_a");
    if (!(c0 >= 1.0)) throw std::domain_error("volume_lower_bound: C0 must be >= 1");
    if (!(rho > 0.0)) throw std::domain_error("volume_lower_bound: rho must be > 0");
    const double factor = std::pow(K / C, prm.n / (1.0 - prm.a));
    return factor / c0 * unit_ball_volume(prm.n) * std::pow(rho, prm.n);
}

double implied_constant(const CknParams& prm, const MetricMeasureSpace& space, double c0,
                        double rho) {
    const double K = sharp_constant(prm).value;
    const double mu = space.profile(rho);
    const double euclid = unit_ball_volume(prm.n) * std::pow(rho, prm.n);
    return K * std::pow(euclid / (c0 * mu), (1.0 - prm.a) / prm.n);
}

ContradictionDiagnostic contradiction_diagnostic(const CknParams& prm, double C, double c0,
                                                 double r0, double delta0) {
    const double K = sharp_constant(prm).value;
    if (!(r0 > 0.0)) throw std::domain_error("contradiction_diagnostic: r0 must be > 0");
    const double factor = std::pow(K / C, prm.n / (1.0 - prm.a));
    if (!(delta0 > 0.0) || delta0 >= factor)
        throw std::domain_error(
            "contradiction_diagnostic: need 0 < delta0 < (K_a/C)^{n/(1-a)}");
    const double brace = c0 - factor + delta0;
    const double omega = unit_ball_volume(prm.n);
    const int n = prm.n;
    const double ap = prm.ap;

    ContradictionDiagnostic d;
    d.exp_lhs = prm.exp_scaling;
    d.exp_rhs = prm.exp_kernel;
    d.m1 = delta0 / prm.front_coef * q_e(prm, 1.0).value;
    d.m2 = brace * omega * prm.bracket_coef * std::pow(r0, n + 2.0 - 2.0 * ap) /
           (n + 2.0 - 2.0 * ap);
    d.m3 = brace * omega * ap * std::pow(r0, n - ap) / (n - ap);

    // g(lambda) = M2 lambda^{e2-e1} + M3 lambda^{e2+1-e1} is strictly
    // decreasing (both exponents negative); the crossing with M1 is the
    // largest lambda where the inequality still holds.
    auto g = [&](double lam) {
        return d.m2 * std::pow(lam, d.exp_rhs - d.exp_lhs) +
               d.m3 * std::pow(lam, d.exp_rhs + 1.0 - d.exp_lhs);
    };
    double lo = 1e-12, hi = 1e12;
    if (g(lo) <= d.m1) {
        d.lambda_star = lo;
        return d;
    }
    if (g(hi) >= d.m1) {
        d.lambda_star = hi;
        return d;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (g(mid) > d.m1)
            lo = mid;
        else
            hi = mid;
    }
    d.lambda_star = std::sqrt(lo * hi);
    return d;
}

std::vector<double> log_lambda_grid(double lo, double hi, int points) {
    if (points < 2 || !(lo > 0.0) || !(hi > lo))
        throw std::domain_error("log_lambda_grid: invalid grid spec");
    std::vector<double> g(points);
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < points; ++i)
        g[i] = std::exp(llo + (lhi - llo) * i / (points - 1));
    return g;
}

Theorem1Report theorem1_pipeline(const MetricMeasureSpace& space, const CknParams& prm, double C,
                                 double c0, const Theorem1Options& opts) {
    Theorem1Report rep;
    rep.space = space.name;
    rep.n = prm.n;
    rep.a = prm.a;
    rep.C = C;
    rep.c0 = c0;

    const std::vector<double> lambda_grid =
        opts.lambda_grid.empty() ? log_lambda_grid() : opts.lambda_grid;
    rep.rho_grid = opts.rho_grid.empty() ? std::vector<double>{0.1, 1.0, 10.0, 100.0, 1000.0}
                                         : opts.rho_grid;

    rep.unbounded = {"unbounded", space.unbounded, true,
                     space.unbounded ? "space declared unbounded"
                                     : "bounded space rejected (constants violate the inequality)"};
    if (!space.unbounded) return rep;

    // (VD) audit over all pairs of the rho grid
    {
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < rep.rho_grid.size(); ++i)
            for (std::size_t j = i + 1; j < rep.rho_grid.size(); ++j)
                pairs.emplace_back(rep.rho_grid[i], rep.rho_grid[j]);
        try {
            const VdReport vd = check_vd(space, prm.n, c0, pairs);
            std::ostringstream os;
            os << "max ratio statistic " << std::setprecision(12) << vd.c0_required << " vs C0 "
               << c0;
            rep.vd = {"volume-doubling", vd.pass, true, os.str()};
        } catch (const std::exception& e) {
            rep.vd = {"volume-doubling", false, false, e.what()};
        }
    }

    // (AR) audit on a decreasing sequence below the smallest grid radius
    {
        std::vector<double> radii;
        const double r0 = rep.rho_grid.front();
        for (int j = 0; j <= 12; ++j) radii.push_back(r0 * std::pow(10.0, -j / 4.0));
        try {
            const ArReport ar = check_ar(space, prm.n, radii, opts.ar_tol.value_or(1e-3));
            std::ostringstream os;
            os << "liminf estimate " << std::setprecision(12) << ar.liminf_estimate
               << ", window [" << ar.window_lo << ", " << ar.window_hi << "]";
            rep.ar = {"ahlfors-regularity", ar.pass, true, os.str()};
        } catch (const std::exception& e) {
            rep.ar = {"ahlfors-regularity", false, false, e.what()};
        }
    }

    // Step-3 comparison on the lambda grid
    try {
        const ComparisonVerdict v =
            verify_comparison(space, prm, C, lambda_grid, opts.rel_tol);
        std::ostringstream os;
        os << "min gap " << std::setprecision(6) << v.min_gap;
        if (v.c_equals_ka) os << " (C = K_a: closed-limit case, non-strict check)";
        rep.comparison = {"q-comparison", v.holds, true, os.str()};
        rep.verdict = v;
    } catch (const std::exception& e) {
        rep.comparison = {"q-comparison", false, false, e.what()};
    }

    // Volume growth, two-sided, plus the implied-constant witness
    try {
        const double omega = unit_ball_volume(prm.n);
        bool lower_ok = true, upper_ok = true;
        rep.lower_bound_max_violation = 0.0;
        rep.lower_bound_max_gap = 0.0;
        for (double rho : rep.rho_grid) {
            const double mu = space.profile(rho);
            const double lb = volume_lower_bound(prm, C, c0, rho);
            rep.mu_values.push_back(mu);
            rep.bound_values.push_back(lb);
            rep.implied_c.push_back(implied_constant(prm, space, c0, rho));
            const double viol = (lb - mu) / lb;
            rep.lower_bound_max_violation = std::max(rep.lower_bound_max_violation, viol);
            rep.lower_bound_max_gap =
                std::max(rep.lower_bound_max_gap, std::abs(mu - lb) / lb);
            if (viol > opts.bound_slack) lower_ok = false;
            if (mu > c0 * omega * std::pow(rho, prm.n) * (1.0 + 1e-9)) upper_ok = false;
        }
        {
            std::ostringstream os;
            os << "max violation " << std::setprecision(6) << rep.lower_bound_max_violation
               << ", max |mu - bound|/bound " << rep.lower_bound_max_gap;
            rep.lower_bound = {"volume-lower-bound", lower_ok, true, os.str()};
        }
        rep.upper_bound = {"volume-upper-bound", upper_ok, true,
                           upper_ok ? "mu <= C0 omega_n rho^n on the grid"
                                    : "upper bound violated on the grid"};
    } catch (const std::exception& e) {
        rep.lower_bound = {"volume-lower-bound", false, false, e.what()};
        rep.upper_bound = {"volume-upper-bound", false, false, e.what()};
    }

    // Step-4 reductio diagnostic
    try {
        const double K = sharp_constant(prm).value;
        const double factor = std::pow(K / C, prm.n / (1.0 - prm.a));
        const double delta0 = opts.step4_delta0.value_or(0.5 * factor);
        rep.step4 = contradiction_diagnostic(prm, C, c0, opts.step4_r0, delta0);
    } catch (const std::exception&) {
        // diagnostic only
    }

    rep.all_pass = rep.unbounded.pass && rep.vd.ran && rep.vd.pass && rep.ar.ran && rep.ar.pass &&
                   rep.comparison.ran && rep.comparison.pass && rep.lower_bound.ran &&
                   rep.lower_bound.pass && rep.upper_bound.ran && rep.upper_bound.pass;
    return rep;
}

namespace {
nlohmann::ordered_json stage_json(const StageResult& s) {
    return {{"name", s.name}, {"pass", s.pass}, {"ran", s.ran}, {"detail", s.detail}};
}
} // namespace

std::string Theorem1Report::to_json() const {
    nlohmann::ordered_json j;
    j["space"] = space;
    j["n"] = n;
    j["a"] = a;
    j["C"] = C;
    j["C0"] = c0;
    j["stages"] = nlohmann::ordered_json::array(
        {stage_json(unbounded), stage_json(vd), stage_json(ar), stage_json(comparison),
         stage_json(lower_bound), stage_json(upper_bound)});
    j["rho_grid"] = rho_grid;
    j["mu"] = mu_values;
    j["lower_bound"] = bound_values;
    j["implied_C"] = implied_c;
    j["lower_bound_max_violation"] = lower_bound_max_violation;
    j["lower_bound_max_gap"] = lower_bound_max_gap;
    if (verdict) {
        j["comparison"] = {{"lambda", verdict->lambda_grid},
                           {"q_tilde", verdict->q_tilde_values},
                           {"q", verdict->q_values},
                           {"min_gap", verdict->min_gap},
                           {"diff_ineq_slack", verdict->diff_ineq_slack},
                           {"c_equals_ka", verdict->c_equals_ka}};
    }
    if (step4) {
        j["step4_diagnostic"] = {{"M1", step4->m1},       {"M2", step4->m2},
                                 {"M3", step4->m3},       {"exp_lhs", step4->exp_lhs},
                                 {"exp_rhs", step4->exp_rhs}, {"lambda_star", step4->lambda_star}};
    }
    j["all_pass"] = all_pass;
    return j.dump(2);
}

std::string Theorem1Report::to_table() const {
    std::ostringstream os;
    os << "theorem1 pipeline: space " << space << ", n=" << n << ", a=" << a << ", C=" << C
       << ", C0=" << c0 << "\n";
    auto row = [&os](const StageResult& s) {
        os << "  " << std::left << std::setw(22) << s.name
           << (s.ran ? (s.pass ? "PASS  " : "FAIL  ") : "SKIP  ") << s.detail << "\n";
    };
    row(unbounded);
    row(vd);
    row(ar);
    row(comparison);
    row(lower_bound);
    row(upper_bound);
    os << "  rho            mu(B(rho))     lower bound    implied C\n";
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        os << "  " << std::scientific << std::setprecision(6) << std::setw(14) << rho_grid[i]
           << " " << std::setw(14) << mu_values[i] << " " << std::setw(14) << bound_values[i]
           << " " << std::setw(14) << implied_c[i] << "\n";
    }
    if (step4)
        os << "  step4: M1=" << step4->m1 << " M2=" << step4->m2 << " M3=" << step4->m3
           << " fails beyond lambda*=" << step4->lambda_star << "\n";
    os << "  overall: " << (all_pass ? "PASS" : "FAIL") << "\n";
    return os.str();
}

std::string Theorem1Report::stage_csv() const {
    std::ostringstream os;
    os << "lambda,q_tilde,q,gap\n";
    if (verdict) {
        os << std::setprecision(17);
        for (std::size_t i = 0; i < verdict->lambda_grid.size(); ++i)
            os << verdict->lambda_grid[i] << "," << verdict->q_tilde_values[i] << ","
               << verdict->q_values[i] << ","
               << verdict->q_tilde_values[i] - verdict->q_values[i] << "\n";
    }
    return os.str();
}

std::string Theorem1Report::volume_csv() const {
    std::ostringstream os;
    os << "rho,mu,lower_bound,implied_C\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < rho_grid.size(); ++i)
        os << rho_grid[i] << "," << mu_values[i] << "," << bound_values[i] << ","
           << implied_c[i] << "\n";
    return os.str();
}

} // namespace ckn
