#include "ckn/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ckn/pchip.hpp"
#include "ckn/rngutil.hpp"
#include "ckn/special.hpp"

namespace ckn {
namespace {

// 7-point Gauss-Legendre on [0, 1]; exact through degree 13, which covers
// the spline numerator integrand exactly for n <= 5.
constexpr double kGLx[7] = {
    0.025446043828620737736905157976074, 0.129234407200302780068067613359605,
    0.297077424311301416546696793962091, 0.500000000000000000000000000000000,
    0.702922575688698583453303206037909, 0.870765592799697219931932386640395,
    0.974553956171379262263094842023926,
};
constexpr double kGLw[7] = {
    0.064742483084434846635305716339541, 0.139852695744638333950733885711889,
    0.190915025252559472475184887744487, 0.208979591836734693877551020408163,
    0.190915025252559472475184887744487, 0.139852695744638333950733885711889,
    0.064742483084434846635305716339541,
};

void check_profile(const RadialProfile& h) {
    if (h.grid.size() < 3 || h.grid.size() != h.values.size())
        throw std::domain_error("RadialProfile: need >= 3 matching nodes");
    if (h.grid.front() != 0.0)
        throw std::domain_error("RadialProfile: grid must start at rho = 0");
    for (std::size_t i = 1; i < h.grid.size(); ++i)
        if (!(h.grid[i] > h.grid[i - 1]))
            throw std::domain_error("RadialProfile: grid must be strictly increasing");
    for (double v : h.values)
        if (!(v >= 0.0)) throw std::domain_error("RadialProfile: values must be >= 0");
}

void check_tail(const CknParams& prm, const RadialProfile& h) {
    if (!(h.tail_exponent <= 2.0 - prm.n + 1e-12))
        throw std::domain_error("RadialProfile: tail exponent must be <= 2-n for integrability");
}

struct TailCoefs {
    double num = 0.0; // numerator tail = num * h_M^2
    double den = 0.0; // denominator tail = den * h_M^p
};

TailCoefs tail_coefs(const CknParams& prm, const RadialProfile& h) {
    const double t = h.tail_exponent;
    const double rho_m = h.grid.back();
    TailCoefs tc;
    const double num_exp = 2.0 * t + prm.n - 2.0; // < 0
    tc.num = t * t * std::pow(rho_m, prm.n - 2.0) / (-num_exp);
    const double den_exp = t * prm.p + prm.n - prm.ap; // < 0
    tc.den = std::pow(rho_m, prm.n - prm.ap) / (-den_exp);
    return tc;
}

} // namespace

RadialProfile make_radial_profile(std::vector<double> grid, std::vector<double> values,
                                  double tail_exponent) {
    RadialProfile h{std::move(grid), std::move(values), tail_exponent};
    check_profile(h);
    return h;
}

RadialProfile sample_extremal(const CknParams& prm, double lambda, const RadialGridSpec& spec) {
    if (!(lambda > 0.0)) throw std::domain_error("sample_extremal: lambda must be > 0");
    if (spec.nodes < 8) throw std::domain_error("sample_extremal: need >= 8 nodes");
    const double scale = std::pow(lambda, 1.0 / (2.0 - prm.ap));
    const double lo = spec.rho_min_factor * scale;
    const double hi = spec.rho_max_factor * scale;
    RadialProfile h;
    h.grid.reserve(spec.nodes + 1);
    h.values.reserve(spec.nodes + 1);
    h.grid.push_back(0.0);
    h.values.push_back(extremal_profile(prm, lambda, 0.0));
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < spec.nodes; ++i) {
        const double rho = std::exp(llo + (lhi - llo) * i / (spec.nodes - 1));
        h.grid.push_back(rho);
        h.values.push_back(extremal_profile(prm, lambda, rho));
    }
    h.tail_exponent = 2.0 - prm.n;
    return h;
}

double rayleigh_quotient(const CknParams& prm, const RadialProfile& h) {
    check_profile(h);
    check_tail(prm, h);
    const std::size_t m = h.grid.size();
    double vmax = 0.0;
    for (double v : h.values) vmax = std::max(vmax, v);
    if (vmax == 0.0) throw std::domain_error("rayleigh_quotient: zero profile is degenerate");

    const MonotoneCubic s(h.grid, h.values);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = h.grid[i], b = h.grid[i + 1];
        const double w = b - a;
        double cell_num = 0.0, cell_den = 0.0;
        for (int k = 0; k < 7; ++k) {
            const double rho = a + w * kGLx[k];
            const double d = s.derivative(rho);
            cell_num += kGLw[k] * d * d * std::pow(rho, prm.n - 1.0);
            cell_den += kGLw[k] * std::pow(s(rho), prm.p) * std::pow(rho, prm.n - 1.0 - prm.ap);
        }
        num += w * cell_num;
        den += w * cell_den;
    }
    const TailCoefs tc = tail_coefs(prm, h);
    const double hm = h.values.back();
    num += tc.num * hm * hm;
    den += tc.den * std::pow(hm, prm.p);
    if (!(den > 0.0)) throw std::domain_error("rayleigh_quotient: degenerate denominator");

    const double alpha_n = unit_sphere_area(prm.n);
    return std::pow(alpha_n, 0.5 - 1.0 / prm.p) * std::sqrt(num) / std::pow(den, 1.0 / prm.p);
}

ExtremalCheck verify_extremal(const CknParams& prm, double lambda, const RadialGridSpec& spec) {
    const RadialProfile h = sample_extremal(prm, lambda, spec);
    ExtremalCheck chk;
    chk.quotient = rayleigh_quotient(prm, h);
    chk.target = 1.0 / sharp_constant(prm).value;
    chk.relative_gap = std::abs(chk.quotient - chk.target) / chk.target;
    return chk;
}

namespace {

// Internal objective: h piecewise linear on the grid, GL7 cell quadrature
// for the denominator, closed-form cells for the numerator, analytic tail
// in both. Differentiable in the grid values.
struct DiscreteParts {
    double num = 0.0, den = 0.0;
};

DiscreteParts discrete_parts(const CknParams& prm, const RadialProfile& h) {
    const std::size_t m = h.grid.size();
    DiscreteParts dp;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = h.grid[i], b = h.grid[i + 1];
        const double w = b - a;
        const double slope = (h.values[i + 1] - h.values[i]) / w;
        dp.num += slope * slope * (std::pow(b, prm.n) - std::pow(a, prm.n)) / prm.n;
        double cell = 0.0;
        for (int k = 0; k < 7; ++k) {
            const double rho = a + w * kGLx[k];
            const double v = h.values[i] * (1.0 - kGLx[k]) + h.values[i + 1] * kGLx[k];
            cell += kGLw[k] * std::pow(v, prm.p) * std::pow(rho, prm.n - 1.0 - prm.ap);
        }
        dp.den += w * cell;
    }
    const TailCoefs tc = tail_coefs(prm, h);
    const double hm = h.values.back();
    dp.num += tc.num * hm * hm;
    dp.den += tc.den * std::pow(hm, prm.p);
    return dp;
}

} // namespace

double discrete_quotient(const CknParams& prm, const RadialProfile& h) {
    check_profile(h);
    check_tail(prm, h);
    const DiscreteParts dp = discrete_parts(prm, h);
    if (!(dp.den > 0.0)) throw std::domain_error("discrete_quotient: degenerate denominator");
    const double alpha_n = unit_sphere_area(prm.n);
    return std::pow(alpha_n, 0.5 - 1.0 / prm.p) * std::sqrt(dp.num) / std::pow(dp.den, 1.0 / prm.p);
}

std::vector<double> discrete_quotient_gradient(const CknParams& prm, const RadialProfile& h) {
    check_profile(h);
    check_tail(prm, h);
    const std::size_t m = h.grid.size();
    const DiscreteParts dp = discrete_parts(prm, h);
    if (!(dp.den > 0.0))
        throw std::domain_error("discrete_quotient_gradient: degenerate denominator");

    std::vector<double> dnum(m, 0.0), dden(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = h.grid[i], b = h.grid[i + 1];
        const double w = b - a;
        const double slope = (h.values[i + 1] - h.values[i]) / w;
        const double poly = (std::pow(b, prm.n) - std::pow(a, prm.n)) / prm.n;
        const double dslope = 2.0 * slope * poly / w;
        dnum[i] -= dslope;
        dnum[i + 1] += dslope;
        for (int k = 0; k < 7; ++k) {
            const double rho = a + w * kGLx[k];
            const double v = h.values[i] * (1.0 - kGLx[k]) + h.values[i + 1] * kGLx[k];
            if (v <= 0.0) continue;
            const double base = w * kGLw[k] * prm.p * std::pow(v, prm.p - 1.0) *
                                std::pow(rho, prm.n - 1.0 - prm.ap);
            dden[i] += base * (1.0 - kGLx[k]);
            dden[i + 1] += base * kGLx[k];
        }
    }
    const TailCoefs tc = tail_coefs(prm, h);
    const double hm = h.values.back();
    dnum[m - 1] += 2.0 * tc.num * hm;
    if (hm > 0.0) dden[m - 1] += tc.den * prm.p * std::pow(hm, prm.p - 1.0);

    // R = alpha^(1/2-1/p) num^{1/2} den^{-1/p}
    const double alpha_n = unit_sphere_area(prm.n);
    const double R =
        std::pow(alpha_n, 0.5 - 1.0 / prm.p) * std::sqrt(dp.num) / std::pow(dp.den, 1.0 / prm.p);
    std::vector<double> grad(m);
    for (std::size_t j = 0; j < m; ++j)
        grad[j] = R * (0.5 * dnum[j] / dp.num - dden[j] / (prm.p * dp.den));
    return grad;
}

namespace {

// Pool-adjacent-violators projection onto the non-increasing cone.
void project_non_increasing(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> level(n), weight(n);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        level[blocks] = v[i];
        weight[blocks] = 1.0;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] < level[blocks - 1]) {
            const double w = weight[blocks - 2] + weight[blocks - 1];
            const double merged =
                (level[blocks - 2] * weight[blocks - 2] + level[blocks - 1] * weight[blocks - 1]) /
                w;
            level[blocks - 2] = merged;
            weight[blocks - 2] = w;
            --blocks;
        }
    }
    std::size_t idx = 0;
    for (std::size_t b = 0; b < blocks; ++b)
        for (int k = 0; k < static_cast<int>(weight[b] + 0.5); ++k) v[idx++] = level[b];
}

void normalize_denominator(const CknParams& prm, RadialProfile& h) {
    const DiscreteParts dp = discrete_parts(prm, h);
    if (!(dp.den > 0.0)) return;
    const double c = std::pow(dp.den, -1.0 / prm.p);
    for (auto& v : h.values) v *= c;
}

} // namespace

MinimizeResult minimize_quotient(const CknParams& prm, const RadialProfile& init,
                                 std::uint64_t /*seed*/, int iters,
                                 const MinimizeOptions& opts) {
    RadialProfile h = init;
    check_profile(h);
    check_tail(prm, h);
    for (auto& v : h.values) v = std::max(0.0, v);
    project_non_increasing(h.values);
    normalize_denominator(prm, h);

    MinimizeResult res;
    double R = discrete_quotient(prm, h);
    res.trace.push_back({0, R, 0.0});

    double step = 1.0;
    int stagnant = 0;
    const int budget = std::min(iters, opts.max_iters);
    int it = 0;
    for (; it < budget; ++it) {
        std::vector<double> grad = discrete_quotient_gradient(prm, h);
        double gnorm = 0.0;
        for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
        if (gnorm * (1.0 + std::abs(h.values.front())) < 1e-14 * std::max(1.0, R)) break;

        bool accepted = false;
        for (double s = step; s > 1e-18; s *= 0.5) {
            RadialProfile trial = h;
            for (std::size_t j = 0; j < trial.values.size(); ++j)
                trial.values[j] = std::max(0.0, trial.values[j] - s * grad[j]);
            project_non_increasing(trial.values);
            normalize_denominator(prm, trial);
            double Rt;
            try {
                Rt = discrete_quotient(prm, trial);
            } catch (const std::domain_error&) {
                continue; // line search stepped to a degenerate profile
            }
            if (!std::isfinite(Rt))
                throw std::runtime_error("minimize_quotient: quotient diverged during line search");
            if (Rt < R) {
                const double improvement = (R - Rt) / R;
                h = std::move(trial);
                R = Rt;
                step = std::min(1e3, s * 1.5);
                accepted = true;
                res.trace.push_back({it + 1, R, s});
                stagnant = improvement < opts.stop_tol ? stagnant + 1 : 0;
                break;
            }
        }
        if (!accepted) break;
        if (stagnant >= 3) break;
    }

    res.iterations = it;
    res.discrete_quotient = R;
    res.profile = h;
    res.quotient = rayleigh_quotient(prm, h);
    return res;
}

RadialProfile initial_profile(const CknParams& prm, const std::string& kind, std::uint64_t seed,
                              const RadialGridSpec& spec) {
    if (kind.rfind("extremal:", 0) == 0)
        return sample_extremal(prm, std::stod(kind.substr(9)), spec);

    const double scale = 1.0;
    const double lo = spec.rho_min_factor * scale, hi = spec.rho_max_factor * scale;
    std::vector<double> grid{0.0};
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < spec.nodes; ++i)
        grid.push_back(std::exp(llo + (lhi - llo) * i / (spec.nodes - 1)));

    std::vector<double> vals(grid.size());
    if (kind == "gauss") {
        for (std::size_t i = 0; i < grid.size(); ++i)
            vals[i] = std::exp(-grid[i] * grid[i]);
    } else if (kind == "plateau") {
        for (std::size_t i = 0; i < grid.size(); ++i)
            vals[i] = 1.0 / (1.0 + std::pow(grid[i] / 2.0, 16.0));
    } else if (kind == "random") {
        auto rng = make_rng(seed);
        std::uniform_real_distribution<double> width(0.3, 4.0);
        std::uniform_real_distribution<double> power(1.2, 4.0);
        std::uniform_real_distribution<double> amp(0.2, 1.0);
        const double w1 = width(rng), w2 = width(rng), w3 = width(rng);
        const double k1 = power(rng), k2 = power(rng), k3 = power(rng);
        const double a2 = amp(rng), a3 = amp(rng);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double r = grid[i];
            vals[i] = std::exp(-std::pow(r / w1, k1)) + a2 * std::exp(-std::pow(r / w2, k2)) +
                      a3 * std::exp(-std::pow(r / w3, k3));
        }
        project_non_increasing(vals);
    } else {
        throw std::domain_error("initial_profile: unknown kind \"" + kind + "\"");
    }
    RadialProfile h{std::move(grid), std::move(vals), 2.0 - prm.n};
    return h;
}

double extremal_fit_distance(const CknParams& prm, const RadialProfile& h) {
    check_profile(h);
    // golden-section search on log lambda for the best c*h_lambda fit
    auto distance = [&](double lambda) {
        double num = 0.0, hh = 0.0, ee = 0.0;
        for (std::size_t i = 0; i < h.grid.size(); ++i) {
            const double e = extremal_profile(prm, lambda, h.grid[i]);
            num += h.values[i] * e;
            hh += h.values[i] * h.values[i];
            ee += e * e;
        }
        const double c = num / ee; // optimal linear coefficient
        double d2 = 0.0;
        for (std::size_t i = 0; i < h.grid.size(); ++i) {
            const double r = h.values[i] - c * extremal_profile(prm, lambda, h.grid[i]);
            d2 += r * r;
        }
        return std::sqrt(d2 / hh);
    };
    double lo = std::log(1e-4), hi = std::log(1e4);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = distance(std::exp(x1)), f2 = distance(std::exp(x2));
    for (int it = 0; it < 120; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = distance(std::exp(x1));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = distance(std::exp(x2));
        }
    }
    return std::min(f1, f2);
}

std::string MinimizeResult::trace_csv() const {
    std::ostringstream os;
    os << "iter,quotient,step\n";
    os.precision(17);
    for (const auto& row : trace) os << row.iter << "," << row.quotient << "," << row.step << "\n";
    return os.str();
}

std::string profile_to_csv(const RadialProfile& h) {
    std::ostringstream os;
    os << "tail_exponent: " << h.tail_exponent << "\n";
    os << "rho,value\n";
    os.precision(17);
    for (std::size_t i = 0; i < h.grid.size(); ++i) os << h.grid[i] << "," << h.values[i] << "\n";
    return os.str();
}

RadialProfile profile_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    RadialProfile h;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.rfind("tail_exponent:", 0) == 0) {
            h.tail_exponent = std::stod(line.substr(14));
            continue;
        }
        if (!header_seen) {
            if (line != "rho,value")
                throw std::runtime_error("profile_from_csv: expected header at line " +
                                         std::to_string(lineno));
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error("profile_from_csv: bad row at line " + std::to_string(lineno));
        h.grid.push_back(std::stod(line.substr(0, comma)));
        h.values.push_back(std::stod(line.substr(comma + 1)));
    }
    check_profile(h);
    return h;
}

} // namespace ckn
