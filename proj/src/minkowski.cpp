#include "ckn/minkowski.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ckn/rngutil.hpp"
#include "ckn/special.hpp"

namespace ckn {
namespace {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

// Lower Cholesky factor of a symmetric positive definite matrix.
Vec cholesky(const Vec& A, int n) {
    Vec L(n * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = A[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (!(s > 0.0))
                    throw std::domain_error("quadratic norm: matrix is not positive definite");
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    return L;
}

// Solve L y = b, then L^T x = y.
Vec cholesky_solve(const Vec& L, int n, std::span<const double> b) {
    Vec y(n), x(n);
    for (int i = 0; i < n; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= L[i * n + k] * y[k];
        y[i] = s / L[i * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= L[k * n + i] * x[k];
        x[i] = s / L[i * n + i];
    }
    return x;
}

Vec random_unit_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec v(n);
    double r = 0.0;
    while (r == 0.0) {
        for (auto& c : v) c = gauss(rng);
        r = norm2(v);
    }
    for (auto& c : v) c /= r;
    return v;
}

void check_dim(const MinkowskiNorm& F, std::span<const double> v, const char* who) {
    if (static_cast<int>(v.size()) != F.dim())
        throw std::domain_error(std::string(who) + ": vector dimension " +
                                std::to_string(v.size()) + " does not match norm dimension " +
                                std::to_string(F.dim()));
}

// Maximize (or minimize) g(u) = <alpha,u>/F(u) over the Euclidean unit
// sphere by projected gradient ascent with a numeric gradient of F.
struct AscentResult {
    double best = -std::numeric_limits<double>::infinity();
    Vec arg;
};

template <class Objective>
AscentResult sphere_ascent(const Objective& g, Vec u, int iters = 200) {
    const int n = static_cast<int>(u.size());
    double r = norm2(u);
    for (auto& c : u) c /= r;
    double val = g(u);
    double step = 0.5;
    const double fd = 1e-6;
    Vec grad(n), trial(n);
    for (int it = 0; it < iters; ++it) {
        // central-difference gradient, projected onto the tangent plane
        for (int i = 0; i < n; ++i) {
            Vec up = u, dn = u;
            up[i] += fd;
            dn[i] -= fd;
            grad[i] = (g(up) - g(dn)) / (2.0 * fd);
        }
        const double radial = dot(grad, u);
        for (int i = 0; i < n; ++i) grad[i] -= radial * u[i];
        if (norm2(grad) < 1e-14) break;
        bool accepted = false;
        for (double s = step; s > 1e-14; s *= 0.5) {
            for (int i = 0; i < n; ++i) trial[i] = u[i] + s * grad[i];
            const double tr = norm2(trial);
            for (auto& c : trial) c /= tr;
            const double tv = g(trial);
            if (tv > val) {
                const bool converged = (tv - val) < 1e-13 * std::max(1.0, std::abs(tv));
                u = trial;
                val = tv;
                step = std::min(1.0, s * 2.0);
                accepted = true;
                if (converged) return {val, u};
                break;
            }
        }
        if (!accepted) break;
    }
    return {val, u};
}

} // namespace

double MinkowskiNorm::operator()(std::span<const double> v) const {
    check_dim(*this, v, "norm_eval");
    switch (kind_) {
        case Kind::Euclidean:
            return norm2(v);
        case Kind::Lq: {
            double s = 0.0;
            for (double c : v) s += std::pow(std::abs(c), q_);
            return std::pow(s, 1.0 / q_);
        }
        case Kind::Linf: {
            double m = 0.0;
            for (double c : v) m = std::max(m, std::abs(c));
            return m;
        }
        case Kind::Quadratic: {
            // F(v) = |L^T v|_2
            const int n = dim_;
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                double t = 0.0;
                for (int i = j; i < n; ++i) t += chol_[i * n + j] * v[i];
                s += t * t;
            }
            return std::sqrt(s);
        }
        case Kind::Custom:
            return eval_(v);
    }
    return 0.0;
}

double norm_eval(const MinkowskiNorm& F, std::span<const double> v) { return F(v); }

MinkowskiNorm MinkowskiNorm::euclidean(int dim) {
    if (dim < 1) throw std::domain_error("euclidean norm: dim must be >= 1");
    MinkowskiNorm f;
    f.dim_ = dim;
    f.kind_ = Kind::Euclidean;
    f.smooth_ = true;
    f.label_ = "euclidean";
    return f;
}

MinkowskiNorm MinkowskiNorm::lq(int dim, double q) {
    if (dim < 1) throw std::domain_error("lq norm: dim must be >= 1");
    if (!(q >= 1.0) || std::isinf(q))
        throw std::domain_error("lq norm: exponent must satisfy 1 <= q < inf");
    MinkowskiNorm f;
    f.dim_ = dim;
    f.kind_ = Kind::Lq;
    f.q_ = q;
    // q = 1 has corners; 1 < q < inf is C^1 away from 0, which is what the
    // symmetrization gradient checks need.
    f.smooth_ = q > 1.0;
    std::ostringstream os;
    os << "lq:" << q;
    f.label_ = os.str();
    return f;
}

MinkowskiNorm MinkowskiNorm::linf(int dim) {
    if (dim < 1) throw std::domain_error("linf norm: dim must be >= 1");
    MinkowskiNorm f;
    f.dim_ = dim;
    f.kind_ = Kind::Linf;
    f.q_ = std::numeric_limits<double>::infinity();
    f.smooth_ = false;
    f.label_ = "linf";
    return f;
}

MinkowskiNorm MinkowskiNorm::quadratic(std::vector<double> A, int dim) {
    if (dim < 1 || static_cast<int>(A.size()) != dim * dim)
        throw std::domain_error("quadratic norm: matrix must be dim x dim");
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < i; ++j)
            if (std::abs(A[i * dim + j] - A[j * dim + i]) >
                1e-12 * std::max(1.0, std::abs(A[i * dim + j])))
                throw std::domain_error("quadratic norm: matrix must be symmetric");
    MinkowskiNorm f;
    f.dim_ = dim;
    f.kind_ = Kind::Quadratic;
    f.mat_ = std::move(A);
    f.chol_ = cholesky(f.mat_, dim);
    f.det_ = 1.0;
    for (int i = 0; i < dim; ++i) f.det_ *= f.chol_[i * dim + i] * f.chol_[i * dim + i];
    f.smooth_ = true;
    f.label_ = "quadratic";
    return f;
}

MinkowskiNorm MinkowskiNorm::custom(int dim, std::function<double(std::span<const double>)> eval,
                                    bool smooth, std::uint64_t validation_seed,
                                    std::string label) {
    if (dim < 1) throw std::domain_error("custom norm: dim must be >= 1");
    if (!eval) throw std::domain_error("custom norm: evaluator is empty");

    // Sampled validation: positivity, absolute homogeneity and midpoint
    // convexity. Violations invalidate every downstream inequality check,
    // so reject here.
    auto rng = make_rng(validation_seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> tdist(0.1, 3.0);
    const double tol = 1e-8;
    Vec zero(dim, 0.0);
    if (std::abs(eval(zero)) > tol) throw std::domain_error("custom norm: F(0) != 0");
    for (int s = 0; s < 1000; ++s) {
        Vec v(dim), w(dim);
        for (auto& c : v) c = unif(rng);
        for (auto& c : w) c = unif(rng);
        if (norm2(v) < 1e-3) continue;
        const double fv = eval(v), fw = eval(w);
        if (!(fv > 0.0))
            throw std::domain_error("custom norm: F(v) <= 0 at a sampled nonzero point");
        const double t = tdist(rng) * (s % 2 == 0 ? 1.0 : -1.0);
        Vec tv(dim);
        for (int i = 0; i < dim; ++i) tv[i] = t * v[i];
        if (std::abs(eval(tv) - std::abs(t) * fv) > tol * std::max(1.0, std::abs(t) * fv))
            throw std::domain_error("custom norm: sampled homogeneity check failed");
        Vec mid(dim);
        for (int i = 0; i < dim; ++i) mid[i] = 0.5 * (v[i] + w[i]);
        if (eval(mid) > 0.5 * (fv + fw) + tol * std::max(1.0, fv + fw))
            throw std::domain_error("custom norm: sampled convexity check failed");
    }

    MinkowskiNorm f;
    f.dim_ = dim;
    f.kind_ = Kind::Custom;
    f.eval_ = std::move(eval);
    f.smooth_ = smooth;
    f.label_ = std::move(label);
    return f;
}

double dual_norm_eval(const MinkowskiNorm& F, std::span<const double> alpha, std::uint64_t seed) {
    check_dim(F, alpha, "dual_norm_eval");
    const int n = F.dim();
    const double an = norm2(alpha);
    if (an == 0.0) return 0.0;

    switch (F.kind()) {
        case MinkowskiNorm::Kind::Euclidean:
            return an;
        case MinkowskiNorm::Kind::Lq: {
            const double q = F.lq_exponent();
            if (q == 1.0) {
                double m = 0.0;
                for (double c : alpha) m = std::max(m, std::abs(c));
                return m;
            }
            const double qc = q / (q - 1.0);
            double s = 0.0;
            for (double c : alpha) s += std::pow(std::abs(c), qc);
            return std::pow(s, 1.0 / qc);
        }
        case MinkowskiNorm::Kind::Linf: {
            double s = 0.0;
            for (double c : alpha) s += std::abs(c);
            return s;
        }
        case MinkowskiNorm::Kind::Quadratic: {
            const Vec x = cholesky_solve(F.chol_, n, alpha);
            return std::sqrt(std::max(0.0, dot(x, alpha)));
        }
        case MinkowskiNorm::Kind::Custom:
            break;
    }

    // Multi-start projected ascent of <alpha,u>/F(u) over the unit sphere.
    auto objective = [&](const Vec& u) { return dot(alpha, u) / F(u); };
    auto rng = make_rng(seed);
    double best = -std::numeric_limits<double>::infinity();

    std::vector<Vec> starts;
    Vec a0(alpha.begin(), alpha.end());
    for (auto& c : a0) c /= an;
    starts.push_back(a0);
    for (int i = 0; i < n && static_cast<int>(starts.size()) < 8; ++i) {
        Vec e(n, 0.0);
        e[i] = alpha[i] >= 0 ? 1.0 : -1.0;
        starts.push_back(e);
    }
    while (starts.size() < 32) starts.push_back(random_unit_vector(rng, n));

    for (auto& s : starts) best = std::max(best, sphere_ascent(objective, s).best);

    // Certification: the ascent result must dominate a plain sample sweep.
    double sample_best = -std::numeric_limits<double>::infinity();
    Vec sample_arg;
    for (int i = 0; i < 10000; ++i) {
        Vec u = random_unit_vector(rng, n);
        const double v = objective(u);
        if (v > sample_best) {
            sample_best = v;
            sample_arg = u;
        }
    }
    if (sample_best > best) best = std::max(best, sphere_ascent(objective, sample_arg).best);
    if (!std::isfinite(best))
        throw std::runtime_error("dual_norm_eval: ascent failed; best lower bound " +
                                 std::to_string(sample_best));
    return std::max(best, sample_best);
}

MinkowskiNorm dual_norm(const MinkowskiNorm& F) {
    switch (F.kind()) {
        case MinkowskiNorm::Kind::Euclidean:
            return MinkowskiNorm::euclidean(F.dim());
        case MinkowskiNorm::Kind::Lq: {
            const double q = F.lq_exponent();
            if (q == 1.0) return MinkowskiNorm::linf(F.dim());
            return MinkowskiNorm::lq(F.dim(), q / (q - 1.0));
        }
        case MinkowskiNorm::Kind::Linf:
            return MinkowskiNorm::lq(F.dim(), 1.0);
        case MinkowskiNorm::Kind::Quadratic: {
            // inverse form via Cholesky
            const int n = F.dim();
            const Vec L = cholesky(F.matrix(), n);
            Vec inv(n * n);
            for (int j = 0; j < n; ++j) {
                Vec e(n, 0.0);
                e[j] = 1.0;
                Vec col = cholesky_solve(L, n, e);
                for (int i = 0; i < n; ++i) inv[i * n + j] = col[i];
            }
            // symmetrize against round-off
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < i; ++j)
                    inv[i * n + j] = inv[j * n + i] = 0.5 * (inv[i * n + j] + inv[j * n + i]);
            return MinkowskiNorm::quadratic(std::move(inv), n);
        }
        case MinkowskiNorm::Kind::Custom:
            break;
    }
    // generic polar transform as a black-box norm
    MinkowskiNorm base = F;
    auto eval = [base](std::span<const double> alpha) { return dual_norm_eval(base, alpha); };
    return MinkowskiNorm::custom(F.dim(), eval, F.smooth(), 99, F.label() + "*");
}

VolumeEstimate unit_ball_volume_of(const MinkowskiNorm& F, std::uint64_t seed, long samples,
                                   int strata) {
    const int n = F.dim();
    switch (F.kind()) {
        case MinkowskiNorm::Kind::Euclidean:
            return {unit_ball_volume(n), 0.0};
        case MinkowskiNorm::Kind::Quadratic:
            return {unit_ball_volume(n) / std::sqrt(F.det()), 0.0};
        case MinkowskiNorm::Kind::Lq: {
            // Dirichlet: vol = (2 Gamma(1 + 1/q))^n / Gamma(1 + n/q)
            const double q = F.lq_exponent();
            const double g = 2.0 * gamma_fn(1.0 + 1.0 / q);
            return {std::pow(g, n) / gamma_fn(1.0 + double(n) / q), 0.0};
        }
        case MinkowskiNorm::Kind::Linf:
            return {std::pow(2.0, n), 0.0};
        case MinkowskiNorm::Kind::Custom:
            break;
    }

    if (n > 10)
        throw std::domain_error("unit_ball_volume_of: Monte Carlo path supports dim <= 10");

    // Bounding box half-width: 1/min_{|u|=1} F(u), estimated by sampling
    // plus a descent polish, padded 2%.
    auto rng = make_rng(seed, 0xb0);
    double fmin = std::numeric_limits<double>::infinity();
    Vec argmin;
    for (int i = 0; i < 4096; ++i) {
        Vec u = random_unit_vector(rng, n);
        const double v = F(u);
        if (v < fmin) {
            fmin = v;
            argmin = u;
        }
    }
    for (int i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1.0;
        const double v = F(e);
        if (v < fmin) {
            fmin = v;
            argmin = e;
        }
    }
    auto neg = [&](const Vec& u) { return -F(u); };
    fmin = std::min(fmin, -sphere_ascent(neg, argmin).best);
    const double R = 1.02 / fmin;

    // Stratified MC along axis 0, per-stratum derived seeds.
    const long per = std::max<long>(1, samples / strata);
    double mean_sum = 0.0, var_sum = 0.0;
    for (int s = 0; s < strata; ++s) {
        auto srng = make_rng(seed, 0x517a + s);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double x0_lo = -R + 2.0 * R * s / strata;
        const double x0_hi = -R + 2.0 * R * (s + 1) / strata;
        long hits = 0;
        Vec pnt(n);
        for (long i = 0; i < per; ++i) {
            pnt[0] = x0_lo + (x0_hi - x0_lo) * unif(srng);
            for (int d = 1; d < n; ++d) pnt[d] = -R + 2.0 * R * unif(srng);
            if (F(pnt) < 1.0) ++hits;
        }
        const double p = double(hits) / double(per);
        mean_sum += p;
        var_sum += p * (1.0 - p) / double(per);
    }
    const double box = std::pow(2.0 * R, n);
    const double value = box * mean_sum / strata;
    const double se = box * std::sqrt(var_sum) / strata;
    return {value, se};
}

NormalizedMeasure normalized_measure(const MinkowskiNorm& F, std::uint64_t seed) {
    const VolumeEstimate v = unit_ball_volume_of(F, seed);
    if (!(v.value > 0.0)) throw std::runtime_error("normalized_measure: nonpositive ball volume");
    const double omega = unit_ball_volume(F.dim());
    const double scale = omega / v.value;
    return {F, scale, scale * v.std_error / v.value};
}

MinkowskiNorm example36_norm(int dim, double eps) {
    if (dim < 2) throw std::domain_error("example36 norm: dim must be >= 2");
    if (!(eps >= 0.0)) throw std::domain_error("example36 norm: eps must be >= 0");
    auto eval = [dim, eps](std::span<const double> x) {
        double v2 = 0.0;
        for (int i = 0; i + 1 < dim; ++i) v2 += x[i] * x[i];
        const double w = x[dim - 1];
        const double w2 = w * w;
        return std::sqrt(v2 + w2 + eps * std::sqrt(v2 * v2 + w2 * w2));
    };
    std::ostringstream os;
    os << "example36:" << eps;
    return MinkowskiNorm::custom(dim, eval, true, 4242, os.str());
}

MinkowskiNorm parse_norm_spec(const std::string& text, int dim_hint) {
    auto need_dim = [&](int d) {
        if (d < 1)
            throw std::domain_error("norm spec: dimension missing (supply \"dim\" or a hint)");
        return d;
    };

    std::string t = text;
    // trim
    t.erase(0, t.find_first_not_of(" \t\n\r"));
    if (!t.empty()) t.erase(t.find_last_not_of(" \t\n\r") + 1);

    if (!t.empty() && t.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(t);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(std::string("norm spec: JSON parse error: ") + e.what());
        }
        const std::string kind = j.value("kind", "");
        const int dim = j.value("dim", dim_hint);
        if (kind == "euclidean") return MinkowskiNorm::euclidean(need_dim(dim));
        if (kind == "lq") {
            if (!j.contains("q")) throw std::domain_error("norm spec: lq requires \"q\"");
            return MinkowskiNorm::lq(need_dim(dim), j["q"].get<double>());
        }
        if (kind == "linf") return MinkowskiNorm::linf(need_dim(dim));
        if (kind == "quadratic") {
            if (!j.contains("matrix") || !j["matrix"].is_array())
                throw std::domain_error("norm spec: quadratic requires \"matrix\"");
            const auto& rows = j["matrix"];
            const int n = static_cast<int>(rows.size());
            Vec A;
            A.reserve(n * n);
            for (const auto& row : rows) {
                if (static_cast<int>(row.size()) != n)
                    throw std::domain_error("norm spec: quadratic matrix must be square");
                for (const auto& c : row) A.push_back(c.get<double>());
            }
            return MinkowskiNorm::quadratic(std::move(A), n);
        }
        if (kind == "example36")
            return example36_norm(need_dim(dim), j.value("eps", 0.1));
        throw std::domain_error("norm spec: unknown kind \"" + kind + "\"");
    }

    // shorthand
    if (t == "euclidean" || t == "l2" || t == "lq:2")
        return MinkowskiNorm::euclidean(need_dim(dim_hint));
    if (t == "linf") return MinkowskiNorm::linf(need_dim(dim_hint));
    if (t.rfind("lq:", 0) == 0) return MinkowskiNorm::lq(need_dim(dim_hint), std::stod(t.substr(3)));
    if (t.rfind("example36:", 0) == 0)
        return example36_norm(need_dim(dim_hint), std::stod(t.substr(10)));
    throw std::domain_error("norm spec: cannot parse \"" + text + "\"");
}

} // namespace ckn
