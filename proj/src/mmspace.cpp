#include "ckn/mmspace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ckn/quadrature.hpp"
#include "ckn/rngutil.hpp"
#include "ckn/special.hpp"

namespace ckn {

VolumeProfile VolumeProfile::power_law(double coefficient, double exponent) {
    if (!(coefficient > 0.0)) throw std::domain_error("VolumeProfile: coefficient must be > 0");
    if (!(exponent > 0.0)) throw std::domain_error("VolumeProfile: exponent must be > 0");
    VolumeProfile p;
    p.backing_ = Backing::Power;
    p.c_ = coefficient;
    p.k_ = exponent;
    return p;
}

VolumeProfile VolumeProfile::callable(std::function<double(double)> fn, double tail_exponent) {
    VolumeProfile p;
    p.backing_ = Backing::Callable;
    p.fn_ = std::move(fn);
    p.fn_tail_exp_ = tail_exponent;
    return p;
}

VolumeProfile VolumeProfile::sampled(std::vector<double> rho, std::vector<double> volume,
                                     std::optional<PowerTail> tail) {
    if (rho.size() != volume.size() || rho.size() < 2)
        throw std::domain_error("VolumeProfile: need >= 2 matching samples");
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!(rho[i] > 0.0)) throw std::domain_error("VolumeProfile: radii must be positive");
        if (!(volume[i] > 0.0)) throw std::domain_error("VolumeProfile: volumes must be positive");
        if (i > 0 && !(rho[i] > rho[i - 1]))
            throw std::domain_error("VolumeProfile: radii must be strictly increasing");
        if (i > 0 && volume[i] < volume[i - 1])
            throw std::domain_error("VolumeProfile: volumes must be non-decreasing");
    }
    VolumeProfile p;
    p.backing_ = Backing::Sampled;
    p.rho_max_ = rho.back();
    p.tail_ = tail;
    // continuity of the tail model with the last sample is the caller's
    // responsibility; only positivity is required here
    std::vector<double> x(rho.size() + 1), y(rho.size() + 1);
    x[0] = 0.0;
    y[0] = 0.0;
    std::copy(rho.begin(), rho.end(), x.begin() + 1);
    std::copy(volume.begin(), volume.end(), y.begin() + 1);
    p.spline_ = MonotoneCubic(std::move(x), std::move(y));
    return p;
}

double VolumeProfile::operator()(double rho) const {
    if (!(rho >= 0.0)) throw std::domain_error("VolumeProfile: rho must be >= 0");
    if (rho == 0.0) return 0.0;
    switch (backing_) {
        case Backing::Power:
            return c_ * std::pow(rho, k_);
        case Backing::Callable:
            return fn_(rho);
        case Backing::Sampled:
            if (rho <= rho_max_) return spline_(rho);
            if (!tail_)
                throw InsufficientData(
                    "VolumeProfile: query at rho = " + std::to_string(rho) +
                    " beyond sampled range and no tail model declared");
            return tail_->coefficient * std::pow(rho, tail_->exponent);
    }
    return 0.0;
}

bool VolumeProfile::has_tail_model() const {
    return backing_ != Backing::Sampled || tail_.has_value();
}

double VolumeProfile::tail_exponent() const {
    switch (backing_) {
        case Backing::Power:
            return k_;
        case Backing::Callable:
            return fn_tail_exp_;
        case Backing::Sampled:
            if (!tail_) throw InsufficientData("VolumeProfile: no tail model declared");
            return tail_->exponent;
    }
    return 0.0;
}

double VolumeProfile::sampled_max() const {
    return backing_ == Backing::Sampled ? rho_max_ : std::numeric_limits<double>::infinity();
}

void validate_distance_oracle(const MetricMeasureSpace& space, std::uint64_t seed, int triples) {
    if (!space.distance_oracle) return;
    const int d = space.oracle_point_dim;
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    const double tol = 1e-9;
    std::vector<double> x(d), y(d), z(d);
    for (int t = 0; t < triples; ++t) {
        for (auto& c : x) c = unif(rng);
        for (auto& c : y) c = unif(rng);
        for (auto& c : z) c = unif(rng);
        const double dxy = space.distance_oracle(x, y);
        const double dyx = space.distance_oracle(y, x);
        const double dxz = space.distance_oracle(x, z);
        const double dzy = space.distance_oracle(z, y);
        if (std::abs(dxy - dyx) > tol * std::max(1.0, dxy))
            throw std::domain_error("distance oracle: symmetry violated on a sampled pair");
        if (dxy > dxz + dzy + tol * std::max(1.0, dxy))
            throw std::domain_error("distance oracle: triangle inequality violated on a sampled triple");
    }
}

VdReport check_vd(const MetricMeasureSpace& space, int n, double c0,
                  const std::vector<std::pair<double, double>>& grid) {
    if (!(c0 >= 1.0)) throw std::domain_error("check_vd: C0 must be >= 1");
    VdReport rep;
    rep.c0_limit = c0;
    rep.c0_required = 0.0;
    for (const auto& [r, R] : grid) {
        if (!(r > 0.0 && r < R)) throw std::domain_error("check_vd: grid pairs need 0 < r < R");
        const double ratio = space.profile(R) / space.profile(r) * std::pow(r / R, n);
        if (ratio > rep.c0_required) {
            rep.c0_required = ratio;
            rep.worst_pair = {r, R};
        }
    }
    rep.pass = rep.c0_required <= c0 * (1.0 + 1e-9);
    return rep;
}

ArReport check_ar(const MetricMeasureSpace& space, int n, const std::vector<double>& radii,
                  double tol) {
    if (radii.size() < 2) throw InsufficientData("check_ar: need at least two radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] < radii[i - 1]))
            throw std::domain_error("check_ar: radius sequence must be decreasing");
    if (space.profile.is_sampled() && radii.front() > space.profile.sampled_max())
        throw InsufficientData("check_ar: radii exceed the sampled profile range");

    const double omega = unit_ball_volume(n);
    ArReport rep;
    rep.tolerance = tol;
    rep.window_lo = std::numeric_limits<double>::infinity();
    rep.window_hi = 0.0;
    double tail_min = std::numeric_limits<double>::infinity();
    const std::size_t tail_start = radii.size() / 2;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (!(r > 0.0)) throw std::domain_error("check_ar: radii must be positive");
        const double ratio = space.profile(r) / (omega * std::pow(r, n));
        rep.window_lo = std::min(rep.window_lo, ratio);
        rep.window_hi = std::max(rep.window_hi, ratio);
        if (i >= tail_start) tail_min = std::min(tail_min, ratio);
    }
    rep.liminf_estimate = tail_min;
    rep.pass = tail_min >= 1.0 - tol && tail_min <= 1.0 + tol;
    return rep;
}

MetricMeasureSpace euclidean_space(int n) {
    if (n < 1) throw std::domain_error("euclidean_space: n must be >= 1");
    MetricMeasureSpace s;
    s.name = "euclidean:" + std::to_string(n);
    s.dim_hint = n;
    s.profile = VolumeProfile::power_law(unit_ball_volume(n), n);
    s.oracle_point_dim = n;
    s.distance_oracle = [n](std::span<const double> x, std::span<const double> y) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += (y[i] - x[i]) * (y[i] - x[i]);
        return std::sqrt(acc);
    };
    s.unbounded = true;
    return s;
}

MetricMeasureSpace minkowski_space(const MinkowskiNorm& F, std::uint64_t seed) {
    const int n = F.dim();
    if (n < 1) throw std::domain_error("minkowski_space: invalid norm dimension");
    // Normalization forces mu_F(B_F(0, rho)) = omega_n rho^n exactly; the
    // Monte-Carlo scale only matters for cell sums, not for the profile.
    (void)normalized_measure(F, seed); // validates the volume is computable
    MetricMeasureSpace s;
    s.name = "minkowski:" + F.label() + ":" + std::to_string(n);
    s.dim_hint = n;
    s.profile = VolumeProfile::power_law(unit_ball_volume(n), n);
    s.oracle_point_dim = n;
    MinkowskiNorm norm = F;
    s.distance_oracle = [norm, n](std::span<const double> x, std::span<const double> y) {
        std::vector<double> d(n);
        for (int i = 0; i < n; ++i) d[i] = y[i] - x[i];
        return norm(d);
    };
    s.unbounded = true;
    return s;
}

namespace {

// Ball volume in S^{n-1} x R around a point on the sphere factor:
//   mu(B(rho)) = s_{n-2} * int_0^{min(rho, pi)} sin^{n-2}(theta) * 2 sqrt(rho^2 - theta^2) dtheta
// with s_{n-2} the area of the unit (n-2)-sphere.
double cylinder_ball_volume(int n, double rho) {
    if (rho <= 0.0) return 0.0;
    const double pi = 3.14159265358979323846;
    const double s_factor = unit_sphere_area(n - 1); // area of S^{n-2} in R^{n-1}
    const double theta_max = std::min(rho, pi);
    auto integrand = [n, rho](double theta) {
        const double under = std::max(0.0, rho * rho - theta * theta);
        return std::pow(std::sin(theta), n - 2) * 2.0 * std::sqrt(under);
    };
    const auto r = integrate_adaptive(integrand, 0.0, theta_max, 1e-11);
    return s_factor * r.value;
}

} // namespace

MetricMeasureSpace cylinder_space(int n) {
    if (n < 3) throw std::domain_error("cylinder_space: n must be >= 3");
    MetricMeasureSpace s;
    s.name = "cylinder:" + std::to_string(n);
    s.dim_hint = n;
    s.profile = VolumeProfile::callable([n](double rho) { return cylinder_ball_volume(n, rho); },
                                        1.0); // linear growth at infinity
    s.unbounded = true;
    return s;
}

MetricMeasureSpace example36_flat_space(int n, double eps) {
    MetricMeasureSpace s = minkowski_space(example36_norm(n, eps), 11);
    s.name = "example36:" + std::to_string(n) + ":" + std::to_string(eps);
    return s;
}

MetricMeasureSpace scaled_measure(const MetricMeasureSpace& space, double factor) {
    if (!(factor > 0.0)) throw std::domain_error("scaled_measure: factor must be > 0");
    MetricMeasureSpace s = space;
    s.name = space.name + "*" + std::to_string(factor);
    const VolumeProfile base = space.profile;
    const double tail_exp = base.has_tail_model() ? base.tail_exponent() : 0.0;
    s.profile = VolumeProfile::callable([base, factor](double rho) { return factor * base(rho); },
                                        tail_exp);
    return s;
}

MetricMeasureSpace builtin_space(const std::string& name) {
    std::vector<std::string> parts;
    std::stringstream ss(name);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::domain_error("builtin_space: empty name");

    const std::string& kind = parts[0];
    if (kind == "euclidean") {
        if (parts.size() != 2) throw std::domain_error("builtin_space: euclidean:<n>");
        return euclidean_space(std::stoi(parts[1]));
    }
    if (kind == "cylinder") {
        if (parts.size() != 2) throw std::domain_error("builtin_space: cylinder:<n>");
        return cylinder_space(std::stoi(parts[1]));
    }
    if (kind == "minkowski") {
        // minkowski:lq:4:3 | minkowski:linf:3 | minkowski:euclidean:3
        if (parts.size() == 4 && parts[1] == "lq")
            return minkowski_space(MinkowskiNorm::lq(std::stoi(parts[3]), std::stod(parts[2])));
        if (parts.size() == 3 && parts[1] == "linf")
            return minkowski_space(MinkowskiNorm::linf(std::stoi(parts[2])));
        if (parts.size() == 3 && parts[1] == "euclidean")
            return minkowski_space(MinkowskiNorm::euclidean(std::stoi(parts[2])));
        throw std::domain_error("builtin_space: minkowski:lq:<q>:<n> | minkowski:linf:<n>");
    }
    if (kind == "example36") {
        if (parts.size() != 3) throw std::domain_error("builtin_space: example36:<n>:<eps>");
        return example36_flat_space(std::stoi(parts[1]), std::stod(parts[2]));
    }
    throw std::domain_error("builtin_space: unknown space \"" + name + "\"");
}

VolumeProfile load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_profile: cannot open " + path);

    std::vector<double> rho, vol;
    std::optional<PowerTail> tail;
    std::string line;
    int lineno = 0;
    bool header_seen = false;

    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("load_profile: " + path + ":" + std::to_string(lineno) + ": " +
                                 msg);
    };

    while (std::getline(in, line)) {
        ++lineno;
        // strip comments and whitespace
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t\r"));
        if (!line.empty()) line.erase(line.find_last_not_of(" \t\r") + 1);
        if (line.empty()) continue;

        if (line.rfind("tail:", 0) == 0) {
            // "tail: C*rho^K"
            std::string body = line.substr(5);
            const auto star = body.find('*');
            const auto caret = body.find('^');
            if (star == std::string::npos || caret == std::string::npos ||
                body.find("rho", star) == std::string::npos)
                fail("tail directive must have the form: tail: C*rho^K");
            try {
                tail = PowerTail{std::stod(body.substr(0, star)),
                                 std::stod(body.substr(caret + 1))};
            } catch (const std::exception&) {
                fail("tail directive must have the form: tail: C*rho^K");
            }
            continue;
        }
        if (!header_seen) {
            if (line != "rho,volume") fail("expected header \"rho,volume\"");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) fail("expected \"rho,volume\" data row");
        double r = 0, v = 0;
        try {
            r = std::stod(line.substr(0, comma));
            v = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            fail("cannot parse data row");
        }
        if (!(r > 0.0)) fail("rho must be positive");
        if (!(v > 0.0)) fail("volume must be positive");
        if (!rho.empty() && !(r > rho.back())) fail("rho must be strictly increasing");
        if (!vol.empty() && v < vol.back()) fail("volume must be non-decreasing");
        rho.push_back(r);
        vol.push_back(v);
    }
    if (!header_seen) throw std::runtime_error("load_profile: " + path + ": missing header");
    if (rho.size() < 2) throw std::runtime_error("load_profile: " + path + ": need >= 2 rows");
    return VolumeProfile::sampled(std::move(rho), std::move(vol), tail);
}

MetricMeasureSpace space_from_profile(const std::string& name, int n, VolumeProfile profile,
                                      bool unbounded) {
    MetricMeasureSpace s;
    s.name = name;
    s.dim_hint = n;
    s.profile = std::move(profile);
    s.unbounded = unbounded;
    return s;
}

} // namespace ckn
