#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ckn/minkowski.hpp"
#include "ckn/pchip.hpp"

namespace ckn {

struct PowerTail {
    double coefficient = 0.0;
    double exponent = 0.0;
};

/// Radial volume profile rho -> mu(B(x0, rho)) at the designated base
/// point. Three backings:
///   - exact power law c rho^k (closed-form spaces),
///   - a callable (profiles defined by their own 1D quadrature),
///   - monotone-cubic interpolation of samples, with an optional power
///     tail beyond the last sample and (0,0) prepended below the first.
/// Improper integrals against a sampled profile refuse to run without an
/// explicit tail model; extrapolation is never silent.
class VolumeProfile {
public:
    static VolumeProfile power_law(double coefficient, double exponent);
    static VolumeProfile callable(std::function<double(double)> fn, double tail_exponent);
    static VolumeProfile sampled(std::vector<double> rho, std::vector<double> volume,
                                 std::optional<PowerTail> tail = std::nullopt);

    /// mu(B(x0, rho)); throws InsufficientData when rho is beyond the
    /// samples and no tail model exists.
    double operator()(double rho) const;

    bool has_tail_model() const;
    /// Power-law exponent governing the profile at infinity.
    double tail_exponent() const;
    /// Radius range on which the profile is defined without the tail
    /// model (0, inf for closed forms).
    double sampled_max() const;

    bool is_sampled() const { return backing_ == Backing::Sampled; }

private:
    enum class Backing { Power, Callable, Sampled } backing_ = Backing::Power;
    double c_ = 0.0, k_ = 0.0;
    std::function<double(double)> fn_;
    double fn_tail_exp_ = 0.0;
    MonotoneCubic spline_;
    double rho_max_ = 0.0;
    std::optional<PowerTail> tail_;
};

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A metric measure space presented through its base point: a radial
/// volume profile, an optional distance oracle (validated on sampled
/// triples at construction), and an unboundedness declaration. Properness
/// cannot be verified from a profile; it is declared, not checked.
struct MetricMeasureSpace {
    std::string name;
    int dim_hint = 0;
    VolumeProfile profile;
    std::function<double(std::span<const double>, std::span<const double>)> distance_oracle;
    int oracle_point_dim = 0;
    bool unbounded = true;
};

/// Validates symmetry and the triangle inequality of the oracle on seeded
/// random triples (tolerance 1e-9); throws on violation.
void validate_distance_oracle(const MetricMeasureSpace& space, std::uint64_t seed = 99,
                              int triples = 200);

struct VdReport {
    double c0_required = 0.0; // max over the grid of [mu(R)/mu(r)] (r/R)^n
    double c0_limit = 0.0;
    std::pair<double, double> worst_pair{0.0, 0.0};
    bool pass = false;
};

/// (VD)-type audit: max over (r, R) pairs of [mu(B(R))/mu(B(r))](r/R)^n,
/// passing iff <= C0 (1 + 1e-9).
VdReport check_vd(const MetricMeasureSpace& space, int n, double c0,
                  const std::vector<std::pair<double, double>>& grid);

struct ArReport {
    double liminf_estimate = 0.0; // min over the tail of the sequence
    double window_lo = 0.0;       // Ahlfors window over the whole sequence
    double window_hi = 0.0;
    double tolerance = 1e-3;
    bool pass = false;
};

/// (AR)-type audit: estimates liminf_{r->0} mu(B(r)) / (omega_n r^n) by
/// the minimum over the tail (last half) of a decreasing radius sequence;
/// passes iff within [1 - tol, 1 + tol].
ArReport check_ar(const MetricMeasureSpace& space, int n, const std::vector<double>& radii,
                  double tol = 1e-3);

/// Built-in spaces:
///   euclidean(n)            exact profile omega_n rho^n
///   minkowski(F)            normalized measure, exact profile omega_n rho^n
///   cylinder(n)             product of the unit (n-1)-sphere with the line;
///                           profile by 1D quadrature over the sphere factor
///   example36_flat(n, eps)  the flat-metric norm F_eps; exact profile
///                           omega_n rho^n under its normalized measure
MetricMeasureSpace euclidean_space(int n);
MetricMeasureSpace minkowski_space(const MinkowskiNorm& F, std::uint64_t seed = 7);
MetricMeasureSpace cylinder_space(int n);
MetricMeasureSpace example36_flat_space(int n, double eps);

/// Name-based factory for the CLI: "euclidean:3", "cylinder:3",
/// "minkowski:lq:4:3", "example36:3:0.1".
MetricMeasureSpace builtin_space(const std::string& name);

/// Same space with the measure multiplied by factor > 0.
MetricMeasureSpace scaled_measure(const MetricMeasureSpace& space, double factor);

/// CSV profile loader. Format: header "rho,volume", strictly increasing
/// rho, positive non-decreasing volume; an optional directive line
/// "tail: C*rho^K" declares the tail model. Parse errors carry the line
/// number.
VolumeProfile load_profile(const std::string& path);

MetricMeasureSpace space_from_profile(const std::string& name, int n, VolumeProfile profile,
                                      bool unbounded);

} // namespace ckn
