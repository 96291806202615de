#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ckn {

/// A Minkowski norm on R^n. Closed-form kinds carry exact evaluation,
/// duality and ball volumes; custom (black-box) kinds get validated by
/// sampling at construction and served by generic numerics.
///
/// The smooth flag tracks admissibility for the symmetrization energy
/// inequality: l^1 and l^inf are served for norm/dual/volume queries but
/// are excluded there.
class MinkowskiNorm {
public:
    enum class Kind { Euclidean, Lq, Linf, Quadratic, Custom };

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }
    double lq_exponent() const { return q_; }
    bool reversible() const { return reversible_; }
    bool smooth() const { return smooth_; }
    const std::string& label() const { return label_; }

    /// F(v); exact closed form except for custom evaluators.
    double operator()(std::span<const double> v) const;
    double operator()(const std::vector<double>& v) const { return (*this)(std::span(v)); }

    /// Quadratic-kind accessors (defined for Kind::Quadratic only).
    const std::vector<double>& matrix() const { return mat_; }
    double det() const { return det_; }

    static MinkowskiNorm euclidean(int dim);
    static MinkowskiNorm lq(int dim, double q);
    static MinkowskiNorm linf(int dim);
    /// A: symmetric positive definite, row-major dim*dim; F(v) = sqrt(v^T A v).
    static MinkowskiNorm quadratic(std::vector<double> A, int dim);
    /// Black-box evaluator; sampled homogeneity/convexity checks (1e3
    /// samples, tol 1e-8) run at construction and reject silent non-norms.
    static MinkowskiNorm custom(int dim, std::function<double(std::span<const double>)> eval,
                                bool smooth, std::uint64_t validation_seed = 1234,
                                std::string label = "custom");

private:
    MinkowskiNorm() = default;
    int dim_ = 0;
    Kind kind_ = Kind::Euclidean;
    double q_ = 2.0;
    bool reversible_ = true;
    bool smooth_ = true;
    std::string label_;
    std::vector<double> mat_;  // quadratic form, row-major
    std::vector<double> chol_; // lower Cholesky factor of mat_
    double det_ = 1.0;
    std::function<double(std::span<const double>)> eval_;

    friend double dual_norm_eval(const MinkowskiNorm&, std::span<const double>, std::uint64_t);
};

double norm_eval(const MinkowskiNorm& F, std::span<const double> v);

/// Polar transform F*(alpha) = sup_{v != 0} <alpha, v> / F(v).
/// Closed form for euclidean (self-dual), lq (Holder conjugate), linf (l1)
/// and quadratic (inverse form). Custom kinds run multi-start projected
/// ascent (32 starts, tol 1e-8) and certify the result against 1e4 random
/// unit-sphere samples.
double dual_norm_eval(const MinkowskiNorm& F, std::span<const double> alpha,
                      std::uint64_t seed = 2024);

/// The dual norm as an object (closed form where available, otherwise a
/// custom norm wrapping dual_norm_eval).
MinkowskiNorm dual_norm(const MinkowskiNorm& F);

struct VolumeEstimate {
    double value = 0.0;
    double std_error = 0.0; // 0 for closed forms
};

/// Lebesgue volume of {F < 1}. Closed form for euclidean/quadratic/lq
/// (Dirichlet's formula); stratified Monte Carlo for custom kinds, with
/// reported standard error, deterministic for a fixed seed.
VolumeEstimate unit_ball_volume_of(const MinkowskiNorm& F, std::uint64_t seed = 7,
                                   long samples = 400000, int strata = 64);

/// Lebesgue measure rescaled so the unit F-ball has measure omega_n.
struct NormalizedMeasure {
    MinkowskiNorm norm;
    double scale = 1.0;         // density multiplier on Lebesgue measure
    double scale_tolerance = 0; // propagated Monte-Carlo uncertainty of scale
};

NormalizedMeasure normalized_measure(const MinkowskiNorm& F, std::uint64_t seed = 7);

/// Parse a norm specification: JSON object text like
///   {"kind":"lq","q":4,"dim":3} | {"kind":"euclidean","dim":3} |
///   {"kind":"quadratic","matrix":[[...],...]}
/// or the CLI shorthand "euclidean" | "lq:4" | "linf" | "example36:0.1"
/// (dim supplied separately for shorthands).
MinkowskiNorm parse_norm_spec(const std::string& text, int dim_hint = 0);

/// The norm F_eps((v,w)) = sqrt(|v|^2 + w^2 + eps*sqrt(|v|^4 + w^4)) on
/// R^{n-1} x R; a genuine (non-quadratic for eps>0) Minkowski norm.
MinkowskiNorm example36_norm(int dim, double eps);

} // namespace ckn
