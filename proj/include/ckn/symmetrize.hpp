#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckn/minkowski.hpp"
#include "ckn/params.hpp"

namespace ckn {

/// A compactly supported non-negative function sampled at the cell
/// centers of a uniform grid on [-L, L]^n (m cells per axis, spacing
/// 2L/m, row-major storage). The support must keep a zero boundary layer
/// of at least two cells so rearranged supports cannot overflow the box.
struct GridFunction {
    int n = 0;
    double L = 0.0;
    int m = 0;
    std::vector<double> values;
    MinkowskiNorm norm = MinkowskiNorm::euclidean(1);

    double cell_width() const { return 2.0 * L / m; }
    std::size_t cell_count() const { return values.size(); }
    /// center coordinate of cell index along one axis
    double coord(int i) const { return -L + (i + 0.5) * cell_width(); }
    void cell_center(std::size_t flat, std::vector<double>& out) const;
};

GridFunction make_grid_function(int n, double L, int m, MinkowskiNorm norm,
                                std::vector<double> values);

/// Cell ordering by F-distance of the cell center from the origin (ties
/// broken by flat index). Function-independent, so it can be computed
/// once per (norm, grid) and reused across symmetrizations.
struct SymmetrizeContext {
    std::vector<std::uint32_t> order;
    std::vector<float> fdist; // F(center) per cell
};

SymmetrizeContext build_symmetrize_context(const GridFunction& proto);

/// Discrete anisotropic decreasing rearrangement: the sorted (descending)
/// multiset of values reassigned along the F-distance cell order. Exactly
/// measure preserving per level and idempotent cell-for-cell.
GridFunction symmetrize(const GridFunction& u);
GridFunction symmetrize(const GridFunction& u, const SymmetrizeContext& ctx);

/// Per-cell singular weights F(c)^{-ap}; the cells whose closed cube
/// contains the origin get the exact mean of the weight over an F-ball of
/// equal total measure (the pointwise weight is infinite there but
/// integrable since ap < n).
std::vector<double> singular_weights(const CknParams& prm, const GridFunction& u);

struct TwoSidedCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Discrete Hardy-Littlewood: sum u^p w mu <= sum (u*)^p w mu with the
/// rearrangement on the right; exact up to the origin-cell treatment.
TwoSidedCheck check_hardy_littlewood(const CknParams& prm, const GridFunction& u);
TwoSidedCheck check_hardy_littlewood(const CknParams& prm, const GridFunction& u,
                                     const SymmetrizeContext& ctx);

/// Discrete Polya-Szego: Dirichlet energies (central differences, dual
/// norm of the gradient) of u* vs u; holds within tolerance 2% at finite
/// resolution. Refuses non-smooth norms.
TwoSidedCheck check_polya_szego(const CknParams& prm, const GridFunction& u, double tol = 0.02);
TwoSidedCheck check_polya_szego(const CknParams& prm, const GridFunction& u,
                                const SymmetrizeContext& ctx, double tol = 0.02);

struct CknRatio {
    double lhs = 0.0;   // (sum u^p w mu)^{1/p}
    double rhs = 0.0;   // (sum F*(Du)^2 mu)^{1/2}
    double ratio = 0.0; // lhs / rhs, to compare against K_a
};

/// Direct grid test of the weighted inequality with base point 0 under
/// the normalized measure of the grid's norm.
CknRatio ckn_test(const CknParams& prm, const GridFunction& u);

/// Closed-form extremal sampled on the grid, lifted to compact support
/// and smoothly tapered over the outer 10% of its radius.
GridFunction truncated_extremal(const CknParams& prm, double lambda, MinkowskiNorm norm, double L,
                                int m);

/// Smooth off-center bump for strictness checks.
GridFunction bump_function(MinkowskiNorm norm, double L, int m,
                           const std::vector<double>& center, double width);

/// Serialization: CSV (text header + value rows) or the binary layout
/// with magic "CKNG" (u32 version, u32 n, f64 L, u32 m, u32 spec length,
/// norm spec JSON, then m^n little-endian f64 values, row-major).
void save_grid_function(const std::string& path, const GridFunction& u, bool binary);
GridFunction load_grid_function(const std::string& path);

/// Canonical JSON spec of a norm (for headers); custom norms serialize by
/// label and only the example36 family round-trips.
std::string norm_spec_json(const MinkowskiNorm& norm);

} // namespace ckn
