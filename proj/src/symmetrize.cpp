#include "ckn/symmetrize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "ckn/special.hpp"

namespace ckn {
namespace {

std::size_t ipow(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Largest F-radius whose ball keeps the required zero boundary layer.
double safe_radius(const MinkowskiNorm& F, double L, int m) {
    const double hc = 2.0 * L / m;
    const double l_inner = L - 2.5 * hc;
    // min of F over the unit-cube surface |u|_inf = 1, sampled on faces
    const int n = F.dim();
    double fmin = std::numeric_limits<double>::infinity();
    std::vector<double> u(n);
    const int steps = 8;
    // axis directions and corner-ish rays
    for (int axis = 0; axis < n; ++axis) {
        std::fill(u.begin(), u.end(), 0.0);
        u[axis] = 1.0;
        fmin = std::min(fmin, F(u));
        u[axis] = -1.0;
        fmin = std::min(fmin, F(u));
    }
    // sweep one face per axis with a coarse lattice of the other coords
    for (int axis = 0; axis < n; ++axis) {
        const std::size_t combos = ipow(2 * steps + 1, n - 1);
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t rest = c;
            int k = 0;
            for (int d = 0; d < n; ++d) {
                if (d == axis) {
                    u[d] = 1.0;
                    continue;
                }
                const int idx = static_cast<int>(rest % (2 * steps + 1));
                rest /= (2 * steps + 1);
                u[d] = (idx - steps) / double(steps);
                ++k;
            }
            (void)k;
            fmin = std::min(fmin, F(u));
        }
    }
    return 0.999 * l_inner * fmin;
}

void check_support(const GridFunction& u) {
    const int layer = 2;
    const std::size_t total = u.cell_count();
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        bool boundary = false;
        for (int d = u.n - 1; d >= 0; --d) {
            const int i = static_cast<int>(rest % u.m);
            rest /= u.m;
            if (i < layer || i >= u.m - layer) boundary = true;
        }
        if (boundary && u.values[flat] != 0.0)
            throw std::domain_error(
                "GridFunction: support touches the boundary layer (need >= 2 zero cells)");
    }
}

} // namespace

void GridFunction::cell_center(std::size_t flat, std::vector<double>& out) const {
    out.resize(n);
    std::size_t rest = flat;
    for (int d = n - 1; d >= 0; --d) {
        out[d] = coord(static_cast<int>(rest % m));
        rest /= m;
    }
}

GridFunction make_grid_function(int n, double L, int m, MinkowskiNorm norm,
                                std::vector<double> values) {
    if (n < 1 || n > 4) throw std::domain_error("GridFunction: n must be in 1..4");
    if (!(L > 0.0)) throw std::domain_error("GridFunction: L must be > 0");
    if (m < 8) throw std::domain_error("GridFunction: m must be >= 8");
    if (norm.dim() != n) throw std::domain_error("GridFunction: norm dimension mismatch");
    if (values.size() != ipow(m, n))
        throw std::domain_error("GridFunction: need m^n cell values");
    for (double v : values)
        if (!(v >= 0.0)) throw std::domain_error("GridFunction: values must be >= 0");
    GridFunction u{n, L, m, std::move(values), std::move(norm)};
    check_support(u);
    return u;
}

SymmetrizeContext build_symmetrize_context(const GridFunction& proto) {
    const std::size_t total = proto.cell_count();
    SymmetrizeContext ctx;
    ctx.fdist.resize(total);
    std::vector<double> center(proto.n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        proto.cell_center(flat, center);
        ctx.fdist[flat] = static_cast<float>(proto.norm(center));
    }
    ctx.order.resize(total);
    std::iota(ctx.order.begin(), ctx.order.end(), 0u);
    std::sort(ctx.order.begin(), ctx.order.end(), [&ctx](std::uint32_t a, std::uint32_t b) {
        if (ctx.fdist[a] != ctx.fdist[b]) return ctx.fdist[a] < ctx.fdist[b];
        return a < b;
    });
    return ctx;
}

GridFunction symmetrize(const GridFunction& u) {
    return symmetrize(u, build_symmetrize_context(u));
}

GridFunction symmetrize(const GridFunction& u, const SymmetrizeContext& ctx) {
    if (ctx.order.size() != u.cell_count())
        throw std::domain_error("symmetrize: context does not match the grid");
    std::vector<double> sorted = u.values;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    GridFunction out = u;
    for (std::size_t k = 0; k < ctx.order.size(); ++k) out.values[ctx.order[k]] = sorted[k];
    check_support(out);
    return out;
}

std::vector<double> singular_weights(const CknParams& prm, const GridFunction& u) {
    const std::size_t total = u.cell_count();
    std::vector<double> w(total, 1.0);
    if (prm.ap == 0.0) return w;

    const double hc = u.cell_width();
    std::vector<double> center(u.n);
    std::vector<std::size_t> origin_cells;
    for (std::size_t flat = 0; flat < total; ++flat) {
        u.cell_center(flat, center);
        bool touches = true;
        for (double c : center)
            if (std::abs(c) > 0.5 * hc * (1.0 + 1e-12)) touches = false;
        if (touches) {
            origin_cells.push_back(flat);
            continue;
        }
        w[flat] = std::pow(u.norm(center), -prm.ap);
    }

    // Mean of F^{-ap} over the F-ball whose measure equals the origin
    // cells' total measure, split evenly among them.
    const double v1 = unit_ball_volume_of(u.norm).value; // Lebesgue vol of {F < 1}
    const std::size_t s0 = origin_cells.size();
    if (s0 > 0) {
        const double r0 = hc * std::pow(double(s0) / v1, 1.0 / u.n);
        const double mean_w = u.n * v1 * std::pow(r0, u.n - prm.ap) /
                              ((u.n - prm.ap) * double(s0) * std::pow(hc, u.n));
        for (std::size_t flat : origin_cells) w[flat] = mean_w;
    }
    return w;
}

namespace {

struct Sums {
    double weighted_p = 0.0; // sum u^p w  (cell measure applied by caller)
    double energy = 0.0;     // sum F*(Du)^2
};

double weighted_power_sum(const CknParams& prm, const GridFunction& u,
                          const std::vector<double>& w) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (u.values[i] == 0.0) continue;
        acc += std::pow(u.values[i], prm.p) * w[i];
    }
    return acc;
}

// sum over cells of F*(grad u)^2 with central differences; support keeps
// two zero layers so neighbor access never leaves the grid.
double dirichlet_energy(const GridFunction& u) {
    const int n = u.n, m = u.m;
    const double inv2h = 1.0 / (2.0 * u.cell_width());
    const std::size_t total = u.cell_count();
    std::vector<std::size_t> stride(n);
    stride[n - 1] = 1;
    for (int d = n - 2; d >= 0; --d) stride[d] = stride[d + 1] * m;

    const MinkowskiNorm dual = dual_norm(u.norm);
    std::vector<double> g(n);
    std::vector<int> idx(n);
    double acc = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        bool interior = true;
        for (int d = n - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(rest % m);
            rest /= m;
            if (idx[d] == 0 || idx[d] == m - 1) interior = false;
        }
        if (!interior) continue;
        bool any = false;
        for (int d = 0; d < n; ++d) {
            const double up = u.values[flat + stride[d]];
            const double dn = u.values[flat - stride[d]];
            g[d] = (up - dn) * inv2h;
            if (g[d] != 0.0) any = true;
        }
        if (!any) continue;
        const double fs = dual(g);
        acc += fs * fs;
    }
    return acc;
}

double cell_measure(const GridFunction& u) {
    const double scale = normalized_measure(u.norm).scale;
    return scale * std::pow(u.cell_width(), u.n);
}

} // namespace

TwoSidedCheck check_hardy_littlewood(const CknParams& prm, const GridFunction& u) {
    return check_hardy_littlewood(prm, u, build_symmetrize_context(u));
}

TwoSidedCheck check_hardy_littlewood(const CknParams& prm, const GridFunction& u,
                                     const SymmetrizeContext& ctx) {
    const GridFunction star = symmetrize(u, ctx);
    const std::vector<double> w = singular_weights(prm, u);
    const double mc = cell_measure(u);
    TwoSidedCheck chk;
    chk.lhs = weighted_power_sum(prm, u, w) * mc;
    chk.rhs = weighted_power_sum(prm, star, w) * mc;
    chk.holds = chk.lhs <= chk.rhs * (1.0 + 1e-12);
    return chk;
}

TwoSidedCheck check_polya_szego(const CknParams& prm, const GridFunction& u, double tol) {
    return check_polya_szego(prm, u, build_symmetrize_context(u), tol);
}

TwoSidedCheck check_polya_szego(const CknParams& /*prm*/, const GridFunction& u,
                                const SymmetrizeContext& ctx, double tol) {
    if (!u.norm.smooth())
        throw std::domain_error(
            "check_polya_szego: norm \"" + u.norm.label() +
            "\" is flagged non-smooth; finite-difference gradients of its distance function "
            "are unreliable, so the energy comparison is refused");
    const GridFunction star = symmetrize(u, ctx);
    const double mc = cell_measure(u);
    TwoSidedCheck chk;
    chk.lhs = dirichlet_energy(star) * mc;
    chk.rhs = dirichlet_energy(u) * mc;
    chk.holds = chk.rhs >= chk.lhs * (1.0 - tol);
    return chk;
}

CknRatio ckn_test(const CknParams& prm, const GridFunction& u) {
    const std::vector<double> w = singular_weights(prm, u);
    const double mc = cell_measure(u);
    CknRatio r;
    r.lhs = std::pow(weighted_power_sum(prm, u, w) * mc, 1.0 / prm.p);
    r.rhs = std::sqrt(dirichlet_energy(u) * mc);
    if (!(r.rhs > 0.0)) throw std::domain_error("ckn_test: zero Dirichlet energy");
    r.ratio = r.lhs / r.rhs;
    return r;
}

GridFunction truncated_extremal(const CknParams& prm, double lambda, MinkowskiNorm norm, double L,
                                int m) {
    if (norm.dim() != prm.n)
        throw std::domain_error("truncated_extremal: norm dimension must match params");
    const double edge = safe_radius(norm, L, m);
    if (!(edge > 0.0)) throw std::domain_error("truncated_extremal: grid too coarse for a taper");
    const double taper_start = 0.9 * edge;
    const std::size_t total = ipow(m, prm.n);
    std::vector<double> values(total, 0.0);
    std::vector<double> center(prm.n);
    GridFunction proto{prm.n, L, m, {}, norm};
    for (std::size_t flat = 0; flat < total; ++flat) {
        proto.cell_center(flat, center);
        const double d = norm(center);
        if (d >= edge) continue;
        double s = 1.0;
        if (d > taper_start) {
            const double t = (edge - d) / (edge - taper_start);
            s = t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); // C^2 smoothstep
        }
        values[flat] = extremal_profile(prm, lambda, d) * s;
    }
    return make_grid_function(prm.n, L, m, std::move(norm), std::move(values));
}

GridFunction bump_function(MinkowskiNorm norm, double L, int m, const std::vector<double>& center,
                           double width) {
    const int n = norm.dim();
    if (static_cast<int>(center.size()) != n)
        throw std::domain_error("bump_function: center dimension mismatch");
    const std::size_t total = ipow(m, n);
    std::vector<double> values(total, 0.0);
    std::vector<double> x(n);
    GridFunction proto{n, L, m, {}, norm};
    const double hc = 2.0 * L / m;
    const double rmax = L - 3.0 * hc;
    for (std::size_t flat = 0; flat < total; ++flat) {
        proto.cell_center(flat, x);
        double r2 = 0.0, o2 = 0.0;
        for (int d = 0; d < n; ++d) {
            r2 += (x[d] - center[d]) * (x[d] - center[d]);
            o2 += x[d] * x[d];
        }
        if (o2 >= rmax * rmax) continue; // hard cutoff well inside the box
        const double bump = std::exp(-r2 / (width * width));
        // taper against the cutoff so the function vanishes smoothly
        const double t = std::min(1.0, (rmax - std::sqrt(o2)) / (0.2 * rmax));
        const double s = t * t * (3.0 - 2.0 * t);
        if (bump * s > 1e-14) values[flat] = bump * s;
    }
    return make_grid_function(n, L, m, std::move(norm), std::move(values));
}

std::string norm_spec_json(const MinkowskiNorm& norm) {
    nlohmann::ordered_json j;
    switch (norm.kind()) {
        case MinkowskiNorm::Kind::Euclidean:
            j = {{"kind", "euclidean"}, {"dim", norm.dim()}};
            break;
        case MinkowskiNorm::Kind::Lq:
            j = {{"kind", "lq"}, {"q", norm.lq_exponent()}, {"dim", norm.dim()}};
            break;
        case MinkowskiNorm::Kind::Linf:
            j = {{"kind", "linf"}, {"dim", norm.dim()}};
            break;
        case MinkowskiNorm::Kind::Quadratic: {
            const int n = norm.dim();
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (int i = 0; i < n; ++i) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (int k = 0; k < n; ++k) row.push_back(norm.matrix()[i * n + k]);
                rows.push_back(row);
            }
            j = {{"kind", "quadratic"}, {"matrix", rows}};
            break;
        }
        case MinkowskiNorm::Kind::Custom: {
            const std::string& label = norm.label();
            if (label.rfind("example36:", 0) == 0) {
                j = {{"kind", "example36"},
                     {"dim", norm.dim()},
                     {"eps", std::stod(label.substr(10))}};
            } else {
                j = {{"kind", "custom"}, {"label", label}, {"dim", norm.dim()}};
            }
            break;
        }
    }
    return j.dump();
}

void save_grid_function(const std::string& path, const GridFunction& u, bool binary) {
    const std::string spec = norm_spec_json(u.norm);
    if (binary) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("save_grid_function: cannot open " + path);
        out.write("CKNG", 4);
        const std::uint32_t version = 1, n = u.n, m = u.m,
                            slen = static_cast<std::uint32_t>(spec.size());
        out.write(reinterpret_cast<const char*>(&version), 4);
        out.write(reinterpret_cast<const char*>(&n), 4);
        const double L = u.L;
        out.write(reinterpret_cast<const char*>(&L), 8);
        out.write(reinterpret_cast<const char*>(&m), 4);
        out.write(reinterpret_cast<const char*>(&slen), 4);
        out.write(spec.data(), slen);
        out.write(reinterpret_cast<const char*>(u.values.data()), 8 * u.values.size());
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_grid_function: cannot open " + path);
    out << "# CKNG csv 1\n";
    out << "n: " << u.n << "\n";
    out << "L: ";
    out.precision(17);
    out << u.L << "\n";
    out << "m: " << u.m << "\n";
    out << "norm: " << spec << "\n";
    out << "values:\n";
    const std::size_t row = u.m;
    for (std::size_t i = 0; i < u.values.size(); i += row) {
        for (std::size_t k = 0; k < row; ++k) {
            if (k) out << ",";
            out << u.values[i + k];
        }
        out << "\n";
    }
}

GridFunction load_grid_function(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("load_grid_function: cannot open " + path);
    char magic[4] = {};
    probe.read(magic, 4);
    if (std::memcmp(magic, "CKNG", 4) == 0) {
        std::uint32_t version = 0, n = 0, m = 0, slen = 0;
        double L = 0.0;
        probe.read(reinterpret_cast<char*>(&version), 4);
        probe.read(reinterpret_cast<char*>(&n), 4);
        probe.read(reinterpret_cast<char*>(&L), 8);
        probe.read(reinterpret_cast<char*>(&m), 4);
        probe.read(reinterpret_cast<char*>(&slen), 4);
        if (version != 1) throw std::runtime_error("load_grid_function: unknown version");
        std::string spec(slen, '\0');
        probe.read(spec.data(), slen);
        std::vector<double> values(ipow(m, n));
        probe.read(reinterpret_cast<char*>(values.data()), 8 * values.size());
        if (!probe) throw std::runtime_error("load_grid_function: truncated binary file");
        return make_grid_function(n, L, m, parse_norm_spec(spec, n), std::move(values));
    }

    std::ifstream in(path);
    std::string line;
    int n = 0, m = 0;
    double L = 0.0;
    std::string spec;
    bool in_values = false;
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!in_values) {
            if (line.rfind("n: ", 0) == 0)
                n = std::stoi(line.substr(3));
            else if (line.rfind("L: ", 0) == 0)
                L = std::stod(line.substr(3));
            else if (line.rfind("m: ", 0) == 0)
                m = std::stoi(line.substr(3));
            else if (line.rfind("norm: ", 0) == 0)
                spec = line.substr(6);
            else if (line == "values:")
                in_values = true;
            else
                throw std::runtime_error("load_grid_function: unexpected header line: " + line);
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
    }
    return make_grid_function(n, L, m, parse_norm_spec(spec, n), std::move(values));
}

} // namespace ckn
