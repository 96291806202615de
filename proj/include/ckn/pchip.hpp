#pragma once

#include <cstddef>
#include <vector>

namespace ckn {

/// Shape-preserving piecewise-cubic Hermite interpolant (Fritsch-Carlson).
/// Monotone data produce a monotone C^1 interpolant; used for volume
/// profiles and radial profiles.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    std::size_t size() const { return x_.size(); }
    double front_x() const { return x_.front(); }
    double back_x() const { return x_.back(); }
    double back_y() const { return y_.back(); }

private:
    std::size_t interval(double x) const;
    std::vector<double> x_, y_, d_; // nodes, values, node derivatives
};

} // namespace ckn
