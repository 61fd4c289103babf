#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace larvae {

/// Composite trapezoid of node samples with uniform spacing dx.
inline double trapezoid(std::span<const double> f, double dx) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
    return s * dx;
}

/// Trapezoid of the pointwise product f*g.
inline double trapezoid_product(std::span<const double> f, std::span<const double> g, double dx) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() * g.front() + f.back() * g.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j] * g[j];
    return s * dx;
}

/// Forward cumulative trapezoid: out[0] = 0, out[j] = integral up to node j.
inline std::vector<double> cumulative_trapezoid(std::span<const double> f, double dx) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t j = 1; j < f.size(); ++j)
        out[j] = out[j - 1] + 0.5 * dx * (f[j - 1] + f[j]);
    return out;
}

/// Tail cumulative trapezoid: out[j] = integral from node j to the last node.
inline std::vector<double> tail_trapezoid(std::span<const double> f, double dx) {
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t j = f.size(); j-- > 1;)
        out[j - 1] = out[j] + 0.5 * dx * (f[j - 1] + f[j]);
    return out;
}

}  // namespace larvae
