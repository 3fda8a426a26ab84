#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "stllab/error.hpp"

namespace stllab {

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
        nodes.resize(static_cast<std::size_t>(n));
        weights.resize(static_cast<std::size_t>(n));
        const int half = (n + 1) / 2;
        for (int i = 0; i < half; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            // Recompute the derivative at the converged node for the weight.
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            const auto lo = static_cast<std::size_t>(i);
            const auto hi = static_cast<std::size_t>(n - 1 - i);
            nodes[lo] = -x;
            nodes[hi] = x;
            weights[lo] = w;
            weights[hi] = w;
        }
        if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    }

    std::size_t size() const { return nodes.size(); }

    /// Node i mapped onto [lo, hi].
    double node(std::size_t i, double lo, double hi) const { return 0.5 * (hi - lo) * nodes[i] + 0.5 * (hi + lo); }
    double weight(std::size_t i, double lo, double hi) const { return 0.5 * (hi - lo) * weights[i]; }

    template <class F>
    auto integrate(F&& f, double lo, double hi) const {
        decltype(f(lo)) sum{};
        for (std::size_t i = 0; i < size(); ++i) sum += weight(i, lo, hi) * f(node(i, lo, hi));
        return sum;
    }
};

} // namespace stllab
