#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "divfront/errors.hpp"

namespace divfront {

/// Gauss-Legendre rule mapped onto [0, 1]. Nodes are ascending.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n) {
        if (n == 0) throw DomainError("quadrature needs at least one node");
        nodes.resize(n);
        weights.resize(n);
        const std::size_t half = (n + 1) / 2;
        for (std::size_t i = 0; i < half; ++i) {
            // Tricomi's initial guess for the i-th root, then Newton.
            long double x = std::cos(std::numbers::pi_v<long double> * (static_cast<long double>(i) + 0.75L) /
                                     (static_cast<long double>(n) + 0.5L));
            long double dp = 0;
            for (int iter = 0; iter < 100; ++iter) {
                long double p0 = 1;
                long double p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    const long double pk = ((2.0L * k - 1) * x * p1 - (k - 1.0L) * p0) / static_cast<long double>(k);
                    p0 = p1;
                    p1 = pk;
                }
                if (n == 1) p0 = 1;
                dp = static_cast<long double>(n) * (x * p1 - p0) / (x * x - 1);
                const long double step = p1 / dp;
                x -= step;
                if (std::abs(step) < 1e-18L) break;
            }
            const long double w = 2 / ((1 - x * x) * dp * dp);
            // x is the root in (0, 1]; map +-x onto [0, 1].
            nodes[n - 1 - i] = static_cast<double>((1 + x) / 2);
            nodes[i] = static_cast<double>((1 - x) / 2);
            weights[n - 1 - i] = static_cast<double>(w / 2);
            weights[i] = static_cast<double>(w / 2);
        }
    }

    std::size_t size() const noexcept { return nodes.size(); }

    /// Integral of fn over [0, 1].
    template <class Fn>
    double integrate(Fn&& fn) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * fn(nodes[i]);
        return sum;
    }

    /// Integral of fn over [a, b].
    template <class Fn>
    double integrate(double a, double b, Fn&& fn) const {
        const double h = b - a;
        return h * integrate([&](double u) { return fn(a + h * u); });
    }
};

}  // namespace divfront
