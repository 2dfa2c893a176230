#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "divfront/distribution.hpp"
#include "divfront/errors.hpp"
#include "divfront/generators.hpp"
#include "divfront/quadrature.hpp"

namespace divfront {

/// One point of the divergence frontier: x = KL(P || R_lambda), y = KL(Q || R_lambda).
struct FrontierPoint {
    double x = 0.0;
    double y = 0.0;
    double lambda = 0.0;
};

inline double f_divergence(const GeneratorFamily& family, const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_shape(p, q);
    double sum = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) sum += psi(family, p[a], q[a]);
    return sum;
}

inline double kl(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    return f_divergence(GeneratorFamily::kl(), p, q);
}

namespace detail {

inline void require_open_unit(double lambda, const char* what) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1)");
}

// KL(P || lambda P + (1 - lambda) Q), finite because the mixture dominates P.
inline double kl_to_mixture(std::span<const double> p, std::span<const double> q, double lambda) {
    double sum = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] == 0.0) continue;
        const double r = lambda * p[a] + (1.0 - lambda) * q[a];
        sum += p[a] * std::log(p[a] / r);
    }
    return sum;
}

// Per-atom frontier integral term; symmetric because it only sees (max, min).
inline double frontier_integral_term(double a, double b) {
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    if (hi == lo) return 0.0;
    if (lo == 0.0) return hi / 2.0;
    const double ratio = hi / lo;
    if (!std::isfinite(ratio)) {
        // subnormal lo: the ratio overflows, so take the logs separately
        return (hi + lo) / 2.0 - lo * (hi / (hi - lo)) * (std::log(hi) - std::log(lo));
    }
    return lo * detail::frontier_generator(ratio);
}

}  // namespace detail

/// KL(P || lambda P + (1 - lambda) Q).
inline double interpolated_kl(const DiscreteDistribution& p, const DiscreteDistribution& q, double lambda) {
    require_same_shape(p, q);
    detail::require_open_unit(lambda, "lambda");
    return detail::kl_to_mixture(p.masses(), q.masses(), lambda);
}

/// lambda KL(P || R) + (1 - lambda) KL(Q || R) with R = lambda P + (1 - lambda) Q.
inline double linearized_cost(const DiscreteDistribution& p, const DiscreteDistribution& q, double lambda) {
    require_same_shape(p, q);
    detail::require_open_unit(lambda, "lambda");
    return lambda * detail::kl_to_mixture(p.masses(), q.masses(), lambda) +
           (1.0 - lambda) * detail::kl_to_mixture(q.masses(), p.masses(), 1.0 - lambda);
}

/// Frontier integral from its per-atom closed form. Lies in [0, 1] and is
/// exactly symmetric in its arguments.
inline double frontier_integral_closed(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    require_same_shape(p, q);
    double sum = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) sum += detail::frontier_integral_term(p[a], q[a]);
    return sum;
}

/// 2 * integral_0^1 linearized_cost(P, Q, lambda) d lambda by Gauss-Legendre.
/// Independent of the closed form; used to cross-check it.
inline double frontier_integral_quadrature(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                           std::size_t nodes = 128) {
    require_same_shape(p, q);
    if (nodes < 8) throw DomainError("quadrature needs at least 8 nodes");
    const GaussLegendre rule(nodes);
    return 2.0 * rule.integrate([&](double lambda) { return linearized_cost(p, q, lambda); });
}

inline std::vector<FrontierPoint> frontier_curve(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                                 std::span<const double> lambda_grid) {
    require_same_shape(p, q);
    std::vector<FrontierPoint> out;
    out.reserve(lambda_grid.size());
    double prev = 0.0;
    for (double lambda : lambda_grid) {
        detail::require_open_unit(lambda, "frontier grid points");
        if (!out.empty() && !(lambda > prev)) throw DomainError("frontier grid must be strictly increasing");
        prev = lambda;
        out.push_back({detail::kl_to_mixture(p.masses(), q.masses(), lambda),
                       detail::kl_to_mixture(q.masses(), p.masses(), 1.0 - lambda), lambda});
    }
    return out;
}

/// `count` equally spaced points covering [lo, hi] including both ends.
inline std::vector<double> closed_grid(double lo, double hi, std::size_t count) {
    if (count == 0) throw DomainError("grid needs at least one point");
    if (count == 1) return {(lo + hi) / 2.0};
    // filled from both ends so the grid is symmetric and an odd count hits the midpoint exactly
    std::vector<double> g(count);
    const double steps = static_cast<double>(count - 1);
    for (std::size_t i = 0; i < (count + 1) / 2; ++i) {
        const double offset = (hi - lo) * static_cast<double>(i) / steps;
        g[i] = lo + offset;
        g[count - 1 - i] = hi - offset;
    }
    if (count % 2 == 1) g[count / 2] = (lo + hi) / 2.0;
    return g;
}

/// i / (count + 1) for i = 1..count.
inline std::vector<double> open_unit_grid(std::size_t count) {
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = static_cast<double>(i + 1) / static_cast<double>(count + 1);
    return g;
}

/// Largest L1 gap between the estimated and true frontier points over the
/// uniform grid of [lambda0, 1 - lambda0].
inline double frontier_sup_error(const DiscreteDistribution& p, const DiscreteDistribution& q,
                                 const DiscreteDistribution& p_hat, const DiscreteDistribution& q_hat,
                                 double lambda0 = 0.01, std::size_t grid_size = 99) {
    require_same_shape(p, q);
    require_same_shape(p, p_hat);
    require_same_shape(p, q_hat);
    if (!(lambda0 > 0.0 && lambda0 < 0.5)) throw DomainError("lambda0 must lie in (0, 1/2)");
    const auto grid = closed_grid(lambda0, 1.0 - lambda0, grid_size);
    double worst = 0.0;
    for (double lambda : grid) {
        const double dx = detail::kl_to_mixture(p_hat.masses(), q_hat.masses(), lambda) -
                          detail::kl_to_mixture(p.masses(), q.masses(), lambda);
        const double dy = detail::kl_to_mixture(q_hat.masses(), p_hat.masses(), 1.0 - lambda) -
                          detail::kl_to_mixture(q.masses(), p.masses(), 1.0 - lambda);
        worst = std::max(worst, std::abs(dx) + std::abs(dy));
    }
    return worst;
}

/// KL(P || Q) + KL(Q || P); +inf when the supports differ.
inline double jeffreys(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    return kl(p, q) + kl(q, p);
}

/// Polyline length of the frontier traced on open_unit_grid(grid_size).
/// Infinite unless P and Q have the same support.
inline double frontier_length(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              std::size_t grid_size = 10000) {
    require_same_shape(p, q);
    if (grid_size == 0) throw DomainError("grid_size must be positive");
    for (std::size_t a = 0; a < p.size(); ++a) {
        if ((p[a] == 0.0) != (q[a] == 0.0)) return std::numeric_limits<double>::infinity();
    }
    const auto grid = open_unit_grid(grid_size);
    const auto curve = frontier_curve(p, q, grid);
    double length = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        length += std::hypot(curve[i].x - curve[i - 1].x, curve[i].y - curve[i - 1].y);
    }
    return length;
}

}  // namespace divfront
