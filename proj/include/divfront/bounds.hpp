#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "divfront/distribution.hpp"
#include "divfront/errors.hpp"
#include "divfront/generators.hpp"

namespace divfront {

enum class BoundMode { Oracle, Free };

struct BoundReport {
    double alpha_p = 0.0;
    double alpha_q = 0.0;
    double beta_p = 0.0;
    double beta_q = 0.0;
    std::optional<double> gamma_p;
    std::optional<double> gamma_q;
    double oracle_bound = 0.0;
    double free_bound = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

namespace detail {

inline void require_sample_size(std::uint64_t n, std::uint64_t minimum, const char* what) {
    if (n < minimum) throw DomainError(std::string(what) + " must be >= " + std::to_string(minimum));
}

inline double log_inv_floor1(double p) { return std::max(1.0, -std::log(p)); }

// (1 - p)^n without the cancellation of pow(1 - p, n) for tiny p.
inline double survival(double p, double n) {
    if (p >= 1.0) return 0.0;
    return std::exp(n * std::log1p(-p));
}

}  // namespace detail

/// sum_a sqrt(P(a) / n).
inline double alpha(const DiscreteDistribution& p, std::uint64_t n) {
    detail::require_sample_size(n, 1, "n");
    const double nn = static_cast<double>(n);
    double s = 0.0;
    for (double m : p) s += std::sqrt(m / nn);
    return s;
}

/// Expected missing mass weighted by max(1, ln 1/P(a)):
/// sum_a (1 - P(a))^n P(a) max(1, ln 1/P(a)).
inline double beta_exact(const DiscreteDistribution& p, std::uint64_t n) {
    detail::require_sample_size(n, 3, "n");
    const double nn = static_cast<double>(n);
    double s = 0.0;
    for (double m : p) {
        if (m == 0.0) continue;
        s += detail::survival(m, nn) * m * detail::log_inv_floor1(m);
    }
    return s;
}

/// sum_a (1 - P(a))^n P(a).
inline double missing_mass_expectation(const DiscreteDistribution& p, std::uint64_t n) {
    detail::require_sample_size(n, 1, "n");
    const double nn = static_cast<double>(n);
    double s = 0.0;
    for (double m : p) {
        if (m == 0.0) continue;
        s += detail::survival(m, nn) * m;
    }
    return s;
}

/// b k / (n + b k) * sum_a |P(a) - 1/k|.
inline double gamma(const DiscreteDistribution& p, std::uint64_t n, double b) {
    if (!(b > 0.0)) throw DomainError("b must be positive");
    const double k = static_cast<double>(p.size());
    double dev = 0.0;
    for (double m : p) dev += std::abs(m - 1.0 / k);
    return b * k / (static_cast<double>(n) + b * k) * dev;
}

/// Expected statistical error of the plug-in estimate of D_f(P || Q) from n
/// draws of P and m draws of Q. Oracle mode uses alpha/beta of the true
/// distributions; free mode only uses k = support size.
inline double plug_in_error_bound(const GeneratorFamily& family, const DiscreteDistribution& p,
                                  const DiscreteDistribution& q, std::uint64_t n, std::uint64_t m, BoundMode mode) {
    require_same_shape(p, q);
    const auto c = require_finite_constants(family);
    detail::require_sample_size(n, 3, "n");
    detail::require_sample_size(m, 3, "m");
    if (mode == BoundMode::Oracle) {
        const double lead_p = std::max(c.c0_star, c.c2);
        const double lead_q = std::max(c.c0, c.c2_star);
        return (c.c1 * std::log(static_cast<double>(n)) + lead_p) * alpha(p, n) +
               (c.c1_star * std::log(static_cast<double>(m)) + lead_q) * alpha(q, m) +
               (c.c1 + lead_p) * beta_exact(p, n) + (c.c1_star + lead_q) * beta_exact(q, m);
    }
    const double nm = static_cast<double>(std::min(n, m));
    const double k = static_cast<double>(p.size());
    return (c.lipschitz_sum() * std::log(nm) + c.offset_sum()) * (std::sqrt(k / nm) + k / nm);
}

/// Free-mode plug-in bound that needs only k, n and m.
inline double plug_in_free_bound(const GeneratorFamily& family, std::uint64_t k, std::uint64_t n, std::uint64_t m) {
    const auto c = require_finite_constants(family);
    detail::require_sample_size(n, 3, "n");
    detail::require_sample_size(m, 3, "m");
    if (k == 0) throw DomainError("k must be positive");
    const double nm = static_cast<double>(std::min(n, m));
    const double kk = static_cast<double>(k);
    return (c.lipschitz_sum() * std::log(nm) + c.offset_sum()) * (std::sqrt(kk / nm) + kk / nm);
}

/// Expected statistical error of the add-constant estimate with constant b.
inline double add_constant_error_bound(const GeneratorFamily& family, const DiscreteDistribution& p,
                                       const DiscreteDistribution& q, std::uint64_t n, std::uint64_t m, double b,
                                       BoundMode mode) {
    require_same_shape(p, q);
    const auto c = require_finite_constants(family);
    detail::require_sample_size(n, 3, "n");
    detail::require_sample_size(m, 3, "m");
    if (!(b > 0.0)) throw DomainError("b must be positive");
    const double k = static_cast<double>(p.size());
    const double nn = static_cast<double>(n);
    const double mm = static_cast<double>(m);
    const double lip_p = c.c1 * std::log(nn / b + k) + std::max(c.c0_star, c.c2);
    const double lip_q = c.c1_star * std::log(mm / b + k) + std::max(c.c0, c.c2_star);
    if (mode == BoundMode::Oracle) {
        const double tv_p = nn * alpha(p, n) / (nn + k * b) + gamma(p, n, b);
        const double tv_q = mm * alpha(q, m) / (mm + k * b) + gamma(q, m, b);
        return tv_p * lip_p + tv_q * lip_q;
    }
    const double tv_p = (std::sqrt(k * nn) + 2.0 * b * (k - 1.0)) / (nn + k * b);
    const double tv_q = (std::sqrt(k * mm) + 2.0 * b * (k - 1.0)) / (mm + k * b);
    return tv_p * lip_p + tv_q * lip_q;
}

/// McDiarmid tail 2 exp(-N eps^2 / (2 (c1 ln N + c2)^2)) with N = min(n, m), clipped to 1.
inline double deviation_probability(const GeneratorFamily& family, std::uint64_t n, std::uint64_t m, double eps) {
    const auto c = require_finite_constants(family);
    detail::require_sample_size(std::min(n, m), 1, "min(n, m)");
    if (!(eps >= 0.0)) throw DomainError("epsilon must be nonnegative");
    const double nm = static_cast<double>(std::min(n, m));
    const double scale = c.lipschitz_sum() * std::log(nm) + c.offset_sum();
    const double p = 2.0 * std::exp(-nm * eps * eps / (2.0 * scale * scale));
    return std::min(1.0, p);
}

namespace detail {

inline double concentration_width(const GeneratorFamily& family, std::uint64_t n, std::uint64_t m, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
    const auto c = require_finite_constants(family);
    const double nm = static_cast<double>(std::min(n, m));
    return (c.lipschitz_sum() * std::log(nm) + c.offset_sum()) * std::sqrt(2.0 * std::log(2.0 / delta) / nm);
}

}  // namespace detail

/// Error level exceeded with probability at most delta, using only k.
inline double high_prob_epsilon(const GeneratorFamily& family, std::uint64_t k, std::uint64_t n, std::uint64_t m,
                                double delta) {
    const double width = detail::concentration_width(family, n, m, delta);
    return width + plug_in_free_bound(family, k, n, m);
}

/// Error level exceeded with probability at most delta, using the true P and Q.
inline double high_prob_epsilon(const GeneratorFamily& family, const DiscreteDistribution& p,
                                const DiscreteDistribution& q, std::uint64_t n, std::uint64_t m, double delta) {
    const double width = detail::concentration_width(family, n, m, delta);
    return width + plug_in_error_bound(family, p, q, n, m, BoundMode::Oracle);
}

/// (f(0) + f*(0)) / floor(bins / 2): the quantization error guaranteed for a
/// partition with `bins` cells.
inline double quantization_bound(const GeneratorFamily& family, std::size_t bins) {
    if (bins < 2) throw DomainError("bins must be >= 2");
    const auto c = constants(family);
    if (!std::isfinite(c.c0) || !std::isfinite(c.c0_star)) {
        throw UnsupportedFamily("quantization bound needs finite f(0) and f*(0): " + family.name());
    }
    return (c.c0 + c.c0_star) / static_cast<double>(bins / 2);
}

/// (sqrt(k/n) + k/n) ln n, the constant-free distribution-independent bound.
inline double simplified_bound(std::uint64_t k, std::uint64_t n) {
    detail::require_sample_size(n, 2, "n");
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n);
    return (std::sqrt(kk / nn) + kk / nn) * std::log(nn);
}

/// (alpha_n(P) + alpha_n(Q)) ln n + beta_n(P) + beta_n(Q).
inline double oracle_plot_bound(const DiscreteDistribution& p, const DiscreteDistribution& q, std::uint64_t n) {
    require_same_shape(p, q);
    detail::require_sample_size(n, 3, "n");
    return (alpha(p, n) + alpha(q, n)) * std::log(static_cast<double>(n)) + beta_exact(p, n) + beta_exact(q, n);
}

/// Constant-free total error (sqrt(k/n) + k/n) ln n + 1/k.
inline double total_error_bound(std::uint64_t k, std::uint64_t n) {
    if (k == 0) throw DomainError("k must be positive");
    return simplified_bound(k, n) + 1.0 / static_cast<double>(k);
}

/// Total error with the family's constants: the free plug-in bound on k cells
/// plus the (f(0) + f*(0)) / k quantization term.
inline double total_error_bound(const GeneratorFamily& family, std::uint64_t k, std::uint64_t n, std::uint64_t m) {
    const auto c = require_finite_constants(family);
    return plug_in_free_bound(family, k, n, m) + (c.c0 + c.c0_star) / static_cast<double>(k);
}

/// round(n^(1/3)), at least 2.
inline std::uint64_t suggest_k(std::uint64_t n) {
    const auto k = static_cast<std::uint64_t>(std::llround(std::cbrt(static_cast<double>(n))));
    return std::max<std::uint64_t>(2, k);
}

/// Full report for the `bounds` subcommand. gamma fields are filled only when
/// b is given.
inline BoundReport bound_report(const GeneratorFamily& family, const DiscreteDistribution& p,
                                const DiscreteDistribution& q, std::uint64_t n, std::uint64_t m,
                                std::optional<double> b = std::nullopt) {
    const auto c = require_finite_constants(family);
    BoundReport r;
    r.alpha_p = alpha(p, n);
    r.alpha_q = alpha(q, m);
    r.beta_p = beta_exact(p, n);
    r.beta_q = beta_exact(q, m);
    if (b) {
        r.gamma_p = gamma(p, n, *b);
        r.gamma_q = gamma(q, m, *b);
    }
    r.oracle_bound = plug_in_error_bound(family, p, q, n, m, BoundMode::Oracle);
    r.free_bound = plug_in_error_bound(family, p, q, n, m, BoundMode::Free);
    r.c1 = c.lipschitz_sum();
    r.c2 = c.offset_sum();
    return r;
}

}  // namespace divfront
