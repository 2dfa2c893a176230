#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "divfront/distribution.hpp"
#include "divfront/divergence.hpp"
#include "divfront/errors.hpp"
#include "divfront/point.hpp"
#include "divfront/quadrature.hpp"
#include "divfront/rng.hpp"

namespace divfront {

/// P(i) proportional to i^(-r), i = 1..k.
inline DiscreteDistribution zipf_pmf(std::size_t k, double r) {
    if (k == 0) throw InputError("zipf needs k >= 1");
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("zipf exponent must be >= 0");
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) w[i] = std::pow(static_cast<double>(i + 1), -r);
    return DiscreteDistribution::from_weights(w);
}

/// 1/(2k) on the first half of the atoms, 3/(2k) on the second half.
inline DiscreteDistribution step_pmf(std::size_t k) {
    if (k == 0 || k % 2 != 0) throw DomainError("step distribution needs an even k");
    std::vector<double> m(k);
    const double kk = static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) m[i] = (i < k / 2 ? 1.0 : 3.0) / (2.0 * kk);
    return DiscreteDistribution(std::move(m));
}

inline DiscreteDistribution dirichlet_draw(double alpha, std::size_t k, Rng& rng) {
    if (!(alpha > 0.0)) throw DomainError("Dirichlet alpha must be positive");
    if (k == 0) throw InputError("Dirichlet needs k >= 1");
    std::vector<double> g(k);
    for (;;) {
        for (double& x : g) x = rng.gamma(alpha);
        // With tiny alpha every variate can underflow; redraw in that case.
        if (detail::compensated_sum(g) > 0.0) break;
    }
    return DiscreteDistribution::from_weights(g);
}

/// n i.i.d. atom indices by inverse-CDF lookup.
inline std::vector<std::size_t> sample_discrete(const DiscreteDistribution& p, std::size_t n, Rng& rng) {
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    // The last atom with positive mass absorbs rounding in the running sum.
    std::size_t last = p.size() - 1;
    while (last > 0 && p[last] == 0.0) --last;
    for (std::size_t i = last; i < cdf.size(); ++i) cdf[i] = 1.0;

    std::vector<std::size_t> out(n);
    for (auto& x : out) {
        const double u = rng.uniform();
        x = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        if (x > last) x = last;
    }
    return out;
}

struct Gaussian2D {
    Point2 mean;
    double scale = 1.0;
};

/// Bivariate Student-t: mean + sqrt(scale) z / sqrt(chi2_df / df).
struct StudentT2D {
    int df = 4;
    Point2 mean;
    double scale = 1.0;
};

using ContinuousSpec = std::variant<Gaussian2D, StudentT2D>;

inline void validate(const ContinuousSpec& spec) {
    std::visit(
        [](const auto& s) {
            if (!(s.scale > 0.0) || !std::isfinite(s.scale)) throw DomainError("scale must be positive");
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, StudentT2D>) {
                if (s.df < 1) throw DomainError("t degrees of freedom must be >= 1");
            }
        },
        spec);
}

inline std::vector<Point2> sample_continuous(const ContinuousSpec& spec, std::size_t n, Rng& rng) {
    validate(spec);
    std::vector<Point2> out(n);
    for (auto& pt : out) {
        if (const auto* g = std::get_if<Gaussian2D>(&spec)) {
            const double sd = std::sqrt(g->scale);
            const double zx = rng.normal();
            const double zy = rng.normal();
            pt = {g->mean.x + sd * zx, g->mean.y + sd * zy};
        } else {
            const auto& t = std::get<StudentT2D>(spec);
            const double sd = std::sqrt(t.scale);
            const double zx = rng.normal();
            const double zy = rng.normal();
            const double w = std::sqrt(rng.chi_squared(t.df) / t.df);
            pt = {t.mean.x + sd * zx / w, t.mean.y + sd * zy / w};
        }
    }
    return out;
}

inline double density(const ContinuousSpec& spec, const Point2& x) {
    if (const auto* g = std::get_if<Gaussian2D>(&spec)) {
        const double r2 = squared_distance(x, g->mean);
        return std::exp(-r2 / (2.0 * g->scale)) / (2.0 * std::numbers::pi * g->scale);
    }
    const auto& t = std::get<StudentT2D>(spec);
    const double nu = t.df;
    const double r2 = squared_distance(x, t.mean);
    return std::pow(1.0 + r2 / (nu * t.scale), -(nu / 2.0 + 1.0)) / (2.0 * std::numbers::pi * t.scale);
}

struct Box {
    double x_lo, x_hi, y_lo, y_hi;
};

/// Integration box: mean +- 6 sd for Gaussians (union over both specs),
/// the fixed square [-40, 40]^2 as soon as a t distribution is involved.
inline Box integration_box(const ContinuousSpec& p, const ContinuousSpec& q) {
    const auto* gp = std::get_if<Gaussian2D>(&p);
    const auto* gq = std::get_if<Gaussian2D>(&q);
    if (!gp || !gq) return {-40.0, 40.0, -40.0, 40.0};
    const double rp = 6.0 * std::sqrt(gp->scale);
    const double rq = 6.0 * std::sqrt(gq->scale);
    return {std::min(gp->mean.x - rp, gq->mean.x - rq), std::max(gp->mean.x + rp, gq->mean.x + rq),
            std::min(gp->mean.y - rp, gq->mean.y - rq), std::max(gp->mean.y + rp, gq->mean.y + rq)};
}

/// Tensor Gauss-Legendre integral of fn over a box.
template <class Fn>
double integrate_box(const Box& box, std::size_t nodes, Fn&& fn) {
    const GaussLegendre rule(nodes);
    const double hx = box.x_hi - box.x_lo;
    const double hy = box.y_hi - box.y_lo;
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double x = box.x_lo + hx * rule.nodes[i];
        double row = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            row += rule.weights[j] * fn(Point2{x, box.y_lo + hy * rule.nodes[j]});
        }
        total += rule.weights[i] * row;
    }
    return total * hx * hy;
}

/// Frontier integral between two continuous densities by tensor quadrature.
inline double continuous_frontier_integral(const ContinuousSpec& p, const ContinuousSpec& q, std::size_t grid_nodes = 512) {
    validate(p);
    validate(q);
    if (grid_nodes < 32) throw DomainError("grid_nodes must be >= 32");
    return integrate_box(integration_box(p, q), grid_nodes, [&](const Point2& x) {
        return detail::frontier_integral_term(density(p, x), density(q, x));
    });
}

/// Discrete family named in a config: `zipf:<r>`, `step`, `dir:<alpha>`.
struct DiscreteSpec {
    enum class Kind { Zipf, Step, Dirichlet } kind = Kind::Zipf;
    double param = 0.0;

    /// Materializes the pmf on k atoms; Dirichlet specs consume `rng`.
    DiscreteDistribution materialize(std::size_t k, Rng& rng) const {
        switch (kind) {
            case Kind::Zipf: return zipf_pmf(k, param);
            case Kind::Step: return step_pmf(k);
            case Kind::Dirichlet: return dirichlet_draw(param, k, rng);
        }
        throw DomainError("unknown discrete spec");
    }
};

using DistributionSpec = std::variant<DiscreteSpec, ContinuousSpec>;

namespace detail {

inline std::vector<double> parse_numbers(std::string_view body, std::string_view whole) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= body.size()) {
        const auto comma = body.find(',', start);
        const std::string tok(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (tok.empty() || used != tok.size() || !std::isfinite(v)) {
            throw DomainError("bad number '" + tok + "' in distribution spec '" + std::string(whole) + "'");
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Parses `zipf:<r>`, `step`, `dir:<alpha>`, `gauss:<mx>,<my>,<scale>`,
/// `t:<df>,<mx>,<my>,<scale>`.
inline DistributionSpec parse_distribution_spec(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    const std::string_view body = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    auto numbers = [&](std::size_t expected) {
        if (colon == std::string_view::npos) throw DomainError("distribution spec '" + std::string(text) + "' needs parameters");
        auto v = detail::parse_numbers(body, text);
        if (v.size() != expected) {
            throw DomainError("distribution spec '" + std::string(text) + "' expects " + std::to_string(expected) + " numbers");
        }
        return v;
    };
    if (head == "zipf") {
        const auto v = numbers(1);
        if (v[0] < 0.0) throw DomainError("zipf exponent must be >= 0");
        return DiscreteSpec{DiscreteSpec::Kind::Zipf, v[0]};
    }
    if (head == "step") {
        if (colon != std::string_view::npos) throw DomainError("'step' takes no parameters");
        return DiscreteSpec{DiscreteSpec::Kind::Step, 0.0};
    }
    if (head == "dir") {
        const auto v = numbers(1);
        if (!(v[0] > 0.0)) throw DomainError("Dirichlet alpha must be positive");
        return DiscreteSpec{DiscreteSpec::Kind::Dirichlet, v[0]};
    }
    if (head == "gauss") {
        const auto v = numbers(3);
        ContinuousSpec s = Gaussian2D{{v[0], v[1]}, v[2]};
        validate(s);
        return s;
    }
    if (head == "t") {
        const auto v = numbers(4);
        if (v[0] != std::floor(v[0])) throw DomainError("t degrees of freedom must be an integer");
        ContinuousSpec s = StudentT2D{static_cast<int>(v[0]), {v[1], v[2]}, v[3]};
        validate(s);
        return s;
    }
    throw DomainError("unknown distribution spec '" + std::string(text) + "'");
}

}  // namespace divfront
