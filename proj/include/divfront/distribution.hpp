#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "divfront/errors.hpp"

namespace divfront {

namespace detail {

// Neumaier-compensated sum; used wherever a mass total is validated.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0.0;
    double c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    return sum + c;
}

}  // namespace detail

/// A probability mass function over atoms 0..k-1.
///
/// Construction validates that every mass is finite and nonnegative and that
/// the masses sum to one within `kSumTolerance`.
class DiscreteDistribution {
public:
    static constexpr double kSumTolerance = 1e-12;

    DiscreteDistribution() = default;

    explicit DiscreteDistribution(std::vector<double> masses) : masses_(std::move(masses)) {
        validate();
    }

    DiscreteDistribution(std::initializer_list<double> masses)
        : DiscreteDistribution(std::vector<double>(masses)) {}

    /// Normalizes nonnegative weights (not all zero) into a distribution.
    static DiscreteDistribution from_weights(std::span<const double> weights) {
        if (weights.empty()) throw InputError("distribution needs at least one atom");
        for (double w : weights) {
            if (!std::isfinite(w) || w < 0.0) throw DomainError("weights must be finite and nonnegative");
        }
        const double total = detail::compensated_sum(weights);
        if (!(total > 0.0)) throw InputError("weights sum to zero");
        std::vector<double> masses(weights.begin(), weights.end());
        for (double& m : masses) m /= total;
        return DiscreteDistribution(std::move(masses));
    }

    static DiscreteDistribution uniform(std::size_t k) {
        if (k == 0) throw InputError("distribution needs at least one atom");
        return DiscreteDistribution(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    static DiscreteDistribution point_mass(std::size_t k, std::size_t atom) {
        if (atom >= k) throw InputError("point mass atom out of range");
        std::vector<double> masses(k, 0.0);
        masses[atom] = 1.0;
        return DiscreteDistribution(std::move(masses));
    }

    std::size_t size() const noexcept { return masses_.size(); }
    double operator[](std::size_t i) const { return masses_[i]; }
    std::span<const double> masses() const noexcept { return masses_; }
    auto begin() const noexcept { return masses_.begin(); }
    auto end() const noexcept { return masses_.end(); }

    /// Number of atoms with strictly positive mass.
    std::size_t support_size() const noexcept {
        std::size_t s = 0;
        for (double m : masses_) s += (m > 0.0);
        return s;
    }

    friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

private:
    void validate() const {
        if (masses_.empty()) throw InputError("distribution needs at least one atom");
        for (double m : masses_) {
            if (!std::isfinite(m) || m < 0.0) throw DomainError("masses must be finite and nonnegative");
        }
        const double total = detail::compensated_sum(masses_);
        if (std::abs(total - 1.0) > kSumTolerance) {
            throw DomainError("masses sum to " + std::to_string(total) + ", not 1");
        }
    }

    std::vector<double> masses_;
};

inline void require_same_shape(const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != q.size()) {
        throw ShapeError("support size mismatch: " + std::to_string(p.size()) + " vs " +
                         std::to_string(q.size()));
    }
}

/// Mixture lambda*P + (1-lambda)*Q, atom by atom.
inline std::vector<double> mixture(const DiscreteDistribution& p, const DiscreteDistribution& q, double lambda) {
    require_same_shape(p, q);
    std::vector<double> r(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) r[i] = lambda * p[i] + (1.0 - lambda) * q[i];
    return r;
}

}  // namespace divfront
