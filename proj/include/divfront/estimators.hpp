#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divfront/distribution.hpp"
#include "divfront/errors.hpp"

namespace divfront {

/// Symbol counts over a declared alphabet of size k, with the derived
/// count-of-counts table phi_t (phi_0 counts unseen symbols of the alphabet).
class Histogram {
public:
    Histogram() = default;

    explicit Histogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
        if (counts_.empty()) throw InputError("histogram needs at least one atom");
        for (auto c : counts_) {
            n_ += c;
            ++phi_[c];
        }
    }

    std::size_t size() const noexcept { return counts_.size(); }
    std::uint64_t n() const noexcept { return n_; }
    std::uint64_t operator[](std::size_t a) const { return counts_[a]; }
    std::span<const std::uint64_t> counts() const noexcept { return counts_; }
    const std::map<std::uint64_t, std::size_t>& count_of_counts() const noexcept { return phi_; }

    std::size_t phi(std::uint64_t t) const {
        const auto it = phi_.find(t);
        return it == phi_.end() ? 0 : it->second;
    }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_ = 0;
    std::map<std::uint64_t, std::size_t> phi_;
};

inline Histogram histogram(std::span<const std::size_t> sample, std::size_t k) {
    if (k == 0) throw InputError("histogram needs k >= 1");
    std::vector<std::uint64_t> counts(k, 0);
    for (std::size_t x : sample) {
        if (x >= k) throw InputError("sample atom " + std::to_string(x) + " outside [0, " + std::to_string(k) + ")");
        ++counts[x];
    }
    return Histogram(std::move(counts));
}

inline DiscreteDistribution empirical(const Histogram& h) {
    if (h.n() == 0) throw InputError("empirical estimate needs at least one observation");
    std::vector<double> m(h.size());
    const double n = static_cast<double>(h.n());
    for (std::size_t a = 0; a < h.size(); ++a) m[a] = static_cast<double>(h[a]) / n;
    return DiscreteDistribution(std::move(m));
}

/// (N_a + b) / (n + k b).
inline DiscreteDistribution add_constant(const Histogram& h, double b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("add-constant b must be a positive finite number");
    std::vector<double> m(h.size());
    const double denom = static_cast<double>(h.n()) + static_cast<double>(h.size()) * b;
    for (std::size_t a = 0; a < h.size(); ++a) m[a] = (static_cast<double>(h[a]) + b) / denom;
    return DiscreteDistribution::from_weights(m);
}

inline DiscreteDistribution laplace(const Histogram& h) { return add_constant(h, 1.0); }
inline DiscreteDistribution krichevsky_trofimov(const Histogram& h) { return add_constant(h, 0.5); }

/// Per-symbol constants 1/2 (unseen), 1 (seen once), 3/4 (seen more often),
/// normalized by n + sum of the constants.
inline DiscreteDistribution braess_sauer(const Histogram& h) {
    std::vector<double> w(h.size());
    for (std::size_t a = 0; a < h.size(); ++a) {
        const auto c = h[a];
        const double b = c == 0 ? 0.5 : (c == 1 ? 1.0 : 0.75);
        w[a] = static_cast<double>(c) + b;
    }
    return DiscreteDistribution::from_weights(w);
}

/// Weight N_a when N_a > phi_{N_a + 1}, else (phi_{N_a + 1} + 1)(N_a + 1) / phi_{N_a}.
inline DiscreteDistribution good_turing(const Histogram& h) {
    if (h.n() == 0) throw InputError("Good-Turing estimate needs at least one observation");
    std::vector<double> w(h.size());
    for (std::size_t a = 0; a < h.size(); ++a) {
        const auto c = h[a];
        const auto next = h.phi(c + 1);
        if (c > next) {
            w[a] = static_cast<double>(c);
            continue;
        }
        const auto same = h.phi(c);
        w[a] = same == 0 ? static_cast<double>(c > 0 ? c : 1)
                         : static_cast<double>(next + 1) * static_cast<double>(c + 1) / static_cast<double>(same);
    }
    return DiscreteDistribution::from_weights(w);
}

enum class EstimatorKind { Empirical, AddConstant, Laplace, KrichevskyTrofimov, BraessSauer, GoodTuring };

struct Estimator {
    EstimatorKind kind = EstimatorKind::Empirical;
    double b = 0.0;

    /// Accepts `empirical`, `laplace`, `kt`, `braess-sauer`, `good-turing`, `add:<b>`.
    static Estimator parse(std::string_view name) {
        if (name == "empirical") return {EstimatorKind::Empirical, 0.0};
        if (name == "laplace") return {EstimatorKind::Laplace, 1.0};
        if (name == "kt") return {EstimatorKind::KrichevskyTrofimov, 0.5};
        if (name == "braess-sauer") return {EstimatorKind::BraessSauer, 0.0};
        if (name == "good-turing") return {EstimatorKind::GoodTuring, 0.0};
        if (name.starts_with("add:")) {
            const std::string rest(name.substr(4));
            std::size_t used = 0;
            double b = 0.0;
            try {
                b = std::stod(rest, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (rest.empty() || used != rest.size() || !(b > 0.0) || !std::isfinite(b)) {
                throw DomainError("add-constant needs a positive number, got '" + rest + "'");
            }
            return {EstimatorKind::AddConstant, b};
        }
        throw DomainError("unknown estimator '" + std::string(name) + "'");
    }

    std::string name() const {
        switch (kind) {
            case EstimatorKind::Empirical: return "empirical";
            case EstimatorKind::Laplace: return "laplace";
            case EstimatorKind::KrichevskyTrofimov: return "kt";
            case EstimatorKind::BraessSauer: return "braess-sauer";
            case EstimatorKind::GoodTuring: return "good-turing";
            case EstimatorKind::AddConstant: {
                std::string s = std::to_string(b);
                s.erase(s.find_last_not_of('0') + 1);
                if (!s.empty() && s.back() == '.') s.pop_back();
                return "add:" + s;
            }
        }
        return "?";
    }

    DiscreteDistribution operator()(const Histogram& h) const {
        switch (kind) {
            case EstimatorKind::Empirical: return empirical(h);
            case EstimatorKind::AddConstant:
            case EstimatorKind::Laplace:
            case EstimatorKind::KrichevskyTrofimov: return add_constant(h, b);
            case EstimatorKind::BraessSauer: return braess_sauer(h);
            case EstimatorKind::GoodTuring: return good_turing(h);
        }
        throw DomainError("unknown estimator");
    }
};

}  // namespace divfront
