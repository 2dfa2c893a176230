#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "divfront/distribution.hpp"
#include "divfront/divergence.hpp"
#include "divfront/errors.hpp"
#include "divfront/estimators.hpp"
#include "divfront/generators.hpp"
#include "divfront/point.hpp"
#include "divfront/rng.hpp"

namespace divfront {

/// Maps each of k atoms to one of `bins` cells.
struct Partition {
    std::vector<std::size_t> assignment;
    std::size_t bins = 0;

    std::size_t size() const noexcept { return assignment.size(); }

    void validate() const {
        std::vector<bool> used(bins, false);
        for (auto b : assignment) {
            if (b >= bins) throw InputError("partition bin index out of range");
            used[b] = true;
        }
        if (std::find(used.begin(), used.end(), false) != used.end()) throw InputError("partition has an empty bin");
    }
};

inline DiscreteDistribution quantize_distribution(const DiscreteDistribution& p, const Partition& s) {
    if (s.size() != p.size()) {
        throw ShapeError("partition covers " + std::to_string(s.size()) + " atoms, distribution has " +
                         std::to_string(p.size()));
    }
    std::vector<double> m(s.bins, 0.0);
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (s.assignment[a] >= s.bins) throw InputError("partition bin index out of range");
        m[s.assignment[a]] += p[a];
    }
    return DiscreteDistribution::from_weights(m);
}

/// Contiguous blocks, the first k mod m of size ceil(k/m), the rest floor(k/m).
inline Partition uniform_partition(std::size_t k, std::size_t m) {
    if (m == 0 || m > k) throw DomainError("uniform partition needs 1 <= m <= k");
    Partition s{std::vector<std::size_t>(k), m};
    const std::size_t base = k / m;
    const std::size_t extra = k % m;
    std::size_t atom = 0;
    for (std::size_t b = 0; b < m; ++b) {
        const std::size_t len = base + (b < extra ? 1 : 0);
        for (std::size_t j = 0; j < len; ++j) s.assignment[atom++] = b;
    }
    return s;
}

/// Greedy frontier-integral quantizer. Live atoms (P or Q positive) are sorted
/// by P/Q (Q = 0 counts as +inf, ties by index); starting from one block, the
/// cut that most increases FI of the quantized pair is added m - 1 times,
/// preferring the smallest position in the sorted order on ties. Atoms with
/// P = Q = 0 join bin 0. Bins are numbered in ratio order.
inline Partition greedy_partition(const DiscreteDistribution& p, const DiscreteDistribution& q, std::size_t m) {
    require_same_shape(p, q);
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] > 0.0 || q[a] > 0.0) order.push_back(a);
    }
    if (m < 2 || m > order.size()) {
        throw DomainError("greedy partition needs 2 <= m <= number of atoms with positive mass (" +
                          std::to_string(order.size()) + ")");
    }
    // Q = 0 sorts after every finite ratio.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const bool inf_a = q[a] == 0.0;
        const bool inf_b = q[b] == 0.0;
        if (inf_a || inf_b) return !inf_a && inf_b;
        return p[a] / q[a] < p[b] / q[b];
    });

    const std::size_t n = order.size();
    std::vector<double> cp(n + 1, 0.0);
    std::vector<double> cq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        cp[i + 1] = cp[i] + p[order[i]];
        cq[i + 1] = cq[i] + q[order[i]];
    }
    auto block_fi = [&](std::size_t lo, std::size_t hi) {
        return detail::frontier_integral_term(cp[hi] - cp[lo], cq[hi] - cq[lo]);
    };

    // cuts[i] = true means a block boundary before sorted position i.
    std::vector<bool> cuts(n + 1, false);
    cuts[0] = cuts[n] = true;
    for (std::size_t step = 1; step < m; ++step) {
        double best_gain = -std::numeric_limits<double>::infinity();
        std::size_t best_cut = 0;
        std::size_t lo = 0;
        for (std::size_t hi = 1; hi <= n; ++hi) {
            if (!cuts[hi]) continue;
            const double whole = block_fi(lo, hi);
            for (std::size_t c = lo + 1; c < hi; ++c) {
                const double gain = block_fi(lo, c) + block_fi(c, hi) - whole;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_cut = c;
                }
            }
            lo = hi;
        }
        cuts[best_cut] = true;
    }

    Partition s{std::vector<std::size_t>(p.size(), 0), m};
    std::size_t bin = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && cuts[i]) ++bin;
        s.assignment[order[i]] = bin;
    }
    return s;
}

/// Level-set partition with guaranteed error (f(0) + f*(0)) / (m/2).
/// Atoms with P <= Q are leveled by f(P/Q) / f(0) into m/2 bins, the rest by
/// f*(Q/P) / f*(0) into another m/2 bins; empty bins are dropped, so the
/// returned partition can have fewer than m bins.
inline Partition oracle_partition(const GeneratorFamily& family, const DiscreteDistribution& p,
                                  const DiscreteDistribution& q, std::size_t m) {
    require_same_shape(p, q);
    if (m < 2 || m % 2 != 0) throw DomainError("oracle partition needs an even m >= 2");
    const double f0 = generator_value(family, 0.0);
    const double fs0 = conjugate_value(family, 0.0);
    if (!std::isfinite(f0) || !std::isfinite(fs0)) {
        throw UnsupportedFamily("oracle partition needs finite f(0) and f*(0): " + family.name());
    }
    const std::size_t half = m / 2;
    auto level = [&](double value, double top) -> std::size_t {
        if (!(top > 0.0)) return 0;
        const double scaled = std::floor(value * static_cast<double>(half) / top);
        if (!(scaled > 0.0)) return 0;
        return std::min(half - 1, static_cast<std::size_t>(scaled));
    };

    std::vector<std::size_t> raw(p.size());
    for (std::size_t a = 0; a < p.size(); ++a) {
        if (p[a] <= q[a]) {
            const double t = q[a] > 0.0 ? p[a] / q[a] : 1.0;
            raw[a] = level(generator_value(family, t), f0);
        } else {
            raw[a] = half + level(conjugate_value(family, q[a] / p[a]), fs0);
        }
    }
    std::vector<std::size_t> relabel(m, m);
    for (auto r : raw) relabel[r] = 0;
    std::size_t bins = 0;
    for (auto& r : relabel) {
        if (r == 0) r = bins++;
    }
    Partition s{std::vector<std::size_t>(p.size()), bins};
    for (std::size_t a = 0; a < p.size(); ++a) s.assignment[a] = relabel[raw[a]];
    return s;
}

struct CentroidModel {
    std::vector<Point2> centroids;
    double inertia = 0.0;
    std::vector<double> inertia_trace;
    std::size_t iterations = 0;
};

namespace detail {

inline std::size_t nearest_centroid(const Point2& x, std::span<const Point2> centroids) {
    std::size_t best = 0;
    double best_d = squared_distance(x, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

}  // namespace detail

/// Lloyd's algorithm with D^2 (k-means++) seeding. Stops after `max_iters`
/// rounds or once no assignment changes; an emptied cluster keeps its
/// previous centroid.
inline CentroidModel kmeans(std::span<const Point2> points, std::size_t m, std::size_t max_iters, std::uint64_t seed) {
    const std::size_t n = points.size();
    if (m == 0) throw DomainError("kmeans needs m >= 1");
    if (n < m) throw InputError("kmeans needs at least as many points as clusters");
    Rng rng(seed);

    CentroidModel model;
    model.centroids.reserve(m);
    model.centroids.push_back(points[rng.below(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], model.centroids[0]);
    while (model.centroids.size() < m) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = n - 1;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        model.centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
    }

    std::vector<std::size_t> assign(n, m);
    std::vector<double> sx(m);
    std::vector<double> sy(m);
    std::vector<std::size_t> cnt(m);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        std::size_t changed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = detail::nearest_centroid(points[i], model.centroids);
            changed += (c != assign[i]);
            assign[i] = c;
        }
        if (changed == 0) break;
        std::fill(sx.begin(), sx.end(), 0.0);
        std::fill(sy.begin(), sy.end(), 0.0);
        std::fill(cnt.begin(), cnt.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sx[assign[i]] += points[i].x;
            sy[assign[i]] += points[i].y;
            ++cnt[assign[i]];
        }
        for (std::size_t c = 0; c < m; ++c) {
            if (cnt[c] > 0) {
                model.centroids[c] = {sx[c] / static_cast<double>(cnt[c]), sy[c] / static_cast<double>(cnt[c])};
            }
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) inertia += squared_distance(points[i], model.centroids[assign[i]]);
        model.inertia_trace.push_back(inertia);
        model.iterations = iter + 1;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        inertia += squared_distance(points[i], model.centroids[detail::nearest_centroid(points[i], model.centroids)]);
    }
    model.inertia = inertia;
    return model;
}

/// Nearest-centroid counts (ties to the lowest index) as a histogram over the centroids.
inline Histogram assign_to_centroids(std::span<const Point2> points, const CentroidModel& model) {
    if (model.centroids.empty()) throw InputError("centroid model is empty");
    std::vector<std::uint64_t> counts(model.centroids.size(), 0);
    for (const auto& x : points) ++counts[detail::nearest_centroid(x, model.centroids)];
    return Histogram(std::move(counts));
}

}  // namespace divfront
