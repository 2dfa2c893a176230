#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "divfront/errors.hpp"

namespace divfront {

enum class GeneratorKind {
    KL,
    InterpolatedKL,
    JS,
    SkewJS,
    FrontierIntegral,
    InterpolatedChi2,
    LeCam,
    Hellinger,
};

/// An f-divergence generator. `lambda` is only meaningful for the
/// interpolated / skew kinds and must lie strictly inside (0, 1) for them.
class GeneratorFamily {
public:
    GeneratorFamily() = default;

    explicit GeneratorFamily(GeneratorKind kind, double lambda = 0.5) : kind_(kind), lambda_(lambda) {
        if (kind_ == GeneratorKind::JS) lambda_ = 0.5;
        if (is_parameterized() && !(lambda_ > 0.0 && lambda_ < 1.0)) {
            throw DomainError("generator parameter lambda must lie in (0, 1)");
        }
    }

    static GeneratorFamily kl() { return GeneratorFamily(GeneratorKind::KL); }
    static GeneratorFamily interpolated_kl(double lambda) { return GeneratorFamily(GeneratorKind::InterpolatedKL, lambda); }
    static GeneratorFamily js() { return GeneratorFamily(GeneratorKind::JS); }
    static GeneratorFamily skew_js(double lambda) { return GeneratorFamily(GeneratorKind::SkewJS, lambda); }
    static GeneratorFamily frontier_integral() { return GeneratorFamily(GeneratorKind::FrontierIntegral); }
    static GeneratorFamily interpolated_chi2(double lambda) { return GeneratorFamily(GeneratorKind::InterpolatedChi2, lambda); }
    static GeneratorFamily le_cam() { return GeneratorFamily(GeneratorKind::LeCam); }
    static GeneratorFamily hellinger() { return GeneratorFamily(GeneratorKind::Hellinger); }

    GeneratorKind kind() const noexcept { return kind_; }
    double lambda() const noexcept { return lambda_; }

    bool is_parameterized() const noexcept {
        return kind_ == GeneratorKind::InterpolatedKL || kind_ == GeneratorKind::SkewJS ||
               kind_ == GeneratorKind::InterpolatedChi2 || kind_ == GeneratorKind::JS;
    }

    std::string name() const {
        std::ostringstream os;
        switch (kind_) {
            case GeneratorKind::KL: return "kl";
            case GeneratorKind::InterpolatedKL: os << "ikl:" << lambda_; return os.str();
            case GeneratorKind::JS: return "js";
            case GeneratorKind::SkewJS: os << "sjs:" << lambda_; return os.str();
            case GeneratorKind::FrontierIntegral: return "fi";
            case GeneratorKind::InterpolatedChi2: os << "ichi2:" << lambda_; return os.str();
            case GeneratorKind::LeCam: return "lecam";
            case GeneratorKind::Hellinger: return "hellinger";
        }
        return "?";
    }

    /// Inverse of name(): `kl`, `ikl:<l>`, `js`, `sjs:<l>`, `fi`, `ichi2:<l>`,
    /// `lecam`, `hellinger`.
    static GeneratorFamily parse(std::string_view text) {
        const auto colon = text.find(':');
        const std::string head(text.substr(0, colon));
        auto param = [&]() -> double {
            if (colon == std::string_view::npos) throw DomainError("generator '" + head + "' needs a parameter, e.g. " + head + ":0.5");
            const std::string rest(text.substr(colon + 1));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(rest, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != rest.size() || rest.empty()) throw DomainError("bad generator parameter '" + rest + "'");
            return v;
        };
        auto no_param = [&]() {
            if (colon != std::string_view::npos) throw DomainError("generator '" + head + "' takes no parameter");
        };
        if (head == "kl") { no_param(); return kl(); }
        if (head == "ikl") return interpolated_kl(param());
        if (head == "js") { no_param(); return js(); }
        if (head == "sjs") return skew_js(param());
        if (head == "fi") { no_param(); return frontier_integral(); }
        if (head == "ichi2") return interpolated_chi2(param());
        if (head == "lecam") { no_param(); return le_cam(); }
        if (head == "hellinger") { no_param(); return hellinger(); }
        throw DomainError("unknown generator '" + std::string(text) + "'");
    }

    friend bool operator==(const GeneratorFamily&, const GeneratorFamily&) = default;

private:
    GeneratorKind kind_ = GeneratorKind::FrontierIntegral;
    double lambda_ = 0.5;
};

/// Regularity constants C0, C0*, C1, C1*, C2, C2* of a generator.
struct RegularityConstants {
    double c0 = 0.0;
    double c0_star = 0.0;
    double c1 = 0.0;
    double c1_star = 0.0;
    double c2 = 0.0;
    double c2_star = 0.0;

    bool all_finite() const noexcept {
        return std::isfinite(c0) && std::isfinite(c0_star) && std::isfinite(c1) && std::isfinite(c1_star) &&
               std::isfinite(c2) && std::isfinite(c2_star);
    }
    /// C1 + C1*.
    double lipschitz_sum() const noexcept { return c1 + c1_star; }
    /// max(C2, C0*) + max(C2*, C0).
    double offset_sum() const noexcept { return std::max(c2, c0_star) + std::max(c2_star, c0); }
};

namespace detail {

// f_FI(1 + d) = sum_{j>=2} (-1)^j d^j / (j (j + 1)), truncated after d^20; used
// for |d| < 0.05, where the closed form loses digits to cancellation.
template <std::floating_point T>
T frontier_generator_series(T d) {
    T term = d * d;
    T sum = 0;
    for (int j = 2; j <= 20; ++j) {
        const T sign = (j % 2 == 0) ? T(1) : T(-1);
        sum += sign * term / (T(j) * T(j + 1));
        term *= d;
    }
    return sum;
}

inline constexpr double kFrontierSeriesRadius = 0.05;

template <std::floating_point T>
T frontier_generator(T t) {
    if (t == 0) return T(0.5);
    const T d = t - 1;
    if (std::abs(d) < T(kFrontierSeriesRadius)) return frontier_generator_series(d);
    return (t + 1) / 2 - std::log(t) * (t / d);
}

template <std::floating_point T>
void check_argument(T t) {
    if (!std::isfinite(t) || t < 0) throw DomainError("generator argument must be finite and >= 0");
}

}  // namespace detail

/// f(t) for the family; t = 0 returns the limit f(0+).
template <std::floating_point T>
T generator_value(const GeneratorFamily& family, T t) {
    detail::check_argument(t);
    const T lam = T(family.lambda());
    const T lbar = 1 - lam;
    switch (family.kind()) {
        case GeneratorKind::KL:
            if (t == 0) return T(1);
            return t * std::log(t) - t + 1;
        case GeneratorKind::InterpolatedKL:
            if (t == 0) return lbar;
            return t * std::log(t / (lam * t + lbar)) - lbar * (t - 1);
        case GeneratorKind::JS:
        case GeneratorKind::SkewJS: {
            const T mix = lam * t + lbar;
            if (t == 0) return -lbar * std::log(lbar);
            return lam * t * std::log(t / mix) - lbar * std::log(mix);
        }
        case GeneratorKind::FrontierIntegral:
            return detail::frontier_generator(t);
        case GeneratorKind::InterpolatedChi2:
            return (t - 1) * (t - 1) / (lam * t + lbar);
        case GeneratorKind::LeCam:
            return (t - 1) * (t - 1) / (2 * (t + 1));
        case GeneratorKind::Hellinger: {
            const T r = 1 - std::sqrt(t);
            return r * r;
        }
    }
    return T(0);
}

/// f*(t) = t f(1/t), evaluated from its own closed form; t = 0 returns the
/// limit f*(0+), which is +inf for KL.
template <std::floating_point T>
T conjugate_value(const GeneratorFamily& family, T t) {
    detail::check_argument(t);
    const T lam = T(family.lambda());
    const T lbar = 1 - lam;
    switch (family.kind()) {
        case GeneratorKind::KL:
            if (t == 0) return std::numeric_limits<T>::infinity();
            return -std::log(t) + t - 1;
        case GeneratorKind::InterpolatedKL:
            return -std::log(lbar * t + lam) + lbar * (t - 1);
        case GeneratorKind::JS:
        case GeneratorKind::SkewJS: {
            // f*_{JS,lambda} = f_{JS,1-lambda}
            const T mix = lbar * t + lam;
            if (t == 0) return -lam * std::log(lam);
            return lbar * t * std::log(t / mix) - lam * std::log(mix);
        }
        case GeneratorKind::FrontierIntegral:
            return detail::frontier_generator(t);
        case GeneratorKind::InterpolatedChi2:
            return (t - 1) * (t - 1) / (lbar * t + lam);
        case GeneratorKind::LeCam:
            return (t - 1) * (t - 1) / (2 * (t + 1));
        case GeneratorKind::Hellinger: {
            const T r = 1 - std::sqrt(t);
            return r * r;
        }
    }
    return T(0);
}

inline double generator_value(const GeneratorFamily& family, double t) { return generator_value<double>(family, t); }
inline double conjugate_value(const GeneratorFamily& family, double t) { return conjugate_value<double>(family, t); }

/// psi(p, q) = q f(p/q) with the conventions psi(0,0) = 0, psi(p,0) = p f*(0),
/// psi(0,q) = q f(0). Returns +inf when the convention value is infinite.
inline double psi(const GeneratorFamily& family, double p, double q) {
    if (!(p >= 0.0) || !(q >= 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
        throw DomainError("psi arguments must be finite and >= 0");
    }
    if (p == 0.0 && q == 0.0) return 0.0;
    if (q == 0.0) return p * conjugate_value(family, 0.0);
    if (p == 0.0) return q * generator_value(family, 0.0);
    if (p > q) return p * conjugate_value(family, q / p);
    return q * generator_value(family, p / q);
}

/// The regularity constants table. Where the table leaves a cell blank (KL,
/// Hellinger) the value is derived from the generator: finite if the limit is
/// finite, +inf otherwise.
inline RegularityConstants constants(const GeneratorFamily& family) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double lam = family.lambda();
    const double lbar = 1.0 - lam;
    switch (family.kind()) {
        case GeneratorKind::KL:
            return {1.0, inf, 1.0, inf, 0.5, inf};
        case GeneratorKind::InterpolatedKL:
            return {lbar, std::log(1.0 / lam) - lbar, 1.0, lbar * lbar / lam, 0.5, lbar / (8.0 * lam)};
        case GeneratorKind::JS:
        case GeneratorKind::SkewJS:
            return {lbar * std::log(1.0 / lbar), lam * std::log(1.0 / lam), lam, lbar, lam / 2.0, lbar / 2.0};
        case GeneratorKind::FrontierIntegral:
            return {0.5, 0.5, 1.0, 1.0, 0.5, 0.5};
        case GeneratorKind::InterpolatedChi2:
            return {1.0 / lbar,
                    1.0 / lam,
                    2.0 / (lbar * lbar),
                    2.0 / (lam * lam),
                    4.0 / (27.0 * lam * lbar * lbar),
                    4.0 / (27.0 * lam * lam * lbar)};
        case GeneratorKind::LeCam:
            return {0.5, 0.5, 2.0, 2.0, 8.0 / 27.0, 8.0 / 27.0};
        case GeneratorKind::Hellinger:
            return {1.0, 1.0, inf, inf, inf, inf};
    }
    return {};
}

/// Throws UnsupportedFamily unless every regularity constant is finite.
inline RegularityConstants require_finite_constants(const GeneratorFamily& family) {
    const auto c = constants(family);
    if (!c.all_finite()) throw UnsupportedFamily("unsupported family for bounds: " + family.name());
    return c;
}

struct ConstantAudit {
    bool applicable = true;
    bool passed = true;
    std::size_t checks = 0;
    std::vector<std::string> failures;
};

/// Numerically audits the regularity constants `c` claimed for `family` on `grid`:
///   |f'(t)|    <= C1  max(1, ln 1/t)  for t in grid, t < 1
///   |f*'(t)|   <= C1* max(1, ln 1/t)  for t in grid, t < 1
///   t f''(t)/2  <= C2,  t f*''(t)/2 <= C2*  for every t in grid
///   f(0+) = C0, f*(0+) = C0*
/// Derivatives are central finite differences evaluated in long double: step
/// 1e-6 t for the first derivative, 1e-3 t for the second. Comparisons allow a
/// relative slack of 1e-5 for the finite-difference error (several constants
/// are attained exactly, either at a grid point or in the t -> 0 limit).
inline ConstantAudit verify_constants(const GeneratorFamily& family, std::span<const double> grid,
                                      const RegularityConstants& c) {
    ConstantAudit audit;
    if (!c.all_finite()) {
        audit.applicable = false;
        return audit;
    }
    using LD = long double;
    constexpr LD rel_slack = 1e-5L;
    constexpr LD abs_slack = 1e-9L;

    auto fail = [&](const std::string& what, double t, LD got, LD limit) {
        audit.passed = false;
        std::ostringstream os;
        os.precision(10);
        os << what << " at t=" << t << ": " << static_cast<double>(got) << " > " << static_cast<double>(limit);
        audit.failures.push_back(os.str());
    };
    auto check_le = [&](const std::string& what, double t, LD got, LD limit) {
        ++audit.checks;
        if (!(got <= limit * (1 + rel_slack) + abs_slack)) fail(what, t, got, limit);
    };

    struct Side {
        const char* name;
        LD c0, c1, c2;
        bool conjugate;
    };
    const Side sides[2] = {
        {"f", LD(c.c0), LD(c.c1), LD(c.c2), false},
        {"f*", LD(c.c0_star), LD(c.c1_star), LD(c.c2_star), true},
    };
    for (const auto& side : sides) {
        auto g = [&](LD t) {
            return side.conjugate ? conjugate_value<LD>(family, t) : generator_value<LD>(family, t);
        };
        ++audit.checks;
        const LD at_zero = g(0);
        if (std::abs(at_zero - side.c0) > 1e-12L * std::max<LD>(1, side.c0)) {
            fail(std::string(side.name) + "(0) vs C0", 0.0, at_zero, side.c0);
        }
        for (double tt : grid) {
            if (!(tt > 0.0) || !std::isfinite(tt)) throw DomainError("audit grid must lie in (0, inf)");
            const LD t = tt;
            if (t < 1) {
                const LD h = 1e-6L * t;
                const LD d1 = (g(t + h) - g(t - h)) / (2 * h);
                const LD envelope = side.c1 * std::max<LD>(1, std::log(1 / t));
                check_le(std::string("|") + side.name + "'|", tt, std::abs(d1), envelope);
            }
            const LD h2 = 1e-3L * t;
            const LD d2 = (g(t + h2) - 2 * g(t) + g(t - h2)) / (h2 * h2);
            check_le(std::string("t ") + side.name + "''/2", tt, t * d2 / 2, side.c2);
        }
    }
    return audit;
}

inline ConstantAudit verify_constants(const GeneratorFamily& family, std::span<const double> grid) {
    return verify_constants(family, grid, constants(family));
}

/// Log-spaced grid of `count` points over [lo, hi].
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) throw DomainError("log_grid needs 0 < lo < hi and count >= 2");
    std::vector<double> g(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

}  // namespace divfront
