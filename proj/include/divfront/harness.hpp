#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"

#include "divfront/bounds.hpp"
#include "divfront/distribution.hpp"
#include "divfront/divergence.hpp"
#include "divfront/errors.hpp"
#include "divfront/estimators.hpp"
#include "divfront/io.hpp"
#include "divfront/quantize.hpp"
#include "divfront/rng.hpp"
#include "divfront/synth.hpp"

namespace divfront {

enum class ExperimentKind { StatError, Smoothing, Quantizer, ContinuousKRule };
enum class Metric { FiAbsError, FrontierSupError };

inline std::string metric_name(Metric m) {
    return m == Metric::FiAbsError ? "fi_abs_error" : "frontier_sup_error";
}

inline std::string experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::StatError: return "stat_error";
        case ExperimentKind::Smoothing: return "smoothing";
        case ExperimentKind::Quantizer: return "quantizer";
        case ExperimentKind::ContinuousKRule: return "continuous_k_rule";
    }
    return "?";
}

struct Sweep {
    std::string name;
    std::vector<double> values;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::StatError;
    std::string p_spec;
    std::string q_spec;
    Sweep sweep;
    std::map<std::string, double> fixed;
    std::vector<Estimator> estimators;
    std::size_t trials = 100;
    std::vector<Metric> metrics{Metric::FiAbsError};
    double lambda0 = 0.01;
    std::uint64_t base_seed = 0;
    double bound_scale = 1.0;

    /// Parses and validates a JSON config; ConfigError names the bad field.
    static ExperimentConfig from_json(const nlohmann::json& j);

    /// Value of a sweep-or-fixed parameter at the given sweep value.
    double param(const std::string& name, double sweep_value) const {
        if (sweep.name == name) return sweep_value;
        const auto it = fixed.find(name);
        if (it == fixed.end()) throw ConfigError("fixed." + name, "required");
        return it->second;
    }
};

struct ReportRow {
    std::string sweep_name;
    double sweep_value = 0.0;
    std::string estimator;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t trials = 0;
    double free_bound = 0.0;
    double oracle_bound = 0.0;
};

struct ErrorReport {
    std::vector<ReportRow> rows;
};

namespace detail {

inline const std::vector<std::string>& config_fields() {
    static const std::vector<std::string> fields{"experiment", "p_spec",  "q_spec",     "sweep",     "fixed",      "estimators",
                                                 "trials",     "metrics", "lambda0",    "base_seed", "bound_scale"};
    return fields;
}

inline bool is_integral(double v) { return std::isfinite(v) && v == std::floor(v); }

inline void require_integer_param(const ExperimentConfig& c, const std::string& name, double minimum) {
    auto check = [&](double v, const std::string& field) {
        if (!is_integral(v) || v < minimum) {
            throw ConfigError(field, name + " must be an integer >= " + format_short(minimum));
        }
    };
    if (c.sweep.name == name) {
        for (double v : c.sweep.values) check(v, "sweep.values");
    } else {
        const auto it = c.fixed.find(name);
        if (it == c.fixed.end()) throw ConfigError("fixed." + name, "required when sweeping " + c.sweep.name);
        check(it->second, "fixed." + name);
    }
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    using nlohmann::json;
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        const auto& f = detail::config_fields();
        if (std::find(f.begin(), f.end(), key) == f.end()) throw ConfigError(key, "unknown field");
    }
    auto require = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw ConfigError(key, "required");
        return j.at(key);
    };
    auto get_string = [&](const char* key) {
        const auto& v = require(key);
        if (!v.is_string()) throw ConfigError(key, "must be a string");
        return v.get<std::string>();
    };

    ExperimentConfig c;
    const auto exp = get_string("experiment");
    if (exp == "stat_error") c.experiment = ExperimentKind::StatError;
    else if (exp == "smoothing") c.experiment = ExperimentKind::Smoothing;
    else if (exp == "quantizer") c.experiment = ExperimentKind::Quantizer;
    else if (exp == "continuous_k_rule") c.experiment = ExperimentKind::ContinuousKRule;
    else throw ConfigError("experiment", "unknown experiment '" + exp + "'");

    c.p_spec = get_string("p_spec");
    c.q_spec = get_string("q_spec");
    DistributionSpec ps;
    DistributionSpec qs;
    try {
        ps = parse_distribution_spec(c.p_spec);
    } catch (const DomainError& e) {
        throw ConfigError("p_spec", e.what());
    }
    try {
        qs = parse_distribution_spec(c.q_spec);
    } catch (const DomainError& e) {
        throw ConfigError("q_spec", e.what());
    }
    const bool continuous = c.experiment == ExperimentKind::ContinuousKRule;
    if (std::holds_alternative<ContinuousSpec>(ps) != continuous) {
        throw ConfigError("p_spec", continuous ? "continuous_k_rule needs a continuous spec (gauss:, t:)"
                                               : exp + " needs a discrete spec (zipf:, step, dir:)");
    }
    if (std::holds_alternative<ContinuousSpec>(qs) != continuous) {
        throw ConfigError("q_spec", continuous ? "continuous_k_rule needs a continuous spec (gauss:, t:)"
                                               : exp + " needs a discrete spec (zipf:, step, dir:)");
    }

    const auto& sw = require("sweep");
    if (!sw.is_object() || !sw.contains("name") || !sw.at("name").is_string()) {
        throw ConfigError("sweep.name", "must be a string");
    }
    c.sweep.name = sw.at("name").get<std::string>();
    if (!sw.contains("values") || !sw.at("values").is_array() || sw.at("values").empty()) {
        throw ConfigError("sweep.values", "must be a nonempty array of numbers");
    }
    for (const auto& v : sw.at("values")) {
        if (!v.is_number()) throw ConfigError("sweep.values", "must be numbers");
        c.sweep.values.push_back(v.get<double>());
    }
    for (std::size_t i = 1; i < c.sweep.values.size(); ++i) {
        if (!(c.sweep.values[i] > c.sweep.values[i - 1])) throw ConfigError("sweep.values", "must be strictly increasing");
    }

    if (j.contains("fixed")) {
        const auto& fx = j.at("fixed");
        if (!fx.is_object()) throw ConfigError("fixed", "must be an object of numbers");
        for (const auto& [key, v] : fx.items()) {
            if (!v.is_number()) throw ConfigError("fixed." + key, "must be a number");
            c.fixed[key] = v.get<double>();
        }
    }

    if (j.contains("estimators")) {
        const auto& es = j.at("estimators");
        if (!es.is_array() || es.empty()) throw ConfigError("estimators", "must be a nonempty array of names");
        for (const auto& e : es) {
            if (!e.is_string()) throw ConfigError("estimators", "must be strings");
            try {
                c.estimators.push_back(Estimator::parse(e.get<std::string>()));
            } catch (const DomainError& err) {
                throw ConfigError("estimators", err.what());
            }
        }
    } else if (c.experiment == ExperimentKind::Smoothing) {
        for (const char* n : {"empirical", "laplace", "kt", "braess-sauer", "good-turing"}) {
            c.estimators.push_back(Estimator::parse(n));
        }
    } else {
        c.estimators.push_back(Estimator::parse("empirical"));
    }

    if (j.contains("trials")) {
        const auto& t = j.at("trials");
        if (!t.is_number_integer() || t.get<long long>() < 1) throw ConfigError("trials", "must be an integer >= 1");
        c.trials = t.get<std::size_t>();
    }
    if (j.contains("metrics")) {
        const auto& ms = j.at("metrics");
        if (!ms.is_array() || ms.empty()) throw ConfigError("metrics", "must be a nonempty array");
        c.metrics.clear();
        for (const auto& m : ms) {
            const auto s = m.is_string() ? m.get<std::string>() : std::string();
            if (s == "fi_abs_error") c.metrics.push_back(Metric::FiAbsError);
            else if (s == "frontier_sup_error") c.metrics.push_back(Metric::FrontierSupError);
            else throw ConfigError("metrics", "unknown metric '" + m.dump() + "'");
        }
    }
    if (j.contains("lambda0")) {
        const auto& l = j.at("lambda0");
        if (!l.is_number() || !(l.get<double>() > 0.0 && l.get<double>() < 0.5)) {
            throw ConfigError("lambda0", "must lie in (0, 0.5)");
        }
        c.lambda0 = l.get<double>();
    }
    if (j.contains("base_seed")) {
        const auto& s = j.at("base_seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError("base_seed", "must be a nonnegative 64-bit integer");
        }
        c.base_seed = s.get<std::uint64_t>();
    }
    if (j.contains("bound_scale")) {
        const auto& b = j.at("bound_scale");
        if (!b.is_number() || !(b.get<double>() > 0.0)) throw ConfigError("bound_scale", "must be positive");
        c.bound_scale = b.get<double>();
    }

    switch (c.experiment) {
        case ExperimentKind::StatError:
        case ExperimentKind::Smoothing:
            if (c.sweep.name != "n" && c.sweep.name != "k") throw ConfigError("sweep.name", "must be 'n' or 'k'");
            detail::require_integer_param(c, "n", 3);
            detail::require_integer_param(c, "k", 1);
            break;
        case ExperimentKind::Quantizer:
            if (c.sweep.name != "bins") throw ConfigError("sweep.name", "quantizer sweeps 'bins'");
            detail::require_integer_param(c, "bins", 2);
            detail::require_integer_param(c, "k", 2);
            for (double b : c.sweep.values) {
                if (static_cast<std::uint64_t>(b) % 2 != 0) throw ConfigError("sweep.values", "bins must be even");
                if (b > c.fixed.at("k")) throw ConfigError("sweep.values", "bins must not exceed k");
            }
            if (c.metrics != std::vector<Metric>{Metric::FiAbsError}) {
                throw ConfigError("metrics", "quantizer only reports fi_abs_error");
            }
            if (c.p_spec == c.q_spec && c.p_spec.rfind("dir:", 0) != 0) {
                throw ConfigError("q_spec", "P = Q makes every quantization error zero");
            }
            break;
        case ExperimentKind::ContinuousKRule:
            if (c.sweep.name != "r" && c.sweep.name != "n") throw ConfigError("sweep.name", "must be 'r' or 'n'");
            detail::require_integer_param(c, "n", 2);
            if (c.sweep.name == "r") {
                for (double r : c.sweep.values) {
                    if (!(r >= 1.0)) throw ConfigError("sweep.values", "r must be >= 1");
                }
            } else {
                const auto it = c.fixed.find("r");
                if (it == c.fixed.end() || !(it->second >= 1.0)) throw ConfigError("fixed.r", "required, >= 1");
            }
            if (c.metrics != std::vector<Metric>{Metric::FiAbsError}) {
                throw ConfigError("metrics", "continuous_k_rule only reports fi_abs_error");
            }
            break;
    }
    return c;
}

/// Runs `trials` independent jobs on up to `threads` workers. Results are
/// stored by trial index, so the output does not depend on scheduling.
template <class Result>
std::vector<Result> run_trials(std::size_t trials, std::size_t threads, const std::function<Result(std::size_t)>& job) {
    std::vector<Result> results(trials);
    threads = std::max<std::size_t>(1, std::min(threads, trials));
    if (threads == 1) {
        for (std::size_t t = 0; t < trials; ++t) results[t] = job(t);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t t = next.fetch_add(1);
                if (t >= trials) return;
                try {
                    results[t] = job(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(trials);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Mean and sample-sd / sqrt(count), summed in index order.
inline MeanStderr mean_stderr(std::span<const double> xs) {
    MeanStderr r;
    if (xs.empty()) return r;
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mean = sum / static_cast<double>(xs.size());
    if (xs.size() < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    r.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    return r;
}

/// Least-squares slope of ln y against ln x.
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw ShapeError("loglog_slope needs equal lengths");
    if (xs.size() < 2) throw DomainError("loglog_slope needs at least two points");
    const std::size_t n = xs.size();
    double mx = 0.0;
    double my = 0.0;
    std::vector<double> lx(n);
    std::vector<double> ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw DomainError("loglog_slope needs positive finite inputs");
        }
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (!(sxx > 0.0)) throw DomainError("loglog_slope needs at least two distinct x values");
    return sxy / sxx;
}

/// Substream reserved for drawing the (P, Q) pair of a configuration.
inline constexpr std::uint64_t kPairStream = 0xfeedfacecafebeefULL;

/// P and Q on k atoms. Dirichlet specs draw from the configuration's pair
/// substream, P first, so the pair is the same for every trial.
inline std::pair<DiscreteDistribution, DiscreteDistribution> materialize_pair(const ExperimentConfig& c, std::size_t k) {
    Rng rng = Rng::substream(c.base_seed, kPairStream);
    const auto ps = std::get<DiscreteSpec>(parse_distribution_spec(c.p_spec));
    const auto qs = std::get<DiscreteSpec>(parse_distribution_spec(c.q_spec));
    auto p = ps.materialize(k, rng);
    auto q = qs.materialize(k, rng);
    return {std::move(p), std::move(q)};
}

namespace detail {

// stat_error and smoothing share one pipeline: per trial, draw n points from
// P then n from Q on the trial substream, apply every estimator to the same
// histograms, and record every metric.
inline ErrorReport run_estimation(const ExperimentConfig& c, std::size_t threads) {
    ErrorReport report;
    const std::size_t ne = c.estimators.size();
    const std::size_t nm = c.metrics.size();
    for (double sv : c.sweep.values) {
        const auto n = static_cast<std::size_t>(c.param("n", sv));
        const auto k = static_cast<std::size_t>(c.param("k", sv));
        const auto [p, q] = materialize_pair(c, k);
        const double fi_true = frontier_integral_closed(p, q);

        auto job = [&](std::size_t trial) {
            Rng rng = Rng::substream(c.base_seed, trial);
            const auto hp = histogram(sample_discrete(p, n, rng), k);
            const auto hq = histogram(sample_discrete(q, n, rng), k);
            std::vector<double> out(ne * nm);
            for (std::size_t e = 0; e < ne; ++e) {
                const auto p_hat = c.estimators[e](hp);
                const auto q_hat = c.estimators[e](hq);
                for (std::size_t m = 0; m < nm; ++m) {
                    out[e * nm + m] = c.metrics[m] == Metric::FiAbsError
                                          ? std::abs(frontier_integral_closed(p_hat, q_hat) - fi_true)
                                          : frontier_sup_error(p, q, p_hat, q_hat, c.lambda0, 99);
                }
            }
            return out;
        };
        const auto results = run_trials<std::vector<double>>(c.trials, threads, job);

        const double free_b = simplified_bound(k, n) * c.bound_scale;
        const double oracle_b = oracle_plot_bound(p, q, n) * c.bound_scale;
        std::vector<double> column(c.trials);
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t m = 0; m < nm; ++m) {
                for (std::size_t t = 0; t < c.trials; ++t) column[t] = results[t][e * nm + m];
                const auto ms = mean_stderr(column);
                report.rows.push_back({c.sweep.name, sv, c.estimators[e].name(), metric_name(c.metrics[m]), ms.mean,
                                       ms.stderr_, c.trials, free_b, oracle_b});
            }
        }
    }
    return report;
}

}  // namespace detail

inline ErrorReport run_stat_error(const ExperimentConfig& c, std::size_t threads = 1) {
    if (c.experiment != ExperimentKind::StatError) throw ConfigError("experiment", "expected stat_error");
    return detail::run_estimation(c, threads);
}

inline ErrorReport run_smoothing(const ExperimentConfig& c, std::size_t threads = 1) {
    if (c.experiment != ExperimentKind::Smoothing) throw ConfigError("experiment", "expected smoothing");
    return detail::run_estimation(c, threads);
}

/// Deterministic: one row per (bins, strategy) with trials = 1 and both bound
/// columns set to quantization_bound(FI, bins).
inline ErrorReport run_quantizer(const ExperimentConfig& c) {
    if (c.experiment != ExperimentKind::Quantizer) throw ConfigError("experiment", "expected quantizer");
    ErrorReport report;
    const auto fi = GeneratorFamily::frontier_integral();
    for (double sv : c.sweep.values) {
        const auto bins = static_cast<std::size_t>(c.param("bins", sv));
        const auto k = static_cast<std::size_t>(c.param("k", sv));
        const auto [p, q] = materialize_pair(c, k);
        if (p == q) throw ConfigError("q_spec", "P = Q makes every quantization error zero");
        const double fi_true = frontier_integral_closed(p, q);
        const double bound = quantization_bound(fi, bins);
        const std::pair<const char*, Partition> strategies[] = {
            {"uniform", uniform_partition(k, bins)},
            {"greedy", greedy_partition(p, q, bins)},
            {"oracle", oracle_partition(fi, p, q, bins)},
        };
        for (const auto& [name, s] : strategies) {
            const double err =
                std::abs(frontier_integral_closed(quantize_distribution(p, s), quantize_distribution(q, s)) - fi_true);
            report.rows.push_back({c.sweep.name, sv, name, "fi_abs_error", err, 0.0, 1, bound, bound});
        }
    }
    return report;
}

/// Number of k-means cells for n points under the rule k = n^(1/r).
inline std::size_t k_rule_cells(std::size_t n, double r) {
    const auto m = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / r)));
    return std::clamp<std::size_t>(m, 1, 2 * n);
}

/// Per trial: n points from P and n from Q, k-means with m = round(n^(1/r))
/// cells fitted on both samples together, and the empirical FI of the cell
/// histograms against the quadrature ground truth.
inline ErrorReport run_continuous_k_rule(const ExperimentConfig& c, std::size_t threads = 1,
                                         std::size_t ground_truth_nodes = 512) {
    if (c.experiment != ExperimentKind::ContinuousKRule) throw ConfigError("experiment", "expected continuous_k_rule");
    const auto ps = std::get<ContinuousSpec>(parse_distribution_spec(c.p_spec));
    const auto qs = std::get<ContinuousSpec>(parse_distribution_spec(c.q_spec));
    const double fi_true = continuous_frontier_integral(ps, qs, ground_truth_nodes);
    ErrorReport report;
    for (double sv : c.sweep.values) {
        const auto n = static_cast<std::size_t>(c.param("n", sv));
        const double r = c.param("r", sv);
        const std::size_t m = k_rule_cells(n, r);
        auto job = [&](std::size_t trial) {
            Rng rng = Rng::substream(c.base_seed, trial);
            auto pooled = sample_continuous(ps, n, rng);
            const auto fit_q = sample_continuous(qs, n, rng);
            pooled.insert(pooled.end(), fit_q.begin(), fit_q.end());
            const auto model = kmeans(pooled, m, 100, rng.next_u64());
            const auto xp = sample_continuous(ps, n, rng);
            const auto xq = sample_continuous(qs, n, rng);
            const auto p_hat = empirical(assign_to_centroids(xp, model));
            const auto q_hat = empirical(assign_to_centroids(xq, model));
            return std::abs(frontier_integral_closed(p_hat, q_hat) - fi_true);
        };
        const auto errs = run_trials<double>(c.trials, threads, job);
        const auto ms = mean_stderr(errs);
        const double bound = total_error_bound(m, n) * c.bound_scale;
        report.rows.push_back({c.sweep.name, sv, "empirical", "fi_abs_error", ms.mean, ms.stderr_, c.trials, bound, bound});
    }
    return report;
}

inline ErrorReport run_experiment(const ExperimentConfig& c, std::size_t threads = 1) {
    switch (c.experiment) {
        case ExperimentKind::StatError: return run_stat_error(c, threads);
        case ExperimentKind::Smoothing: return run_smoothing(c, threads);
        case ExperimentKind::Quantizer: return run_quantizer(c);
        case ExperimentKind::ContinuousKRule: return run_continuous_k_rule(c, threads);
    }
    throw ConfigError("experiment", "unknown");
}

inline void write_report_csv(std::ostream& out, const ErrorReport& report) {
    out << "sweep_name,sweep_value,estimator,metric,mean,stderr,trials,free_bound,oracle_bound\n";
    for (const auto& r : report.rows) {
        out << r.sweep_name << ',' << format_double(r.sweep_value) << ',' << r.estimator << ',' << r.metric << ','
            << format_double(r.mean) << ',' << format_double(r.stderr_) << ',' << r.trials << ','
            << format_double(r.free_bound) << ',' << format_double(r.oracle_bound) << '\n';
    }
}

inline nlohmann::json report_to_json(const ErrorReport& report) {
    auto a = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json o = nlohmann::json::object();
        o["sweep_name"] = r.sweep_name;
        o["sweep_value"] = json_number(r.sweep_value);
        o["estimator"] = r.estimator;
        o["metric"] = r.metric;
        o["mean"] = json_number(r.mean);
        o["stderr"] = json_number(r.stderr_);
        o["trials"] = r.trials;
        o["free_bound"] = json_number(r.free_bound);
        o["oracle_bound"] = json_number(r.oracle_bound);
        a.push_back(std::move(o));
    }
    return a;
}

}  // namespace divfront
