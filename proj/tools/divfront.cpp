#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "divfront/bounds.hpp"
#include "divfront/divergence.hpp"
#include "divfront/errors.hpp"
#include "divfront/estimators.hpp"
#include "divfront/generators.hpp"
#include "divfront/harness.hpp"
#include "divfront/io.hpp"
#include "divfront/quantize.hpp"

namespace {

using namespace divfront;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Output goes to `path`, or stdout when the path is empty.
template <class Writer>
void emit(const std::string& path, Writer&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    write(out);
    if (!out) throw InputError("write to '" + path + "' failed");
}

struct FiArgs {
    std::string p_file, q_file, family = "fi";
    std::size_t nodes = 128;
    bool oracle_check = false;
};

int cmd_fi(const FiArgs& a) {
    const auto family = GeneratorFamily::parse(a.family);
    const auto p = read_masses_csv(a.p_file);
    const auto q = read_masses_csv(a.q_file);
    require_same_shape(p, q);
    const bool is_fi = family.kind() == GeneratorKind::FrontierIntegral;
    const double value = is_fi ? frontier_integral_closed(p, q) : f_divergence(family, p, q);
    if (!a.oracle_check) {
        std::cout << format_short(value) << '\n';
        return 0;
    }
    if (!is_fi) throw DomainError("--oracle-check is only available for --family fi");
    const double quad = frontier_integral_quadrature(p, q, a.nodes);
    std::cout << "closed " << format_short(value) << '\n'
              << "quadrature " << format_short(quad) << '\n'
              << "difference " << format_short(std::abs(value - quad)) << '\n';
    return 0;
}

struct FrontierArgs {
    std::string p_file, q_file, out;
    std::size_t grid = 99;
    double lambda0 = 0.01;
};

int cmd_frontier(const FrontierArgs& a) {
    if (!(a.lambda0 > 0.0 && a.lambda0 < 0.5)) throw DomainError("--lambda0 must lie in (0, 0.5)");
    if (a.grid < 1) throw DomainError("--grid must be positive");
    const auto p = read_masses_csv(a.p_file);
    const auto q = read_masses_csv(a.q_file);
    require_same_shape(p, q);
    const auto grid = closed_grid(a.lambda0, 1.0 - a.lambda0, a.grid);
    const auto curve = frontier_curve(p, q, grid);
    emit(a.out, [&](std::ostream& os) { write_curve_csv(os, curve); });
    return 0;
}

struct BoundsArgs {
    std::string family = "fi";
    std::optional<std::uint64_t> k, n, m;
    double delta = 0.05;
    double b = 0.5;
    std::string p_file, q_file;
};

int cmd_bounds(const BoundsArgs& a) {
    const auto family = GeneratorFamily::parse(a.family);
    require_finite_constants(family);
    if (!a.n) throw DomainError("--n is required");
    const std::uint64_t n = *a.n;
    const std::uint64_t m = a.m.value_or(n);
    if (a.p_file.empty() != a.q_file.empty()) throw DomainError("give both distribution files or neither");

    nlohmann::ordered_json out;
    if (a.p_file.empty()) {
        if (!a.k) throw DomainError("--k is required without distribution files");
        const auto c = constants(family);
        out["free_bound"] = plug_in_free_bound(family, *a.k, n, m);
        out["c1"] = c.lipschitz_sum();
        out["c2"] = c.offset_sum();
        out["high_prob_epsilon"] = high_prob_epsilon(family, *a.k, n, m, a.delta);
    } else {
        const auto p = read_masses_csv(a.p_file);
        const auto q = read_masses_csv(a.q_file);
        require_same_shape(p, q);
        if (a.k && *a.k != p.size()) {
            throw ShapeError("--k " + std::to_string(*a.k) + " disagrees with the " + std::to_string(p.size()) +
                             " atoms in the files");
        }
        const auto r = bound_report(family, p, q, n, m, a.b);
        out["alpha_p"] = r.alpha_p;
        out["alpha_q"] = r.alpha_q;
        out["beta_p"] = r.beta_p;
        out["beta_q"] = r.beta_q;
        out["gamma_p"] = *r.gamma_p;
        out["gamma_q"] = *r.gamma_q;
        out["oracle_bound"] = r.oracle_bound;
        out["free_bound"] = r.free_bound;
        out["c1"] = r.c1;
        out["c2"] = r.c2;
        out["high_prob_epsilon"] = high_prob_epsilon(family, p, q, n, m, a.delta);
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct QuantizeArgs {
    std::string p_file, q_file, strategy = "oracle", family = "fi", out;
    std::size_t bins = 2;
};

int cmd_quantize(const QuantizeArgs& a) {
    const auto p = read_masses_csv(a.p_file);
    const auto q = read_masses_csv(a.q_file);
    require_same_shape(p, q);
    Partition s;
    if (a.strategy == "uniform") {
        s = uniform_partition(p.size(), a.bins);
    } else if (a.strategy == "greedy") {
        s = greedy_partition(p, q, a.bins);
    } else if (a.strategy == "oracle") {
        s = oracle_partition(GeneratorFamily::parse(a.family), p, q, a.bins);
    } else {
        throw DomainError("unknown --strategy '" + a.strategy + "'");
    }
    emit(a.out, [&](std::ostream& os) { write_partition_csv(os, s); });
    return 0;
}

struct ExperimentArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
};

int cmd_experiment(const ExperimentArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw ConfigError("--config", "cannot open '" + a.config + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    auto config = ExperimentConfig::from_json(j);
    if (a.seed) config.base_seed = *a.seed;
    const auto report = run_experiment(config, a.threads);
    if (a.out.empty()) {
        write_report_csv(std::cout, report);
        return 0;
    }
    emit(a.out + ".csv", [&](std::ostream& os) { write_report_csv(os, report); });
    emit(a.out + ".json", [&](std::ostream& os) { os << report_to_json(report).dump(2) << '\n'; });
    return 0;
}

int cmd_slope(const std::string& file) {
    const auto [xs, ys] = read_xy_csv(file);
    try {
        std::cout << format_short(loglog_slope(xs, ys)) << '\n';
    } catch (const DomainError& e) {
        throw InputError(file + ": " + e.what());
    }
    return 0;
}

struct IngestArgs {
    std::string p_file, q_file, estimator = "empirical";
};

int cmd_ingest(const IngestArgs& a) {
    const auto est = Estimator::parse(a.estimator);
    const auto [hp, hq] = ingest_histograms(a.p_file, a.q_file);
    const auto p = est(hp);
    const auto q = est(hq);
    nlohmann::ordered_json out;
    out["estimator"] = est.name();
    out["k"] = hp.size();
    out["n_p"] = hp.n();
    out["n_q"] = hq.n();
    out["frontier_integral"] = frontier_integral_closed(p, q);
    out["p"] = masses_to_json(p);
    out["q"] = masses_to_json(q);
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Divergence frontiers, frontier integrals and their estimation error"};
    app.require_subcommand(1);

    FiArgs fi;
    auto* sub_fi = app.add_subcommand("fi", "Frontier integral (or another f-divergence) between two mass files");
    sub_fi->add_option("p", fi.p_file, "CSV with header 'mass'")->required();
    sub_fi->add_option("q", fi.q_file, "CSV with header 'mass'")->required();
    sub_fi->add_option("--family", fi.family, "Generator: fi, kl, js, sjs:<l>, ikl:<l>, ichi2:<l>, lecam, hellinger")
        ->capture_default_str();
    sub_fi->add_option("--nodes", fi.nodes, "Gauss-Legendre nodes for --oracle-check")->capture_default_str();
    sub_fi->add_flag("--oracle-check", fi.oracle_check, "Also print the quadrature value and the difference");

    FrontierArgs fr;
    auto* sub_fr = app.add_subcommand("frontier", "Divergence frontier curve as CSV lambda,kl_p,kl_q");
    sub_fr->add_option("p", fr.p_file, "CSV with header 'mass'")->required();
    sub_fr->add_option("q", fr.q_file, "CSV with header 'mass'")->required();
    sub_fr->add_option("--grid", fr.grid, "Number of lambda values")->capture_default_str();
    sub_fr->add_option("--lambda0", fr.lambda0, "Grid covers [lambda0, 1 - lambda0]")->capture_default_str();
    sub_fr->add_option("--out", fr.out, "Output CSV (default stdout)");

    BoundsArgs bd;
    auto* sub_bd = app.add_subcommand("bounds", "Statistical error bounds as JSON");
    sub_bd->add_option("--family", bd.family, "Generator with finite regularity constants")->capture_default_str();
    sub_bd->add_option("--k", bd.k, "Support size (required without distribution files)");
    sub_bd->add_option("--n", bd.n, "Sample size from P (>= 3)");
    sub_bd->add_option("--m", bd.m, "Sample size from Q (default n)");
    sub_bd->add_option("--delta", bd.delta, "Failure probability for high_prob_epsilon")->capture_default_str();
    sub_bd->add_option("--b", bd.b, "Add-constant b used for gamma_p, gamma_q")->capture_default_str();
    sub_bd->add_option("p", bd.p_file, "Optional CSV of P masses");
    sub_bd->add_option("q", bd.q_file, "Optional CSV of Q masses");

    QuantizeArgs qz;
    auto* sub_qz = app.add_subcommand("quantize", "Partition the support; writes CSV atom,bin");
    sub_qz->add_option("p", qz.p_file, "CSV with header 'mass'")->required();
    sub_qz->add_option("q", qz.q_file, "CSV with header 'mass'")->required();
    sub_qz->add_option("--strategy", qz.strategy, "uniform, greedy or oracle")->capture_default_str();
    sub_qz->add_option("--bins", qz.bins, "Number of bins (even for oracle)")->capture_default_str();
    sub_qz->add_option("--family", qz.family, "Generator for the oracle strategy")->capture_default_str();
    sub_qz->add_option("--out", qz.out, "Output CSV (default stdout)");

    ExperimentArgs ex;
    auto* sub_ex = app.add_subcommand("experiment", "Run a Monte Carlo experiment from a JSON config");
    sub_ex->add_option("--config", ex.config, "JSON experiment config")->required();
    sub_ex->add_option("--seed", ex.seed, "Override base_seed");
    sub_ex->add_option("--out", ex.out, "Output prefix; writes <prefix>.csv and <prefix>.json (default: CSV to stdout)");
    sub_ex->add_option("--threads", ex.threads, "Worker threads (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::string slope_file;
    auto* sub_sl = app.add_subcommand("slope", "Least-squares log-log slope of a CSV with header x,y");
    sub_sl->add_option("file", slope_file, "CSV with header 'x,y'")->required();

    IngestArgs ig;
    auto* sub_ig = app.add_subcommand("ingest", "Estimate P and Q from two atom,count histograms");
    sub_ig->add_option("p", ig.p_file, "CSV with header 'atom,count'")->required();
    sub_ig->add_option("q", ig.q_file, "CSV with header 'atom,count'")->required();
    sub_ig->add_option("--estimator", ig.estimator, "empirical, laplace, kt, braess-sauer, good-turing or add:<b>")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*sub_fi) return cmd_fi(fi);
        if (*sub_fr) return cmd_frontier(fr);
        if (*sub_bd) return cmd_bounds(bd);
        if (*sub_qz) return cmd_quantize(qz);
        if (*sub_ex) return cmd_experiment(ex);
        if (*sub_sl) return cmd_slope(slope_file);
        if (*sub_ig) return cmd_ingest(ig);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const UnsupportedFamily& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
