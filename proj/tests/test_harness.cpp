#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "divfront/harness.hpp"

using namespace divfront;
using nlohmann::json;

namespace {

json stat_config() {
    return json{{"experiment", "stat_error"},
                {"p_spec", "zipf:2"},
                {"q_spec", "zipf:1"},
                {"sweep", {{"name", "n"}, {"values", {100, 400}}}},
                {"fixed", {{"k", 50}}},
                {"trials", 20},
                {"base_seed", 9}};
}

std::string csv_of(const ErrorReport& r) {
    std::ostringstream os;
    write_report_csv(os, r);
    return os.str();
}

std::string config_error_field(const json& j) {
    try {
        ExperimentConfig::from_json(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST(Config, DefaultsAndParams) {
    const auto c = ExperimentConfig::from_json(stat_config());
    EXPECT_EQ(c.experiment, ExperimentKind::StatError);
    EXPECT_EQ(c.trials, 20u);
    EXPECT_EQ(c.lambda0, 0.01);
    EXPECT_EQ(c.bound_scale, 1.0);
    ASSERT_EQ(c.estimators.size(), 1u);
    EXPECT_EQ(c.estimators[0].name(), "empirical");
    EXPECT_EQ(c.metrics, std::vector<Metric>{Metric::FiAbsError});
    EXPECT_EQ(c.param("n", 400), 400.0);
    EXPECT_EQ(c.param("k", 400), 50.0);
    EXPECT_THROW(c.param("r", 1), ConfigError);

    auto j = stat_config();
    j["experiment"] = "smoothing";
    j.erase("trials");
    const auto s = ExperimentConfig::from_json(j);
    EXPECT_EQ(s.trials, 100u);
    EXPECT_EQ(s.estimators.size(), 5u);
}

TEST(Config, RejectionsNameTheField) {
    auto j = stat_config();
    j["bogus"] = 1;
    EXPECT_EQ(config_error_field(j), "bogus");

    j = stat_config();
    j["sweep"]["values"] = {400, 100};
    EXPECT_EQ(config_error_field(j), "sweep.values");

    j = stat_config();
    j["trials"] = 0;
    EXPECT_EQ(config_error_field(j), "trials");

    j = stat_config();
    j.erase("fixed");
    EXPECT_EQ(config_error_field(j), "fixed.k");

    j = stat_config();
    j["p_spec"] = "gauss:0,0,1";
    EXPECT_EQ(config_error_field(j), "p_spec");

    j = stat_config();
    j["q_spec"] = "zipf:-3";
    EXPECT_EQ(config_error_field(j), "q_spec");

    j = stat_config();
    j["estimators"] = {"empirical", "mle"};
    EXPECT_EQ(config_error_field(j), "estimators");

    j = stat_config();
    j["metrics"] = {"tv"};
    EXPECT_EQ(config_error_field(j), "metrics");

    j = stat_config();
    j["sweep"]["values"] = {2, 100};
    EXPECT_EQ(config_error_field(j), "sweep.values");

    j = stat_config();
    j["experiment"] = "continuous_k_rule";
    EXPECT_EQ(config_error_field(j), "p_spec");

    j = stat_config();
    j["experiment"] = "nope";
    EXPECT_EQ(config_error_field(j), "experiment");

    EXPECT_EQ(config_error_field(json::array()), "<root>");
}

TEST(Config, QuantizerChecks) {
    json j{{"experiment", "quantizer"},
           {"p_spec", "zipf:1"},
           {"q_spec", "zipf:2"},
           {"sweep", {{"name", "bins"}, {"values", {2, 4}}}},
           {"fixed", {{"k", 20}}}};
    EXPECT_NO_THROW(ExperimentConfig::from_json(j));
    j["sweep"]["values"] = {2, 3};
    EXPECT_EQ(config_error_field(j), "sweep.values");
    j["sweep"]["values"] = {2, 22};
    EXPECT_EQ(config_error_field(j), "sweep.values");
    j["sweep"]["values"] = {2, 4};
    j["q_spec"] = "zipf:1";
    EXPECT_EQ(config_error_field(j), "q_spec");
}

TEST(MeanStderr, SampleStandardDeviationOverRootN) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    const auto ms = mean_stderr(xs);
    EXPECT_DOUBLE_EQ(ms.mean, 2.5);
    EXPECT_DOUBLE_EQ(ms.stderr_, std::sqrt(5.0 / 3.0 / 4.0));
    EXPECT_EQ(mean_stderr(std::vector<double>{7.0}).stderr_, 0.0);
}

TEST(LoglogSlope, Examples) {
    std::vector<double> xs{1.0, 2.0, 5.0, 10.0, 100.0};
    std::vector<double> sq;
    std::vector<double> inv_root;
    std::vector<double> flat(xs.size(), 3.0);
    for (double x : xs) {
        sq.push_back(x * x);
        inv_root.push_back(4.0 / std::sqrt(x));
    }
    EXPECT_NEAR(loglog_slope(xs, sq), 2.0, 1e-14);
    EXPECT_NEAR(loglog_slope(xs, inv_root), -0.5, 1e-14);
    EXPECT_NEAR(loglog_slope(xs, flat), 0.0, 1e-15);
    flat[2] = 0.0;
    EXPECT_THROW(loglog_slope(xs, flat), DomainError);
    EXPECT_THROW(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
    EXPECT_THROW(loglog_slope(xs, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST(RunTrials, OrderedResultsAndErrorPropagation) {
    const std::function<std::size_t(std::size_t)> square = [](std::size_t t) { return t * t; };
    const auto one = run_trials<std::size_t>(50, 1, square);
    const auto many = run_trials<std::size_t>(50, 8, square);
    EXPECT_EQ(one, many);
    EXPECT_EQ(many[7], 49u);
    const std::function<int(std::size_t)> fail = [](std::size_t t) -> int {
        if (t == 13) throw InputError("trial 13");
        return 0;
    };
    EXPECT_THROW(run_trials<int>(40, 4, fail), InputError);
    EXPECT_THROW(run_trials<int>(40, 1, fail), InputError);
}

TEST(StatError, PointMassHasZeroError) {
    auto j = stat_config();
    j["p_spec"] = "zipf:0";
    j["q_spec"] = "zipf:0";
    j["fixed"]["k"] = 1;
    j["metrics"] = {"fi_abs_error", "frontier_sup_error"};
    const auto r = run_stat_error(ExperimentConfig::from_json(j));
    ASSERT_EQ(r.rows.size(), 4u);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.mean, 0.0);
        EXPECT_EQ(row.stderr_, 0.0);
        EXPECT_EQ(row.trials, 20u);
    }
}

TEST(StatError, RowsAndBounds) {
    auto j = stat_config();
    j["bound_scale"] = 0.5;
    const auto c = ExperimentConfig::from_json(j);
    const auto r = run_stat_error(c);
    ASSERT_EQ(r.rows.size(), 2u);
    const auto [p, q] = materialize_pair(c, 50);
    EXPECT_EQ(r.rows[0].sweep_name, "n");
    EXPECT_EQ(r.rows[0].sweep_value, 100.0);
    EXPECT_EQ(r.rows[0].estimator, "empirical");
    EXPECT_EQ(r.rows[0].metric, "fi_abs_error");
    EXPECT_DOUBLE_EQ(r.rows[0].free_bound, 0.5 * simplified_bound(50, 100));
    EXPECT_DOUBLE_EQ(r.rows[1].oracle_bound, 0.5 * oracle_plot_bound(p, q, 400));
    EXPECT_GT(r.rows[0].mean, r.rows[1].mean);
    for (const auto& row : r.rows) {
        EXPECT_GE(row.mean, 0.0);
        EXPECT_GE(row.stderr_, 0.0);
    }
}

TEST(StatError, ReproducesByHand) {
    // Trial t draws n points from P and then n from Q on substream (seed, t).
    auto j = stat_config();
    j["trials"] = 3;
    const auto c = ExperimentConfig::from_json(j);
    const auto r = run_stat_error(c);
    const auto [p, q] = materialize_pair(c, 50);
    std::vector<double> err;
    for (std::size_t t = 0; t < 3; ++t) {
        Rng rng = Rng::substream(9, t);
        const auto hp = histogram(sample_discrete(p, 100, rng), 50);
        const auto hq = histogram(sample_discrete(q, 100, rng), 50);
        err.push_back(std::abs(frontier_integral_closed(empirical(hp), empirical(hq)) - frontier_integral_closed(p, q)));
    }
    EXPECT_EQ(r.rows[0].mean, mean_stderr(err).mean);
    EXPECT_EQ(r.rows[0].stderr_, mean_stderr(err).stderr_);
}

TEST(StatError, DeterministicAcrossThreadCounts) {
    auto j = stat_config();
    j["metrics"] = {"fi_abs_error", "frontier_sup_error"};
    j["estimators"] = {"empirical", "kt", "good-turing"};
    const auto c = ExperimentConfig::from_json(j);
    const auto a = csv_of(run_stat_error(c, 1));
    EXPECT_EQ(a, csv_of(run_stat_error(c, 1)));
    EXPECT_EQ(a, csv_of(run_stat_error(c, 8)));
    EXPECT_EQ(report_to_json(run_stat_error(c, 3)).dump(), report_to_json(run_stat_error(c, 1)).dump());
    j["base_seed"] = 10;
    EXPECT_NE(a, csv_of(run_stat_error(ExperimentConfig::from_json(j), 1)));
}

TEST(Smoothing, HugeSampleDrivesEveryErrorToZero) {
    json j{{"experiment", "smoothing"},
           {"p_spec", "zipf:0"},
           {"q_spec", "zipf:0"},
           {"sweep", {{"name", "n"}, {"values", {200000}}}},
           {"fixed", {{"k", 10}}},
           {"trials", 5}};
    const auto r = run_smoothing(ExperimentConfig::from_json(j));
    ASSERT_EQ(r.rows.size(), 5u);
    for (const auto& row : r.rows) EXPECT_LT(row.mean, 1e-4) << row.estimator;
}

TEST(Smoothing, PairedTrialsShareSamples) {
    // With one estimator listed twice, the two columns must agree bit-for-bit.
    json j{{"experiment", "smoothing"},
           {"p_spec", "zipf:1"},
           {"q_spec", "dir:0.5"},
           {"sweep", {{"name", "k"}, {"values", {20, 40}}}},
           {"fixed", {{"n", 60}}},
           {"estimators", {"kt", "laplace", "kt"}},
           {"trials", 10}};
    const auto r = run_smoothing(ExperimentConfig::from_json(j));
    ASSERT_EQ(r.rows.size(), 6u);
    EXPECT_EQ(r.rows[0].mean, r.rows[2].mean);
    EXPECT_NE(r.rows[0].mean, r.rows[1].mean);
    EXPECT_EQ(r.rows[3].mean, r.rows[5].mean);
}

TEST(Smoothing, DirichletPairIsFixedPerConfiguration) {
    json j{{"experiment", "smoothing"},
           {"p_spec", "dir:0.5"},
           {"q_spec", "dir:0.5"},
           {"sweep", {{"name", "n"}, {"values", {10, 20}}}},
           {"fixed", {{"k", 30}}},
           {"base_seed", 3}};
    const auto c = ExperimentConfig::from_json(j);
    const auto a = materialize_pair(c, 30);
    const auto b = materialize_pair(c, 30);
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_FALSE(a.first == a.second);
}

TEST(Quantizer, StrategiesAndGuarantee) {
    json j{{"experiment", "quantizer"},
           {"p_spec", "zipf:1"},
           {"q_spec", "zipf:2"},
           {"sweep", {{"name", "bins"}, {"values", {2, 4, 8, 16, 32, 64}}}},
           {"fixed", {{"k", 600}}}};
    const auto r = run_quantizer(ExperimentConfig::from_json(j));
    ASSERT_EQ(r.rows.size(), 18u);
    for (std::size_t i = 0; i < r.rows.size(); i += 3) {
        EXPECT_EQ(r.rows[i].estimator, "uniform");
        EXPECT_EQ(r.rows[i + 1].estimator, "greedy");
        EXPECT_EQ(r.rows[i + 2].estimator, "oracle");
        const double bins = r.rows[i].sweep_value;
        EXPECT_LE(r.rows[i + 2].mean, 1.0 / std::floor(bins / 2.0));
        EXPECT_EQ(r.rows[i].trials, 1u);
        EXPECT_EQ(r.rows[i].free_bound, quantization_bound(GeneratorFamily::frontier_integral(), bins));
    }
}

TEST(Quantizer, FullResolutionIsExact) {
    json j{{"experiment", "quantizer"},
           {"p_spec", "zipf:1"},
           {"q_spec", "step"},
           {"sweep", {{"name", "bins"}, {"values", {20}}}},
           {"fixed", {{"k", 20}}}};
    for (const auto& row : run_quantizer(ExperimentConfig::from_json(j)).rows) {
        if (row.estimator != "oracle") {
            EXPECT_LE(row.mean, 1e-12) << row.estimator;
        }
    }
}

TEST(ContinuousKRule, CellRule) {
    EXPECT_EQ(k_rule_cells(1000, 3.0), 10u);
    EXPECT_EQ(k_rule_cells(10000, 2.0), 100u);
    EXPECT_EQ(k_rule_cells(10000, 3.0), 22u);
    EXPECT_EQ(k_rule_cells(10, 100.0), 1u);
}

TEST(ContinuousKRule, IdenticalGaussiansShrinkWithN) {
    json j{{"experiment", "continuous_k_rule"},
           {"p_spec", "gauss:0,0,1"},
           {"q_spec", "gauss:0,0,1"},
           {"sweep", {{"name", "n"}, {"values", {200, 3000}}}},
           {"fixed", {{"r", 3}}},
           {"trials", 6},
           {"base_seed", 5}};
    const auto c = ExperimentConfig::from_json(j);
    const auto r = run_continuous_k_rule(c, 1, 64);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_GT(r.rows[0].mean, r.rows[1].mean);
    EXPECT_EQ(csv_of(r), csv_of(run_continuous_k_rule(c, 4, 64)));
}

TEST(Report, CsvAndJsonAgree) {
    ErrorReport r;
    r.rows.push_back({"n", 100, "kt", "fi_abs_error", 0.125, 0.01, 7, std::numeric_limits<double>::infinity(), 0.5});
    const auto text = csv_of(r);
    EXPECT_EQ(text,
              "sweep_name,sweep_value,estimator,metric,mean,stderr,trials,free_bound,oracle_bound\n"
              "n,100,kt,fi_abs_error,0.125,0.01,7,inf,0.5\n");
    const auto j = report_to_json(r);
    ASSERT_EQ(j.size(), 1u);
    EXPECT_EQ(j[0]["free_bound"], "inf");
    EXPECT_EQ(j[0]["stderr"], 0.01);
    EXPECT_EQ(j[0]["trials"], 7);
}
