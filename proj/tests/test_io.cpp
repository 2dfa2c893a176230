#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "divfront/io.hpp"

using namespace divfront;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("divfront_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& body) {
        const auto path = (dir_ / name).string();
        std::ofstream(path) << body;
        return path;
    }

    fs::path dir_;
};

std::size_t parse_error_line(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

std::vector<std::uint64_t> as_vector(const Histogram& h) { return {h.counts().begin(), h.counts().end()}; }

}  // namespace

TEST(Format, RoundTripAndInfinity) {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
        EXPECT_EQ(std::stod(format_double(v)), v);
    }
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
    EXPECT_EQ(format_short(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(format_short(8.0), "8");
    EXPECT_EQ(json_number(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_EQ(json_number(0.25), 0.25);
}

TEST(Csv, SplitTrimsFields) {
    EXPECT_EQ(csv::split(" a , b,c "), (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_EQ(csv::split("x,"), (std::vector<std::string>{"x", ""}));
}

TEST(Masses, ReadWriteRoundTrip) {
    const DiscreteDistribution p{0.1, 0.2, 0.3, 0.4};
    std::stringstream ss;
    write_masses_csv(ss, p);
    EXPECT_EQ(read_masses_csv(ss, "mem"), p);
    EXPECT_EQ(masses_from_json(masses_to_json(p)), p);
}

TEST(Masses, ToleranceAndErrors) {
    std::istringstream near("mass\n0.5\n0.5000004\n");
    const auto d = read_masses_csv(near, "near");
    EXPECT_NEAR(d[0] + d[1], 1.0, 1e-15);

    std::istringstream far("mass\n0.5\n0.6\n");
    EXPECT_THROW(read_masses_csv(far, "far"), InputError);
    std::istringstream negative("mass\n1.5\n-0.5\n");
    EXPECT_THROW(read_masses_csv(negative, "neg"), InputError);
    std::istringstream header_only("mass\n");
    EXPECT_THROW(read_masses_csv(header_only, "h"), InputError);

    std::istringstream bad("mass\n0.5\n\nabc\n");
    EXPECT_EQ(parse_error_line([&] { read_masses_csv(bad, "bad"); }), 4u);
    std::istringstream wrong_header("p\n1\n");
    EXPECT_EQ(parse_error_line([&] { read_masses_csv(wrong_header, "wh"); }), 1u);
    std::istringstream empty("");
    EXPECT_EQ(parse_error_line([&] { read_masses_csv(empty, "empty"); }), 1u);
    std::istringstream extra("mass\n0.5,1\n");
    EXPECT_EQ(parse_error_line([&] { read_masses_csv(extra, "x"); }), 2u);
    EXPECT_THROW(masses_from_json(nlohmann::json{{"a", 1}}), InputError);
    EXPECT_THROW(read_masses_csv(std::string("/nonexistent/divfront.csv")), InputError);
}

TEST_F(TempDir, IngestIdenticalFiles) {
    const auto a = write("a.csv", "atom,count\n0,3\n2,5\n");
    const auto b = write("b.csv", "atom,count\n0,3\n2,5\n");
    const auto [hp, hq] = ingest_histograms(a, b);
    EXPECT_EQ(as_vector(hp), as_vector(hq));
    EXPECT_EQ(as_vector(hp), (std::vector<std::uint64_t>{3, 0, 5}));
}

TEST_F(TempDir, IngestDisjointSupports) {
    const auto a = write("a.csv", "atom,count\n0,1\n1,2\n");
    const auto b = write("b.csv", "atom,count\n4,7\n");
    const auto [hp, hq] = ingest_histograms(a, b);
    EXPECT_EQ(as_vector(hp), (std::vector<std::uint64_t>{1, 2, 0, 0, 0}));
    EXPECT_EQ(as_vector(hq), (std::vector<std::uint64_t>{0, 0, 0, 0, 7}));
}

TEST_F(TempDir, IngestErrors) {
    const auto good = write("g.csv", "atom,count\n0,1\n");
    const auto empty = write("e.csv", "");
    EXPECT_EQ(parse_error_line([&] { ingest_histograms(good, empty); }), 1u);
    const auto bad = write("b.csv", "atom,count\n0,1\n1,-2\n");
    EXPECT_EQ(parse_error_line([&] { ingest_histograms(bad, good); }), 3u);
    const auto frac = write("f.csv", "atom,count\n0,1.5\n");
    EXPECT_EQ(parse_error_line([&] { ingest_histograms(good, frac); }), 2u);
    EXPECT_THROW(ingest_histograms(good, (dir_ / "missing.csv").string()), InputError);
}

TEST_F(TempDir, PointsAndXy) {
    const auto p = write("p.csv", "x,y\n1,2\n-0.5,3e2\n");
    const auto pts = read_points_csv(p);
    ASSERT_EQ(pts.size(), 2u);
    EXPECT_EQ(pts[1].x, -0.5);
    EXPECT_EQ(pts[1].y, 300.0);
    const auto [xs, ys] = read_xy_csv(p);
    EXPECT_EQ(xs, (std::vector<double>{1.0, -0.5}));
    const auto bad = write("bad.csv", "x,y\n1\n");
    EXPECT_EQ(parse_error_line([&] { read_points_csv(bad); }), 2u);
}

TEST(Writers, Headers) {
    std::ostringstream curve;
    write_curve_csv(curve, {{std::log(2.0), std::log(2.0), 0.5}});
    EXPECT_EQ(curve.str(), "lambda,kl_p,kl_q\n0.5,0.69314718055994529,0.69314718055994529\n");
    std::ostringstream part;
    write_partition_csv(part, Partition{{0, 1, 1}, 2});
    EXPECT_EQ(part.str(), "atom,bin\n0,0\n1,1\n2,1\n");
    std::ostringstream cent;
    CentroidModel m;
    m.centroids = {{1.0, -2.0}};
    write_centroids_csv(cent, m);
    EXPECT_EQ(cent.str(), "cx,cy\n1,-2\n");
    std::ostringstream hist;
    write_histogram_csv(hist, Histogram({4, 0}));
    EXPECT_EQ(hist.str(), "atom,count\n0,4\n1,0\n");
}
