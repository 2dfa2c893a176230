#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "divfront/distribution.hpp"
#include "divfront/divergence.hpp"
#include "divfront/errors.hpp"
#include "divfront/estimators.hpp"
#include "divfront/point.hpp"
#include "divfront/quantize.hpp"

namespace divfront {

/// Shortest round-trip text for a double; infinities print as `inf` / `-inf`.
inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// `digits` significant digits, for human-facing output.
inline std::string format_short(double v, int digits = 12) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// JSON value for a double, with infinities as the string "inf".
inline nlohmann::json json_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

namespace csv {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Rows of a CSV file with a required header, skipping blank lines.
/// Each row carries its 1-based line number.
struct Table {
    std::string source;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

inline Table read(std::istream& in, const std::string& source, const std::vector<std::string>& header) {
    Table t{source, {}};
    std::string line;
    std::size_t lineno = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split(line);
        if (!seen_header) {
            if (fields != header) {
                std::string want;
                for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
                throw ParseError(source, lineno, "expected header '" + want + "'");
            }
            seen_header = true;
            continue;
        }
        if (fields.size() != header.size()) {
            throw ParseError(source, lineno,
                             "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
        }
        t.rows.emplace_back(lineno, std::move(fields));
    }
    if (!seen_header) throw ParseError(source, lineno == 0 ? 1 : lineno, "file is empty");
    return t;
}

inline Table read_file(const std::string& path, const std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read(in, path, header);
}

inline double to_double(const std::string& s, const std::string& source, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size()) throw ParseError(source, line, "not a number: '" + s + "'");
    return v;
}

inline std::uint64_t to_uint(const std::string& s, const std::string& source, std::size_t line) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
        throw ParseError(source, line, "not a nonnegative integer: '" + s + "'");
    }
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw ParseError(source, line, "integer out of range: '" + s + "'");
    }
}

}  // namespace csv

/// Masses whose total is within this distance of 1 are renormalized on input.
inline constexpr double kInputMassTolerance = 1e-6;

inline DiscreteDistribution masses_from_vector(std::vector<double> m, const std::string& source) {
    if (m.empty()) throw InputError(source + ": no masses");
    for (double x : m) {
        if (!std::isfinite(x) || x < 0.0) throw InputError(source + ": masses must be finite and nonnegative");
    }
    const double total = detail::compensated_sum(m);
    if (std::abs(total - 1.0) > kInputMassTolerance) {
        throw InputError(source + ": masses sum to " + format_short(total) + ", not 1");
    }
    return DiscreteDistribution::from_weights(m);
}

/// One-column CSV with header `mass`.
inline DiscreteDistribution read_masses_csv(std::istream& in, const std::string& source) {
    const auto t = csv::read(in, source, {"mass"});
    std::vector<double> m;
    for (const auto& [line, f] : t.rows) m.push_back(csv::to_double(f[0], source, line));
    return masses_from_vector(std::move(m), source);
}

inline DiscreteDistribution read_masses_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    return read_masses_csv(in, path);
}

inline void write_masses_csv(std::ostream& out, const DiscreteDistribution& p) {
    out << "mass\n";
    for (double m : p) out << format_double(m) << '\n';
}

inline nlohmann::json masses_to_json(const DiscreteDistribution& p) {
    auto a = nlohmann::json::array();
    for (double m : p) a.push_back(m);
    return a;
}

inline DiscreteDistribution masses_from_json(const nlohmann::json& j, const std::string& source = "json") {
    if (!j.is_array()) throw InputError(source + ": expected a JSON array of masses");
    std::vector<double> m;
    for (const auto& x : j) {
        if (!x.is_number()) throw InputError(source + ": masses must be numbers");
        m.push_back(x.get<double>());
    }
    return masses_from_vector(std::move(m), source);
}

/// `atom,count` CSV as a sparse map; duplicate atoms accumulate.
inline std::map<std::uint64_t, std::uint64_t> read_counts_csv(const std::string& path) {
    const auto t = csv::read_file(path, {"atom", "count"});
    std::map<std::uint64_t, std::uint64_t> counts;
    for (const auto& [line, f] : t.rows) {
        counts[csv::to_uint(f[0], path, line)] += csv::to_uint(f[1], path, line);
    }
    return counts;
}

/// Two histograms aligned on atoms 0..max atom seen in either file.
inline std::pair<Histogram, Histogram> ingest_histograms(const std::string& path_p, const std::string& path_q) {
    const auto cp = read_counts_csv(path_p);
    const auto cq = read_counts_csv(path_q);
    if (cp.empty() && cq.empty()) throw InputError("both histogram files have no rows");
    std::uint64_t max_atom = 0;
    if (!cp.empty()) max_atom = std::max(max_atom, cp.rbegin()->first);
    if (!cq.empty()) max_atom = std::max(max_atom, cq.rbegin()->first);
    if (max_atom >= (std::uint64_t{1} << 32)) throw InputError("atom index too large");
    std::vector<std::uint64_t> vp(max_atom + 1, 0);
    std::vector<std::uint64_t> vq(max_atom + 1, 0);
    for (const auto& [a, c] : cp) vp[a] = c;
    for (const auto& [a, c] : cq) vq[a] = c;
    return {Histogram(std::move(vp)), Histogram(std::move(vq))};
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
    out << "atom,count\n";
    for (std::size_t a = 0; a < h.size(); ++a) out << a << ',' << h[a] << '\n';
}

inline void write_curve_csv(std::ostream& out, const std::vector<FrontierPoint>& curve) {
    out << "lambda,kl_p,kl_q\n";
    for (const auto& pt : curve) {
        out << format_double(pt.lambda) << ',' << format_double(pt.x) << ',' << format_double(pt.y) << '\n';
    }
}

inline void write_partition_csv(std::ostream& out, const Partition& s) {
    out << "atom,bin\n";
    for (std::size_t a = 0; a < s.size(); ++a) out << a << ',' << s.assignment[a] << '\n';
}

inline std::vector<Point2> read_points_csv(const std::string& path) {
    const auto t = csv::read_file(path, {"x", "y"});
    std::vector<Point2> pts;
    for (const auto& [line, f] : t.rows) pts.push_back({csv::to_double(f[0], path, line), csv::to_double(f[1], path, line)});
    return pts;
}

inline void write_centroids_csv(std::ostream& out, const CentroidModel& model) {
    out << "cx,cy\n";
    for (const auto& c : model.centroids) out << format_double(c.x) << ',' << format_double(c.y) << '\n';
}

/// Two-column `x,y` CSV.
inline std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path) {
    const auto t = csv::read_file(path, {"x", "y"});
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [line, f] : t.rows) {
        xs.push_back(csv::to_double(f[0], path, line));
        ys.push_back(csv::to_double(f[1], path, line));
    }
    return {std::move(xs), std::move(ys)};
}

}  // namespace divfront
