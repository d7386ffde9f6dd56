#pragma once

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "depthfuse/metrics/gradient.hpp"
#include "depthfuse/metrics/information.hpp"
#include "depthfuse/metrics/perceptual.hpp"
#include "depthfuse/metrics/phase.hpp"
#include "depthfuse/metrics/structural.hpp"
#include "depthfuse/raster.hpp"

namespace depthfuse {

inline constexpr std::array<const char*, 6> kMetricNames{"q_mi", "q_ncie", "q_g", "q_p", "q_y", "q_cb"};

struct MetricParams {
    QgParams qg;
    QpParams qp;
    QyParams qy;
    QcbParams qcb;
};

/// The six fusion-quality values for one (A, B, F) triple. A metric that
/// failed holds NaN and its message is kept in `errors`.
struct MetricReport {
    double q_mi = std::numeric_limits<double>::quiet_NaN();
    double q_ncie = std::numeric_limits<double>::quiet_NaN();
    double q_g = std::numeric_limits<double>::quiet_NaN();
    double q_p = std::numeric_limits<double>::quiet_NaN();
    double q_y = std::numeric_limits<double>::quiet_NaN();
    double q_cb = std::numeric_limits<double>::quiet_NaN();
    std::map<std::string, std::string> errors;

    std::array<double, 6> values() const { return {q_mi, q_ncie, q_g, q_p, q_y, q_cb}; }

    double& at(std::size_t i) {
        std::array<double*, 6> f{&q_mi, &q_ncie, &q_g, &q_p, &q_y, &q_cb};
        return *f.at(i);
    }
};

inline MetricReport evaluate_all(const GrayImage& a, const GrayImage& b, const GrayImage& f, const MetricParams& p = {}) {
    MetricReport r;
    auto run = [&](std::size_t i, auto&& fn) {
        try {
            r.at(i) = fn();
        } catch (const Error& e) {
            r.errors[kMetricNames[i]] = e.what();
        }
    };
    run(0, [&] { return q_mi(a, b, f); });
    run(1, [&] { return q_ncie(a, b, f); });
    run(2, [&] { return q_g(a, b, f, p.qg); });
    run(3, [&] { return q_p(a, b, f, p.qp); });
    run(4, [&] { return q_y(a, b, f, p.qy); });
    run(5, [&] { return q_cb(a, b, f, p.qcb); });
    return r;
}

inline MetricReport evaluate_all(const ColorImage& a, const ColorImage& b, const ColorImage& f, const MetricParams& p = {}) {
    require_same_size(a, f, "metric inputs differ in size");
    require_same_size(b, f, "metric inputs differ in size");
    return evaluate_all(rgb_to_gray(a), rgb_to_gray(b), rgb_to_gray(f), p);
}

namespace detail {
inline std::string format_value(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}
} // namespace detail

/// Two-line CSV: header of metric names, then full-precision values.
inline std::string to_csv(const MetricReport& r) {
    std::string out;
    for (std::size_t i = 0; i < kMetricNames.size(); ++i) out += std::string(i ? "," : "") + kMetricNames[i];
    out += '\n';
    const auto v = r.values();
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + detail::format_value(v[i]);
    out += '\n';
    return out;
}

inline MetricReport metric_report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string header, values;
    if (!std::getline(in, header) || !std::getline(in, values))
        throw Error(Errc::malformed_header, "metric CSV needs a header and a value line");
    MetricReport r;
    std::istringstream hs(header), vs(values);
    std::string name, value;
    while (std::getline(hs, name, ',') && std::getline(vs, value, ',')) {
        for (std::size_t i = 0; i < kMetricNames.size(); ++i)
            if (name == kMetricNames[i]) r.at(i) = value == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(value);
    }
    return r;
}

inline std::string to_markdown(const MetricReport& r) {
    std::ostringstream os;
    os << "| Metric | Value  |\n|--------|--------|\n";
    const auto v = r.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        os << "| " << std::left << std::setw(6) << kMetricNames[i] << " | ";
        if (std::isnan(v[i]))
            os << "n/a   ";
        else
            os << std::fixed << std::setprecision(4) << v[i];
        os << " |\n";
    }
    return os.str();
}

inline void to_json(nlohmann::json& j, const MetricReport& r) {
    j = nlohmann::json::object();
    const auto v = r.values();
    for (std::size_t i = 0; i < v.size(); ++i) j[kMetricNames[i]] = std::isnan(v[i]) ? nlohmann::json() : nlohmann::json(v[i]);
    if (!r.errors.empty()) j["errors"] = r.errors;
}

// ---------------------------------------------------------------------------
// Scores and ranking across methods.
//
// For each (scene, metric) the N methods get scores N..1 by descending
// value; tied methods share the higher score. Totals are summed over every
// scene and metric, and methods are ranked by descending total.

struct MetricTable {
    std::vector<std::string> methods;
    // One row per (scene, metric); values are indexed by method.
    struct Row {
        std::string scene;
        std::string metric;
        std::vector<double> values;
    };
    std::vector<Row> rows;
};

struct ScoreTable {
    std::vector<std::string> methods;
    std::vector<std::vector<int>> row_scores;      // [row][method]
    std::vector<int> totals;                       // [method]
    std::vector<std::vector<int>> score_counts;    // [method][score - 1]
    std::vector<std::size_t> ranking;              // method indices, best first
    std::vector<int> rank_of;                      // [method] -> 1-based rank
};

inline ScoreTable rank_methods(const MetricTable& table) {
    const std::size_t n = table.methods.size();
    if (n == 0) throw Error(Errc::invalid_argument, "ranking needs at least one method");
    ScoreTable out;
    out.methods = table.methods;
    out.totals.assign(n, 0);
    out.score_counts.assign(n, std::vector<int>(n, 0));
    for (const auto& row : table.rows) {
        if (row.values.size() != n) throw Error(Errc::dimension_mismatch, "row has the wrong number of methods");
        for (double v : row.values)
            if (std::isnan(v)) throw Error(Errc::nan_input, "scene " + row.scene + " metric " + row.metric);
        std::vector<int> scores(n);
        for (std::size_t m = 0; m < n; ++m) {
            int better = 0;
            for (double other : row.values) better += other > row.values[m];
            scores[m] = static_cast<int>(n) - better;
            out.totals[m] += scores[m];
            ++out.score_counts[m][static_cast<std::size_t>(scores[m] - 1)];
        }
        out.row_scores.push_back(std::move(scores));
    }
    out.ranking.resize(n);
    for (std::size_t m = 0; m < n; ++m) out.ranking[m] = m;
    std::stable_sort(out.ranking.begin(), out.ranking.end(),
                     [&](std::size_t x, std::size_t y) { return out.totals[x] > out.totals[y]; });
    out.rank_of.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r) out.rank_of[out.ranking[r]] = static_cast<int>(r + 1);
    return out;
}

/// Parses "scene,metric,<method>..." CSV with one row per (scene, metric).
inline MetricTable parse_metric_table(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
            cells.push_back(cell);
        }
        return cells;
    };
    if (!std::getline(in, line)) throw Error(Errc::malformed_header, "empty metric table");
    const auto header = split(line);
    if (header.size() < 3 || header[0] != "scene" || header[1] != "metric")
        throw Error(Errc::malformed_header, "metric table header must be scene,metric,<method>...");
    MetricTable t;
    t.methods.assign(header.begin() + 2, header.end());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != header.size())
            throw Error(Errc::malformed_header, "line " + std::to_string(line_no) + " has the wrong number of cells");
        MetricTable::Row row{cells[0], cells[1], {}};
        for (std::size_t i = 2; i < cells.size(); ++i) {
            const auto bad = [&] {
                return Error(Errc::malformed_header, "line " + std::to_string(line_no) + ": bad number '" + cells[i] + "'");
            };
            if (cells[i] == "nan") {
                row.values.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            std::size_t used = 0;
            try {
                row.values.push_back(std::stod(cells[i], &used));
            } catch (const std::exception&) {
                throw bad();
            }
            if (used != cells[i].size()) throw bad();
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Counts of each score, totals and ranking, one line per method in rank order.
inline std::string totals_to_csv(const ScoreTable& s) {
    std::ostringstream os;
    const std::size_t n = s.methods.size();
    os << "method";
    for (std::size_t k = n; k >= 1; --k) os << ",count_" << k;
    os << ",total,rank\n";
    for (std::size_t m : s.ranking) {
        os << s.methods[m];
        for (std::size_t k = n; k >= 1; --k) os << ',' << s.score_counts[m][k - 1];
        os << ',' << s.totals[m] << ',' << s.rank_of[m] << '\n';
    }
    return os.str();
}

inline std::string totals_to_markdown(const ScoreTable& s) {
    std::ostringstream os;
    const std::size_t n = s.methods.size();
    std::size_t name_w = 7;
    for (const auto& m : s.methods) name_w = std::max(name_w, m.size());
    os << "| " << std::left << std::setw(static_cast<int>(name_w)) << "Methods";
    for (std::size_t k = n; k >= 1; --k) os << " | " << std::right << std::setw(3) << k;
    os << " | Total | Ranking |\n|" << std::string(name_w + 2, '-');
    for (std::size_t k = n; k >= 1; --k) os << "|-----";
    os << "|-------|---------|\n";
    for (std::size_t m : s.ranking) {
        os << "| " << std::left << std::setw(static_cast<int>(name_w)) << s.methods[m];
        for (std::size_t k = n; k >= 1; --k) os << " | " << std::right << std::setw(3) << s.score_counts[m][k - 1];
        os << " | " << std::setw(5) << s.totals[m] << " | " << std::setw(7) << s.rank_of[m] << " |\n";
    }
    return os.str();
}

/// Per-row values with their scores in parentheses.
inline std::string scores_to_markdown(const MetricTable& t, const ScoreTable& s) {
    std::ostringstream os;
    os << "| Scene | Metric |";
    for (const auto& m : t.methods) os << ' ' << m << " |";
    os << "\n|-------|--------|";
    for (std::size_t i = 0; i < t.methods.size(); ++i) os << "---|";
    os << '\n';
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        os << "| " << t.rows[r].scene << " | " << t.rows[r].metric << " |";
        for (std::size_t m = 0; m < t.methods.size(); ++m)
            os << ' ' << std::fixed << std::setprecision(4) << t.rows[r].values[m] << " (" << s.row_scores[r][m] << ") |";
        os << '\n';
    }
    return os.str();
}

} // namespace depthfuse
