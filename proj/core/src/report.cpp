#include "speclab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace speclab {

const char* const kReportCsvHeader =
    "n,seed,eps,kind,k_index,eigenvalue,rescaled,reference,rel_error,subspace_tl2,"
    "cluster_w2_total,components,wall_ms";

namespace {

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

double parse_double_token(const std::string& token) {
    return std::strtod(token.c_str(), nullptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    out.push_back(current);
    return out;
}

} // namespace

double median(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m % 2 == 1) return values[m / 2];
    return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

std::vector<ReportRow> flatten_records(const std::vector<TrialRecord>& records,
                                       bool deterministic) {
    std::vector<ReportRow> rows;
    for (const TrialRecord& record : records) {
        if (!record.error.empty()) continue;
        for (std::size_t j = 0; j < record.eigenvalues.size(); ++j) {
            ReportRow row;
            row.n = record.n;
            row.seed = record.seed;
            row.eps = record.eps;
            row.kind = record.kind;
            row.k_index = static_cast<int>(j);
            row.eigenvalue = record.eigenvalues[j];
            row.rescaled = record.rescaled[j];
            row.reference = record.references[j];
            row.rel_error = record.rel_errors[j];
            row.subspace_tl2 = record.subspace_tl2[j];
            row.cluster_w2_total = record.cluster_w2_total;
            row.components = record.components;
            row.wall_ms = deterministic ? 0.0 : record.wall_ms;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot write CSV: " + path);
    out << kReportCsvHeader << "\n";
    for (const ReportRow& row : rows) {
        out << row.n << ',' << row.seed << ',' << format_double(row.eps) << ',' << row.kind << ','
            << row.k_index << ',' << format_double(row.eigenvalue) << ','
            << format_double(row.rescaled) << ',' << format_double(row.reference) << ','
            << format_double(row.rel_error) << ',' << format_double(row.subspace_tl2) << ','
            << format_double(row.cluster_w2_total) << ',' << row.components << ','
            << format_double(row.wall_ms) << "\n";
    }
}

std::vector<ReportRow> read_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ResourceError("cannot read CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("CSV is empty: " + path);
    if (line != kReportCsvHeader) throw InvalidArgument("CSV header mismatch: " + path);
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != 13) throw InvalidArgument("CSV row with wrong field count");
        ReportRow row;
        row.n = std::stoi(fields[0]);
        row.seed = std::stoull(fields[1]);
        row.eps = parse_double_token(fields[2]);
        row.kind = fields[3];
        row.k_index = std::stoi(fields[4]);
        row.eigenvalue = parse_double_token(fields[5]);
        row.rescaled = parse_double_token(fields[6]);
        row.reference = parse_double_token(fields[7]);
        row.rel_error = parse_double_token(fields[8]);
        row.subspace_tl2 = parse_double_token(fields[9]);
        row.cluster_w2_total = parse_double_token(fields[10]);
        row.components = std::stoi(fields[11]);
        row.wall_ms = parse_double_token(fields[12]);
        rows.push_back(row);
    }
    return rows;
}

void write_summary_json(const SweepResult& result, const std::vector<ReportRow>& rows,
                        const std::string& path) {
    nlohmann::json doc;
    const ExperimentConfig& config = result.config;
    doc["config"] = {
        {"name", config.name},
        {"dim", config.domain.dim},
        {"kernel", kernel_name(config.kernel.kind())},
        {"laplacian", laplacian_kind_name(config.laplacian)},
        {"k", config.k},
        {"n", config.n_values},
        {"prefactor", config.prefactor},
        {"exponent", config.exponent},
        {"seeds", config.seeds},
        {"compare_subspace", config.compare_subspace},
        {"compare_clusters", config.compare_clusters},
    };
    doc["kernel_constants"] = {
        {"surface_tension", result.constants.surface_tension},
        {"total_mass", result.constants.total_mass},
    };
    doc["continuum_clustering_unique"] = result.continuum_clustering_unique;

    // per-(n, k_index) medians across seeds
    std::map<std::pair<int, int>, std::vector<double>> rel, tl2, w2;
    for (const ReportRow& row : rows) {
        const auto key = std::make_pair(row.n, row.k_index);
        rel[key].push_back(row.rel_error);
        tl2[key].push_back(row.subspace_tl2);
        w2[key].push_back(row.cluster_w2_total);
    }
    nlohmann::json medians = nlohmann::json::array();
    for (const auto& [key, values] : rel) {
        nlohmann::json entry;
        entry["n"] = key.first;
        entry["k_index"] = key.second;
        entry["rel_error"] = median(values);
        const double m_tl2 = median(tl2[key]);
        const double m_w2 = median(w2[key]);
        if (std::isfinite(m_tl2)) entry["subspace_tl2"] = m_tl2;
        if (std::isfinite(m_w2)) entry["cluster_w2_total"] = m_w2;
        medians.push_back(entry);
    }
    doc["medians"] = medians;

    nlohmann::json errors = nlohmann::json::array();
    for (const TrialRecord& record : result.records) {
        if (record.error.empty()) continue;
        errors.push_back({{"n", record.n}, {"seed", record.seed}, {"error", record.error}});
    }
    doc["trial_errors"] = errors;

    std::ofstream out(path);
    if (!out) throw ResourceError("cannot write JSON: " + path);
    out << doc.dump(2) << "\n";
}

void write_loglog_svg(const std::vector<ReportRow>& rows, int k_index, const std::string& field,
                      const std::string& path) {
    std::map<int, std::vector<double>> per_n;
    for (const ReportRow& row : rows) {
        if (row.k_index != k_index) continue;
        double value;
        if (field == "rel_error") {
            value = row.rel_error;
        } else if (field == "subspace_tl2") {
            value = row.subspace_tl2;
        } else if (field == "cluster_w2_total") {
            value = row.cluster_w2_total;
        } else {
            throw InvalidArgument("unknown plot field: " + field);
        }
        per_n[row.n].push_back(value);
    }
    std::vector<std::pair<double, double>> points;  // (log10 n, log10 median)
    std::vector<std::pair<int, double>> raw;
    for (const auto& [n, values] : per_n) {
        const double m = median(values);
        if (std::isfinite(m) && m > 0.0) {
            points.emplace_back(std::log10(static_cast<double>(n)), std::log10(m));
            raw.emplace_back(n, m);
        }
    }

    const double width = 480, height = 360, margin = 56;
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot write SVG: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
        << "median " << field << " vs n (log-log)</text>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";

    if (points.size() >= 1) {
        double x0 = points.front().first, x1 = points.back().first;
        double y0 = points[0].second, y1 = points[0].second;
        for (const auto& p : points) {
            y0 = std::min(y0, p.second);
            y1 = std::max(y1, p.second);
        }
        if (x1 - x0 < 1e-9) { x0 -= 0.5; x1 += 0.5; }
        if (y1 - y0 < 1e-9) { y0 -= 0.5; y1 += 0.5; }
        auto sx = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
        auto sy = [&](double y) {
            return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin);
        };
        out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : points) out << sx(p.first) << "," << sy(p.second) << " ";
        out << "\"/>\n";
        for (std::size_t i = 0; i < points.size(); ++i) {
            out << "<circle cx=\"" << sx(points[i].first) << "\" cy=\"" << sy(points[i].second)
                << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
            out << "<text x=\"" << sx(points[i].first) << "\" y=\"" << height - margin + 16
                << "\" text-anchor=\"middle\" font-size=\"10\">" << raw[i].first << "</text>\n";
            out << "<text x=\"" << sx(points[i].first) << "\" y=\"" << sy(points[i].second) - 8
                << "\" text-anchor=\"middle\" font-size=\"9\">" << format_double(raw[i].second)
                << "</text>\n";
        }
    } else {
        out << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
            << "\" text-anchor=\"middle\" font-size=\"12\">no positive medians to plot</text>\n";
    }
    out << "</svg>\n";
}

void write_connectivity_csv(const std::vector<ConnectivityRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ResourceError("cannot write CSV: " + path);
    out << "n,prefactor,exponent,eps,seeds,disconnected,frequency\n";
    for (const ConnectivityRow& row : rows) {
        out << row.n << ',' << format_double(row.prefactor) << ',' << format_double(row.exponent)
            << ',' << format_double(row.eps) << ',' << row.seeds << ',' << row.disconnected << ','
            << format_double(row.frequency) << "\n";
    }
}

} // namespace speclab
