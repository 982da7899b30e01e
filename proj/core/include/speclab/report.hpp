#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "speclab/pipeline.hpp"

namespace speclab {

/// One CSV row: a single eigenvalue index of a single (n, seed) trial.
struct ReportRow {
    int n = 0;
    std::uint64_t seed = 0;
    double eps = 0.0;
    std::string kind;
    int k_index = 0;  // 0-based eigenvalue index
    double eigenvalue = 0.0;
    double rescaled = 0.0;
    double reference = 0.0;
    double rel_error = 0.0;
    double subspace_tl2 = 0.0;
    double cluster_w2_total = 0.0;
    int components = 0;
    double wall_ms = 0.0;
};

extern const char* const kReportCsvHeader;

/// Flatten trial records to rows; failed trials contribute no rows. With
/// `deterministic`, wall_ms is written as 0 so identical configs reproduce
/// byte-identical files.
std::vector<ReportRow> flatten_records(const std::vector<TrialRecord>& records,
                                       bool deterministic);

void write_report_csv(const std::vector<ReportRow>& rows, const std::string& path);
std::vector<ReportRow> read_report_csv(const std::string& path);

/// JSON summary: config echo, kernel constants, per-(n, k_index) medians,
/// and the errors of failed trials.
void write_summary_json(const SweepResult& result, const std::vector<ReportRow>& rows,
                        const std::string& path);

/// Log-log SVG of per-n medians of one row field against n.
void write_loglog_svg(const std::vector<ReportRow>& rows, int k_index,
                      const std::string& field,  // "rel_error" or "subspace_tl2"
                      const std::string& path);

void write_connectivity_csv(const std::vector<ConnectivityRow>& rows, const std::string& path);

double median(std::vector<double> values);

} // namespace speclab
