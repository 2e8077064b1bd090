#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace exitflow {

/// One CSV row. Empty optionals are written as empty cells.
struct ResultRow {
    std::string problem;
    std::string domain;
    std::int64_t dimension = 0;
    std::string integrator;
    bool vr = false;
    std::uint64_t seed = 0;
    std::optional<double> h;
    std::optional<std::uint64_t> n;  // fit rows: number of points used
    std::optional<double> estimate;
    std::optional<double> stat_error_2sigma;
    std::optional<double> signed_error;
    std::optional<double> rel_error;
    std::optional<double> delta;
    std::optional<double> delta_stderr;
    std::optional<double> n_steps_mean;
    std::optional<double> wall_time_s;
};

extern const char* const kCsvHeader;

/// Full-precision rendering used for every numeric cell (17 significant digits).
std::string format_real(double value);

std::string format_row(const ResultRow& row);

/// Streams rows to a file, flushing after each one so partial results survive failures.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);

    void write(const ResultRow& row);
    /// Appends the trailer marking the file as incomplete.
    void mark_incomplete();

private:
    std::ofstream out_;
};

/// Reads a CSV written by CsvWriter; a `# INCOMPLETE` trailer is accepted and ignored.
std::vector<ResultRow> read_results_csv(const std::string& path);

std::vector<ResultRow> parse_results_csv(const std::string& text);

}  // namespace exitflow
