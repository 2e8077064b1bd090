#include "exitflow/results_csv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "exitflow/errors.hpp"

namespace exitflow {

const char* const kCsvHeader =
    "problem,domain,dimension,integrator,vr,seed,h,n,estimate,stat_error_2sigma,signed_error,rel_error,delta,"
    "delta_stderr,n_steps_mean,wall_time_s";

std::string format_real(double value)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", value);
    return buf;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

template <typename T>
std::optional<T> parse_cell(const std::string& s, const char* column)
{
    if (s.empty()) return std::nullopt;
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError(std::string("malformed value '") + s + "' in column " + column);
    return value;
}

}  // namespace

std::string format_row(const ResultRow& r)
{
    std::string s;
    s += r.problem + ',' + r.domain + ',' + std::to_string(r.dimension) + ',' + r.integrator + ',';
    s += (r.vr ? "on," : "off,") + std::to_string(r.seed) + ',';
    s += cell(r.h) + ',' + (r.n ? std::to_string(*r.n) : std::string()) + ',';
    s += cell(r.estimate) + ',' + cell(r.stat_error_2sigma) + ',' + cell(r.signed_error) + ',';
    s += cell(r.rel_error) + ',' + cell(r.delta) + ',' + cell(r.delta_stderr) + ',';
    s += cell(r.n_steps_mean) + ',' + cell(r.wall_time_s);
    return s;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc)
{
    if (!out_) throw ConfigError("cannot open output file '" + path + "'");
    out_ << kCsvHeader << '\n';
    out_.flush();
}

void CsvWriter::write(const ResultRow& row)
{
    out_ << format_row(row) << '\n';
    out_.flush();
}

void CsvWriter::mark_incomplete()
{
    out_ << "# INCOMPLETE\n";
    out_.flush();
}

std::vector<ResultRow> parse_results_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("results CSV has an unexpected header");
    std::vector<ResultRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != 16)
            throw ConfigError("results CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                              " cells, expected 16");
        ResultRow r;
        r.problem = cells[0];
        r.domain = cells[1];
        r.dimension = parse_cell<std::int64_t>(cells[2], "dimension").value_or(0);
        r.integrator = cells[3];
        if (cells[4] != "on" && cells[4] != "off") throw ConfigError("malformed vr cell '" + cells[4] + "'");
        r.vr = cells[4] == "on";
        r.seed = parse_cell<std::uint64_t>(cells[5], "seed").value_or(0);
        r.h = parse_cell<double>(cells[6], "h");
        r.n = parse_cell<std::uint64_t>(cells[7], "n");
        r.estimate = parse_cell<double>(cells[8], "estimate");
        r.stat_error_2sigma = parse_cell<double>(cells[9], "stat_error_2sigma");
        r.signed_error = parse_cell<double>(cells[10], "signed_error");
        r.rel_error = parse_cell<double>(cells[11], "rel_error");
        r.delta = parse_cell<double>(cells[12], "delta");
        r.delta_stderr = parse_cell<double>(cells[13], "delta_stderr");
        r.n_steps_mean = parse_cell<double>(cells[14], "n_steps_mean");
        r.wall_time_s = parse_cell<double>(cells[15], "wall_time_s");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> read_results_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open results file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_results_csv(buffer.str());
}

}  // namespace exitflow
