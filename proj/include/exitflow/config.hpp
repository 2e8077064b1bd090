#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "exitflow/integrators.hpp"
#include "exitflow/problems.hpp"

namespace exitflow {

enum class Command { run, sweep, fit, decompose, ttt };

std::string to_string(Command command);
Command parse_command(const std::string& name);

/// Validated contents of a driver file.
struct DriverConfig {
    std::optional<Command> command;

    std::string problem;  // example1 .. example4
    std::optional<Eigen::Index> dimension;
    std::optional<DomainKind> domain;
    std::optional<double> radius;  // ball and gouda
    std::optional<double> side;    // emmental
    std::optional<VectorXd> center;
    std::optional<VectorXd> x0;

    std::uint64_t seed = 1;
    std::vector<Method> integrators;
    std::optional<double> h;  // sweep: first level, default 0.2
    std::optional<double> rw_lambda;
    bool vr = false;

    std::uint64_t n = 10'000;
    std::optional<bool> adaptive;  // default: off for run/decompose, on for sweep/fit/ttt
    double q = 2.0;
    std::uint64_t n_cap = 1'000'000'000;
    std::optional<double> tolerance_a;
    std::optional<int> levels;  // default 9 for sweeps, 1 for decompose

    /// fit: cancellation index override; `off` disables post-cancellation filtering.
    std::optional<std::size_t> cancellation;
    bool cancellation_filter = true;

    std::optional<std::string> output;
    std::optional<std::string> input;  // fit/ttt: previously written sweep CSV
};

/// Parses `key = value` lines with `#` comments. Every problem is reported at once in a single
/// ConfigError, one line per problem, each naming its line number.
DriverConfig parse_config_text(const std::string& text, std::optional<Command> command = std::nullopt);

DriverConfig parse_config(const std::string& path, std::optional<Command> command = std::nullopt);

/// Problem instance described by the config, including domain and x0 overrides.
ProblemInstance build_problem(const DriverConfig& config);

std::string domain_name(DomainKind kind);

}  // namespace exitflow
