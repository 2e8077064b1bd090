#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "exitflow/config.hpp"

namespace exitflow {

struct CommandOptions {
    std::optional<std::string> output;  // overrides the config's `output`
    unsigned threads = 1;
    std::ostream* log = nullptr;  // progress messages; silent when null
};

/// Executes config.command and writes the CSV (plus companion data files).
/// Returns 0 on success and 1 when any estimate stopped at its n cap. Errors propagate as
/// exceptions after the CSV has been closed with an `# INCOMPLETE` trailer.
int run_command(const DriverConfig& config, const CommandOptions& options = {});

/// Companion file next to `csv_path`: <stem>_<tag>.dat in the same directory.
std::string companion_path(const std::string& csv_path, const std::string& tag);

}  // namespace exitflow
