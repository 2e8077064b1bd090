#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "exitflow/commands.hpp"
#include "exitflow/config.hpp"
#include "exitflow/errors.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Monte Carlo solver for elliptic Dirichlet problems via stopped diffusions"};
    std::string command;
    std::string config_path;
    std::string output;
    unsigned threads = 1;
    bool quiet = false;
    app.add_option("command", command, "run | sweep | fit | decompose | ttt")
        ->required()
        ->check(CLI::IsMember({"run", "sweep", "fit", "decompose", "ttt"}));
    app.add_option("--config", config_path, "driver file with key = value lines")->required();
    app.add_option("--output", output, "CSV output path (overrides the config)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_flag("--quiet", quiet, "suppress progress messages");
    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = exitflow::parse_config(config_path, exitflow::parse_command(command));
        exitflow::CommandOptions options;
        if (!output.empty()) options.output = output;
        options.threads = threads;
        options.log = quiet ? nullptr : &std::cerr;
        const int status = exitflow::run_command(config, options);
        if (status != 0) std::cerr << "exitflow: some estimates stopped at the n cap\n";
        return status;
    } catch (const exitflow::Error& e) {
        std::cerr << "exitflow: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "exitflow: internal error: " << e.what() << '\n';
        return 3;
    }
}
