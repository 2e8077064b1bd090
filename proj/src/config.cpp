#include "exitflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "exitflow/errors.hpp"

namespace exitflow {

std::string to_string(Command command)
{
    switch (command) {
    case Command::run: return "run";
    case Command::sweep: return "sweep";
    case Command::fit: return "fit";
    case Command::decompose: return "decompose";
    case Command::ttt: return "ttt";
    }
    return "?";
}

Command parse_command(const std::string& name)
{
    for (Command c : {Command::run, Command::sweep, Command::fit, Command::decompose, Command::ttt})
        if (to_string(c) == name) return c;
    throw ConfigError("unknown command '" + name + "' (allowed: run, sweep, fit, decompose, ttt)");
}

std::string domain_name(DomainKind kind)
{
    switch (kind) {
    case DomainKind::ball: return "ball";
    case DomainKind::gouda: return "gouda";
    case DomainKind::emmental: return "emmental";
    }
    return "?";
}

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_real(const std::string& s)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value))
        throw ConfigError("'" + s + "' is not a finite real number");
    return value;
}

std::uint64_t parse_count(const std::string& s)
{
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec == std::errc() && ptr == s.data() + s.size()) return value;
    // accept integral values written in scientific notation, e.g. 1e6
    const double real = parse_real(s);
    if (real < 0.0 || real != std::floor(real) || real > 1.8e19)
        throw ConfigError("'" + s + "' is not a nonnegative integer");
    return std::uint64_t(real);
}

bool parse_switch(const std::string& s)
{
    if (s == "on") return true;
    if (s == "off") return false;
    throw ConfigError("'" + s + "' must be on or off");
}

VectorXd parse_point(const std::string& s)
{
    std::vector<double> values;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_real(trim(item)));
    if (values.empty()) throw ConfigError("empty point");
    return Eigen::Map<VectorXd>(values.data(), Eigen::Index(values.size()));
}

DomainKind parse_domain(const std::string& s)
{
    if (s == "ball") return DomainKind::ball;
    if (s == "gouda") return DomainKind::gouda;
    if (s == "emmental") return DomainKind::emmental;
    throw ConfigError("unknown domain '" + s + "' (allowed: ball, gouda, emmental)");
}

const std::vector<std::string> kProblems{"example1", "example2", "example3", "example4"};

}  // namespace

DriverConfig parse_config_text(const std::string& text, std::optional<Command> command)
{
    DriverConfig cfg;
    std::vector<std::string> errors;
    std::map<std::string, int> seen;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (auto it = seen.find(key); it != seen.end()) {
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "' (first on line " +
                             std::to_string(it->second) + ")");
            continue;
        }
        seen[key] = line_no;
        try {
            if (value.empty()) throw ConfigError("missing value");
            if (key == "command") {
                cfg.command = parse_command(value);
            } else if (key == "problem") {
                if (std::find(kProblems.begin(), kProblems.end(), value) == kProblems.end())
                    throw ConfigError("unknown problem '" + value +
                                      "' (allowed: example1, example2, example3, example4)");
                cfg.problem = value;
            } else if (key == "dimension") {
                const auto d = parse_count(value);
                if (d < 1 || d > 100000) throw ConfigError("dimension must be between 1 and 100000");
                cfg.dimension = Eigen::Index(d);
            } else if (key == "domain") {
                cfg.domain = parse_domain(value);
            } else if (key == "radius") {
                cfg.radius = parse_real(value);
                if (!(*cfg.radius > 0.0)) throw ConfigError("radius must be positive");
            } else if (key == "side") {
                cfg.side = parse_real(value);
                if (!(*cfg.side > 0.0)) throw ConfigError("side must be positive");
            } else if (key == "center") {
                cfg.center = parse_point(value);
            } else if (key == "x0") {
                cfg.x0 = parse_point(value);
            } else if (key == "seed") {
                cfg.seed = parse_count(value);
            } else if (key == "integrator") {
                std::stringstream ss(value);
                std::string item;
                while (std::getline(ss, item, ',')) cfg.integrators.push_back(parse_method(trim(item)));
            } else if (key == "h") {
                cfg.h = parse_real(value);
                if (!(*cfg.h > 0.0)) throw ConfigError("h must be positive");
            } else if (key == "rw_lambda") {
                if (value != "auto") {
                    cfg.rw_lambda = parse_real(value);
                    if (!(*cfg.rw_lambda > 0.0)) throw ConfigError("rw_lambda must be auto or a positive real");
                }
            } else if (key == "vr") {
                cfg.vr = parse_switch(value);
            } else if (key == "n") {
                cfg.n = parse_count(value);
                if (cfg.n < 2) throw ConfigError("n must be at least 2");
            } else if (key == "adaptive") {
                cfg.adaptive = parse_switch(value);
            } else if (key == "q") {
                cfg.q = parse_real(value);
                if (!(cfg.q > 0.0)) throw ConfigError("q must be positive");
            } else if (key == "n_cap") {
                cfg.n_cap = parse_count(value);
                if (cfg.n_cap < 2) throw ConfigError("n_cap must be at least 2");
            } else if (key == "tolerance_a") {
                cfg.tolerance_a = parse_real(value);
                if (!(*cfg.tolerance_a > 0.0)) throw ConfigError("tolerance_a must be positive");
            } else if (key == "levels") {
                const auto l = parse_count(value);
                if (l < 1 || l > 60) throw ConfigError("levels must be between 1 and 60");
                cfg.levels = int(l);
            } else if (key == "cancellation") {
                if (value == "off") cfg.cancellation_filter = false;
                else if (value != "auto") cfg.cancellation = std::size_t(parse_count(value));
            } else if (key == "output") {
                cfg.output = value;
            } else if (key == "input") {
                cfg.input = value;
            } else {
                throw ConfigError("unknown key '" + key + "'");
            }
        } catch (const ConfigError& e) {
            errors.push_back("line " + std::to_string(line_no) + ": " + key + ": " + e.what());
        }
    }

    auto where = [&](const std::string& key) {
        const auto it = seen.find(key);
        return it == seen.end() ? std::string("config") : "line " + std::to_string(it->second);
    };

    if (command && cfg.command && *command != *cfg.command)
        errors.push_back(where("command") + ": command '" + to_string(*cfg.command) +
                         "' contradicts the command line ('" + to_string(*command) + "')");
    if (command) cfg.command = command;
    if (!cfg.command) errors.push_back("config: missing key 'command'");

    const bool reads_input = cfg.input && cfg.command == Command::fit;
    if (cfg.problem.empty() && !reads_input) errors.push_back("config: missing key 'problem'");
    if (cfg.integrators.empty() && !reads_input) errors.push_back("config: missing key 'integrator'");
    if ((cfg.command == Command::run || cfg.command == Command::decompose) && !cfg.h)
        errors.push_back("config: missing key 'h' (required by " + to_string(*cfg.command) + ")");
    if (cfg.command == Command::ttt && !cfg.tolerance_a) errors.push_back("config: missing key 'tolerance_a'");
    if ((cfg.command == Command::sweep || cfg.command == Command::fit || cfg.command == Command::ttt) &&
        cfg.levels && *cfg.levels < 3)
        errors.push_back(where("levels") + ": a sweep needs at least 3 levels");
    if (cfg.input && cfg.command != Command::fit && cfg.command != Command::ttt)
        errors.push_back(where("input") + ": input is only used by fit and ttt");

    if (cfg.problem == "example1" && cfg.dimension && *cfg.dimension != 3)
        errors.push_back(where("dimension") + ": example1 is three-dimensional");
    if (cfg.problem == "example4" && cfg.dimension && *cfg.dimension != 32)
        errors.push_back(where("dimension") + ": example4 is 32-dimensional");
    if ((cfg.problem == "example2" || cfg.problem == "example3") && !cfg.dimension)
        errors.push_back("config: missing key 'dimension' (required by " + cfg.problem + ")");
    if (cfg.problem == "example3" && cfg.domain && *cfg.domain != DomainKind::ball)
        errors.push_back(where("domain") + ": example3 is posed on the unit ball");

    Eigen::Index dim = 0;
    if (cfg.problem == "example1") dim = 3;
    else if (cfg.problem == "example4") dim = 32;
    else if (cfg.dimension) dim = *cfg.dimension;
    if (dim > 0) {
        if (cfg.x0 && cfg.x0->size() != dim)
            errors.push_back(where("x0") + ": x0 has " + std::to_string(cfg.x0->size()) + " components, expected " +
                             std::to_string(dim));
        if (cfg.center && cfg.center->size() != dim)
            errors.push_back(where("center") + ": center has " + std::to_string(cfg.center->size()) +
                             " components, expected " + std::to_string(dim));
    }
    const DomainKind kind = cfg.domain.value_or(cfg.problem == "example2" ? DomainKind::emmental : DomainKind::ball);
    if (cfg.radius && kind == DomainKind::emmental)
        errors.push_back(where("radius") + ": radius does not apply to the emmental domain (use side)");
    if (cfg.side && kind != DomainKind::emmental)
        errors.push_back(where("side") + ": side only applies to the emmental domain");

    if (!errors.empty()) {
        std::string message = "invalid configuration:";
        for (const auto& e : errors) message += "\n  " + e;
        throw ConfigError(message);
    }
    return cfg;
}

DriverConfig parse_config(const std::string& path, std::optional<Command> command)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), command);
}

ProblemInstance build_problem(const DriverConfig& config)
{
    const Eigen::Index dim = config.dimension.value_or(0);
    ProblemInstance p = [&] {
        if (config.problem == "example1") return example_I(config.domain.value_or(DomainKind::ball));
        if (config.problem == "example2") return example_II(dim, config.domain.value_or(DomainKind::emmental));
        if (config.problem == "example3") return example_III(dim);
        if (config.problem == "example4") return example_IV(config.domain.value_or(DomainKind::ball));
        throw ConfigError("unknown problem '" + config.problem + "'");
    }();
    if (config.radius || config.side || config.center || config.x0) {
        const DomainD& d = p.domain;
        const double size = d.kind() == DomainKind::emmental ? config.side.value_or(d.size())
                                                              : config.radius.value_or(d.size());
        VectorXd center = config.center.value_or(d.center());
        DomainD domain = d.kind() == DomainKind::ball    ? DomainD::ball(d.dimension(), size, std::move(center))
                         : d.kind() == DomainKind::gouda ? DomainD::gouda(d.dimension(), size, std::move(center))
                                                         : DomainD::emmental(d.dimension(), size, std::move(center));
        p = make_problem(p.name, p.coefficients, std::move(domain), config.x0.value_or(p.x0));
    }
    return p;
}

}  // namespace exitflow
