#include "exitflow/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "exitflow/analysis.hpp"
#include "exitflow/errors.hpp"
#include "exitflow/montecarlo.hpp"
#include "exitflow/results_csv.hpp"

namespace exitflow {

std::string companion_path(const std::string& csv_path, const std::string& tag)
{
    const std::filesystem::path p(csv_path);
    return (p.parent_path() / (p.stem().string() + "_" + tag + ".dat")).string();
}

namespace {

class Context {
public:
    Context(const DriverConfig& config, const CommandOptions& options)
        : config_(config), options_(options),
          output_(options.output.value_or(config.output.value_or("exitflow_" + to_string(*config.command) + ".csv"))),
          writer_(output_)
    {
    }

    const DriverConfig& config() const { return config_; }
    const std::string& output() const { return output_; }
    CsvWriter& writer() { return writer_; }

    EstimateOptions estimate_options() const
    {
        EstimateOptions e;
        e.simulation.vr = config_.vr;
        e.simulation.rw_lambda = config_.rw_lambda;
        e.threads = std::max(1u, options_.threads);
        e.q = config_.q;
        return e;
    }

    SweepOptions sweep_options() const
    {
        SweepOptions s;
        s.h0 = config_.h.value_or(0.2);
        s.n_levels = config_.levels.value_or(9);
        s.seed = config_.seed;
        s.estimate = estimate_options();
        s.adaptive = config_.adaptive.value_or(true);
        s.target.n_initial = std::min(config_.n, config_.n_cap);
        s.target.n_cap = config_.n_cap;
        s.n = config_.n;
        return s;
    }

    ResultRow base_row(const ProblemInstance& p, Method m) const
    {
        ResultRow r;
        r.problem = config_.problem.empty() ? p.name : config_.problem;
        r.domain = domain_name(p.domain.kind());
        r.dimension = p.dimension();
        r.integrator = to_string(m);
        r.vr = config_.vr;
        r.seed = config_.seed;
        return r;
    }

    void log(const std::string& message) const
    {
        if (options_.log) *options_.log << message << std::endl;
    }

private:
    const DriverConfig& config_;
    const CommandOptions& options_;
    std::string output_;
    CsvWriter writer_;
};

ResultRow point_row(ResultRow r, const ConvergencePoint& p)
{
    r.h = p.h;
    r.n = p.n;
    r.estimate = p.estimate;
    r.stat_error_2sigma = p.stderr_2sigma;
    r.signed_error = p.signed_error;
    r.rel_error = p.rel_error;
    r.n_steps_mean = p.n_steps_mean;
    r.wall_time_s = p.wall_time;
    return r;
}

ResultRow fit_row(ResultRow r, const FitResult& fit)
{
    r.n = fit.n_points_used;
    r.delta = fit.delta;
    r.delta_stderr = fit.delta_stderr;
    return r;
}

void write_plot(const std::string& path, const std::vector<ConvergencePoint>& points)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open plot file '" + path + "'");
    out << "# h rel_error\n";
    for (const auto& p : points) out << format_real(p.h) << ' ' << format_real(p.rel_error) << '\n';
}

std::optional<FitResult> try_fit(const Context& ctx, const std::vector<ConvergencePoint>& points)
{
    try {
        return fit_delta(points, 0.15, ctx.config().cancellation_filter, ctx.config().cancellation);
    } catch (const InsufficientDataError& e) {
        ctx.log(std::string("fit: ") + e.what());
        return std::nullopt;
    }
}

int command_run(Context& ctx)
{
    const ProblemInstance problem = build_problem(ctx.config());
    const auto& cfg = ctx.config();
    const bool adaptive = cfg.adaptive.value_or(false);
    const bool has_exact = problem.coefficients.has_exact();
    const double u = has_exact ? problem.coefficients.exact(problem.x0) : 0.0;
    if (adaptive && !has_exact) throw UnsupportedError("adaptive runs need an exact solution");
    int status = 0;
    for (Method m : cfg.integrators) {
        ctx.log("run " + to_string(m));
        const MCEstimate e = adaptive ? run_until_stat_target(problem, m, *cfg.h, cfg.seed, u, ctx.estimate_options(),
                                                              {std::min(cfg.n, cfg.n_cap), cfg.n_cap})
                                      : estimate(problem, m, *cfg.h, cfg.n, cfg.seed, ctx.estimate_options());
        ResultRow r = ctx.base_row(problem, m);
        r.h = *cfg.h;
        r.n = e.n;
        r.estimate = e.mean;
        r.stat_error_2sigma = e.stat_error;
        if (has_exact) {
            r.signed_error = u - e.mean;
            r.rel_error = u != 0.0 ? std::abs(*r.signed_error / u) : std::abs(*r.signed_error);
        }
        r.n_steps_mean = e.n_steps_mean;
        r.wall_time_s = e.wall_time;
        ctx.writer().write(r);
        if (e.capped) status = 1;
    }
    return status;
}

int command_sweep(Context& ctx, bool fit)
{
    const ProblemInstance problem = build_problem(ctx.config());
    int status = 0;
    std::vector<ResultRow> fit_rows;
    for (Method m : ctx.config().integrators) {
        ctx.log("sweep " + to_string(m));
        const auto points = sweep(problem, m, ctx.sweep_options());
        const ResultRow base = ctx.base_row(problem, m);
        for (const auto& p : points) {
            ctx.writer().write(point_row(base, p));
            if (p.capped) status = 1;
        }
        write_plot(companion_path(ctx.output(), to_string(m)), points);
        if (fit)
            if (const auto f = try_fit(ctx, points)) fit_rows.push_back(fit_row(base, *f));
    }
    for (const auto& r : fit_rows) ctx.writer().write(r);
    return status;
}

int command_fit_input(Context& ctx)
{
    using Key = std::tuple<std::string, std::string, std::int64_t, std::string, bool, std::uint64_t>;
    std::vector<Key> order;
    std::map<Key, std::vector<ConvergencePoint>> groups;
    for (const ResultRow& r : read_results_csv(*ctx.config().input)) {
        if (r.delta || !r.h || !r.signed_error || !r.rel_error) continue;
        const Key key{r.problem, r.domain, r.dimension, r.integrator, r.vr, r.seed};
        if (!groups.count(key)) order.push_back(key);
        ConvergencePoint p;
        p.h = *r.h;
        p.estimate = r.estimate.value_or(0.0);
        p.stderr_2sigma = r.stat_error_2sigma.value_or(0.0);
        p.signed_error = *r.signed_error;
        p.rel_error = *r.rel_error;
        p.n = r.n.value_or(0);
        if (r.n_steps_mean) p.n_steps_mean = *r.n_steps_mean;
        groups[key].push_back(p);
    }
    if (order.empty()) throw InsufficientDataError("input CSV holds no convergence points");
    for (const Key& key : order) {
        auto& points = groups[key];
        std::stable_sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
        ResultRow r;
        std::tie(r.problem, r.domain, r.dimension, r.integrator, r.vr, r.seed) = key;
        const FitResult f = fit_delta(points, 0.15, ctx.config().cancellation_filter, ctx.config().cancellation);
        ctx.writer().write(fit_row(r, f));
    }
    return 0;
}

int command_decompose(Context& ctx)
{
    const ProblemInstance problem = build_problem(ctx.config());
    const auto& cfg = ctx.config();
    const int levels = cfg.levels.value_or(1);
    for (Method m : cfg.integrators) {
        std::ofstream table(companion_path(ctx.output(), to_string(m) + "_decompose"), std::ios::binary);
        if (!table) throw ConfigError("cannot open decomposition file next to '" + ctx.output() + "'");
        table << "# h total quadrature difference\n";
        for (int j = 0; j < levels; ++j) {
            const double h = std::ldexp(*cfg.h, -j);
            ctx.log("decompose " + to_string(m) + " h=" + format_real(h));
            const BiasDecomposition dec = decompose_bias(problem, m, h, cfg.n, cfg.seed, ctx.estimate_options());
            ResultRow r = ctx.base_row(problem, m);
            r.h = h;
            r.n = dec.u.n;
            r.estimate = dec.u.mean;
            r.stat_error_2sigma = dec.u.stat_error;
            if (const auto t = dec.total_error()) {
                r.signed_error = *t;
                r.rel_error = *dec.u_exact != 0.0 ? std::abs(*t / *dec.u_exact) : std::abs(*t);
            }
            r.n_steps_mean = dec.u.n_steps_mean;
            r.wall_time_s = dec.u.wall_time;
            ctx.writer().write(r);
            if (dec.total_error()) {
                table << format_real(h) << ' ' << format_real(*dec.total_error()) << ' '
                      << format_real(*dec.quadrature_error()) << ' ' << format_real(*dec.boundary_error()) << '\n';
            }
        }
    }
    return 0;
}

std::vector<ConvergencePoint> curve_from_input(const std::string& path, const std::string& integrator)
{
    std::vector<ConvergencePoint> points;
    for (const ResultRow& r : read_results_csv(path)) {
        if (r.delta || !r.h || !r.signed_error || r.integrator != integrator) continue;
        ConvergencePoint p;
        p.h = *r.h;
        p.signed_error = *r.signed_error;
        p.rel_error = r.rel_error.value_or(0.0);
        points.push_back(p);
    }
    return points;
}

int command_ttt(Context& ctx)
{
    const ProblemInstance problem = build_problem(ctx.config());
    const auto& cfg = ctx.config();
    int status = 0;
    for (Method m : cfg.integrators) {
        std::vector<ConvergencePoint> curve;
        if (cfg.input) {
            curve = curve_from_input(*cfg.input, to_string(m));
        } else {
            ctx.log("ttt sweep " + to_string(m));
            curve = sweep(problem, m, ctx.sweep_options());
            for (const auto& p : curve)
                if (p.capped) status = 1;
        }
        ctx.log("ttt run " + to_string(m));
        const TimeToTolerance t = time_to_tolerance(problem, m, curve, *cfg.tolerance_a, cfg.seed, ctx.estimate_options());
        ResultRow r = ctx.base_row(problem, m);
        r.vr = false;
        r.h = t.h_star;
        r.n = t.n_star;
        r.estimate = t.run.mean;
        r.stat_error_2sigma = t.run.stat_error;
        const double u = problem.coefficients.exact(problem.x0);
        r.signed_error = u - t.run.mean;
        r.rel_error = std::abs(*r.signed_error / u);
        r.n_steps_mean = t.run.n_steps_mean;
        r.wall_time_s = t.run.wall_time;
        ctx.writer().write(r);
    }
    return status;
}

}  // namespace

int run_command(const DriverConfig& config, const CommandOptions& options)
{
    if (!config.command) throw ConfigError("no command selected");
    Context ctx(config, options);
    try {
        switch (*config.command) {
        case Command::run: return command_run(ctx);
        case Command::sweep: return command_sweep(ctx, false);
        case Command::fit: return config.input ? command_fit_input(ctx) : command_sweep(ctx, true);
        case Command::decompose: return command_decompose(ctx);
        case Command::ttt: return command_ttt(ctx);
        }
    } catch (...) {
        ctx.writer().mark_incomplete();
        throw;
    }
    return 0;
}

}  // namespace exitflow
