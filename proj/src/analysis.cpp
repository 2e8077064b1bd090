#include "exitflow/analysis.hpp"

#include <cmath>
#include <limits>

#include "exitflow/errors.hpp"

namespace exitflow {

std::vector<ConvergencePoint> sweep(const ProblemInstance& problem, Method method, const SweepOptions& options)
{
    if (options.n_levels < 3) throw ConfigError("a sweep needs at least 3 levels");
    if (!(options.h0 > 0.0)) throw ConfigError("h0 must be positive");
    if (!problem.coefficients.has_exact()) throw UnsupportedError("a sweep needs an exact solution");
    const double u = problem.coefficients.exact(problem.x0);

    std::vector<ConvergencePoint> points;
    points.reserve(std::size_t(options.n_levels));
    for (int j = 0; j < options.n_levels; ++j) {
        const double h = std::ldexp(options.h0, -j);
        const MCEstimate e =
            options.adaptive
                ? run_until_stat_target(problem, method, h, options.seed, u, options.estimate, options.target)
                : estimate(problem, method, h, options.n, options.seed, options.estimate);
        ConvergencePoint p;
        p.h = h;
        p.estimate = e.mean;
        p.stderr_2sigma = e.stat_error;
        p.signed_error = u - e.mean;
        p.rel_error = u != 0.0 ? std::abs(p.signed_error / u) : std::abs(p.signed_error);
        p.n = e.n;
        p.n_steps_mean = e.n_steps_mean;
        p.wall_time = e.wall_time;
        p.capped = e.capped;
        points.push_back(p);
    }
    return points;
}

std::optional<std::size_t> detect_cancellation(const std::vector<ConvergencePoint>& points)
{
    auto trusted = [&](std::size_t i) {
        return points[i].stderr_2sigma <= 0.5 * std::abs(points[i].signed_error) && points[i].signed_error != 0.0 &&
               points[i].n_steps_mean != 0.0;
    };
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double e = std::abs(points[i].signed_error);
        if (i + 1 < points.size() && trusted(i) && trusted(i + 1) &&
            std::signbit(points[i].signed_error) != std::signbit(points[i + 1].signed_error))
            return e <= std::abs(points[i + 1].signed_error) ? i : i + 1;
        if (i > 0 && i + 1 < points.size() && trusted(i - 1) && trusted(i + 1) &&
            5.0 * e <= std::abs(points[i - 1].signed_error) && 5.0 * e <= std::abs(points[i + 1].signed_error))
            return i;
    }
    return std::nullopt;
}

FitResult fit_delta(const std::vector<ConvergencePoint>& points, double rel_threshold, bool post_cancellation_only,
                    std::optional<std::size_t> cancellation_override)
{
    FitResult out;
    out.cancellation_index = cancellation_override ? cancellation_override : detect_cancellation(points);

    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (post_cancellation_only && out.cancellation_index && i <= *out.cancellation_index) continue;
        const auto& p = points[i];
        if (!(p.rel_error < rel_threshold) || !(p.rel_error > 0.0) || !(p.h > 0.0)) continue;
        if (p.n_steps_mean == 0.0) continue;  // every path stopped before its first step
        lx.push_back(std::log(p.h));
        ly.push_back(std::log(p.rel_error));
    }
    const std::size_t n = lx.size();
    if (n < 2) throw InsufficientDataError("not enough data: " + std::to_string(n) + " admissible point(s)");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw InsufficientDataError("admissible points share a single timestep");
    out.delta = sxy / sxx;
    out.log_constant = my - out.delta * mx;
    out.n_points_used = n;
    if (n > 2) {
        double ssr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ly[i] - out.log_constant - out.delta * lx[i];
            ssr += r * r;
        }
        out.delta_stderr = std::sqrt(ssr / double(n - 2) / sxx);
    } else {
        out.delta_stderr = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

}  // namespace exitflow
