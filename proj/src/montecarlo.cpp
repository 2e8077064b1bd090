#include "exitflow/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "exitflow/errors.hpp"

namespace exitflow {

namespace {

struct Moments {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept
    {
        ++n;
        const double delta = x - mean;
        mean += delta / double(n);
        m2 += delta * (x - mean);
    }

    void merge(const Moments& o) noexcept
    {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = double(n + o.n);
        const double delta = o.mean - mean;
        mean += delta * double(o.n) / total;
        m2 += o.m2 + delta * delta * double(n) * double(o.n) / total;
        n += o.n;
    }

    double variance() const noexcept { return n > 1 ? m2 / double(n - 1) : 0.0; }
};

template <std::size_t K>
using Channels = std::array<Moments, K>;

// Simulates the chunks from first_chunk up to the one containing trajectory n_total - 1 and returns
// their moments in chunk order. Chunk c covers trajectories [c * kChunkSize, (c + 1) * kChunkSize).
template <std::size_t K, typename Score>
std::vector<Channels<K>> run_chunks(const TrajectorySimulator& sim, std::uint64_t seed, std::uint64_t first_chunk,
                                    std::uint64_t n_total, unsigned threads, const Score& score)
{
    const std::uint64_t last_chunk = (n_total + kChunkSize - 1) / kChunkSize;
    if (first_chunk >= last_chunk) return {};
    const std::uint64_t count = last_chunk - first_chunk;
    std::vector<Channels<K>> out(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};

    auto worker = [&] {
        for (;;) {
            const std::uint64_t c = next.fetch_add(1);
            if (c >= count || failed.load()) return;
            const std::uint64_t begin = (first_chunk + c) * kChunkSize;
            const std::uint64_t end = std::min(begin + kChunkSize, n_total);
            try {
                Channels<K>& acc = out[c];
                for (std::uint64_t i = begin; i < end; ++i) {
                    RngStream stream(seed, i);
                    const ExitRecord rec = sim.simulate(stream);
                    const std::array<double, K> values = score(rec);
                    for (std::size_t j = 0; j < K; ++j) acc[j].add(values[j]);
                }
            } catch (...) {
                errors[c] = std::current_exception();
                failed.store(true);
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::min<std::uint64_t>(count, 1024))));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

template <std::size_t K>
Channels<K> merge_chunks(const std::vector<Channels<K>>& chunks, std::size_t count)
{
    Channels<K> total;
    for (std::size_t c = 0; c < count; ++c)
        for (std::size_t j = 0; j < K; ++j) total[j].merge(chunks[c][j]);
    return total;
}

MCEstimate to_estimate(const Moments& m, const Moments& steps, double q, double wall)
{
    MCEstimate e;
    e.mean = m.mean;
    e.variance = m.variance();
    e.n = m.n;
    e.q = q;
    e.stat_error = m.n > 0 ? q * std::sqrt(e.variance / double(m.n)) : 0.0;
    e.n_steps_mean = steps.mean;
    e.wall_time = wall;
    return e;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

auto score_and_steps = [](const ExitRecord& r) { return std::array<double, 2>{r.score, double(r.n_steps)}; };

}  // namespace

MCEstimate estimate(const ProblemInstance& problem, Method method, double h, std::uint64_t n, std::uint64_t seed,
                    const EstimateOptions& options)
{
    if (n < 2) throw ConfigError("estimate needs n >= 2");
    const auto start = std::chrono::steady_clock::now();
    const TrajectorySimulator sim(problem, method, h, options.simulation);
    const auto chunks = run_chunks<2>(sim, seed, 0, n, options.threads, score_and_steps);
    const auto total = merge_chunks(chunks, chunks.size());
    return to_estimate(total[0], total[1], options.q, seconds_since(start));
}

MCEstimate run_until_stat_target(const ProblemInstance& problem, Method method, double h, std::uint64_t seed,
                                 double u_reference, const EstimateOptions& options,
                                 const StatTargetOptions& target)
{
    if (target.n_initial < 2 || target.n_cap < target.n_initial)
        throw ConfigError("stat target needs 2 <= n_initial <= n_cap");
    const auto start = std::chrono::steady_clock::now();
    const TrajectorySimulator sim(problem, method, h, options.simulation);

    std::vector<Channels<2>> full;  // cached complete chunks
    std::uint64_t n = target.n_initial;
    for (;;) {
        const std::uint64_t n_full = n / kChunkSize;
        if (full.size() < n_full) {
            auto fresh = run_chunks<2>(sim, seed, full.size(), n_full * kChunkSize, options.threads, score_and_steps);
            full.insert(full.end(), fresh.begin(), fresh.end());
        }
        Channels<2> total = merge_chunks(full, n_full);
        if (n % kChunkSize != 0) {
            const auto tail = run_chunks<2>(sim, seed, n_full, n, 1, score_and_steps);
            for (std::size_t j = 0; j < 2; ++j) total[j].merge(tail.front()[j]);
        }
        MCEstimate e = to_estimate(total[0], total[1], options.q, 0.0);
        // a bias of exactly zero can never be resolved, so it runs to the cap
        const double bias = std::abs(e.mean - u_reference);
        const bool met = bias > 0.0 && e.stat_error <= bias / 5.0;
        if (met || n >= target.n_cap) {
            e.capped = !met;
            e.wall_time = seconds_since(start);
            return e;
        }
        n = std::min(2 * n, target.n_cap);
    }
}

std::optional<double> BiasDecomposition::total_error() const
{
    if (!u_exact) return std::nullopt;
    return *u_exact - u.mean;
}

std::optional<double> BiasDecomposition::quadrature_error() const
{
    if (!u_exact || !star) return std::nullopt;
    return *u_exact - star->mean;
}

std::optional<double> BiasDecomposition::boundary_error() const
{
    const auto t = total_error();
    const auto q = quadrature_error();
    if (!t || !q) return std::nullopt;
    return *t - *q;
}

BiasDecomposition decompose_bias(const ProblemInstance& problem, Method method, double h, std::uint64_t n,
                                 std::uint64_t seed, const EstimateOptions& options)
{
    if (n < 2) throw ConfigError("decompose_bias needs n >= 2");
    const auto start = std::chrono::steady_clock::now();
    const TrajectorySimulator sim(problem, method, h, options.simulation);
    const Coefficients& co = problem.coefficients;
    const bool has_exact = co.has_exact();
    const auto chunks = run_chunks<5>(sim, seed, 0, n, options.threads, [&](const ExitRecord& r) {
        const double w = r.score - r.z;
        const double star = has_exact ? co.exact(r.terminal_point) * r.y + r.z : 0.0;
        return std::array<double, 5>{r.score, r.z, w, star, double(r.n_steps)};
    });
    const auto total = merge_chunks(chunks, chunks.size());
    const double wall = seconds_since(start);

    BiasDecomposition out;
    out.u = to_estimate(total[0], total[4], options.q, wall);
    out.v = to_estimate(total[1], total[4], options.q, wall);
    out.w = to_estimate(total[2], total[4], options.q, wall);
    if (has_exact) {
        out.star = to_estimate(total[3], total[4], options.q, wall);
        out.u_exact = co.exact(problem.x0);
    }
    return out;
}

double interpolate_h_for_bias(std::vector<ConvergencePoint> curve, double target_bias)
{
    if (!(target_bias > 0.0)) throw RangeError("target bias must be positive");
    std::sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        const double b0 = std::abs(curve[i].signed_error);
        const double b1 = std::abs(curve[i + 1].signed_error);
        if (!(b0 > 0.0) || !(b1 > 0.0)) continue;
        if ((b0 - target_bias) * (b1 - target_bias) > 0.0) continue;
        if (b0 == b1) return curve[i].h;
        const double t = std::log(target_bias / b0) / std::log(b1 / b0);
        return std::exp(std::log(curve[i].h) + t * std::log(curve[i + 1].h / curve[i].h));
    }
    throw RangeError("tolerance not reachable within the range of the convergence curve");
}

TimeToTolerance time_to_tolerance(const ProblemInstance& problem, Method method,
                                  const std::vector<ConvergencePoint>& curve, double a, std::uint64_t seed,
                                  const EstimateOptions& options, std::uint64_t n_pilot)
{
    if (!(a > 0.0)) throw ConfigError("tolerance must be positive");
    if (!problem.coefficients.has_exact()) throw UnsupportedError("time to tolerance needs an exact solution");
    const double u = std::abs(problem.coefficients.exact(problem.x0));
    if (!(u > 0.0)) throw UnsupportedError("time to tolerance needs a nonzero exact solution");

    TimeToTolerance out;
    out.h_star = interpolate_h_for_bias(curve, a * u / 2.0);

    EstimateOptions plain = options;
    plain.simulation.vr = false;
    const MCEstimate pilot = estimate(problem, method, out.h_star, n_pilot, seed, plain);
    out.pilot_variance = pilot.variance;
    const double half = a * u / 2.0;
    const double n_real = std::ceil(options.q * options.q * pilot.variance / (half * half));
    out.n_star = std::max<std::uint64_t>(2, std::uint64_t(n_real));
    out.run = estimate(problem, method, out.h_star, out.n_star, seed, plain);
    return out;
}

}  // namespace exitflow
