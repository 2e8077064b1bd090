#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "exitflow/integrators.hpp"
#include "exitflow/problems.hpp"

namespace exitflow {

/// Trajectories per reduction chunk. Partial sums are formed per chunk in index order and
/// merged in chunk order, so results do not depend on the thread count.
inline constexpr std::uint64_t kChunkSize = 4096;

struct MCEstimate {
    double mean = 0.0;
    double variance = 0.0;  // sample variance of the scores
    std::uint64_t n = 0;
    double q = 2.0;
    double stat_error = 0.0;  // q * sqrt(variance / n)
    double n_steps_mean = 0.0;
    double wall_time = 0.0;  // seconds
    bool capped = false;     // run_until_stat_target stopped at its n cap
};

struct EstimateOptions {
    SimulationOptions simulation;
    unsigned threads = 1;
    double q = 2.0;
};

/// Mean and sample variance of n scores drawn from substreams (seed, 0..n-1).
MCEstimate estimate(const ProblemInstance& problem, Method method, double h, std::uint64_t n,
                    std::uint64_t seed, const EstimateOptions& options = {});

struct StatTargetOptions {
    std::uint64_t n_initial = 10'000;
    std::uint64_t n_cap = 1'000'000'000;
};

/// Doubles n until q*sqrt(V/n) <= |mean - u_reference| / 5 or the cap is reached (flagged).
/// Trajectories already simulated are reused, never redrawn.
MCEstimate run_until_stat_target(const ProblemInstance& problem, Method method, double h, std::uint64_t seed,
                                 double u_reference, const EstimateOptions& options = {},
                                 const StatTargetOptions& target = {});

/// Estimates of u, of v (g replaced by 0) and of w (f replaced by 0) on identical streams.
/// Every trajectory contributes Z to v and g(exit) Y to w, so u = v + w per trajectory.
/// `star` replaces g(exit point) with u_exact(terminal point), removing the boundary-sampling error.
struct BiasDecomposition {
    MCEstimate u;
    MCEstimate v;
    MCEstimate w;
    std::optional<MCEstimate> star;
    std::optional<double> u_exact;

    /// u_exact - u
    std::optional<double> total_error() const;
    /// u_exact - star: discretisation error without the boundary-sampling part
    std::optional<double> quadrature_error() const;
    /// total - quadrature: the boundary-sampling part
    std::optional<double> boundary_error() const;
};

BiasDecomposition decompose_bias(const ProblemInstance& problem, Method method, double h, std::uint64_t n,
                                 std::uint64_t seed, const EstimateOptions& options = {});

struct ConvergencePoint {
    double h = 0.0;
    double estimate = 0.0;
    double stderr_2sigma = 0.0;
    double signed_error = 0.0;  // u_exact - estimate
    double rel_error = 0.0;
    std::uint64_t n = 0;
    double n_steps_mean = std::numeric_limits<double>::quiet_NaN();  // NaN when unknown
    double wall_time = 0.0;
    bool capped = false;
};

/// Timestep at which the log-log interpolated |signed_error| of `curve` equals `target_bias`.
/// Throws RangeError when the target is outside the range spanned by the curve.
double interpolate_h_for_bias(std::vector<ConvergencePoint> curve, double target_bias);

struct TimeToTolerance {
    double h_star = 0.0;
    std::uint64_t n_star = 0;
    double pilot_variance = 0.0;
    MCEstimate run;
};

/// Plans and runs the cheapest (h, n) pair meeting relative tolerance a: bias a|u|/2 from the
/// curve and n with q*sqrt(V/n) <= a|u|/2 from a pilot run. Variance reduction is switched off.
TimeToTolerance time_to_tolerance(const ProblemInstance& problem, Method method,
                                  const std::vector<ConvergencePoint>& curve, double a, std::uint64_t seed,
                                  const EstimateOptions& options = {}, std::uint64_t n_pilot = 10'000);

}  // namespace exitflow
