#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "exitflow/montecarlo.hpp"

namespace exitflow {

struct SweepOptions {
    double h0 = 0.2;
    int n_levels = 9;
    std::uint64_t seed = 1;
    EstimateOptions estimate;
    /// Adaptive n per level (run_until_stat_target); otherwise a fixed `n` per level.
    bool adaptive = true;
    StatTargetOptions target;
    std::uint64_t n = 10'000;
};

/// One point per level h = h0 / 2^j, j = 0..n_levels-1, measured against the exact solution at x0.
std::vector<ConvergencePoint> sweep(const ProblemInstance& problem, Method method, const SweepOptions& options);

struct FitResult {
    double delta = 0.0;
    double delta_stderr = 0.0;  // NaN with exactly two points
    double log_constant = 0.0;  // intercept of log(rel_error) against log(h)
    std::size_t n_points_used = 0;
    std::optional<std::size_t> cancellation_index;
};

/// Index of a bias cancellation in points ordered by decreasing h, or nothing.
///
/// Only points with stat_error <= |signed_error| / 2 and at least one step taken are trusted.
/// A cancellation is either a sign change between two consecutive trusted points (the one with
/// the smaller |signed_error| is returned) or a point whose |signed_error| is at least five times
/// below both of its trusted neighbours. The first such point in order of decreasing h is returned.
std::optional<std::size_t> detect_cancellation(const std::vector<ConvergencePoint>& points);

/// Least-squares slope of log(rel_error) against log(h) over points with rel_error < rel_threshold.
/// Points whose paths all stopped without a step (n_steps_mean == 0) carry no information on the
/// order and are skipped.
/// With `post_cancellation_only`, points up to and including the cancellation (detected, or
/// `cancellation_override` when given) are dropped. Throws InsufficientDataError below two points.
FitResult fit_delta(const std::vector<ConvergencePoint>& points, double rel_threshold = 0.15,
                    bool post_cancellation_only = false,
                    std::optional<std::size_t> cancellation_override = std::nullopt);

}  // namespace exitflow
