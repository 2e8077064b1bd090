#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "exitflow/geometry.hpp"
#include "exitflow/problems.hpp"
#include "exitflow/samplers.hpp"

namespace exitflow {

enum class Method { em, gm, bb, bp, woe, rw };

std::string to_string(Method method);
/// Parses em|gm|bb|bp|woe|rw; throws ConfigError otherwise.
Method parse_method(const std::string& name);

struct SimulationOptions {
    bool vr = false;
    /// Constant boundary-zone coefficient for RW; zone width is then rw_lambda * sqrt(h).
    std::optional<double> rw_lambda;
    double gm_shift = 0.5826;
    std::uint64_t max_steps = 100'000'000;
};

struct PathState {
    VectorXd x;
    double y = 1.0;
    double z = 0.0;
    std::uint64_t k = 0;
};

struct ExitRecord {
    VectorXd exit_point;      // on the boundary
    VectorXd terminal_point;  // raw position at which the path was stopped
    double nu = 0.0;
    double y = 1.0;
    double z = 0.0;
    double score = 0.0;
    std::uint64_t n_steps = 0;
};

/// One unbounded Euler-Maruyama step of (X, Y, Z) with the control-variate term when `vr` is set.
PathState step_em(const ProblemInstance& problem, const PathState& state, RngStream& stream, double h,
                  bool vr = false);

/// Probability that a Brownian bridge between two interior points crossed the local tangent plane.
double bb_crossing_probability(double d_k, double d_k1, const MatrixXd& sigma_k, const VectorXd& n_k,
                               double h);

/// Exit time within the step for unit diffusion, or nothing when no excursion is detected.
std::optional<double> bp_sample_exit_time(double d_k, double d_k1, double h, RngStream& stream);

/// Exit point on the tangent plane at Pi_k, sampled from the Brownian bridge pinned at X_k and X_k1.
VectorXd bp_sample_exit_point(const VectorXd& x_k, const VectorXd& x_k1, const VectorXd& pi_k, double d_k,
                              double tau, double h, RngStream& stream);

/// Largest admissible hop parameter against the tangent plane: |d| / |sigma^T N|.
double woe_tangent_radius(double d, const MatrixXd& sigma_k, const VectorXd& n_k);

/// Two-point exit rule of the random walk in its boundary zone: the probability of stopping at
/// the boundary rather than moving `width` further inside, so that the distance is a martingale.
double rw_exit_probability(double d, double width);

/// Simulates trajectories of one problem with one method and timestep.
///
/// Construction validates the combination and precomputes everything that does not depend on
/// the position. simulate() is const and safe to call concurrently with distinct streams.
class TrajectorySimulator {
public:
    TrajectorySimulator(const ProblemInstance& problem, Method method, double h,
                        SimulationOptions options = {});

    ExitRecord simulate(RngStream& stream) const;

    const ProblemInstance& problem() const noexcept { return *problem_; }
    Method method() const noexcept { return method_; }
    double h() const noexcept { return h_; }
    const SimulationOptions& options() const noexcept { return options_; }

    struct Workspace;

private:
    friend PathState step_em(const ProblemInstance&, const PathState&, RngStream&, double, bool);

    ExitRecord run_euler_family(RngStream& stream, Workspace& ws) const;
    ExitRecord run_bb(RngStream& stream, Workspace& ws) const;
    ExitRecord run_bp(RngStream& stream, Workspace& ws) const;
    ExitRecord run_woe(RngStream& stream, Workspace& ws) const;
    ExitRecord run_rw(RngStream& stream, Workspace& ws) const;

    void load_coefficients(const VectorXd& x, Workspace& ws) const;
    void euler_update(Workspace& ws, const VectorXd& noise, double dt, double sqrt_dt) const;
    double lambda_max_sigma_sigma_t(const Workspace& ws) const;
    ExitRecord finish(Workspace& ws, const VectorXd& terminal, double nu, double y, double z,
                      std::uint64_t steps) const;
    void check_cap(std::uint64_t steps, const RngStream& stream) const;

    const ProblemInstance* problem_;
    Method method_;
    double h_;
    double sqrt_h_;
    SimulationOptions options_;
    bool constant_sigma_;
    bool identity_sigma_;
    std::optional<double> constant_lambda_a_;  // exact lambda_max(A) when sigma is constant
};

ExitRecord simulate(const ProblemInstance& problem, Method method, double h, RngStream& stream,
                    const SimulationOptions& options = {});

inline SimulationOptions vr_options(bool vr)
{
    SimulationOptions o;
    o.vr = vr;
    return o;
}

inline ExitRecord simulate_em(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::em, h, s, vr_options(vr));
}
inline ExitRecord simulate_gm(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::gm, h, s, vr_options(vr));
}
inline ExitRecord simulate_bb(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::bb, h, s, vr_options(vr));
}
inline ExitRecord simulate_bp(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::bp, h, s, vr_options(vr));
}
inline ExitRecord simulate_woe(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::woe, h, s, vr_options(vr));
}
inline ExitRecord simulate_rw(const ProblemInstance& p, double h, RngStream& s, bool vr = false)
{
    return simulate(p, Method::rw, h, s, vr_options(vr));
}

}  // namespace exitflow
