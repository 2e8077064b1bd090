#include "exitflow/integrators.hpp"

#include <cmath>
#include <stdexcept>

#include "exitflow/errors.hpp"

namespace exitflow {

std::string to_string(Method method)
{
    switch (method) {
    case Method::em: return "em";
    case Method::gm: return "gm";
    case Method::bb: return "bb";
    case Method::bp: return "bp";
    case Method::woe: return "woe";
    case Method::rw: return "rw";
    }
    return "?";
}

Method parse_method(const std::string& name)
{
    for (Method m : {Method::em, Method::gm, Method::bb, Method::bp, Method::woe, Method::rw})
        if (to_string(m) == name) return m;
    throw ConfigError("unknown integrator '" + name + "' (allowed: em, gm, bb, bp, woe, rw)");
}

struct TrajectorySimulator::Workspace {
    VectorXd x, x_next, b, noise, disp, grad, mu;
    MatrixXd sigma;
    BoundaryData<double> bd;
    double c = 0.0;
    double f = 0.0;
    double y = 1.0;
    double z = 0.0;
    double vr_increment = 0.0;  // control-variate part of the last Z update
};

namespace {

// |sigma^T n| for lower-triangular sigma.
double normal_diffusion_norm(const MatrixXd& sigma, const VectorXd& n)
{
    return (sigma.transpose().triangularView<Eigen::Upper>() * n).norm();
}

}  // namespace

TrajectorySimulator::TrajectorySimulator(const ProblemInstance& problem, Method method, double h,
                                         SimulationOptions options)
    : problem_(&problem), method_(method), h_(h), sqrt_h_(std::sqrt(h)), options_(options)
{
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("timestep h must be positive and finite");
    const Coefficients& co = problem.coefficients;
    if (problem.x0.size() != problem.dimension()) throw ConfigError("x0 dimension mismatch");
    if (options_.vr && !co.has_exact_gradient())
        throw UnsupportedError("variance reduction needs the gradient of the exact solution");
    if (options_.vr && method == Method::woe && !co.zero_drift && !co.has_exact())
        throw UnsupportedError("variance reduction with WoE and nonzero drift needs the exact solution");
    if (options_.rw_lambda && !(*options_.rw_lambda > 0.0)) throw ConfigError("rw_lambda must be positive");
    if (options_.gm_shift < 0.0) throw ConfigError("GM shift must be nonnegative");

    constant_sigma_ = co.constant_diffusion.has_value();
    identity_sigma_ = co.identity_diffusion();
    if (method == Method::bp && !identity_sigma_)
        throw UnsupportedError("the BP integrator requires identity diffusion");
    if (constant_sigma_) {
        const MatrixXd& s = *co.constant_diffusion;
        if (s.rows() != problem.dimension() || s.cols() != problem.dimension())
            throw ConfigError("diffusion matrix has the wrong shape");
        const MatrixXd a = 0.5 * s * s.transpose();
        constant_lambda_a_ = Eigen::SelfAdjointEigenSolver<MatrixXd>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    }
}

void TrajectorySimulator::load_coefficients(const VectorXd& x, Workspace& ws) const
{
    const Coefficients& co = problem_->coefficients;
    if (!co.zero_drift) co.drift(x, ws.b);
    if (!constant_sigma_) co.diffusion(x, ws.sigma);
    ws.c = co.zero_potential ? 0.0 : co.potential(x);
    ws.f = co.source(x);
}

// Euler step of (X, Y, Z) from ws.x with Gaussian or binary `noise`; writes ws.x_next.
void TrajectorySimulator::euler_update(Workspace& ws, const VectorXd& noise, double dt, double sqrt_dt) const
{
    if (identity_sigma_) ws.disp = noise;
    else ws.disp.noalias() = ws.sigma.triangularView<Eigen::Lower>() * noise;
    ws.x_next = ws.x + sqrt_dt * ws.disp;
    if (!problem_->coefficients.zero_drift) ws.x_next += dt * ws.b;

    const double y0 = ws.y;
    ws.z += dt * y0 * ws.f;
    if (options_.vr) {
        problem_->coefficients.exact_gradient(ws.x, ws.grad);
        ws.vr_increment = -y0 * sqrt_dt * ws.grad.dot(ws.disp);
        ws.z += ws.vr_increment;
    }
    ws.y += dt * y0 * ws.c;
}

double TrajectorySimulator::lambda_max_sigma_sigma_t(const Workspace& ws) const
{
    if (constant_lambda_a_) return 2.0 * *constant_lambda_a_;
    const MatrixXd sst = ws.sigma * ws.sigma.transpose();
    return gershgorin_lambda_max(sst);
}

ExitRecord TrajectorySimulator::finish(Workspace& ws, const VectorXd& terminal, double nu, double y, double z,
                                       std::uint64_t steps) const
{
    boundary_data(problem_->domain, terminal, ws.bd);
    ExitRecord rec;
    rec.exit_point = ws.bd.projection;
    rec.terminal_point = terminal;
    rec.nu = nu;
    rec.y = y;
    rec.z = z;
    rec.score = problem_->coefficients.boundary(rec.exit_point) * y + z;
    rec.n_steps = steps;
    return rec;
}

void TrajectorySimulator::check_cap(std::uint64_t steps, const RngStream& stream) const
{
    if (steps >= options_.max_steps)
        throw DivergenceError("trajectory exceeded " + std::to_string(options_.max_steps) + " steps",
                              stream.trajectory_index());
}

ExitRecord TrajectorySimulator::simulate(RngStream& stream) const
{
    const Eigen::Index dim = problem_->dimension();
    Workspace ws;
    ws.x = problem_->x0;
    ws.x_next.resize(dim);
    ws.noise.resize(dim);
    ws.disp.resize(dim);
    ws.b = VectorXd::Zero(dim);
    if (constant_sigma_) ws.sigma = *problem_->coefficients.constant_diffusion;
    switch (method_) {
    case Method::em:
    case Method::gm: return run_euler_family(stream, ws);
    case Method::bb: return run_bb(stream, ws);
    case Method::bp: return run_bp(stream, ws);
    case Method::woe: return run_woe(stream, ws);
    case Method::rw: return run_rw(stream, ws);
    }
    throw std::logic_error("unknown method");
}

ExitRecord TrajectorySimulator::run_euler_family(RngStream& stream, Workspace& ws) const
{
    const auto& domain = problem_->domain;
    const bool shifted = method_ == Method::gm;
    const double shift = options_.gm_shift * sqrt_h_;
    for (std::uint64_t k = 0;; ++k) {
        double d;
        if (shifted) {
            boundary_data(domain, ws.x, ws.bd);
            load_coefficients(ws.x, ws);
            d = ws.bd.distance;
            const double width = identity_sigma_ ? shift : shift * normal_diffusion_norm(ws.sigma, ws.bd.normal);
            if (d >= -width) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
        } else {
            d = signed_distance(domain, ws.x);
            if (d >= 0.0) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
            load_coefficients(ws.x, ws);
        }
        check_cap(k, stream);
        normal_vec(stream, ws.noise);
        euler_update(ws, ws.noise, h_, sqrt_h_);
        ws.x.swap(ws.x_next);
    }
}

ExitRecord TrajectorySimulator::run_bb(RngStream& stream, Workspace& ws) const
{
    const auto& domain = problem_->domain;
    boundary_data(domain, ws.x, ws.bd);
    VectorXd normal_k;
    for (std::uint64_t k = 0;; ++k) {
        const double d = ws.bd.distance;
        if (d >= 0.0) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
        check_cap(k, stream);
        load_coefficients(ws.x, ws);
        normal_k = ws.bd.normal;
        const double y0 = ws.y;
        const double z0 = ws.z;
        normal_vec(stream, ws.noise);
        euler_update(ws, ws.noise, h_, sqrt_h_);
        boundary_data(domain, ws.x_next, ws.bd);
        const double d1 = ws.bd.distance;
        bool exited = d1 >= 0.0;
        if (!exited) {
            const double sn = identity_sigma_ ? 1.0 : normal_diffusion_norm(ws.sigma, normal_k);
            const double p = std::exp(-2.0 * d * d1 / (h_ * sn * sn));
            exited = uniform01(stream) < p;
        }
        // The exit decision depends on this step's noise, so its control-variate increment is kept:
        // the martingale part must be stopped at a stopping time to stay mean-zero.
        if (exited) return finish(ws, ws.x, double(k) * h_, y0, z0 + ws.vr_increment, k);
        ws.x.swap(ws.x_next);
    }
}

ExitRecord TrajectorySimulator::run_bp(RngStream& stream, Workspace& ws) const
{
    const auto& domain = problem_->domain;
    const Coefficients& co = problem_->coefficients;
    boundary_data(domain, ws.x, ws.bd);
    VectorXd projection_k;
    for (std::uint64_t k = 0;; ++k) {
        const double d = ws.bd.distance;
        if (d >= 0.0) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
        check_cap(k, stream);
        load_coefficients(ws.x, ws);
        projection_k = ws.bd.projection;
        const double y0 = ws.y;
        const double z0 = ws.z;
        normal_vec(stream, ws.noise);
        euler_update(ws, ws.noise, h_, sqrt_h_);
        boundary_data(domain, ws.x_next, ws.bd);
        const std::optional<double> tau = bp_sample_exit_time(d, ws.bd.distance, h_, stream);
        if (tau) {
            const VectorXd exit = bp_sample_exit_point(ws.x, ws.x_next, projection_k, d, *tau, h_, stream);
            double z = z0 + *tau * y0 * ws.f;
            if (options_.vr) {
                // grad was evaluated at X_k by euler_update
                VectorXd dw = exit - ws.x;
                if (!co.zero_drift) dw -= *tau * ws.b;
                z -= y0 * ws.grad.dot(dw);
            }
            const double y = y0 + *tau * y0 * ws.c;
            return finish(ws, exit, double(k) * h_ + *tau, y, z, k + 1);
        }
        ws.x.swap(ws.x_next);
    }
}

ExitRecord TrajectorySimulator::run_woe(RngStream& stream, Workspace& ws) const
{
    const auto& domain = problem_->domain;
    const Coefficients& co = problem_->coefficients;
    const double dim = double(problem_->dimension());
    const double r = std::sqrt(dim * h_);
    const double layer = r * r;
    for (std::uint64_t k = 0;; ++k) {
        boundary_data(domain, ws.x, ws.bd);
        const double d = ws.bd.distance;
        if (d >= -layer) return finish(ws, ws.x, double(k + 1) * h_, ws.y, ws.z, k);
        check_cap(k, stream);
        load_coefficients(ws.x, ws);
        const double lambda_a = 0.5 * lambda_max_sigma_sigma_t(ws);
        double rk = r;
        if (d >= -r * std::sqrt(2.0 * lambda_a)) {
            const double sn = identity_sigma_ ? 1.0 : normal_diffusion_norm(ws.sigma, ws.bd.normal);
            rk = std::min(r, -d / sn);
        }
        sphere_uniform(stream, ws.noise);
        if (identity_sigma_) ws.disp = ws.noise;
        else ws.disp.noalias() = ws.sigma.triangularView<Eigen::Lower>() * ws.noise;
        ws.x_next = ws.x + rk * ws.disp;

        double mu_omega = 0.0;
        if (!co.zero_drift) {
            if (identity_sigma_) ws.mu = ws.b;
            else ws.mu = ws.sigma.triangularView<Eigen::Lower>().solve(ws.b);
            mu_omega = ws.mu.dot(ws.noise);
        }
        const double dt = rk * rk / dim;
        const double y0 = ws.y;
        ws.z += y0 * ws.f * dt;
        if (options_.vr) {
            co.exact_gradient(ws.x, ws.grad);
            double f_omega = -ws.grad.dot(ws.disp);
            if (!co.zero_drift) f_omega -= co.exact(ws.x) * mu_omega;
            ws.z += y0 * f_omega * rk;
        }
        ws.y += y0 * ws.c * dt + y0 * mu_omega * rk;
        ws.x.swap(ws.x_next);
    }
}

ExitRecord TrajectorySimulator::run_rw(RngStream& stream, Workspace& ws) const
{
    const auto& domain = problem_->domain;
    const Coefficients& co = problem_->coefficients;
    const double dim = double(problem_->dimension());
    for (std::uint64_t k = 0;; ++k) {
        boundary_data(domain, ws.x, ws.bd);
        const double d = ws.bd.distance;
        if (d >= 0.0) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
        check_cap(k, stream);
        load_coefficients(ws.x, ws);
        double width;
        if (options_.rw_lambda) {
            width = *options_.rw_lambda * sqrt_h_;
        } else {
            width = std::sqrt(dim * h_ * lambda_max_sigma_sigma_t(ws));
            if (!co.zero_drift) width += h_ * ws.b.norm();
        }
        if (d >= -width) {
            if (uniform01(stream) <= rw_exit_probability(d, width)) return finish(ws, ws.x, double(k) * h_, ws.y, ws.z, k);
            ws.x -= width * ws.bd.normal;
            load_coefficients(ws.x, ws);
        }
        for (Eigen::Index i = 0; i < ws.noise.size(); ++i) ws.noise(i) = binary(stream);
        euler_update(ws, ws.noise, h_, sqrt_h_);
        ws.x.swap(ws.x_next);
    }
}

double rw_exit_probability(double d, double width)
{
    if (!(width > 0.0)) throw std::invalid_argument("boundary-zone width must be positive");
    return width / (std::abs(d) + width);
}

ExitRecord simulate(const ProblemInstance& problem, Method method, double h, RngStream& stream,
                    const SimulationOptions& options)
{
    return TrajectorySimulator(problem, method, h, options).simulate(stream);
}

PathState step_em(const ProblemInstance& problem, const PathState& state, RngStream& stream, double h, bool vr)
{
    SimulationOptions options;
    options.vr = vr;
    const TrajectorySimulator sim(problem, Method::em, h, options);
    const Eigen::Index dim = problem.dimension();
    if (state.x.size() != dim) throw ConfigError("state dimension mismatch");
    TrajectorySimulator::Workspace ws;
    ws.x = state.x;
    ws.y = state.y;
    ws.z = state.z;
    ws.b = VectorXd::Zero(dim);
    ws.noise.resize(dim);
    if (sim.constant_sigma_) ws.sigma = *problem.coefficients.constant_diffusion;
    sim.load_coefficients(ws.x, ws);
    normal_vec(stream, ws.noise);
    sim.euler_update(ws, ws.noise, h, std::sqrt(h));
    return PathState{ws.x_next, ws.y, ws.z, state.k + 1};
}

double bb_crossing_probability(double d_k, double d_k1, const MatrixXd& sigma_k, const VectorXd& n_k, double h)
{
    if (!(h > 0.0)) throw std::invalid_argument("bb_crossing_probability: h must be positive");
    if (d_k1 >= 0.0) return 1.0;
    const double sn = normal_diffusion_norm(sigma_k, n_k);
    return std::exp(-2.0 * d_k * d_k1 / (h * sn * sn));
}

std::optional<double> bp_sample_exit_time(double d_k, double d_k1, double h, RngStream& stream)
{
    if (!(h > 0.0)) throw std::invalid_argument("bp_sample_exit_time: h must be positive");
    if (d_k1 >= 0.0) {
        if (d_k1 == 0.0 || d_k == 0.0) return h;
        const double w = inverse_gaussian(stream, d_k * d_k / h, std::abs(d_k) / d_k1);
        return h * w / (1.0 + w);
    }
    const double tau = -2.0 * std::abs(d_k) * std::abs(d_k1) / std::log(uniform01(stream));
    if (tau < h) return tau;
    return std::nullopt;
}

VectorXd bp_sample_exit_point(const VectorXd& x_k, const VectorXd& x_k1, const VectorXd& pi_k, double d_k,
                              double tau, double h, RngStream& stream)
{
    const double depth = std::abs(d_k);
    if (depth < 1e-14) return pi_k;
    const Eigen::Index dim = x_k.size();
    const VectorXd n = (pi_k - x_k) / depth;

    // Q = -s (I - 2 v v^T / v^T v) with v = n + s e1 is symmetric, orthogonal and maps n to e1.
    const double s = n(0) >= 0.0 ? 1.0 : -1.0;
    VectorXd v = n;
    v(0) += s;
    const double vv = v.squaredNorm();
    auto apply_q = [&](const VectorXd& a) -> VectorXd { return -s * (a - (2.0 * v.dot(a) / vv) * v); };

    const VectorXd eta = apply_q(x_k1 - x_k);
    VectorXd bridged(dim);
    bridged(0) = depth;
    const double ratio = tau / h;
    const double spread = std::sqrt(std::max(tau * (1.0 - ratio), 0.0));
    for (Eigen::Index j = 1; j < dim; ++j) bridged(j) = ratio * eta(j) + standard_normal(stream) * spread;
    return x_k + apply_q(bridged);
}

double woe_tangent_radius(double d, const MatrixXd& sigma_k, const VectorXd& n_k)
{
    const double sn = normal_diffusion_norm(sigma_k, n_k);
    if (!(sn > 0.0)) throw std::invalid_argument("woe_tangent_radius: degenerate diffusion along the normal");
    return std::abs(d) / sn;
}

}  // namespace exitflow
