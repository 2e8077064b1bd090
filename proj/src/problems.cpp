#include "exitflow/problems.hpp"

#include <cmath>
#include <utility>

#include "exitflow/errors.hpp"

namespace exitflow {

bool Coefficients::identity_diffusion() const
{
    return constant_diffusion && constant_diffusion->isIdentity(0.0);
}

ProblemInstance make_problem(std::string name, Coefficients coefficients, DomainD domain, VectorXd x0)
{
    if (x0.size() != domain.dimension())
        throw ConfigError("x0 has " + std::to_string(x0.size()) + " components, expected " +
                          std::to_string(domain.dimension()));
    if (!coefficients.drift || !coefficients.diffusion || !coefficients.potential ||
        !coefficients.source || !coefficients.boundary)
        throw ConfigError("problem '" + name + "' is missing a coefficient function");
    if (!contains(domain, x0)) throw ConfigError("x0 lies outside the domain of problem '" + name + "'");
    return ProblemInstance{std::move(name), std::move(coefficients), std::move(domain), std::move(x0)};
}

namespace {

DomainD make_domain(DomainKind kind, Eigen::Index dim, double ball_shift, double gouda_shift,
                    double emmental_shift)
{
    switch (kind) {
    case DomainKind::ball: return DomainD::ball(dim, 1.0, VectorXd::Constant(dim, ball_shift));
    case DomainKind::gouda: return DomainD::gouda(dim, 1.0, VectorXd::Constant(dim, gouda_shift));
    case DomainKind::emmental:
        return DomainD::emmental(dim, 1.0, VectorXd::Constant(dim, emmental_shift));
    }
    throw ConfigError("unknown domain kind");
}

void set_constant_diffusion(Coefficients& co, MatrixXd sigma)
{
    co.constant_diffusion = sigma;
    co.diffusion = [s = std::move(sigma)](const VectorXd&, MatrixXd& out) { out = s; };
}

void set_zero_drift(Coefficients& co)
{
    co.zero_drift = true;
    co.drift = [](const VectorXd& x, VectorXd& out) { out.setZero(x.size()); };
}

void set_zero_potential(Coefficients& co)
{
    co.zero_potential = true;
    co.potential = [](const VectorXd&) { return 0.0; };
}

}  // namespace

ProblemInstance example_I(DomainKind kind)
{
    Coefficients co;
    co.drift = [](const VectorXd& p, VectorXd& out) {
        out.resize(3);
        out << p(1), p(2), p(0);
    };
    co.diffusion = [](const VectorXd& p, MatrixXd& out) {
        const double sx = std::sqrt(1.0 + std::abs(p(0)));
        const double sy = std::sqrt(1.0 + std::abs(p(1)));
        const double sz = std::sqrt(1.0 + std::abs(p(2)));
        const double h = std::sqrt(3.0) / 2.0;
        out.resize(3, 3);
        out << sz, 0.0, 0.0,
               0.5 * sx, h * sx, 0.0,
               0.0, 0.5 * sy, h * sy;
    };
    set_zero_potential(co);
    co.source = [](const VectorXd& p) {
        const double x = p(0), y = p(1), z = p(2);
        const double sx = std::sqrt(1.0 + std::abs(x));
        const double sy = std::sqrt(1.0 + std::abs(y));
        const double sz = std::sqrt(1.0 + std::abs(z));
        return -(y * y * z + z * z * x + x * x * y) - 0.5 * z * sz * sx -
               std::sqrt(3.0) / 4.0 * x * sx * sy;
    };
    co.exact = [](const VectorXd& p) { return p(0) * p(1) * p(2); };
    co.boundary = co.exact;
    co.exact_gradient = [](const VectorXd& p, VectorXd& out) {
        out.resize(3);
        out << p(1) * p(2), p(0) * p(2), p(0) * p(1);
    };

    VectorXd x0(3);
    switch (kind) {
    case DomainKind::ball: x0 << 0.56, 0.52, 0.30; break;
    default: x0.setConstant(0.57); break;
    }
    return make_problem("example1", std::move(co), make_domain(kind, 3, 0.0, 0.67, 0.0), std::move(x0));
}

Eigen::VectorXi example_II_wave_vector(Eigen::Index dim)
{
    Eigen::VectorXi k(dim);
    for (Eigen::Index i = 0; i < dim; ++i) k(i) = int(i % 3) + 1;
    return k;
}

ProblemInstance example_II(Eigen::Index dim, DomainKind kind)
{
    if (dim < 1) throw ConfigError("example2 needs dimension >= 1");
    const VectorXd k = example_II_wave_vector(dim).cast<double>();
    const VectorXd y = VectorXd::Constant(dim, 0.7);
    const MatrixXd sigma = MatrixXd::Ones(dim, dim).triangularView<Eigen::Lower>();
    const double kak = 0.5 * (sigma.transpose() * k).squaredNorm();

    Coefficients co;
    set_constant_diffusion(co, sigma);
    co.drift = [](const VectorXd& x, VectorXd& out) { out = x; };
    co.potential = [](const VectorXd& x) { return -x.squaredNorm(); };
    co.source = [k, y, kak](const VectorXd& x) {
        const double theta = k.dot(x - y);
        const double r2 = x.squaredNorm();
        return (kak + r2) * std::cos(theta) + 2.0 * r2 + k.dot(x) * std::sin(theta);
    };
    co.exact = [k, y](const VectorXd& x) { return 2.0 + std::cos(k.dot(x - y)); };
    co.boundary = co.exact;
    co.exact_gradient = [k, y](const VectorXd& x, VectorXd& out) { out = -std::sin(k.dot(x - y)) * k; };

    // The evaluation point 0.7*1 would sit inside the carved orthant of G(1, 0.67*1) and inside the
    // far hole of E(1, 0); both domains are shifted so that x0 is interior.
    return make_problem("example2", std::move(co), make_domain(kind, dim, 0.0, 0.73, 0.1), y);
}

ProblemInstance example_III(Eigen::Index dim)
{
    if (dim < 1) throw ConfigError("example3 needs dimension >= 1");
    const double inv_d = 1.0 / double(dim);
    Coefficients co;
    set_constant_diffusion(co, MatrixXd::Identity(dim, dim));
    set_zero_drift(co);
    set_zero_potential(co);
    co.source = [](const VectorXd&) { return 1.0; };
    co.boundary = [](const VectorXd& x) { return x.sum(); };
    co.exact = [inv_d](const VectorXd& x) { return (1.0 - x.squaredNorm()) * inv_d + x.sum(); };
    co.exact_gradient = [inv_d](const VectorXd& x, VectorXd& out) {
        out = (1.0 - 2.0 * inv_d * x.array()).matrix();
    };
    VectorXd x0 = VectorXd::Zero(dim);
    x0(0) = 0.9;
    return make_problem("example3", std::move(co), DomainD::ball(dim, 1.0, VectorXd::Zero(dim)),
                        std::move(x0));
}

ProblemInstance example_IV(DomainKind kind)
{
    constexpr Eigen::Index dim = 32;
    const Eigen::ArrayXd weight = Eigen::ArrayXd::LinSpaced(dim, 1.0, double(dim));
    Coefficients co;
    set_constant_diffusion(co, MatrixXd::Identity(dim, dim));
    set_zero_drift(co);
    set_zero_potential(co);
    co.source = [weight](const VectorXd& x) { return -(weight * x.array().square()).sum(); };
    co.exact = [weight](const VectorXd& x) { return (weight * x.array().square().square()).sum() / 6.0; };
    co.boundary = co.exact;
    co.exact_gradient = [weight](const VectorXd& x, VectorXd& out) {
        out = (2.0 / 3.0 * weight * x.array().cube()).matrix();
    };
    return make_problem("example4", std::move(co), make_domain(kind, dim, 0.0, 0.1, -0.5),
                        VectorXd::Constant(dim, 0.05));
}

namespace {

struct Derivatives {
    VectorXd gradient;
    MatrixXd hessian;
};

// Second-order central differences; only Hessian entries with nonzero weight are formed.
Derivatives central_differences(const std::function<double(const VectorXd&)>& u, const VectorXd& x,
                                double h, const MatrixXd& a)
{
    const Eigen::Index dim = x.size();
    Derivatives out{VectorXd::Zero(dim), MatrixXd::Zero(dim, dim)};
    const double u0 = u(x);
    VectorXd p = x;
    for (Eigen::Index i = 0; i < dim; ++i) {
        p(i) = x(i) + h;
        const double up = u(p);
        p(i) = x(i) - h;
        const double um = u(p);
        p(i) = x(i);
        out.gradient(i) = (up - um) / (2.0 * h);
        out.hessian(i, i) = (up - 2.0 * u0 + um) / (h * h);
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = i + 1; j < dim; ++j) {
            if (a(i, j) == 0.0 && a(j, i) == 0.0) continue;
            double acc = 0.0;
            for (int si = -1; si <= 1; si += 2) {
                for (int sj = -1; sj <= 1; sj += 2) {
                    p(i) = x(i) + si * h;
                    p(j) = x(j) + sj * h;
                    acc += si * sj * u(p);
                }
            }
            p(i) = x(i);
            p(j) = x(j);
            out.hessian(i, j) = out.hessian(j, i) = acc / (4.0 * h * h);
        }
    }
    return out;
}

}  // namespace

double pde_residual(const ProblemInstance& problem, const VectorXd& x, double fd_step)
{
    const Coefficients& co = problem.coefficients;
    if (!co.has_exact()) throw UnsupportedError("pde_residual needs an exact solution");
    if (!(fd_step > 0.0)) throw ConfigError("pde_residual needs a positive finite-difference step");
    detail::check_dimension(problem.domain, x.size());

    MatrixXd sigma;
    co.diffusion(x, sigma);
    const MatrixXd a = 0.5 * sigma * sigma.transpose();
    VectorXd b;
    co.drift(x, b);

    const Derivatives coarse = central_differences(co.exact, x, fd_step, a);
    const Derivatives fine = central_differences(co.exact, x, 0.5 * fd_step, a);
    const VectorXd grad = (4.0 * fine.gradient - coarse.gradient) / 3.0;
    const MatrixXd hess = (4.0 * fine.hessian - coarse.hessian) / 3.0;

    return a.cwiseProduct(hess).sum() + b.dot(grad) + co.potential(x) * co.exact(x) + co.source(x);
}

ProblemInstance without_boundary_data(const ProblemInstance& problem)
{
    ProblemInstance out = problem;
    out.name += "/v";
    out.coefficients.boundary = [](const VectorXd&) { return 0.0; };
    out.coefficients.exact = nullptr;
    out.coefficients.exact_gradient = nullptr;
    return out;
}

ProblemInstance without_source(const ProblemInstance& problem)
{
    ProblemInstance out = problem;
    out.name += "/w";
    out.coefficients.source = [](const VectorXd&) { return 0.0; };
    out.coefficients.exact = nullptr;
    out.coefficients.exact_gradient = nullptr;
    return out;
}

}  // namespace exitflow
