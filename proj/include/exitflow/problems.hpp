#pragma once

#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "exitflow/geometry.hpp"

namespace exitflow {

using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using DomainD = Domain<double>;

/// Coefficients of  sum a_ij u_ij + b . grad u + c u + f = 0  in Omega,  u = g on the boundary,
/// with A = sigma sigma^T / 2 and sigma lower triangular.
struct Coefficients {
    std::function<void(const VectorXd&, VectorXd&)> drift;
    std::function<void(const VectorXd&, MatrixXd&)> diffusion;
    std::function<double(const VectorXd&)> potential;
    std::function<double(const VectorXd&)> source;
    std::function<double(const VectorXd&)> boundary;

    std::function<double(const VectorXd&)> exact;                  // optional
    std::function<void(const VectorXd&, VectorXd&)> exact_gradient;  // optional

    /// Set when sigma does not depend on x; integrators then skip per-step evaluation.
    std::optional<MatrixXd> constant_diffusion;
    bool zero_drift = false;
    bool zero_potential = false;

    bool has_exact() const { return static_cast<bool>(exact); }
    bool has_exact_gradient() const { return static_cast<bool>(exact_gradient); }
    bool identity_diffusion() const;
};

struct ProblemInstance {
    std::string name;
    Coefficients coefficients;
    DomainD domain;
    VectorXd x0;

    Eigen::Index dimension() const { return domain.dimension(); }
};

/// Builds a problem instance and validates that x0 lies strictly inside the domain.
ProblemInstance make_problem(std::string name, Coefficients coefficients, DomainD domain, VectorXd x0);

/// Gobet-Menozzi test diffusion in 3D, u = g = xyz.
/// `kind` selects the paired (domain, x0) setup: ball (0.56,0.52,0.30) in B(1,0),
/// gouda 0.57*1 in G(1, 0.67*1), emmental 0.57*1 in E(1, 0).
ProblemInstance example_I(DomainKind kind = DomainKind::ball);

/// Oscillating solution u = 2 + cos(k^T (x - x0)) with sigma = lower-triangular ones, b = x,
/// c = -|x|^2 and x0 = 0.7*1.
ProblemInstance example_II(Eigen::Index dim, DomainKind kind = DomainKind::emmental);

/// (1/2) Laplace u = -1 in the unit ball, g = sum x_i, x0 = (0.9, 0, ..., 0).
ProblemInstance example_III(Eigen::Index dim);

/// (1/2) Laplace u = sum i x_i^2 in 32D, u = g = (1/6) sum i x_i^4, x0 = 0.05*1.
ProblemInstance example_IV(DomainKind kind = DomainKind::ball);

/// Wave vector of example II: 1, 2, 3, 1, 2, 3, ...
Eigen::VectorXi example_II_wave_vector(Eigen::Index dim);

/// Residual of the PDE evaluated on the exact solution with central differences
/// (one Richardson extrapolation, so polynomials up to degree five are differenced exactly).
double pde_residual(const ProblemInstance& problem, const VectorXd& x, double fd_step);

/// Upper bound on the largest eigenvalue of a symmetric positive definite matrix:
/// the maximum absolute column sum.
template <typename Derived>
typename Derived::Scalar gershgorin_lambda_max(const Eigen::MatrixBase<Derived>& a)
{
    return a.cwiseAbs().colwise().sum().maxCoeff();
}

/// Same problem with g replaced by 0 (the "v" part of u = v + w).
ProblemInstance without_boundary_data(const ProblemInstance& problem);

/// Same problem with f replaced by 0 (the "w" part of u = v + w).
ProblemInstance without_source(const ProblemInstance& problem);

}  // namespace exitflow
