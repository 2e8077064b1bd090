#include <doctest.h>

#include <cmath>
#include <random>

#include "exitflow/errors.hpp"
#include "exitflow/problems.hpp"

using namespace exitflow;

namespace {

VectorXd random_interior(const ProblemInstance& p, std::mt19937_64& rng, double margin)
{
    const auto& dom = p.domain;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ue(0.0, 1.0);
    for (;;) {
        VectorXd x(p.dimension());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            x(i) = dom.center()(i) +
                   dom.size() * (dom.kind() == DomainKind::emmental ? ue(rng) : u(rng) / std::sqrt(double(x.size())));
        if (signed_distance(dom, x) < -margin) return x;
    }
}

std::vector<ProblemInstance> all_examples()
{
    std::vector<ProblemInstance> out;
    for (auto kind : {DomainKind::ball, DomainKind::gouda, DomainKind::emmental}) {
        out.push_back(example_I(kind));
        if (kind != DomainKind::ball) {
            // x0 = 0.7 * 1 lies outside the unit ball
            out.push_back(example_II(3, kind));
            out.push_back(example_II(7, kind));
        }
        out.push_back(example_IV(kind));
    }
    out.push_back(example_III(3));
    out.push_back(example_III(16));
    return out;
}

}  // namespace

TEST_SUITE("problems")
{
    TEST_CASE("example I values and diffusion at the origin")
    {
        const auto p = example_I();
        CHECK(p.coefficients.exact(p.x0) == doctest::Approx(0.08736).epsilon(1e-12));
        MatrixXd s;
        p.coefficients.diffusion(VectorXd::Zero(3), s);
        MatrixXd expected(3, 3);
        expected << 1, 0, 0, 0.5, std::sqrt(3.0) / 2, 0, 0, 0.5, std::sqrt(3.0) / 2;
        CHECK((s - expected).norm() < 1e-15);
        VectorXd g;
        p.coefficients.exact_gradient(p.x0, g);
        CHECK(g(0) == doctest::Approx(0.52 * 0.30));
        CHECK(pde_residual(p, VectorXd(Eigen::Vector3d(0.2, 0.1, -0.1)), 1e-3) < 1e-4);
    }

    TEST_CASE("example II structure")
    {
        for (Eigen::Index dim : {1, 3, 5, 16}) {
            const auto p = example_II(dim);
            CHECK(p.coefficients.exact(p.x0) == doctest::Approx(3.0).epsilon(1e-15));
            CHECK(p.x0.isApproxToConstant(0.7));
        }
        const auto p = example_II(3);
        MatrixXd s;
        p.coefficients.diffusion(p.x0, s);
        MatrixXd a_expected(3, 3);
        a_expected << 1, 1, 1, 1, 2, 2, 1, 2, 3;
        CHECK((0.5 * s * s.transpose() - 0.5 * a_expected).norm() < 1e-15);
        MatrixXd inv_expected = MatrixXd::Identity(3, 3);
        inv_expected(1, 0) = inv_expected(2, 1) = -1.0;
        CHECK((MatrixXd(s.inverse()) - inv_expected).norm() < 1e-14);
        const Eigen::VectorXi k = example_II_wave_vector(7);
        CHECK(k == (Eigen::VectorXi(7) << 1, 2, 3, 1, 2, 3, 1).finished());
        CHECK(pde_residual(example_II(6), example_II(6).x0, 1e-3) < 1e-4);
    }

    TEST_CASE("example III values")
    {
        const auto p = example_III(16);
        CHECK(p.coefficients.exact(p.x0) == doctest::Approx(0.911875).epsilon(1e-15));
        std::mt19937_64 rng(1);
        for (int i = 0; i < 20; ++i) {
            const VectorXd x = random_interior(p, rng, 0.01);
            CHECK(p.coefficients.source(x) == 1.0);
        }
        const auto p8 = example_III(8);
        for (int i = 0; i < 20; ++i) CHECK(std::abs(pde_residual(p8, random_interior(p8, rng, 0.01), 1e-2)) < 1e-9);
    }

    TEST_CASE("example IV values")
    {
        const auto p = example_IV();
        CHECK(p.dimension() == 32);
        CHECK(p.coefficients.exact(p.x0) == doctest::Approx(5.5e-4).epsilon(1e-12));
        // (1/2) Laplacian of u at e_1 equals -f there
        VectorXd e1 = VectorXd::Zero(32);
        e1(0) = 1.0;
        CHECK(-p.coefficients.source(e1) == doctest::Approx(1.0));
        std::mt19937_64 rng(2);
        for (int i = 0; i < 10; ++i) CHECK(std::abs(pde_residual(p, random_interior(p, rng, 0.01), 1e-3)) < 1e-8);
    }

    TEST_CASE("every example satisfies its PDE at 50 interior points")
    {
        std::mt19937_64 rng(3);
        for (const auto& p : all_examples()) {
            INFO(p.name << " in " << p.dimension() << "D");
            for (int i = 0; i < 50; ++i) CHECK(std::abs(pde_residual(p, random_interior(p, rng, 0.02), 1e-3)) < 1e-4);
        }
    }

    TEST_CASE("boundary data match the exact solution on the boundary")
    {
        std::mt19937_64 rng(4);
        for (const auto& p : all_examples()) {
            INFO(p.name << " in " << p.dimension() << "D");
            for (int i = 0; i < 50; ++i) {
                const VectorXd pi = boundary_data(p.domain, random_interior(p, rng, 1e-3)).projection;
                CHECK(std::abs(p.coefficients.boundary(pi) - p.coefficients.exact(pi)) <= 1e-12);
            }
        }
    }

    TEST_CASE("coefficient invariants: triangular sigma, positive definite A, nonpositive c")
    {
        std::mt19937_64 rng(5);
        for (const auto& p : all_examples()) {
            INFO(p.name);
            for (int i = 0; i < 20; ++i) {
                const VectorXd x = random_interior(p, rng, 0.0);
                MatrixXd s;
                p.coefficients.diffusion(x, s);
                for (Eigen::Index r = 0; r < s.rows(); ++r) {
                    CHECK(s(r, r) > 0.0);
                    for (Eigen::Index c = r + 1; c < s.cols(); ++c) CHECK(s(r, c) == 0.0);
                }
                const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * s * s.transpose());
                CHECK(eig.eigenvalues().minCoeff() > 0.0);
                CHECK(p.coefficients.potential(x) <= 0.0);
            }
        }
    }

    TEST_CASE("gradient matches finite differences of the exact solution")
    {
        std::mt19937_64 rng(6);
        for (const auto& p : all_examples()) {
            const VectorXd x = random_interior(p, rng, 0.01);
            VectorXd g;
            p.coefficients.exact_gradient(x, g);
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                VectorXd xp = x, xm = x;
                xp(i) += 1e-5;
                xm(i) -= 1e-5;
                const double fd = (p.coefficients.exact(xp) - p.coefficients.exact(xm)) / 2e-5;
                CHECK(std::abs(fd - g(i)) < 1e-6);
            }
        }
    }

    TEST_CASE("gershgorin bound")
    {
        MatrixXd a(3, 3);
        a << 1, 1, 1, 1, 2, 2, 1, 2, 3;
        a *= 0.5;
        CHECK(gershgorin_lambda_max(a) == doctest::Approx(3.0));
        const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
        CHECK(eig.eigenvalues().maxCoeff() <= 3.0);
        CHECK(eig.eigenvalues().maxCoeff() == doctest::Approx(2.53).epsilon(1e-2));
        CHECK(gershgorin_lambda_max(MatrixXd::Identity(4, 4)) == 1.0);
        CHECK(gershgorin_lambda_max(Eigen::Vector2d(2, 5).asDiagonal().toDenseMatrix()) == 5.0);
    }

    TEST_CASE("split problems")
    {
        const auto p = example_II(3);
        const auto v = without_boundary_data(p);
        const auto w = without_source(p);
        const VectorXd x = p.x0;
        CHECK(v.coefficients.boundary(x) == 0.0);
        CHECK(v.coefficients.source(x) == p.coefficients.source(x));
        CHECK(w.coefficients.source(x) == 0.0);
        CHECK(w.coefficients.boundary(x) == p.coefficients.boundary(x));
    }

    TEST_CASE("construction errors")
    {
        auto p = example_III(3);
        CHECK_THROWS_AS(make_problem("x", p.coefficients, p.domain, VectorXd::Constant(3, 2.0)), ConfigError);
        CHECK_THROWS_AS(make_problem("x", p.coefficients, p.domain, VectorXd::Zero(2)), ConfigError);
        p.coefficients.exact = nullptr;
        CHECK_THROWS_AS(pde_residual(p, VectorXd::Zero(3), 1e-3), UnsupportedError);
    }
}
