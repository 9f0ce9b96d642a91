#include "opprec/dual_precond.hpp"
#include "opprec/galerkin.hpp"
#include "opprec/meshes.hpp"
#include "opprec/spectral.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdlib>
#include <random>

using namespace opprec;

namespace {

Eigen::MatrixXd random_spd(Eigen::Index n, unsigned seed, double spread)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd X(n, n);
    for (Eigen::Index i = 0; i < X.size(); ++i) {
        X.data()[i] = nd(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd Q = qr.householderQ();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d[i] = std::pow(spread, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return Q * d.asDiagonal() * Q.transpose();
}

LinearOperator op(const Eigen::MatrixXd& M)
{
    return [&M](const Eigen::VectorXd& x) -> Eigen::VectorXd { return M * x; };
}

const LinearOperator identity = [](const Eigen::VectorXd& x) { return x; };

} // namespace

TEST_CASE("perfect preconditioner")
{
    const Eigen::MatrixXd A = random_spd(60, 1, 1e3);
    const Eigen::MatrixXd Ainv = A.inverse();
    const auto r = lanczos_condition(op(A), op(Ainv), 60);
    CHECK(r.converged);
    CHECK(r.kappa == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("identity preconditioner matches the dense eigensolver")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(4);
    const Eigen::MatrixXd A = assemble_single_layer(f);
    const auto r = lanczos_condition(op(A), identity, A.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const double kappa = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    CHECK(r.converged);
    CHECK(r.kappa == doctest::Approx(kappa).epsilon(1e-6));
}

TEST_CASE("generalized pairs match the dense generalized eigensolver")
{
    const Eigen::MatrixXd A = random_spd(120, 2, 50.0);
    const Eigen::MatrixXd G = random_spd(120, 3, 20.0);
    const auto r = lanczos_condition(op(A), op(G), 120);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, G.inverse());
    CHECK(r.kappa == doctest::Approx(eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff()).epsilon(1e-4));
    CHECK(r.lambda_min > 0.0);
    CHECK(r.lambda_min <= r.lambda_max);
}

TEST_CASE("scaling invariance")
{
    const Eigen::MatrixXd A = random_spd(80, 4, 100.0);
    const Eigen::MatrixXd G = random_spd(80, 5, 10.0);
    const Eigen::MatrixXd cA = 7.5 * A;
    const Eigen::MatrixXd cG = 0.01 * G;
    const double k = lanczos_condition(op(A), op(G), 80).kappa;
    CHECK(lanczos_condition(op(cA), op(G), 80).kappa == doctest::Approx(k).epsilon(1e-8));
    CHECK(lanczos_condition(op(A), op(cG), 80).kappa == doctest::Approx(k).epsilon(1e-8));
}

TEST_CASE("Ritz intervals are nested")
{
    const Eigen::MatrixXd A = random_spd(200, 6, 1e4);
    double lo = 1e300, hi = -1e300;
    for (int m = 1; m <= 30; ++m) {
        LanczosOptions o;
        o.maxit = m;
        o.tol = 0.0;
        const auto r = lanczos_condition(op(A), identity, 200, o);
        CHECK(r.iterations == m);
        CHECK_FALSE(r.converged);
        CHECK(r.lambda_min <= lo * (1 + 1e-12));
        CHECK(r.lambda_max >= hi * (1 - 1e-12));
        lo = r.lambda_min;
        hi = r.lambda_max;
    }
}

TEST_CASE("errors and flags")
{
    const Eigen::MatrixXd A = random_spd(50, 7, 1e6);
    LanczosOptions o;
    o.maxit = 3;
    const auto r = lanczos_condition(op(A), identity, 50, o);
    CHECK_FALSE(r.converged);
    try {
        require_converged(r);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotConverged);
    }
    const Eigen::MatrixXd negA = -A;
    try {
        lanczos_condition(op(negA), identity, 50);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InnerProductBreakdown);
    }
}

TEST_CASE("seed from the environment")
{
    ::unsetenv("OPPREC_SEED");
    CHECK(default_seed() == 0);
    ::setenv("OPPREC_SEED", "42", 1);
    CHECK(default_seed() == 42);
    CHECK(default_lanczos_options().seed == 42);
    ::setenv("OPPREC_SEED", "x", 1);
    CHECK_THROWS_AS(default_seed(), Error);
    ::unsetenv("OPPREC_SEED");

    const Eigen::MatrixXd A = random_spd(100, 8, 1e3);
    LanczosOptions a, b;
    a.seed = b.seed = 3;
    CHECK(lanczos_condition(op(A), identity, 100, a).kappa == lanczos_condition(op(A), identity, 100, b).kappa);
}

TEST_CASE("pcg")
{
    const Eigen::MatrixXd A = random_spd(150, 9, 1e3);
    const auto zero = pcg_solve(op(A), identity, Eigen::VectorXd::Zero(150));
    CHECK(zero.iterations == 0);
    CHECK(zero.x.isZero(0));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    Eigen::VectorXd b(150);
    for (auto& x : b) {
        x = nd(rng);
    }
    const double tol = 1e-10;
    const auto sol = pcg_solve(op(A), identity, b, tol, 2000);
    const Eigen::VectorXd exact = A.llt().solve(b);
    CHECK((sol.x - exact).norm() <= tol * 10 * 1e3 * exact.norm());  // relative residual times kappa
    CHECK((A * sol.x - b).norm() <= 10 * tol * b.norm());
    CHECK_THROWS_AS(pcg_solve(op(A), identity, b, 1e-14, 2), Error);
}

TEST_CASE("preconditioned pcg iteration counts stay bounded")
{
    std::vector<int> its;
    for (int k = 2; k <= 8; k += 2) {
        auto f = MeshForest::build_initial(cube_surface());
        f.refine_uniform(k);
        auto h = LevelHierarchy::extract(f);
        const Eigen::MatrixXd A = assemble_single_layer(f);
        Preconditioner G(h, {});
        Eigen::VectorXd b(A.rows());
        std::mt19937_64 rng(11);
        std::normal_distribution<double> nd;
        for (auto& x : b) {
            x = nd(rng);
        }
        its.push_back(pcg_solve(op(A), [&](const Eigen::VectorXd& r) { return G.apply(r); }, b, 1e-8).iterations);
    }
    const auto [lo, hi] = std::minmax_element(its.begin(), its.end());
    INFO("iterations " << its[0] << " " << its[1] << " " << its[2] << " " << its[3]);
    CHECK(*hi <= 2 * *lo);
}

TEST_CASE("preconditioned single layer at 768 dofs")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(6);
    auto h = LevelHierarchy::extract(f);
    const Eigen::MatrixXd A = assemble_single_layer(f);
    Preconditioner G(h, {});
    const auto r = lanczos_condition(op(A), [&](const Eigen::VectorXd& x) { return G.apply(x); }, A.rows());
    CHECK(r.converged);
    CHECK(r.kappa == doctest::Approx(3.3).epsilon(0.15));
}
