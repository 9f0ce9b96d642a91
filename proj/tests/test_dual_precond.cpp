#include "opprec/dual_precond.hpp"
#include "opprec/galerkin.hpp"
#include "opprec/meshes.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace opprec;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (auto& x : v) {
        x = nd(rng);
    }
    return v;
}

// Torus from an m x m grid, every cell split along the same diagonal:
// all vertices have valence 6.
TriangleMesh torus(int m)
{
    TriangleMesh t;
    auto id = [m](int i, int j) { return static_cast<Index>(((i + m) % m) * m + (j + m) % m); };
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const double u = 2 * std::numbers::pi * i / m, v = 2 * std::numbers::pi * j / m;
            t.coords.emplace_back((3 + std::cos(v)) * std::cos(u), (3 + std::cos(v)) * std::sin(u), std::sin(v));
        }
    }
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            t.triangles.push_back({a, c, b});
            t.triangles.push_back({c, a, d});
        }
    }
    return t;
}

} // namespace

TEST_CASE("D and B^B entries")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(1);
    auto h = LevelHierarchy::extract(f);
    Preconditioner G(h, {0.5, 2, 5.3});
    for (Eigen::Index t = 0; t < G.size(); ++t) {
        CHECK(G.D_diag()[t] == 0.25);
        CHECK(G.BB_diag()[t] == doctest::Approx(2.65).epsilon(1e-15));
    }
    CHECK_THROWS_AS(Preconditioner(h, {0.5, 2, 0.0}), Error);
}

TEST_CASE("valence-6 torus: p = 1/6, q diagonal = 5/6")
{
    auto f = MeshForest::build_initial(torus(8));
    auto h = LevelHierarchy::extract(f);
    Preconditioner G(h, {});
    const Eigen::MatrixXd P(G.p());
    const Eigen::MatrixXd Q(G.q());
    for (Eigen::Index i = 0; i < P.size(); ++i) {
        CHECK((P.data()[i] == 0.0 || P.data()[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15)));
    }
    for (Eigen::Index t = 0; t < Q.rows(); ++t) {
        CHECK(Q(t, t) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    }
}

TEST_CASE("p and q follow their definitions")
{
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 5);
    auto h = LevelHierarchy::extract(f);
    Preconditioner G(h, {});
    const auto& leaf = h.leaf_level();
    const Eigen::MatrixXd P(G.p());
    const Eigen::MatrixXd Q(G.q());
    const auto nt = static_cast<Eigen::Index>(leaf.elements.size());
    for (Eigen::Index a = 0; a < nt; ++a) {
        const auto& va = f.node(leaf.elements[static_cast<std::size_t>(a)]).vertex_ids;
        for (Index v : va) {
            CHECK(P(leaf.interior_slot(v), a) == 1.0 / leaf.valence_of(v));
        }
        CHECK(G.p().col(a).nonZeros() == 3);
        for (Eigen::Index b = 0; b < nt; ++b) {
            const auto& vb = f.node(leaf.elements[static_cast<std::size_t>(b)]).vertex_ids;
            double expected = a == b ? 1.0 : 0.0;
            for (Index v : va) {
                if (std::find(vb.begin(), vb.end(), v) != vb.end()) {
                    expected -= 1.0 / (3.0 * leaf.valence_of(v));
                }
            }
            CHECK(Q(b, a) == doctest::Approx(expected).epsilon(1e-14));
        }
    }
    // every interior vertex: sum over its triangles of 1/valence = 1
    const Eigen::VectorXd rows = P.rowwise().sum();
    CHECK((rows.array() - 1.0).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("sparsity of p and q stays bounded")
{
    std::vector<double> ratios;
    for (int k = 2; k <= 10; k += 2) {
        auto f = MeshForest::build_initial(cube_surface());
        f.refine_uniform(k);
        auto h = LevelHierarchy::extract(f);
        Preconditioner G(h, {});
        CHECK(G.p().nonZeros() <= 3 * G.size());
        ratios.push_back(static_cast<double>(G.q().nonZeros()) / static_cast<double>(G.size()));
        CHECK(ratios.back() <= 16.0);
    }
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 40);
    auto h = LevelHierarchy::extract(f);
    Preconditioner G(h, {});
    CHECK(static_cast<double>(G.q().nonZeros()) / static_cast<double>(G.size()) <= 16.0);
}

TEST_CASE("apply_G: linearity, symmetry, dense agreement, positivity")
{
    for (int variant = 0; variant < 3; ++variant) {
        auto f = MeshForest::build_initial(cube_surface());
        if (variant == 0) {
            f.refine_uniform(3);
        } else if (variant == 1) {
            refine_corners(f, 3);
        } else {
            f.refine_uniform(1);
            f.refine_conforming(std::vector<Index>{f.leaves()[3]});
        }
        auto h = LevelHierarchy::extract(f);
        for (double s : {0.0, 0.5, 1.0}) {
            Preconditioner G(h, {s, 2, 5.3});
            const auto n = G.size();
            CHECK(G.apply(Eigen::VectorXd::Zero(n)).isZero(0));
            const Eigen::VectorXd r = random_vector(n, 1);
            const Eigen::VectorXd t = random_vector(n, 2);
            CHECK(G.apply(r).dot(t) == doctest::Approx(r.dot(G.apply(t))).epsilon(1e-12));
            const Eigen::MatrixXd dense = G.dense();
            const Eigen::VectorXd y = G.apply(r);
            CHECK((y - dense * r).norm() <= 1e-12 * y.norm());
            CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense).eigenvalues().minCoeff() > 0.0);
            CHECK((G.apply_multilevel(r) + G.apply_bubble(r, 5.3) - y).norm() <= 1e-13 * y.norm());
        }
        Preconditioner G(h, {});
        CHECK_THROWS_AS(G.apply(Eigen::VectorXd::Zero(G.size() + 1)), Error);
    }
}

TEST_CASE("apply_G cost is linear")
{
    double lo = 1e300, hi = 0;
    for (int k = 2; k <= 10; k += 2) {
        auto f = MeshForest::build_initial(cube_surface());
        f.refine_uniform(k);
        auto h = LevelHierarchy::extract(f);
        Preconditioner G(h, {});
        std::uint64_t flops = 0;
        G.apply(Eigen::VectorXd::Ones(G.size()), &flops);
        const double ratio = static_cast<double>(flops) / static_cast<double>(G.size());
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo < 2.0);
}

TEST_CASE("beta calibration")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(4);
    REQUIRE(f.num_leaves() == 192);
    auto h = LevelHierarchy::extract(f);
    const Eigen::MatrixXd A = assemble_single_layer(f);
    Preconditioner G(h, {});
    const LinearOperator Aop = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; };
    const double beta = calibrate_beta(G, Aop);
    CHECK(beta == doctest::Approx(5.3).epsilon(0.2));

    // the calibrated beta equalizes the two spectral radii
    const auto ml = lanczos_max(Aop, [&](const Eigen::VectorXd& r) { return G.apply_multilevel(r); }, G.size());
    const auto bub = lanczos_max(Aop, [&](const Eigen::VectorXd& r) { return G.apply_bubble(r, beta); }, G.size());
    CHECK(ml.lambda_max == doctest::Approx(bub.lambda_max).epsilon(1e-5));

    // invariant under scaling A
    const Eigen::MatrixXd cA = 3.0 * A;
    const LinearOperator cAop = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return cA * x; };
    CHECK(calibrate_beta(G, cAop) == doctest::Approx(beta).epsilon(1e-6));

    const LinearOperator zero = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return Eigen::VectorXd::Zero(x.size());
    };
    try {
        calibrate_beta(G, zero);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularOperand);
    }
}
