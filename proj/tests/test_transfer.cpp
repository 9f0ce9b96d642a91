#include "opprec/meshes.hpp"
#include "opprec/transfer.hpp"

#include <doctest.h>

#include <random>

using namespace opprec;

namespace {

Eigen::VectorXd random_vector(Eigen::Index n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = nd(rng);
    }
    return v;
}

NodalVector leaf_vector(const LevelHierarchy& h, Eigen::VectorXd v)
{
    return {h.max_level(), std::move(v)};
}

Eigen::MatrixXd matrix_of_HRE(const LevelHierarchy& h, int j)
{
    const auto& leaf = h.leaf_level();
    const auto n = static_cast<Eigen::Index>(leaf.interior_vertex_ids.size());
    Eigen::MatrixXd M(static_cast<Eigen::Index>(h.level(j).interior_vertex_ids.size()), n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(n, c);
        const auto sweep = project_R_sweep(h, embed_E(h, leaf_vector(h, e)));
        M.col(c) = average_H(h, j, sweep[static_cast<std::size_t>(h.max_level() - j)]).values;
    }
    return M;
}

} // namespace

TEST_CASE("projection constants")
{
    for (const auto& row : kChildToParent) {
        double s = 0;
        for (double x : row) {
            s += x;
        }
        CHECK(s == 1.0);
    }
    for (const auto& row : kFigureProjection) {
        double s = 0;
        for (double x : row) {
            s += x;
        }
        CHECK(s == 1.0);
    }
    // Figure layout and local layout describe the same matrix.
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 6; ++c) {
            CHECK(kFigureProjection[r][c] == kChildToParent[kFigureRowToLocal[r]][kFigureColToSlot[c]]);
        }
    }
    // first column of the figure matrix
    CHECK(kFigureProjection[0][0] == 0.5);
    CHECK(kFigureProjection[1][0] == -0.25);
    CHECK(kFigureProjection[2][0] == 0.25);
}

TEST_CASE("sweep_up reproduces linears on the parent")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(5);
    // affine function of the coordinates
    auto g = [](const Point& p) { return 0.3 + 1.7 * p.x() - 0.4 * p.y() + 2.1 * p.z(); };
    NodeValues vals(f.num_nodes(), {0, 0, 0});
    for (Index l : f.leaves()) {
        for (int i = 0; i < 3; ++i) {
            vals[l][i] = g(f.vertex(f.node(l).vertex_ids[i]).coords);
        }
    }
    sweep_up(f, vals);
    for (std::size_t id = 0; id < f.num_nodes(); ++id) {
        for (int i = 0; i < 3; ++i) {
            CHECK(vals[id][i] == doctest::Approx(g(f.vertex(f.nodes()[id].vertex_ids[i]).coords)).epsilon(1e-13));
        }
    }
}

TEST_CASE("sweep_down_adjoint is the transpose of sweep_up")
{
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 3);
    const auto n = static_cast<Eigen::Index>(f.num_nodes());
    const Eigen::VectorXd a = random_vector(3 * n, 1);
    const Eigen::VectorXd b = random_vector(3 * n, 2);
    NodeValues up(f.num_nodes()), down(f.num_nodes());
    for (Index id = 0; id < n; ++id) {
        for (int i = 0; i < 3; ++i) {
            up[id][i] = f.node(id).is_leaf() ? a[3 * id + i] : 0.0;
            down[id][i] = b[3 * id + i];
        }
    }
    sweep_up(f, up);
    sweep_down_adjoint(f, down);
    double lhs = 0, rhs = 0;
    for (Index id = 0; id < n; ++id) {
        for (int i = 0; i < 3; ++i) {
            lhs += up[id][i] * b[3 * id + i];
            if (f.node(id).is_leaf()) {
                rhs += a[3 * id + i] * down[id][i];
            }
        }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("embed_E")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(2);
    auto h = LevelHierarchy::extract(f);
    const auto n = static_cast<Eigen::Index>(h.leaf_level().interior_vertex_ids.size());
    CHECK(embed_E(h, leaf_vector(h, Eigen::VectorXd::Zero(n))).values.isZero(0));

    // a valence-4 vertex
    const auto& lm = h.leaf_level();
    std::size_t k = 0;
    while (lm.valence[lm.vertex_slot(lm.interior_vertex_ids[k])] != 4) {
        ++k;
    }
    const auto x = embed_E(h, leaf_vector(h, Eigen::VectorXd::Unit(n, static_cast<Eigen::Index>(k))));
    CHECK((x.values.array() != 0).count() == 4);
    CHECK(x.values.sum() == 4.0);

    // continuity: duplicates agree
    const Eigen::VectorXd u = random_vector(n, 3);
    const auto y = embed_E(h, leaf_vector(h, u));
    for (std::size_t e = 0; e < lm.elements.size(); ++e) {
        for (int i = 0; i < 3; ++i) {
            const Index v = f.node(lm.elements[e]).vertex_ids[i];
            CHECK(y.values[static_cast<Eigen::Index>(3 * e + i)] == u[lm.interior_slot(v)]);
        }
    }
    CHECK_THROWS_AS(embed_E(h, leaf_vector(h, Eigen::VectorXd::Zero(n + 1))), Error);
}

TEST_CASE("average_H hand example: areas 1 and 3")
{
    TriangleMesh m;
    // two triangles sharing the diagonal (0,1); areas 1 and 3
    m.coords = {Point(0, 0, 0), Point(2, 0, 0), Point(0, 1, 0), Point(2, -3, 0)};
    m.triangles = {{0, 1, 2}, {1, 0, 3}};
    m.gamma_edges = {{0, 2}, {1, 2}, {1, 3}, {0, 3}};
    auto f = MeshForest::build_initial(m);
    f.refine_uniform(1);
    auto h = LevelHierarchy::extract(f);
    // level 0 has no interior vertex; the diagonal's midpoint is the single interior vertex at level 1
    const auto& lm = h.level(1);
    REQUIRE(lm.interior_vertex_ids.size() == 1);
    const Index mid = lm.interior_vertex_ids[0];
    ElementLinearVector x{1, Eigen::VectorXd::Zero(3 * static_cast<Eigen::Index>(lm.elements.size()))};
    for (std::size_t e = 0; e < lm.elements.size(); ++e) {
        const auto& n = f.node(lm.elements[e]);
        x.values[static_cast<Eigen::Index>(3 * e + 2)] = n.area == doctest::Approx(0.5) ? 2.0 : 6.0;
        CHECK(n.vertex_ids[2] == mid);
    }
    CHECK(average_H(h, 1, x).values[0] == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("average_H: equal areas give the mean; continuous input unchanged")
{
    auto f = MeshForest::build_initial(unit_square(false));
    f.refine_uniform(2);
    auto h = LevelHierarchy::extract(f);
    const auto& lm = h.leaf_level();
    const auto n = static_cast<Eigen::Index>(lm.interior_vertex_ids.size());
    const Eigen::VectorXd u = random_vector(n, 4);
    CHECK((average_H(h, h.max_level(), embed_E(h, leaf_vector(h, u))).values - u).norm() <= 1e-14 * u.norm());

    ElementLinearVector x{h.max_level(), random_vector(3 * static_cast<Eigen::Index>(lm.elements.size()), 5)};
    const auto avg = average_H(h, h.max_level(), x);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Index v = lm.interior_vertex_ids[static_cast<std::size_t>(k)];
        double sum = 0;
        int cnt = 0;
        for (std::size_t e = 0; e < lm.elements.size(); ++e) {
            for (int i = 0; i < 3; ++i) {
                if (f.node(lm.elements[e]).vertex_ids[i] == v) {
                    sum += x.values[static_cast<Eigen::Index>(3 * e + i)];
                    ++cnt;
                }
            }
        }
        CHECK(avg.values[k] == doctest::Approx(sum / cnt).epsilon(1e-14));
    }
}

TEST_CASE("prolong_P")
{
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 3);
    auto h = LevelHierarchy::extract(f);
    for (int j = 1; j <= h.max_level(); ++j) {
        const auto& coarse = h.level(j - 1);
        const auto& fine = h.level(j);
        const auto nc = static_cast<Eigen::Index>(coarse.interior_vertex_ids.size());
        // constants
        const auto one = prolong_P(h, j, {j - 1, Eigen::VectorXd::Ones(nc)});
        CHECK((one.values.array() == 1.0).all());
        // hat at a coarse vertex
        const Eigen::Index a = nc / 2;
        const auto hat = prolong_P(h, j, {j - 1, Eigen::VectorXd::Unit(nc, a)});
        const Index va = coarse.interior_vertex_ids[static_cast<std::size_t>(a)];
        for (std::size_t k = 0; k < fine.interior_vertex_ids.size(); ++k) {
            const Index v = fine.interior_vertex_ids[k];
            double expected = 0.0;
            if (v == va) {
                expected = 1.0;
            } else if (coarse.vertex_slot(v) == kNone) {
                const auto pe = f.vertex(v).parent_edge;
                expected = (pe[0] == va || pe[1] == va) ? 0.5 : 0.0;
            }
            CHECK(hat.values[static_cast<Eigen::Index>(k)] == expected);
        }
        // agrees with point location; restriction to coarse vertices is the identity
        const Eigen::VectorXd u = random_vector(nc, 6 + static_cast<unsigned>(j));
        const auto pu = prolong_P(h, j, {j - 1, u});
        CHECK((pu.values - dense_prolongation(h, j) * u).norm() <= 1e-13 * u.norm());
        for (Eigen::Index k = 0; k < nc; ++k) {
            CHECK(pu.values[fine.interior_slot(coarse.interior_vertex_ids[static_cast<std::size_t>(k)])] == u[k]);
        }
    }
    CHECK(prolong_P(h, 0, {0, Eigen::VectorXd()}).values.isZero(0));
}

TEST_CASE("prolonged function agrees with the coarse one at random points")
{
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 2);
    auto h = LevelHierarchy::extract(f);
    const int j = h.max_level();
    const auto& coarse = h.level(j - 1);
    const auto& fine = h.level(j);
    const Eigen::VectorXd u = random_vector(static_cast<Eigen::Index>(coarse.interior_vertex_ids.size()), 9);
    const auto pu = prolong_P(h, j, {j - 1, u});
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> U(0, 1);
    auto value_at = [&](const LevelMesh& lm, const Eigen::VectorXd& c, Index elem, const Eigen::Vector3d& lam) {
        double val = 0;
        for (int i = 0; i < 3; ++i) {
            const Index s = lm.interior_slot(f.node(elem).vertex_ids[i]);
            val += s == kNone ? 0.0 : lam[i] * c[s];
        }
        return val;
    };
    for (int trial = 0; trial < 100; ++trial) {
        const Index fe = fine.elements[static_cast<std::size_t>(U(rng) * fine.elements.size())];
        double r1 = U(rng), r2 = U(rng);
        if (r1 + r2 > 1) {
            r1 = 1 - r1;
            r2 = 1 - r2;
        }
        const Eigen::Vector3d lam(1 - r1 - r2, r1, r2);
        const auto& fv = f.node(fe).vertex_ids;
        const Point x = lam[0] * f.vertex(fv[0]).coords + lam[1] * f.vertex(fv[1]).coords + lam[2] * f.vertex(fv[2]).coords;
        // coarse element containing fe
        const Index ce = h.parent_in_level(j, fe);
        const auto& cv = f.node(ce).vertex_ids;
        const Point a = f.vertex(cv[0]).coords, b = f.vertex(cv[1]).coords, c = f.vertex(cv[2]).coords;
        Eigen::Matrix<double, 3, 2> J;
        J << b - a, c - a;
        const Eigen::Vector2d st = J.colPivHouseholderQr().solve(x - a);
        const Eigen::Vector3d clam(1 - st[0] - st[1], st[0], st[1]);
        CHECK(value_at(fine, pu.values, fe, lam) == doctest::Approx(value_at(coarse, u, ce, clam)).epsilon(1e-12));
    }
}

TEST_CASE("dense_Pi: identity at the leaf level, H R E agreement, linear reproduction")
{
    auto f = MeshForest::build_initial(cube_surface());
    refine_corners(f, 3);
    auto h = LevelHierarchy::extract(f);
    const int L = h.max_level();
    const Eigen::MatrixXd PiL = dense_Pi(h, L);
    CHECK((PiL - Eigen::MatrixXd::Identity(PiL.rows(), PiL.cols())).cwiseAbs().maxCoeff() <= 1e-13);
    for (int j = 0; j <= L; ++j) {
        const Eigen::MatrixXd a = dense_Pi(h, j);
        const Eigen::MatrixXd b = matrix_of_HRE(h, j);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
    }
    // constants on the closed cube
    const auto n = static_cast<Eigen::Index>(h.leaf_level().interior_vertex_ids.size());
    for (int j = 0; j <= L; ++j) {
        const Eigen::VectorXd c = dense_Pi(h, j) * Eigen::VectorXd::Ones(n);
        CHECK((c.array() - 1.0).abs().maxCoeff() <= 1e-13);
    }
}

TEST_CASE("dense_Pi reproduces affine functions on a flat chart")
{
    auto f = MeshForest::build_initial(unit_square(false));
    f.refine_uniform(2);
    const auto roots_leaves = f.leaves();
    f.refine_conforming(std::vector<Index>{roots_leaves[0], roots_leaves[5]});
    auto h = LevelHierarchy::extract(f);
    auto g = [](const Point& p) { return 0.2 + 3.0 * p.x() - 1.5 * p.y(); };
    const auto& leaf = h.leaf_level();
    Eigen::VectorXd u(static_cast<Eigen::Index>(leaf.interior_vertex_ids.size()));
    for (std::size_t k = 0; k < leaf.interior_vertex_ids.size(); ++k) {
        u[static_cast<Eigen::Index>(k)] = g(f.vertex(leaf.interior_vertex_ids[k]).coords);
    }
    for (int j = 0; j <= h.max_level(); ++j) {
        const Eigen::VectorXd pu = dense_Pi(h, j) * u;
        const auto& lm = h.level(j);
        for (std::size_t k = 0; k < lm.interior_vertex_ids.size(); ++k) {
            CHECK(pu[static_cast<Eigen::Index>(k)] == doctest::Approx(g(f.vertex(lm.interior_vertex_ids[k]).coords)).epsilon(1e-13));
        }
    }
}

TEST_CASE("dense oracle guard")
{
    auto f = MeshForest::build_initial(cube_surface());
    f.refine_uniform(8);
    auto h = LevelHierarchy::extract(f);
    try {
        dense_Pi(h, 0);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MeshTooLarge);
    }
}
