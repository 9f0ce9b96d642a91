#include "opprec/transfer.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace opprec {

namespace {

void require_level(int got, int want, const char* what)
{
    if (got != want) {
        throw Error(ErrorCode::LevelMismatch,
                    std::string(what) + ": expected level " + std::to_string(want) + ", got " + std::to_string(got));
    }
}

void require_size(Eigen::Index got, std::size_t want, const char* what)
{
    if (static_cast<std::size_t>(got) != want) {
        throw Error(ErrorCode::SizeMismatch, std::string(what) + ": expected " + std::to_string(want) +
                                                 " entries, got " + std::to_string(got));
    }
}

void require_dense_size(const LevelHierarchy& h)
{
    if (h.forest().num_leaves() > kDenseOracleLimit) {
        throw Error(ErrorCode::MeshTooLarge, "dense oracle limited to " + std::to_string(kDenseOracleLimit) +
                                                 " triangles");
    }
}

// Barycentric coordinates of q w.r.t. triangle (a, b, c) after orthogonal
// projection onto its plane; `offplane` receives the plane distance.
Eigen::Vector3d barycentric(const Point& a, const Point& b, const Point& c, const Point& q, double& offplane)
{
    const Point e1 = b - a;
    const Point e2 = c - a;
    Eigen::Matrix2d g;
    g << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
    const Eigen::Vector2d rhs(e1.dot(q - a), e2.dot(q - a));
    const Eigen::Vector2d l = g.ldlt().solve(rhs);
    offplane = (a + l[0] * e1 + l[1] * e2 - q).norm();
    return {1.0 - l[0] - l[1], l[0], l[1]};
}

} // namespace

void sweep_up(const MeshForest& forest, NodeValues& values)
{
    for (auto id = static_cast<Index>(forest.num_nodes()) - 1; id >= 0; --id) {
        const auto& n = forest.node(id);
        if (n.is_leaf()) {
            continue;
        }
        const auto& c0 = values[static_cast<std::size_t>(n.children[0])];
        const auto& c1 = values[static_cast<std::size_t>(n.children[1])];
        auto& out = values[static_cast<std::size_t>(id)];
        for (std::size_t r = 0; r < 3; ++r) {
            const auto& m = kChildToParent[r];
            out[r] = m[0] * c0[0] + m[1] * c0[1] + m[2] * c0[2] + m[3] * c1[0] + m[4] * c1[1] + m[5] * c1[2];
        }
    }
}

void sweep_down_adjoint(const MeshForest& forest, NodeValues& values)
{
    for (Index id = 0; id < static_cast<Index>(forest.num_nodes()); ++id) {
        const auto& n = forest.node(id);
        if (n.is_leaf()) {
            continue;
        }
        const auto p = values[static_cast<std::size_t>(id)];
        auto& c0 = values[static_cast<std::size_t>(n.children[0])];
        auto& c1 = values[static_cast<std::size_t>(n.children[1])];
        for (std::size_t k = 0; k < 3; ++k) {
            c0[k] += kChildToParent[0][k] * p[0] + kChildToParent[1][k] * p[1] + kChildToParent[2][k] * p[2];
            c1[k] += kChildToParent[0][k + 3] * p[0] + kChildToParent[1][k + 3] * p[1] +
                     kChildToParent[2][k + 3] * p[2];
        }
    }
}

ElementLinearVector embed_E(const LevelHierarchy& h, const NodalVector& u)
{
    const LevelMesh& leaf = h.leaf_level();
    require_level(u.level, leaf.level, "embed_E");
    require_size(u.values.size(), leaf.interior_vertex_ids.size(), "embed_E");
    ElementLinearVector x{leaf.level, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * leaf.elements.size()))};
    for (std::size_t k = 0; k < leaf.elements.size(); ++k) {
        const auto& v = h.forest().node(leaf.elements[k]).vertex_ids;
        for (std::size_t i = 0; i < 3; ++i) {
            const Index s = leaf.interior_slot(v[i]);
            if (s != kNone) {
                x.values[static_cast<Eigen::Index>(3 * k + i)] = u.values[s];
            }
        }
    }
    return x;
}

std::vector<ElementLinearVector> project_R_sweep(const LevelHierarchy& h, const ElementLinearVector& x)
{
    const LevelMesh& leaf = h.leaf_level();
    require_level(x.level, leaf.level, "project_R_sweep");
    require_size(x.values.size(), 3 * leaf.elements.size(), "project_R_sweep");
    const MeshForest& forest = h.forest();

    NodeValues node_values(forest.num_nodes(), {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < leaf.elements.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            node_values[static_cast<std::size_t>(leaf.elements[k])][i] = x.values[static_cast<Eigen::Index>(3 * k + i)];
        }
    }
    sweep_up(forest, node_values);

    std::vector<ElementLinearVector> out;
    for (int j = h.max_level(); j >= 0; --j) {
        const LevelMesh& lm = h.level(j);
        ElementLinearVector r{j, Eigen::VectorXd(static_cast<Eigen::Index>(3 * lm.elements.size()))};
        for (std::size_t k = 0; k < lm.elements.size(); ++k) {
            for (std::size_t i = 0; i < 3; ++i) {
                r.values[static_cast<Eigen::Index>(3 * k + i)] = node_values[static_cast<std::size_t>(lm.elements[k])][i];
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

NodalVector average_H(const LevelHierarchy& h, int j, const ElementLinearVector& x)
{
    const LevelMesh& lm = h.level(j);
    require_level(x.level, j, "average_H");
    require_size(x.values.size(), 3 * lm.elements.size(), "average_H");
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lm.vertex_ids.size()));
    for (std::size_t k = 0; k < lm.elements.size(); ++k) {
        const auto& n = h.forest().node(lm.elements[k]);
        for (std::size_t i = 0; i < 3; ++i) {
            sums[lm.vertex_slot(n.vertex_ids[i])] += n.area * x.values[static_cast<Eigen::Index>(3 * k + i)];
        }
    }
    NodalVector out{j, Eigen::VectorXd(static_cast<Eigen::Index>(lm.interior_vertex_ids.size()))};
    for (std::size_t k = 0; k < lm.interior_vertex_ids.size(); ++k) {
        const Index s = lm.vertex_slot(lm.interior_vertex_ids[k]);
        out.values[static_cast<Eigen::Index>(k)] = sums[s] / lm.patch_area[static_cast<std::size_t>(s)];
    }
    return out;
}

NodalVector prolong_P(const LevelHierarchy& h, int j, const NodalVector& u)
{
    const LevelMesh& fine = h.level(j);
    NodalVector out{j, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fine.interior_vertex_ids.size()))};
    if (j == 0) {
        return out;
    }
    const LevelMesh& coarse = h.level(j - 1);
    require_level(u.level, j - 1, "prolong_P");
    require_size(u.values.size(), coarse.interior_vertex_ids.size(), "prolong_P");
    auto coarse_value = [&](Index v) {
        const Index s = coarse.interior_slot(v);
        return s == kNone ? 0.0 : u.values[s];
    };
    for (std::size_t k = 0; k < fine.interior_vertex_ids.size(); ++k) {
        const Index v = fine.interior_vertex_ids[k];
        if (coarse.vertex_slot(v) != kNone) {
            out.values[static_cast<Eigen::Index>(k)] = coarse_value(v);
        } else {
            const auto [a, b] = h.forest().vertex(v).parent_edge;
            out.values[static_cast<Eigen::Index>(k)] = 0.5 * (coarse_value(a) + coarse_value(b));
        }
    }
    return out;
}

Eigen::MatrixXd dense_Pi(const LevelHierarchy& h, int j)
{
    require_dense_size(h);
    const MeshForest& forest = h.forest();
    const LevelMesh& lm = h.level(j);
    const LevelMesh& leaf = h.leaf_level();
    const auto n_fine = static_cast<Eigen::Index>(leaf.interior_vertex_ids.size());
    const auto n_rows = static_cast<Eigen::Index>(lm.interior_vertex_ids.size());

    Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(n_rows, n_fine);
    for (Index t : lm.elements) {
        const auto& tn = forest.node(t);
        const Point& a = forest.vertex(tn.vertex_ids[0]).coords;
        const Point& b = forest.vertex(tn.vertex_ids[1]).coords;
        const Point& c = forest.vertex(tn.vertex_ids[2]).coords;

        // Mass matrix of P1(T) and load (phi_i^T, u) over the leaves below T,
        // both with the edge-midpoint rule (exact for quadratics).
        Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
        const std::array<Eigen::Vector3d, 3> mids_ref{Eigen::Vector3d(0.5, 0.5, 0.0), Eigen::Vector3d(0.0, 0.5, 0.5),
                                                      Eigen::Vector3d(0.5, 0.0, 0.5)};
        for (const auto& lam : mids_ref) {
            mass += (tn.area / 3.0) * lam * lam.transpose();
        }

        Eigen::MatrixXd load = Eigen::MatrixXd::Zero(3, n_fine);
        std::vector<Index> stack{t};
        while (!stack.empty()) {
            const Index id = stack.back();
            stack.pop_back();
            const auto& n = forest.node(id);
            if (!n.is_leaf()) {
                stack.push_back(n.children[0]);
                stack.push_back(n.children[1]);
                continue;
            }
            for (std::size_t e = 0; e < 3; ++e) {
                const Index p = n.vertex_ids[e];
                const Index q = n.vertex_ids[(e + 1) % 3];
                const Point mid = 0.5 * (forest.vertex(p).coords + forest.vertex(q).coords);
                double off = 0.0;
                const Eigen::Vector3d lam = barycentric(a, b, c, mid, off);
                for (Index v : {p, q}) {
                    const Index s = leaf.interior_slot(v);
                    if (s != kNone) {
                        load.col(s) += (n.area / 3.0) * 0.5 * lam;
                    }
                }
            }
        }
        const Eigen::MatrixXd proj = mass.inverse() * load;  // nodal values of Q_T u on T
        for (std::size_t i = 0; i < 3; ++i) {
            const Index r = lm.interior_slot(tn.vertex_ids[i]);
            if (r != kNone) {
                weighted.row(r) += tn.area * proj.row(static_cast<Eigen::Index>(i));
            }
        }
    }
    for (Eigen::Index r = 0; r < n_rows; ++r) {
        weighted.row(r) /= lm.patch_area_of(lm.interior_vertex_ids[static_cast<std::size_t>(r)]);
    }
    return weighted;
}

Eigen::MatrixXd dense_prolongation(const LevelHierarchy& h, int j)
{
    require_dense_size(h);
    const LevelMesh& fine = h.level(j);
    if (j == 0) {
        return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fine.interior_vertex_ids.size()), 0);
    }
    const LevelMesh& coarse = h.level(j - 1);
    const MeshForest& forest = h.forest();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(fine.interior_vertex_ids.size()),
                                              static_cast<Eigen::Index>(coarse.interior_vertex_ids.size()));
    for (std::size_t k = 0; k < fine.interior_vertex_ids.size(); ++k) {
        const Point& q = forest.vertex(fine.interior_vertex_ids[k]).coords;
        bool found = false;
        for (Index t : coarse.elements) {
            const auto& tn = forest.node(t);
            const Point& a = forest.vertex(tn.vertex_ids[0]).coords;
            const Point& b = forest.vertex(tn.vertex_ids[1]).coords;
            const Point& c = forest.vertex(tn.vertex_ids[2]).coords;
            const double diam = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
            double off = 0.0;
            const Eigen::Vector3d lam = barycentric(a, b, c, q, off);
            if (lam.minCoeff() < -1e-10 || off > 1e-10 * diam) {
                continue;
            }
            for (std::size_t i = 0; i < 3; ++i) {
                const Index s = coarse.interior_slot(tn.vertex_ids[i]);
                if (s != kNone) {
                    P(static_cast<Eigen::Index>(k), s) = lam[static_cast<Eigen::Index>(i)];
                }
            }
            found = true;
            break;
        }
        if (!found) {
            throw Error(ErrorCode::NonConforming, "fine vertex outside every coarse element");
        }
    }
    return P;
}

} // namespace opprec
