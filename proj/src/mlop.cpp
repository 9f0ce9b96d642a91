#include "opprec/mlop.hpp"

#include "opprec/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace opprec {

namespace {

// Element incidences of every vertex of a level, aligned with LevelMesh::vertex_ids.
struct Incidence {
    std::vector<std::size_t> begin;
    std::vector<Index> node;
    std::vector<int> local;
    std::vector<double> area;
};

Incidence level_incidence(const MeshForest& forest, const LevelMesh& lm)
{
    struct Item {
        Index vertex;
        Index node;
        int local;
    };
    std::vector<Item> items;
    items.reserve(3 * lm.elements.size());
    for (Index e : lm.elements) {
        const auto& v = forest.node(e).vertex_ids;
        for (int i = 0; i < 3; ++i) {
            items.push_back({v[static_cast<std::size_t>(i)], e, i});
        }
    }
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return a.vertex != b.vertex ? a.vertex < b.vertex : a.node < b.node;
    });
    Incidence inc;
    inc.begin.reserve(lm.vertex_ids.size() + 1);
    for (std::size_t k = 0; k < items.size(); ++k) {
        if (k == 0 || items[k].vertex != items[k - 1].vertex) {
            inc.begin.push_back(k);
        }
        inc.node.push_back(items[k].node);
        inc.local.push_back(items[k].local);
        inc.area.push_back(forest.node(items[k].node).area);
    }
    inc.begin.push_back(items.size());
    return inc;
}

} // namespace

MultiLevelOperator::MultiLevelOperator(const LevelHierarchy& hierarchy, double s, int d)
    : hierarchy_(&hierarchy), s_(s), d_(d)
{
    if (!(s >= 0.0 && s <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "order parameter s must lie in [0, 1]");
    }
    if (d != 2) {
        throw Error(ErrorCode::InvalidArgument, "only triangulations (d = 2) are supported");
    }
    const int L = hierarchy.max_level();
    for (int j = 0; j <= L; ++j) {
        level_scale_.push_back(std::exp2(j * (2.0 * s / d - 1.0)));
    }
    const LevelMesh& leaf = hierarchy.leaf_level();
    leaf_size_ = leaf.interior_vertex_ids.size();
    leaf_dofs_.reserve(leaf.elements.size());
    for (Index e : leaf.elements) {
        const auto& v = hierarchy.forest().node(e).vertex_ids;
        leaf_dofs_.push_back({leaf.interior_slot(v[0]), leaf.interior_slot(v[1]), leaf.interior_slot(v[2])});
    }
    build_stencils();
}

void MultiLevelOperator::build_stencils()
{
    const LevelHierarchy& h = *hierarchy_;
    const MeshForest& forest = h.forest();
    level_begin_.assign(1, 0);
    row_begin_.assign(1, 0);
    entries_.clear();

    Incidence coarse_inc;
    for (int j = 0; j <= h.max_level(); ++j) {
        const LevelMesh& lm = h.level(j);
        Incidence inc = level_incidence(forest, lm);

        auto add_average = [&](const LevelMesh& level, const Incidence& in, Index v, double factor) {
            const auto slot = static_cast<std::size_t>(level.vertex_slot(v));
            const double patch = level.patch_area[slot];
            for (std::size_t k = in.begin[slot]; k < in.begin[slot + 1]; ++k) {
                entries_.push_back({in.node[k], in.local[k], factor * in.area[k] / patch});
            }
        };

        for (Index v : h.active(j)) {
            add_average(lm, inc, v, 1.0);
            if (j > 0) {
                const LevelMesh& coarse = h.level(j - 1);
                if (coarse.vertex_slot(v) != kNone) {
                    add_average(coarse, coarse_inc, v, -1.0);
                } else {
                    for (Index end : forest.vertex(v).parent_edge) {
                        if (!forest.vertex(end).on_gamma) {
                            add_average(coarse, coarse_inc, end, -0.5);
                        }
                    }
                }
            }
            row_begin_.push_back(entries_.size());
        }
        level_begin_.push_back(row_begin_.size() - 1);
        coarse_inc = std::move(inc);
    }
}

void MultiLevelOperator::check_size(const Eigen::VectorXd& u) const
{
    if (static_cast<std::size_t>(u.size()) != leaf_size_) {
        throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(leaf_size_) + " nodal values, got " +
                                                 std::to_string(u.size()));
    }
}

Eigen::VectorXd MultiLevelOperator::apply(const Eigen::VectorXd& u, std::uint64_t* flops) const
{
    check_size(u);
    const LevelHierarchy& h = *hierarchy_;
    if (h.max_level() == 0) {
        // Pi_0 = Id and Pi_{-1} = 0: the form is the plain sum of squares.
        if (flops != nullptr) {
            *flops += static_cast<std::uint64_t>(u.size());
        }
        return u;
    }
    const MeshForest& forest = h.forest();
    const LevelMesh& leaf = h.leaf_level();
    const std::size_t internal = forest.num_nodes() - leaf.elements.size();

    NodeValues values(forest.num_nodes(), {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < leaf.elements.size(); ++k) {
        auto& dst = values[static_cast<std::size_t>(leaf.elements[k])];
        for (std::size_t i = 0; i < 3; ++i) {
            const Index dof = leaf_dofs_[k][i];
            dst[i] = dof == kNone ? 0.0 : u[dof];
        }
    }
    sweep_up(forest, values);

    NodeValues adjoint(forest.num_nodes(), {0.0, 0.0, 0.0});
    for (std::size_t j = 0; j + 1 < level_begin_.size(); ++j) {
        const double scale = level_scale_[j];
        for (std::size_t r = level_begin_[j]; r < level_begin_[j + 1]; ++r) {
            double diff = 0.0;
            for (std::size_t k = row_begin_[r]; k < row_begin_[r + 1]; ++k) {
                const Entry& e = entries_[k];
                diff += e.weight * values[static_cast<std::size_t>(e.node)][static_cast<std::size_t>(e.local)];
            }
            diff *= scale;
            for (std::size_t k = row_begin_[r]; k < row_begin_[r + 1]; ++k) {
                const Entry& e = entries_[k];
                adjoint[static_cast<std::size_t>(e.node)][static_cast<std::size_t>(e.local)] += diff * e.weight;
            }
        }
    }
    sweep_down_adjoint(forest, adjoint);

    Eigen::VectorXd y = Eigen::VectorXd::Zero(u.size());
    for (std::size_t k = 0; k < leaf.elements.size(); ++k) {
        const auto& src = adjoint[static_cast<std::size_t>(leaf.elements[k])];
        for (std::size_t i = 0; i < 3; ++i) {
            const Index dof = leaf_dofs_[k][i];
            if (dof != kNone) {
                y[dof] += src[i];
            }
        }
    }

    if (flops != nullptr) {
        const std::size_t rows = row_begin_.size() - 1;
        // up: 3 x (6 mul + 5 add); down: 3 x 6 (mul + add); stencil: 2 per entry
        // each way plus one scaling per row; E^T: one add per leaf slot.
        *flops += 33 * internal + 36 * internal + 4 * entries_.size() + rows + 3 * leaf.elements.size();
    }
    return y;
}

std::uint64_t MultiLevelOperator::operation_count(const Eigen::VectorXd& u) const
{
    std::uint64_t count = 0;
    apply(u, &count);
    return count;
}

Eigen::VectorXd MultiLevelOperator::level_difference(int j, const Eigen::VectorXd& u) const
{
    check_size(u);
    const LevelHierarchy& h = *hierarchy_;
    h.level(j);
    const MeshForest& forest = h.forest();
    const LevelMesh& leaf = h.leaf_level();
    NodeValues values(forest.num_nodes(), {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < leaf.elements.size(); ++k) {
        for (std::size_t i = 0; i < 3; ++i) {
            const Index dof = leaf_dofs_[k][i];
            values[static_cast<std::size_t>(leaf.elements[k])][i] = dof == kNone ? 0.0 : u[dof];
        }
    }
    sweep_up(forest, values);
    const auto jj = static_cast<std::size_t>(j);
    Eigen::VectorXd out(static_cast<Eigen::Index>(level_begin_[jj + 1] - level_begin_[jj]));
    for (std::size_t r = level_begin_[jj]; r < level_begin_[jj + 1]; ++r) {
        double diff = 0.0;
        for (std::size_t k = row_begin_[r]; k < row_begin_[r + 1]; ++k) {
            const Entry& e = entries_[k];
            diff += e.weight * values[static_cast<std::size_t>(e.node)][static_cast<std::size_t>(e.local)];
        }
        out[static_cast<Eigen::Index>(r - level_begin_[jj])] = diff;
    }
    return out;
}

Eigen::SparseMatrix<double> MultiLevelOperator::assemble_sparse() const
{
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd e = Eigen::VectorXd::Zero(size());
    for (Eigen::Index c = 0; c < size(); ++c) {
        e[c] = 1.0;
        const Eigen::VectorXd col = apply(e);
        e[c] = 0.0;
        for (Eigen::Index r = 0; r < size(); ++r) {
            if (col[r] != 0.0) {
                triplets.emplace_back(r, c, col[r]);
            }
        }
    }
    Eigen::SparseMatrix<double> B(size(), size());
    B.setFromTriplets(triplets.begin(), triplets.end());
    return B;
}

Eigen::MatrixXd assemble_BS_dense(const MultiLevelOperator& op)
{
    const LevelHierarchy& h = op.hierarchy();
    const auto n = op.size();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd coarse_pi;
    for (int j = 0; j <= h.max_level(); ++j) {
        Eigen::MatrixXd pi = dense_Pi(h, j);
        Eigen::MatrixXd diff = pi;
        if (j > 0) {
            diff -= dense_prolongation(h, j) * coarse_pi;
        }
        B.selfadjointView<Eigen::Lower>().rankUpdate(diff.transpose(), op.level_scale()[static_cast<std::size_t>(j)]);
        coarse_pi = std::move(pi);
    }
    // exact symmetry by construction
    return B.selfadjointView<Eigen::Lower>();
}

} // namespace opprec
