#pragma once

#include "opprec/hierarchy.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <vector>

namespace opprec {

/// Multi-level operator B^S of Wu-Zheng type on S^{0,1}_{T,0}:
///
///   (B^S u)(v) = sum_j 2^{j(2s/d - 1)} sum_{nu active at j} ((Pi_j - Pi_{j-1})u)(nu) ((Pi_j - Pi_{j-1})v)(nu).
///
/// Application is O(#T): one upward sweep of element projections, a short
/// stencil per active vertex and level, and the adjoint downward sweep.
/// Holds a reference to the hierarchy, which must outlive it.
class MultiLevelOperator {
public:
    MultiLevelOperator(const LevelHierarchy& hierarchy, double s, int d = 2);

    const LevelHierarchy& hierarchy() const { return *hierarchy_; }
    double s() const { return s_; }
    int dimension() const { return d_; }
    const std::vector<double>& level_scale() const { return level_scale_; }

    /// Number of nodal dofs #N_L^0.
    Eigen::Index size() const { return static_cast<Eigen::Index>(leaf_size_); }

    /// Dual coefficients of B^S u w.r.t. the nodal basis. `flops`, when
    /// given, is incremented by the floating-point operations performed.
    Eigen::VectorXd apply(const Eigen::VectorXd& u, std::uint64_t* flops = nullptr) const;

    /// Floating-point operation count of one application.
    std::uint64_t operation_count(const Eigen::VectorXd& u) const;

    /// ((Pi_j - Pi_{j-1}) u)(nu) on active(j), in the order of hierarchy().active(j).
    Eigen::VectorXd level_difference(int j, const Eigen::VectorXd& u) const;

    /// The stencils as a sparse matrix (debugging aid; apply() does not use it).
    Eigen::SparseMatrix<double> assemble_sparse() const;

private:
    struct Entry {
        Index node;
        int local;
        double weight;
    };

    void build_stencils();
    void check_size(const Eigen::VectorXd& u) const;

    const LevelHierarchy* hierarchy_;
    double s_;
    int d_;
    std::size_t leaf_size_ = 0;
    std::vector<double> level_scale_;
    std::vector<std::array<Index, 3>> leaf_dofs_;  // per leaf (levels.back() order), kNone on gamma
    std::vector<std::size_t> level_begin_;        // rows of level j: [level_begin_[j], level_begin_[j+1])
    std::vector<std::size_t> row_begin_;          // entries of row r: [row_begin_[r], row_begin_[r+1])
    std::vector<Entry> entries_;
};

/// Dense sum_j scale_j D_j^T D_j with D_j = Pi_j - P_j Pi_{j-1} over all of
/// N_j^0, from dense_Pi and dense_prolongation. Test oracle.
Eigen::MatrixXd assemble_BS_dense(const MultiLevelOperator& op);

} // namespace opprec
