#pragma once

#include "opprec/hierarchy.hpp"

#include <Eigen/Core>

#include <array>
#include <vector>

namespace opprec {

/// L2(T)-orthogonal projection of a piecewise linear on the two NVB children
/// onto linears on the parent (v0, v1, v2). Columns: child0 = (v2, v0, m) and
/// child1 = (v1, v2, m), local order. Shape independent.
inline constexpr std::array<std::array<double, 6>, 3> kChildToParent{{
    {0.25, 0.75, 0.5, -0.25, -0.25, 0.0},
    {-0.25, -0.25, 0.0, 0.75, 0.25, 0.5},
    {0.5, 0.0, 0.0, 0.0, 0.5, 0.0},
}};

/// The same matrix in the textbook numbering: rows are the parent vertices
/// (v2, v1, v0); columns are the child values at (v2 in child0, v2 in child1,
/// v0, v1, m in child0, m in child1). kFigureRowToLocal / kFigureColToSlot
/// translate to the local layout of kChildToParent.
inline constexpr std::array<std::array<double, 6>, 3> kFigureProjection{{
    {0.5, 0.5, 0.0, 0.0, 0.0, 0.0},
    {-0.25, 0.25, -0.25, 0.75, 0.0, 0.5},
    {0.25, -0.25, 0.75, -0.25, 0.5, 0.0},
}};
inline constexpr std::array<int, 3> kFigureRowToLocal{2, 1, 0};
inline constexpr std::array<int, 6> kFigureColToSlot{0, 4, 1, 3, 2, 5};

/// Coefficients w.r.t. the nodal basis of S^{0,1}_{T_j,0}; ordered as
/// LevelMesh::interior_vertex_ids.
struct NodalVector {
    int level = 0;
    Eigen::VectorXd values;
};

/// Element-wise nodal coefficients of S^{-1,1}_{T_j}: entry 3*k + i belongs to
/// local vertex i of LevelMesh::elements[k].
struct ElementLinearVector {
    int level = 0;
    Eigen::VectorXd values;
};

/// Per-node buffer of three local values, indexed by forest node id.
using NodeValues = std::vector<std::array<double, 3>>;

/// Fills every internal node from its children (leaves must be set).
void sweep_up(const MeshForest& forest, NodeValues& values);
/// Adjoint of sweep_up: pushes every internal node's values down into its
/// children, accumulating.
void sweep_down_adjoint(const MeshForest& forest, NodeValues& values);

ElementLinearVector embed_E(const LevelHierarchy& h, const NodalVector& u);

/// R_j x for j = L, L-1, ..., 0 (front is level L).
std::vector<ElementLinearVector> project_R_sweep(const LevelHierarchy& h, const ElementLinearVector& x);

NodalVector average_H(const LevelHierarchy& h, int j, const ElementLinearVector& x);

NodalVector prolong_P(const LevelHierarchy& h, int j, const NodalVector& u);

/// Maximum number of leaf triangles accepted by the dense oracles.
inline constexpr std::size_t kDenseOracleLimit = 2048;

/// Matrix of the averaging quasi-interpolator Pi_j (rows N_j^0, cols N_L^0),
/// assembled from element L2 projections by exact quadrature.
Eigen::MatrixXd dense_Pi(const LevelHierarchy& h, int j);

/// Matrix of the embedding S_{T_{j-1},0} -> S_{T_j,0} by point evaluation of
/// the coarse function at the fine vertices.
Eigen::MatrixXd dense_prolongation(const LevelHierarchy& h, int j);

} // namespace opprec
