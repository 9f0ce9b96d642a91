#pragma once

#include "opprec/hierarchy.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <iosfwd>

namespace opprec {

struct SingleLayerOptions {
    int singular_order = 4;  ///< Gauss points per dimension for touching pairs
    int threads = 1;         ///< <= 0: hardware concurrency
};

/// Galerkin matrix of the Laplace single layer operator (1/4pi)|x-y|^{-1}
/// for piecewise constants on the leaves (forest order). Closed surfaces only:
/// throws OpenSurface on a boundary edge, QuadratureBreakdown on a non-finite entry.
Eigen::MatrixXd assemble_single_layer(const MeshForest& forest, const SingleLayerOptions& options = {});

/// (1/4pi) int_T int_T' |x-y|^{-1} for one pair of leaves, by the same rules.
double single_layer_entry(const MeshForest& forest, Index t, Index t2, int singular_order = 4);

/// P1 mass matrix on the interior vertices of the leaf level (order of
/// LevelMesh::interior_vertex_ids).
Eigen::SparseMatrix<double> assemble_mass(const LevelMesh& leaf, const MeshForest& forest);

/// P1 stiffness matrix on the interior vertices of the leaf level.
Eigen::SparseMatrix<double> assemble_stiffness(const LevelMesh& leaf, const MeshForest& forest);

/// Second assembly path (edge-midpoint quadrature for the mass, cotangent
/// formula for the stiffness); used to cross-check the two above.
Eigen::SparseMatrix<double> assemble_mass_quadrature(const LevelMesh& leaf, const MeshForest& forest);
Eigen::SparseMatrix<double> assemble_stiffness_cotangent(const LevelMesh& leaf, const MeshForest& forest);

/// Text dump: `rows cols` header line, then one row per line.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);

} // namespace opprec
