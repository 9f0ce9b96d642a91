#pragma once

#include "opprec/mesh_forest.hpp"

#include <vector>

namespace opprec {

/// Surface of a cube with the given edge length, centred at the origin, two
/// triangles per face; the face diagonal is the refinement edge of both
/// triangles of a face. Vertices 0..7 are the cube corners; chart id = face id.
TriangleMesh cube_surface(double edge = 1.0);

/// Unit square split into four triangles around its centre; each outer edge
/// is a refinement edge and, with `dirichlet`, a γ-edge.
TriangleMesh unit_square(bool dirichlet = true);

/// Unit square split along the diagonal (0,0)-(1,1). With `matching` both
/// triangles use the diagonal as refinement edge, otherwise the second uses
/// an outer edge.
TriangleMesh two_triangle_square(bool matching = true);

/// Leaves having at least one vertex in `targets`.
std::vector<Index> leaves_touching(const MeshForest& forest, const std::vector<Index>& targets);

/// One round of corner refinement on a cube forest (corners are vertices 0..7).
void refine_corners(MeshForest& forest, int rounds = 1);

/// min over leaves of sqrt(|T|).
double min_sqrt_area(const MeshForest& forest);

/// min over leaves of the longest edge. On the cube meshes (all leaves are
/// right isosceles) this is 2 sqrt(|T|).
double min_diameter(const MeshForest& forest);

} // namespace opprec
