#include "opprec/meshes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace opprec {

TriangleMesh cube_surface(double edge)
{
    TriangleMesh mesh;
    const double half_width = 0.5 * edge;
    // Corner i has coordinate bit k set iff x_k = +h.
    for (int i = 0; i < 8; ++i) {
        mesh.coords.emplace_back((i & 1) ? half_width : -half_width, (i & 2) ? half_width : -half_width,
                                 (i & 4) ? half_width : -half_width);
    }
    // Faces as cyclic corner quadruples (q0, q1, q2, q3); diagonal q0-q2.
    // The diagonals give corners 1, 2, 4, 7 valence 5 and the others valence 4.
    const std::array<std::array<Index, 4>, 6> faces{{
        {0, 2, 6, 4},  // x = -h
        {5, 7, 3, 1},  // x = +h
        {4, 5, 1, 0},  // y = -h
        {2, 3, 7, 6},  // y = +h
        {1, 3, 2, 0},  // z = -h
        {4, 6, 7, 5},  // z = +h
    }};
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& q = faces[f];
        mesh.triangles.push_back({q[0], q[2], q[1]});
        mesh.triangles.push_back({q[2], q[0], q[3]});
        mesh.charts.push_back(static_cast<Index>(f));
        mesh.charts.push_back(static_cast<Index>(f));
    }
    return mesh;
}

TriangleMesh unit_square(bool dirichlet)
{
    TriangleMesh mesh;
    mesh.coords = {Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0), Point(0.5, 0.5, 0)};
    mesh.triangles = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    mesh.charts = {0, 0, 0, 0};
    if (dirichlet) {
        mesh.gamma_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
    }
    return mesh;
}

TriangleMesh two_triangle_square(bool matching)
{
    TriangleMesh mesh;
    mesh.coords = {Point(0, 0, 0), Point(1, 0, 0), Point(1, 1, 0), Point(0, 1, 0)};
    mesh.triangles = {{0, 2, 1}, matching ? std::array<Index, 3>{2, 0, 3} : std::array<Index, 3>{3, 0, 2}};
    mesh.charts = {0, 0};
    return mesh;
}

std::vector<Index> leaves_touching(const MeshForest& forest, const std::vector<Index>& targets)
{
    std::vector<Index> marked;
    for (Index l : forest.leaves()) {
        const auto& v = forest.node(l).vertex_ids;
        if (std::any_of(v.begin(), v.end(),
                        [&](Index x) { return std::find(targets.begin(), targets.end(), x) != targets.end(); })) {
            marked.push_back(l);
        }
    }
    return marked;
}

void refine_corners(MeshForest& forest, int rounds)
{
    const std::vector<Index> corners{0, 1, 2, 3, 4, 5, 6, 7};
    for (int r = 0; r < rounds; ++r) {
        const auto marked = leaves_touching(forest, corners);
        forest.refine_conforming(marked);
    }
}

double min_sqrt_area(const MeshForest& forest)
{
    double h = std::numeric_limits<double>::infinity();
    for (Index l : forest.leaves()) {
        h = std::min(h, std::sqrt(forest.node(l).area));
    }
    return h;
}

double min_diameter(const MeshForest& forest)
{
    double h = std::numeric_limits<double>::infinity();
    for (Index l : forest.leaves()) {
        const auto& v = forest.node(l).vertex_ids;
        double d = 0.0;
        for (int k = 0; k < 3; ++k) {
            d = std::max(d, (forest.vertex(v[k]).coords - forest.vertex(v[(k + 1) % 3]).coords).norm());
        }
        h = std::min(h, d);
    }
    return h;
}

} // namespace opprec
