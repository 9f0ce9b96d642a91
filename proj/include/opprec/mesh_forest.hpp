#pragma once

#include "opprec/errors.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace opprec {

using Index = std::int32_t;
inline constexpr Index kNone = -1;
using Point = Eigen::Vector3d;

/// Order-independent key of the edge {a, b}.
inline std::uint64_t edge_key(Index a, Index b)
{
    const auto lo = static_cast<std::uint64_t>(a < b ? a : b);
    const auto hi = static_cast<std::uint64_t>(a < b ? b : a);
    return (hi << 32) | lo;
}

double triangle_area(const Point& a, const Point& b, const Point& c);

struct Vertex {
    Index id = kNone;
    Point coords = Point::Zero();
    int gen = 0;
    bool on_gamma = false;
    /// Endpoints of the edge this vertex bisected; both kNone for initial vertices.
    std::array<Index, 2> parent_edge{kNone, kNone};
};

/// A triangle of the NVB forest. Local order (v0, v1, v2): the refinement
/// edge is (v0, v1) and v2 is the newest vertex.
struct TriNode {
    std::array<Index, 3> vertex_ids{kNone, kNone, kNone};
    int gen = 0;
    Index parent = kNone;
    std::array<Index, 2> children{kNone, kNone};
    Index chart_id = 0;
    double area = 0.0;

    bool is_leaf() const { return children[0] == kNone; }
};

/// Plain triangle soup with NVB local ordering, chart ids and γ-edges.
/// Serves as the input of MeshForest::build_initial and as the leaf
/// serialization of a forest.
struct TriangleMesh {
    std::vector<Point> coords;
    std::vector<std::array<Index, 3>> triangles;
    std::vector<Index> charts;  ///< one per triangle; empty means all 0
    std::vector<std::array<Index, 2>> gamma_edges;
    std::vector<Index> gamma_vertices;  ///< vertices flagged `g` explicitly
};

enum class MatchingPolicy { Enforce, Skip };

class MeshForest {
public:
    /// Builds the forest whose roots are the input triangles. Throws
    /// DegenerateTriangle, NonConforming or (under Enforce) MatchingViolation.
    static MeshForest build_initial(const TriangleMesh& mesh,
                                    MatchingPolicy policy = MatchingPolicy::Enforce);

    /// True iff every interior edge of the roots is the refinement edge of
    /// both adjacent triangles or of neither.
    bool check_matching() const;

    /// Bisects a leaf; returns the two children. Does not restore conformity.
    std::array<Index, 2> bisect(Index node);

    /// Bisects every marked leaf and closes the mesh by recursive NVB.
    /// Returns the new leaf set.
    const std::vector<Index>& refine_conforming(std::span<const Index> marked);

    /// Bisects every leaf once (closure included).
    void refine_uniform(int times = 1);

    int vertex_generation(Index vertex) const { return vertices_.at(vertex).gen; }

    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<TriNode>& nodes() const { return nodes_; }
    const TriNode& node(Index id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const Vertex& vertex(Index id) const { return vertices_[static_cast<std::size_t>(id)]; }
    const std::vector<Index>& roots() const { return roots_; }
    /// Current mesh, ascending node ids.
    const std::vector<Index>& leaves() const { return leaves_; }

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_leaves() const { return leaves_.size(); }
    int max_leaf_generation() const;

    bool is_gamma_edge(Index a, Index b) const { return gamma_edges_.contains(edge_key(a, b)); }

    /// Midpoint vertex of edge {a, b} if that edge was bisected, else kNone.
    Index midpoint(Index a, Index b) const;

    /// Leaves containing edge {a, b} (at most two; kNone padded).
    std::array<Index, 2> leaves_on_edge(Index a, Index b) const;

    /// Edges with exactly one incident leaf.
    std::vector<std::array<Index, 2>> boundary_edges() const;

    /// The leaf mesh in input format (NVB ordering preserved; γ-edges of the leaves).
    TriangleMesh leaf_mesh() const;

private:
    Index new_vertex(const Point& p, int gen, bool on_gamma, std::array<Index, 2> parent_edge);
    Index new_node(std::array<Index, 3> v, int gen, Index parent, Index chart);
    std::array<Index, 2> bisect_impl(Index node);
    void link_edges(Index node);
    void unlink_edges(Index node);
    void rebuild_leaves();

    std::vector<Vertex> vertices_;
    std::vector<TriNode> nodes_;
    std::vector<Index> roots_;
    std::vector<Index> leaves_;
    std::unordered_map<std::uint64_t, Index> midpoints_;
    std::unordered_map<std::uint64_t, std::array<Index, 2>> edge_leaves_;
    std::unordered_set<std::uint64_t> gamma_edges_;
};

/// ASCII mesh format: `v x y z [g]`, `t i j k c`, `ge i j`; `#` starts a comment.
TriangleMesh read_mesh(std::istream& in);
TriangleMesh read_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const TriangleMesh& mesh);

} // namespace opprec
