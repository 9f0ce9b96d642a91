#pragma once

#include "opprec/mesh_forest.hpp"

#include <iosfwd>
#include <vector>

namespace opprec {

/// The level mesh T_j: forest nodes forming a conforming partition, plus
/// vertex data. Per-vertex arrays are parallel to `vertex_ids`.
struct LevelMesh {
    int level = 0;
    std::vector<Index> elements;             ///< ascending node ids
    std::vector<Index> vertex_ids;           ///< N_j, ascending
    std::vector<Index> interior_vertex_ids;  ///< N_j^0, ascending
    std::vector<int> valence;
    std::vector<double> patch_area;

    /// Position of `v` in vertex_ids, or kNone.
    Index vertex_slot(Index v) const;
    /// Position of `v` in interior_vertex_ids (its nodal dof index), or kNone.
    Index interior_slot(Index v) const;
    int valence_of(Index v) const;
    double patch_area_of(Index v) const;
    /// Position of node `id` in elements, or kNone.
    Index element_slot(Index id) const;
};

/// T_0 < T_1 < ... < T_L extracted from a forest, with the active vertex
/// sets N_j^0 \ M_j^0. Holds a reference to the forest, which must outlive it.
class LevelHierarchy {
public:
    static LevelHierarchy extract(const MeshForest& forest);

    const MeshForest& forest() const { return *forest_; }
    int max_level() const { return static_cast<int>(levels_.size()) - 1; }
    const LevelMesh& level(int j) const;
    const LevelMesh& leaf_level() const { return levels_.back(); }
    const std::vector<LevelMesh>& levels() const { return levels_; }

    /// Active vertices of level j (ascending ids).
    const std::vector<Index>& active(int j) const;

    /// Element of T_{j-1} containing `element` of T_j.
    Index parent_in_level(int j, Index element) const;

    /// True iff T_j has no hanging vertices and no edge with more than two elements.
    bool level_is_conforming(int j) const;

    /// `level,elements,interior_vertices,active` per level.
    void write_csv(std::ostream& out) const;

private:
    const MeshForest* forest_ = nullptr;
    std::vector<LevelMesh> levels_;
    std::vector<std::vector<Index>> active_;
};

/// N_j^0 for j = 0; otherwise the new vertices of level j together with the
/// endpoints of every edge bisected between T_{j-1} and T_j, restricted to N_j^0.
std::vector<Index> compute_active(const LevelHierarchy& hierarchy, int j);

} // namespace opprec
