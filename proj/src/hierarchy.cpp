#include "opprec/hierarchy.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

namespace opprec {

namespace {

Index slot_in(const std::vector<Index>& sorted, Index v)
{
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    return (it != sorted.end() && *it == v) ? static_cast<Index>(it - sorted.begin()) : kNone;
}

LevelMesh build_level(const MeshForest& forest, int j, std::vector<Index> elements)
{
    std::sort(elements.begin(), elements.end());
    LevelMesh lm;
    lm.level = j;

    std::vector<std::pair<Index, double>> incidences;
    incidences.reserve(3 * elements.size());
    for (Index e : elements) {
        const auto& n = forest.node(e);
        for (Index v : n.vertex_ids) {
            incidences.emplace_back(v, n.area);
        }
    }
    std::sort(incidences.begin(), incidences.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [v, area] : incidences) {
        if (lm.vertex_ids.empty() || lm.vertex_ids.back() != v) {
            lm.vertex_ids.push_back(v);
            lm.valence.push_back(0);
            lm.patch_area.push_back(0.0);
        }
        ++lm.valence.back();
        lm.patch_area.back() += area;
    }
    for (Index v : lm.vertex_ids) {
        if (!forest.vertex(v).on_gamma) {
            lm.interior_vertex_ids.push_back(v);
        }
    }
    lm.elements = std::move(elements);
    return lm;
}

} // namespace

Index LevelMesh::vertex_slot(Index v) const { return slot_in(vertex_ids, v); }
Index LevelMesh::interior_slot(Index v) const { return slot_in(interior_vertex_ids, v); }
Index LevelMesh::element_slot(Index id) const { return slot_in(elements, id); }

int LevelMesh::valence_of(Index v) const
{
    const Index s = vertex_slot(v);
    return s == kNone ? 0 : valence[static_cast<std::size_t>(s)];
}

double LevelMesh::patch_area_of(Index v) const
{
    const Index s = vertex_slot(v);
    return s == kNone ? 0.0 : patch_area[static_cast<std::size_t>(s)];
}

LevelHierarchy LevelHierarchy::extract(const MeshForest& forest)
{
    LevelHierarchy h;
    h.forest_ = &forest;
    const int L = forest.max_leaf_generation();

    std::vector<std::vector<Index>> by_gen(static_cast<std::size_t>(L) + 1);
    for (std::size_t i = 0; i < forest.num_nodes(); ++i) {
        const auto g = static_cast<std::size_t>(forest.nodes()[i].gen);
        if (g <= static_cast<std::size_t>(L)) {
            by_gen[g].push_back(static_cast<Index>(i));
        }
    }

    // T_j = nodes of generation j together with the leaves of lower generation.
    std::vector<Index> carried;
    for (int j = 0; j <= L; ++j) {
        std::vector<Index> elements = carried;
        for (Index id : by_gen[static_cast<std::size_t>(j)]) {
            elements.push_back(id);
            if (forest.node(id).is_leaf()) {
                carried.push_back(id);
            }
        }
        h.levels_.push_back(build_level(forest, j, std::move(elements)));
    }

    h.active_.reserve(h.levels_.size());
    for (int j = 0; j <= L; ++j) {
        h.active_.push_back(compute_active(h, j));
    }
    return h;
}

const LevelMesh& LevelHierarchy::level(int j) const
{
    if (j < 0 || j > max_level()) {
        throw Error(ErrorCode::LevelMismatch, "level " + std::to_string(j) + " out of range");
    }
    return levels_[static_cast<std::size_t>(j)];
}

const std::vector<Index>& LevelHierarchy::active(int j) const
{
    if (j < 0 || j > max_level()) {
        throw Error(ErrorCode::LevelMismatch, "level " + std::to_string(j) + " out of range");
    }
    return active_[static_cast<std::size_t>(j)];
}

Index LevelHierarchy::parent_in_level(int j, Index element) const
{
    const auto& n = forest_->node(element);
    return n.gen == j ? n.parent : element;
}

bool LevelHierarchy::level_is_conforming(int j) const
{
    const LevelMesh& lm = level(j);
    std::unordered_map<std::uint64_t, int> edge_count;
    for (Index e : lm.elements) {
        const auto& v = forest_->node(e).vertex_ids;
        for (int k = 0; k < 3; ++k) {
            const Index a = v[static_cast<std::size_t>(k)];
            const Index b = v[static_cast<std::size_t>((k + 1) % 3)];
            if (++edge_count[edge_key(a, b)] > 2) {
                return false;
            }
            const Index m = forest_->midpoint(a, b);
            if (m != kNone && lm.vertex_slot(m) != kNone) {
                return false;
            }
        }
    }
    return true;
}

void LevelHierarchy::write_csv(std::ostream& out) const
{
    out << "level,elements,interior_vertices,active\n";
    for (std::size_t j = 0; j < levels_.size(); ++j) {
        out << j << ',' << levels_[j].elements.size() << ',' << levels_[j].interior_vertex_ids.size() << ','
            << active_[j].size() << '\n';
    }
}

std::vector<Index> compute_active(const LevelHierarchy& hierarchy, int j)
{
    const LevelMesh& lm = hierarchy.level(j);
    if (j == 0) {
        return lm.interior_vertex_ids;
    }
    const MeshForest& forest = hierarchy.forest();
    std::vector<Index> out;
    for (Index e : lm.elements) {
        const auto& child = forest.node(e);
        if (child.gen != j) {
            continue;
        }
        // Only the endpoints of the bisected edge and its midpoint see their patch change.
        const auto& parent = forest.node(child.parent);
        for (Index v : {parent.vertex_ids[0], parent.vertex_ids[1], child.vertex_ids[2]}) {
            if (!forest.vertex(v).on_gamma) {
                out.push_back(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace opprec
