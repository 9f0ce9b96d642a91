#include "opprec/mesh_forest.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

namespace opprec {

double triangle_area(const Point& a, const Point& b, const Point& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

namespace {

// Relative tolerance for detecting zero-area input triangles and vertices
// lying on foreign edges.
constexpr double kGeomTol = 1e-12;

bool point_on_open_segment(const Point& p, const Point& a, const Point& b)
{
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) {
        return false;
    }
    const double t = (p - a).dot(ab) / len2;
    if (t <= kGeomTol || t >= 1.0 - kGeomTol) {
        return false;
    }
    return (a + t * ab - p).norm() <= kGeomTol * std::sqrt(len2);
}

} // namespace

MeshForest MeshForest::build_initial(const TriangleMesh& mesh, MatchingPolicy policy)
{
    if (!mesh.charts.empty() && mesh.charts.size() != mesh.triangles.size()) {
        throw Error(ErrorCode::InvalidArgument, "chart ids must be given for every triangle");
    }
    MeshForest forest;
    const auto nv = static_cast<Index>(mesh.coords.size());
    for (Index i = 0; i < nv; ++i) {
        forest.new_vertex(mesh.coords[static_cast<std::size_t>(i)], 0, false, {kNone, kNone});
    }

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        for (Index v : tri) {
            if (v < 0 || v >= nv) {
                throw Error(ErrorCode::InvalidArgument, "triangle references unknown vertex");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            throw Error(ErrorCode::DegenerateTriangle, "repeated vertex in triangle " + std::to_string(t));
        }
        const Point& a = mesh.coords[static_cast<std::size_t>(tri[0])];
        const Point& b = mesh.coords[static_cast<std::size_t>(tri[1])];
        const Point& c = mesh.coords[static_cast<std::size_t>(tri[2])];
        const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
        if (triangle_area(a, b, c) <= kGeomTol * scale) {
            throw Error(ErrorCode::DegenerateTriangle, "zero area triangle " + std::to_string(t));
        }
        const Index chart = mesh.charts.empty() ? 0 : mesh.charts[t];
        const Index id = forest.new_node(tri, 0, kNone, chart);
        forest.roots_.push_back(id);
    }

    for (const auto& node : forest.nodes_) {
        for (int k = 0; k < 3; ++k) {
            const Index a = node.vertex_ids[static_cast<std::size_t>(k)];
            const Index b = node.vertex_ids[static_cast<std::size_t>((k + 1) % 3)];
            auto& slot = forest.edge_leaves_.try_emplace(edge_key(a, b), std::array<Index, 2>{kNone, kNone}).first->second;
            if (slot[1] != kNone) {
                throw Error(ErrorCode::NonConforming, "edge shared by more than two triangles");
            }
            if (slot[0] == kNone) {
                slot = {static_cast<Index>(&node - forest.nodes_.data()), kNone};
            } else {
                slot[1] = static_cast<Index>(&node - forest.nodes_.data());
            }
        }
    }

    // Hanging vertices: some vertex in the relative interior of a foreign edge.
    for (const auto& [key, owners] : forest.edge_leaves_) {
        (void)owners;
        const auto a = static_cast<Index>(key & 0xffffffffu);
        const auto b = static_cast<Index>(key >> 32);
        for (Index v = 0; v < nv; ++v) {
            if (v != a && v != b &&
                point_on_open_segment(forest.vertices_[static_cast<std::size_t>(v)].coords,
                                      forest.vertices_[static_cast<std::size_t>(a)].coords,
                                      forest.vertices_[static_cast<std::size_t>(b)].coords)) {
                throw Error(ErrorCode::NonConforming, "hanging vertex " + std::to_string(v));
            }
        }
    }

    for (const auto& e : mesh.gamma_edges) {
        if (!forest.edge_leaves_.contains(edge_key(e[0], e[1]))) {
            throw Error(ErrorCode::InvalidArgument, "gamma edge is not a mesh edge");
        }
        forest.gamma_edges_.insert(edge_key(e[0], e[1]));
        forest.vertices_[static_cast<std::size_t>(e[0])].on_gamma = true;
        forest.vertices_[static_cast<std::size_t>(e[1])].on_gamma = true;
    }
    for (Index v : mesh.gamma_vertices) {
        forest.vertices_.at(static_cast<std::size_t>(v)).on_gamma = true;
    }

    forest.rebuild_leaves();
    if (policy == MatchingPolicy::Enforce && !forest.check_matching()) {
        throw Error(ErrorCode::MatchingViolation, "refinement edges of the initial mesh do not match");
    }
    return forest;
}

bool MeshForest::check_matching() const
{
    // Count, per root edge, how many incident roots use it as refinement edge.
    std::unordered_map<std::uint64_t, std::array<int, 2>> usage;  // {incident, refinement}
    for (Index r : roots_) {
        const auto& v = node(r).vertex_ids;
        for (int k = 0; k < 3; ++k) {
            auto& u = usage[edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)])];
            ++u[0];
            if (k == 0) {
                ++u[1];
            }
        }
    }
    return std::all_of(usage.begin(), usage.end(), [](const auto& kv) {
        const auto [incident, refinement] = kv.second;
        return incident < 2 || refinement == 0 || refinement == incident;
    });
}

Index MeshForest::new_vertex(const Point& p, int gen, bool on_gamma, std::array<Index, 2> parent_edge)
{
    const auto id = static_cast<Index>(vertices_.size());
    vertices_.push_back(Vertex{id, p, gen, on_gamma, parent_edge});
    return id;
}

Index MeshForest::new_node(std::array<Index, 3> v, int gen, Index parent, Index chart)
{
    TriNode n;
    n.vertex_ids = v;
    n.gen = gen;
    n.parent = parent;
    n.chart_id = chart;
    n.area = triangle_area(vertex(v[0]).coords, vertex(v[1]).coords, vertex(v[2]).coords);
    nodes_.push_back(n);
    return static_cast<Index>(nodes_.size() - 1);
}

void MeshForest::link_edges(Index id)
{
    const auto v = node(id).vertex_ids;
    for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]);
        auto& slot = edge_leaves_.try_emplace(key, std::array<Index, 2>{kNone, kNone}).first->second;
        if (slot[0] == kNone) {
            slot[0] = id;
        } else {
            slot[1] = id;
        }
    }
}

void MeshForest::unlink_edges(Index id)
{
    const auto v = node(id).vertex_ids;
    for (int k = 0; k < 3; ++k) {
        const auto key = edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]);
        auto it = edge_leaves_.find(key);
        auto& slot = it->second;
        if (slot[0] == id) {
            slot[0] = slot[1];
        }
        slot[1] = kNone;
        if (slot[0] == kNone) {
            edge_leaves_.erase(it);
        }
    }
}

Index MeshForest::midpoint(Index a, Index b) const
{
    const auto it = midpoints_.find(edge_key(a, b));
    return it == midpoints_.end() ? kNone : it->second;
}

std::array<Index, 2> MeshForest::leaves_on_edge(Index a, Index b) const
{
    const auto it = edge_leaves_.find(edge_key(a, b));
    return it == edge_leaves_.end() ? std::array<Index, 2>{kNone, kNone} : it->second;
}

std::array<Index, 2> MeshForest::bisect_impl(Index id)
{
    const TriNode parent = node(id);
    const auto [v0, v1, v2] = parent.vertex_ids;
    const auto key = edge_key(v0, v1);
    const int child_gen = parent.gen + 1;

    Index m = kNone;
    if (auto it = midpoints_.find(key); it != midpoints_.end()) {
        m = it->second;
        auto& mv = vertices_[static_cast<std::size_t>(m)];
        mv.gen = std::min(mv.gen, child_gen);
    } else {
        const bool gamma = gamma_edges_.contains(key);
        const Point p = 0.5 * (vertex(v0).coords + vertex(v1).coords);
        m = new_vertex(p, child_gen, gamma, {v0, v1});
        midpoints_.emplace(key, m);
        if (gamma) {
            gamma_edges_.insert(edge_key(v0, m));
            gamma_edges_.insert(edge_key(m, v1));
        }
    }

    unlink_edges(id);
    const Index c0 = new_node({v2, v0, m}, child_gen, id, parent.chart_id);
    const Index c1 = new_node({v1, v2, m}, child_gen, id, parent.chart_id);
    nodes_[static_cast<std::size_t>(id)].children = {c0, c1};
    link_edges(c0);
    link_edges(c1);
    return {c0, c1};
}

std::array<Index, 2> MeshForest::bisect(Index id)
{
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size() || !node(id).is_leaf()) {
        throw Error(ErrorCode::NotALeaf, "cannot bisect node " + std::to_string(id));
    }
    const auto children = bisect_impl(id);
    rebuild_leaves();
    return children;
}

const std::vector<Index>& MeshForest::refine_conforming(std::span<const Index> marked)
{
    for (Index id : marked) {
        if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size() || !node(id).is_leaf()) {
            throw Error(ErrorCode::NotALeaf, "marked node " + std::to_string(id) + " is not a leaf");
        }
    }
    std::deque<Index> queue(marked.begin(), marked.end());
    const std::size_t budget = 64 * (leaves_.size() + marked.size()) + 64;
    std::size_t done = 0;

    auto has_hanging_vertex = [this](Index id) {
        const auto& v = node(id).vertex_ids;
        for (int k = 0; k < 3; ++k) {
            if (midpoints_.contains(edge_key(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 3)]))) {
                return true;
            }
        }
        return false;
    };

    while (!queue.empty()) {
        const Index id = queue.front();
        queue.pop_front();
        if (!node(id).is_leaf()) {
            continue;
        }
        if (++done > budget) {
            throw Error(ErrorCode::ClosureDepthExceeded, "NVB closure does not terminate");
        }
        const auto [v0, v1, v2] = node(id).vertex_ids;
        (void)v2;
        const auto children = bisect_impl(id);
        // The neighbour across the bisected edge now carries a hanging vertex.
        for (Index other : leaves_on_edge(v0, v1)) {
            if (other != kNone) {
                queue.push_back(other);
            }
        }
        for (Index c : children) {
            if (has_hanging_vertex(c)) {
                queue.push_back(c);
            }
        }
    }
    rebuild_leaves();
    return leaves_;
}

void MeshForest::refine_uniform(int times)
{
    for (int i = 0; i < times; ++i) {
        const std::vector<Index> all = leaves_;
        refine_conforming(all);
    }
}

void MeshForest::rebuild_leaves()
{
    leaves_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) {
            leaves_.push_back(static_cast<Index>(i));
        }
    }
}

int MeshForest::max_leaf_generation() const
{
    int g = 0;
    for (Index l : leaves_) {
        g = std::max(g, node(l).gen);
    }
    return g;
}

std::vector<std::array<Index, 2>> MeshForest::boundary_edges() const
{
    std::vector<std::array<Index, 2>> out;
    for (const auto& [key, owners] : edge_leaves_) {
        if (owners[1] == kNone) {
            out.push_back({static_cast<Index>(key & 0xffffffffu), static_cast<Index>(key >> 32)});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

TriangleMesh MeshForest::leaf_mesh() const
{
    TriangleMesh mesh;
    std::vector<Index> remap(vertices_.size(), kNone);
    for (Index l : leaves_) {
        for (Index v : node(l).vertex_ids) {
            auto& r = remap[static_cast<std::size_t>(v)];
            if (r == kNone) {
                r = static_cast<Index>(mesh.coords.size());
                mesh.coords.push_back(vertex(v).coords);
            }
        }
    }
    for (Index l : leaves_) {
        const auto& v = node(l).vertex_ids;
        mesh.triangles.push_back({remap[static_cast<std::size_t>(v[0])], remap[static_cast<std::size_t>(v[1])],
                                  remap[static_cast<std::size_t>(v[2])]});
        mesh.charts.push_back(node(l).chart_id);
        for (int k = 0; k < 3; ++k) {
            const Index a = v[static_cast<std::size_t>(k)];
            const Index b = v[static_cast<std::size_t>((k + 1) % 3)];
            if (a < b && is_gamma_edge(a, b)) {
                mesh.gamma_edges.push_back({remap[static_cast<std::size_t>(a)], remap[static_cast<std::size_t>(b)]});
            }
        }
    }
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        if (vertices_[v].on_gamma && remap[v] != kNone) {
            mesh.gamma_vertices.push_back(remap[v]);
        }
    }
    std::sort(mesh.gamma_edges.begin(), mesh.gamma_edges.end());
    return mesh;
}

TriangleMesh read_mesh(std::istream& in)
{
    TriangleMesh mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) {
            continue;
        }
        auto fail = [&] { throw Error(ErrorCode::IoFailure, "malformed mesh line " + std::to_string(lineno)); };
        if (tag == "v") {
            Point p;
            if (!(ls >> p[0] >> p[1] >> p[2])) {
                fail();
            }
            std::string flag;
            if (ls >> flag) {
                if (flag != "g") {
                    fail();
                }
                mesh.gamma_vertices.push_back(static_cast<Index>(mesh.coords.size()));
            }
            mesh.coords.push_back(p);
        } else if (tag == "t") {
            std::array<Index, 3> t{};
            Index c = 0;
            if (!(ls >> t[0] >> t[1] >> t[2])) {
                fail();
            }
            ls >> c;
            mesh.triangles.push_back(t);
            mesh.charts.push_back(c);
        } else if (tag == "ge") {
            std::array<Index, 2> e{};
            if (!(ls >> e[0] >> e[1])) {
                fail();
            }
            mesh.gamma_edges.push_back(e);
        } else {
            fail();
        }
    }
    const auto nv = static_cast<Index>(mesh.coords.size());
    auto in_range = [nv](Index i) { return i >= 0 && i < nv; };
    for (const auto& t : mesh.triangles) {
        if (!std::all_of(t.begin(), t.end(), in_range)) {
            throw Error(ErrorCode::IoFailure, "triangle references an unknown vertex");
        }
    }
    for (const auto& e : mesh.gamma_edges) {
        if (!in_range(e[0]) || !in_range(e[1])) {
            throw Error(ErrorCode::IoFailure, "gamma edge references an unknown vertex");
        }
    }
    return mesh;
}

TriangleMesh read_mesh_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path);
    }
    return read_mesh(in);
}

void write_mesh(std::ostream& out, const TriangleMesh& mesh)
{
    std::vector<char> flagged(mesh.coords.size(), 0);
    for (Index v : mesh.gamma_vertices) {
        flagged[static_cast<std::size_t>(v)] = 1;
    }
    out << std::setprecision(17);
    for (std::size_t i = 0; i < mesh.coords.size(); ++i) {
        const auto& p = mesh.coords[i];
        out << "v " << p[0] << ' ' << p[1] << ' ' << p[2];
        if (flagged[i]) {
            out << " g";
        }
        out << '\n';
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        out << "t " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << ' ' << (mesh.charts.empty() ? 0 : mesh.charts[t])
            << '\n';
    }
    for (const auto& e : mesh.gamma_edges) {
        out << "ge " << e[0] << ' ' << e[1] << '\n';
    }
}

} // namespace opprec
