#include "opprec/galerkin.hpp"

#include "opprec/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <thread>

namespace opprec {

namespace {

constexpr double kInvFourPi = 0.25 / std::numbers::pi;
constexpr int kMaxSubdivision = 40;

struct Panel {
    std::array<Point, 3> p;
    double area;
    Point centroid;
    double radius;  // of the ball around the centroid containing the panel
};

Panel make_panel(const Point& a, const Point& b, const Point& c)
{
    Panel t{{a, b, c}, triangle_area(a, b, c), (a + b + c) / 3.0, 0.0};
    for (const auto& x : t.p) {
        t.radius = std::max(t.radius, (x - t.centroid).norm());
    }
    return t;
}

// chi(x) = P0 + x1 (P1 - P0) + x2 (P2 - P1) on {0 <= x2 <= x1 <= 1}
Point map(const std::array<Point, 3>& p, double x1, double x2)
{
    return p[0] + x1 * (p[1] - p[0]) + x2 * (p[2] - p[1]);
}

struct Rules {
    std::vector<quad::PairPoint> identical, edge, vertex;
    std::array<std::vector<quad::TrianglePoint>, 3> far;  // orders 1, 2, 3
};

const Rules& rules(int order)
{
    static thread_local int cached_order = -1;
    static thread_local Rules r;
    if (cached_order != order) {
        r.identical = quad::sauter_schwab_identical(order);
        r.edge = quad::sauter_schwab_edge(order);
        r.vertex = quad::sauter_schwab_vertex(order);
        for (int k = 0; k < 3; ++k) {
            r.far[static_cast<std::size_t>(k)] = quad::triangle_rule(k + 1);
        }
        cached_order = order;
    }
    return r;
}

double singular_pair(const std::vector<quad::PairPoint>& rule, const std::array<Point, 3>& a,
                     const std::array<Point, 3>& b, double area_a, double area_b)
{
    double sum = 0.0;
    for (const auto& q : rule) {
        sum += q.weight / (map(a, q.x[0], q.x[1]) - map(b, q.y[0], q.y[1])).norm();
    }
    return kInvFourPi * (2.0 * area_a) * (2.0 * area_b) * sum;
}

double regular_pair(const Rules& r, const Panel& a, const Panel& b, int depth)
{
    const double gap = (a.centroid - b.centroid).norm() - a.radius - b.radius;
    const double size = 2.0 * std::max(a.radius, b.radius);
    if (gap <= 0.0 && depth < kMaxSubdivision) {
        // Split the larger panel into four and recurse.
        const bool split_a = a.radius >= b.radius;
        const Panel& big = split_a ? a : b;
        const Panel& other = split_a ? b : a;
        const Point m01 = 0.5 * (big.p[0] + big.p[1]);
        const Point m12 = 0.5 * (big.p[1] + big.p[2]);
        const Point m20 = 0.5 * (big.p[2] + big.p[0]);
        double sum = 0.0;
        for (const Panel& child : {make_panel(big.p[0], m01, m20), make_panel(m01, big.p[1], m12),
                                   make_panel(m20, m12, big.p[2]), make_panel(m12, m20, m01)}) {
            sum += regular_pair(r, child, other, depth + 1);
        }
        return sum;
    }
    const double ratio = gap / size;
    const auto& rule = ratio >= 8.0 ? r.far[0] : ratio >= 3.0 ? r.far[1] : r.far[2];
    // Reference triangle {0 <= x2 <= x1 <= 1} maps with Jacobian 2|T|.
    double sum = 0.0;
    for (const auto& qa : rule) {
        const Point x = map(a.p, qa.x1, qa.x2);
        double inner = 0.0;
        for (const auto& qb : rule) {
            inner += qb.weight / (x - map(b.p, qb.x1, qb.x2)).norm();
        }
        sum += qa.weight * inner;
    }
    return kInvFourPi * (2.0 * a.area) * (2.0 * b.area) * sum;
}

std::array<Point, 3> coords_of(const MeshForest& f, const std::array<Index, 3>& v)
{
    return {f.vertex(v[0]).coords, f.vertex(v[1]).coords, f.vertex(v[2]).coords};
}

double entry(const MeshForest& forest, const Rules& r, Index t, Index t2)
{
    const auto& va = forest.node(t).vertex_ids;
    const auto& vb = forest.node(t2).vertex_ids;
    const double area_a = forest.node(t).area;
    const double area_b = forest.node(t2).area;
    if (t == t2) {
        return singular_pair(r.identical, coords_of(forest, va), coords_of(forest, va), area_a, area_a);
    }
    // shared vertices, in the order of the first panel
    std::array<Index, 3> shared{};
    int ns = 0;
    for (Index v : va) {
        if (std::find(vb.begin(), vb.end(), v) != vb.end()) {
            shared[static_cast<std::size_t>(ns++)] = v;
        }
    }
    auto other = [](const std::array<Index, 3>& v, Index x, Index y) {
        for (Index w : v) {
            if (w != x && w != y) {
                return w;
            }
        }
        return kNone;
    };
    if (ns == 2) {
        const Index a = shared[0], b = shared[1];
        return singular_pair(r.edge, coords_of(forest, {a, b, other(va, a, b)}),
                             coords_of(forest, {a, b, other(vb, a, b)}), area_a, area_b);
    }
    if (ns == 1) {
        const Index a = shared[0];
        auto rest = [&](const std::array<Index, 3>& v) {
            std::array<Index, 3> o{a, kNone, kNone};
            int k = 1;
            for (Index w : v) {
                if (w != a) {
                    o[static_cast<std::size_t>(k++)] = w;
                }
            }
            return o;
        };
        return singular_pair(r.vertex, coords_of(forest, rest(va)), coords_of(forest, rest(vb)), area_a, area_b);
    }
    const auto pa = coords_of(forest, va);
    const auto pb = coords_of(forest, vb);
    return regular_pair(r, make_panel(pa[0], pa[1], pa[2]), make_panel(pb[0], pb[1], pb[2]), 0);
}

} // namespace

double single_layer_entry(const MeshForest& forest, Index t, Index t2, int singular_order)
{
    return entry(forest, rules(singular_order), t, t2);
}

Eigen::MatrixXd assemble_single_layer(const MeshForest& forest, const SingleLayerOptions& options)
{
    if (!forest.boundary_edges().empty()) {
        throw Error(ErrorCode::OpenSurface, "single layer assembly needs a closed surface");
    }
    const auto& leaves = forest.leaves();
    const auto n = static_cast<Eigen::Index>(leaves.size());
    Eigen::MatrixXd A(n, n);

    int threads = options.threads > 0 ? options.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, 64);
    std::atomic<Eigen::Index> next{0};
    std::atomic<bool> failed{false};
    // Upper triangle by rows, handed out dynamically; then mirrored.
    auto work = [&] {
        const Rules& r = rules(options.singular_order);
        for (Eigen::Index i = next++; i < n; i = next++) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double v = entry(forest, r, leaves[static_cast<std::size_t>(i)], leaves[static_cast<std::size_t>(j)]);
                if (!std::isfinite(v)) {
                    failed = true;
                }
                A(i, j) = v;
            }
        }
    };
    if (threads == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < threads; ++k) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    if (failed) {
        throw Error(ErrorCode::QuadratureBreakdown, "non-finite single layer entry");
    }
    A.triangularView<Eigen::StrictlyLower>() = A.transpose();
    return A;
}

namespace {

template <typename Local>
Eigen::SparseMatrix<double> assemble_p1(const LevelMesh& leaf, const MeshForest& forest, Local&& local)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (Index e : leaf.elements) {
        const auto& v = forest.node(e).vertex_ids;
        const Eigen::Matrix3d K = local(coords_of(forest, v), forest.node(e).area);
        for (int a = 0; a < 3; ++a) {
            const Index ra = leaf.interior_slot(v[static_cast<std::size_t>(a)]);
            for (int b = 0; b < 3; ++b) {
                const Index rb = leaf.interior_slot(v[static_cast<std::size_t>(b)]);
                if (ra != kNone && rb != kNone) {
                    trip.emplace_back(ra, rb, K(a, b));
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(leaf.interior_vertex_ids.size());
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

} // namespace

Eigen::SparseMatrix<double> assemble_mass(const LevelMesh& leaf, const MeshForest& forest)
{
    return assemble_p1(leaf, forest, [](const std::array<Point, 3>&, double area) {
        return Eigen::Matrix3d((area / 12.0) * (Eigen::Matrix3d::Ones() + Eigen::Matrix3d::Identity()));
    });
}

Eigen::SparseMatrix<double> assemble_stiffness(const LevelMesh& leaf, const MeshForest& forest)
{
    return assemble_p1(leaf, forest, [](const std::array<Point, 3>& p, double area) {
        // gradients of the barycentric coordinates in the panel plane
        const Point n = (p[1] - p[0]).cross(p[2] - p[0]);
        Eigen::Matrix3d grads;
        for (int k = 0; k < 3; ++k) {
            const Point& a = p[static_cast<std::size_t>((k + 1) % 3)];
            const Point& b = p[static_cast<std::size_t>((k + 2) % 3)];
            grads.col(k) = n.cross(b - a) / n.squaredNorm();
        }
        return Eigen::Matrix3d(area * grads.transpose() * grads);
    });
}

Eigen::SparseMatrix<double> assemble_mass_quadrature(const LevelMesh& leaf, const MeshForest& forest)
{
    return assemble_p1(leaf, forest, [](const std::array<Point, 3>&, double area) {
        Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
        for (int e = 0; e < 3; ++e) {
            Eigen::Vector3d lam = Eigen::Vector3d::Zero();
            lam[e] = 0.5;
            lam[(e + 1) % 3] = 0.5;
            M += (area / 3.0) * lam * lam.transpose();
        }
        return M;
    });
}

Eigen::SparseMatrix<double> assemble_stiffness_cotangent(const LevelMesh& leaf, const MeshForest& forest)
{
    return assemble_p1(leaf, forest, [](const std::array<Point, 3>& p, double) {
        Eigen::Matrix3d K = Eigen::Matrix3d::Zero();
        for (int k = 0; k < 3; ++k) {
            // angle at vertex k couples the other two
            const int a = (k + 1) % 3, b = (k + 2) % 3;
            const Point u = p[static_cast<std::size_t>(a)] - p[static_cast<std::size_t>(k)];
            const Point v = p[static_cast<std::size_t>(b)] - p[static_cast<std::size_t>(k)];
            const double cot = u.dot(v) / u.cross(v).norm();
            K(a, b) -= 0.5 * cot;
            K(b, a) -= 0.5 * cot;
            K(a, a) += 0.5 * cot;
            K(b, b) += 0.5 * cot;
        }
        return K;
    });
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m)
{
    out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? " " : "") << m(i, j);
        }
        out << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::IoFailure, "matrix write failed");
    }
}

Eigen::MatrixXd read_matrix(std::istream& in)
{
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
        throw Error(ErrorCode::IoFailure, "bad matrix header");
    }
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(in >> m(i, j))) {
                throw Error(ErrorCode::IoFailure, "truncated matrix");
            }
        }
    }
    return m;
}

} // namespace opprec
