#include "opprec/quadrature.hpp"

#include "opprec/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace opprec::quad {

namespace {

// Golub-Welsch for a symmetric Jacobi matrix with diagonal a, off-diagonal b,
// total mass mu0; result on [-1, 1].
Rule1D golub_welsch(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double mu0)
{
    const auto n = a.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        J(i, i) = a[i];
        if (i + 1 < n) {
            J(i, i + 1) = J(i + 1, i) = b[i];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    Rule1D rule;
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.points.push_back(es.eigenvalues()[i]);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights.push_back(mu0 * v0 * v0);
    }
    return rule;
}

// Jacobi weight (1 - t)^alpha (1 + t)^beta on [-1, 1].
Rule1D gauss_jacobi(int n, double alpha, double beta)
{
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "quadrature order must be positive");
    }
    Eigen::VectorXd a(n);
    Eigen::VectorXd b(std::max(n - 1, 1));
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + alpha + beta;
        a[k] = (k == 0) ? (beta - alpha) / (alpha + beta + 2.0) : (beta * beta - alpha * alpha) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + alpha + beta;
            b[k] = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + alpha + beta) / (t * t * (t + 1.0) * (t - 1.0)));
        }
    }
    const double mu0 = std::pow(2.0, alpha + beta + 1.0) * std::tgamma(alpha + 1.0) * std::tgamma(beta + 1.0) /
                       std::tgamma(alpha + beta + 2.0);
    return golub_welsch(a, b, mu0);
}

} // namespace

Rule1D gauss_legendre(int n)
{
    Rule1D r = gauss_jacobi(n, 0.0, 0.0);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        r.points[i] = 0.5 * (r.points[i] + 1.0);
        r.weights[i] *= 0.5;
    }
    return r;
}

Rule1D gauss_jacobi_x(int n)
{
    Rule1D r = gauss_jacobi(n, 0.0, 1.0);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        r.points[i] = 0.5 * (r.points[i] + 1.0);
        r.weights[i] *= 0.25;
    }
    return r;
}

std::vector<TrianglePoint> triangle_rule(int n)
{
    const Rule1D u = gauss_jacobi_x(n);
    const Rule1D v = gauss_legendre(n);
    std::vector<TrianglePoint> out;
    out.reserve(static_cast<std::size_t>(n * n));
    for (std::size_t i = 0; i < u.points.size(); ++i) {
        for (std::size_t k = 0; k < v.points.size(); ++k) {
            out.push_back({u.points[i], u.points[i] * v.points[k], u.weights[i] * v.weights[k]});
        }
    }
    return out;
}

namespace {

template <typename Fn>
std::vector<PairPoint> hypercube_rule(int n, Fn&& terms)
{
    const Rule1D g = gauss_legendre(n);
    std::vector<PairPoint> out;
    const std::size_t m = g.points.size();
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            for (std::size_t c = 0; c < m; ++c) {
                for (std::size_t d = 0; d < m; ++d) {
                    const double w = g.weights[a] * g.weights[b] * g.weights[c] * g.weights[d];
                    terms(g.points[a], g.points[b], g.points[c], g.points[d], w, out);
                }
            }
        }
    }
    return out;
}

} // namespace

std::vector<PairPoint> sauter_schwab_identical(int n)
{
    return hypercube_rule(n, [](double xi, double e1, double e2, double e3, double w, std::vector<PairPoint>& out) {
        const double j = w * xi * xi * xi * e1 * e1 * e2;
        out.push_back({{xi, xi * (1 - e1 + e1 * e2)}, {xi * (1 - e1 * e2 * e3), xi * (1 - e1)}, j});
        out.push_back({{xi * (1 - e1 * e2 * e3), xi * (1 - e1)}, {xi, xi * (1 - e1 + e1 * e2)}, j});
        out.push_back({{xi, xi * e1 * (1 - e2 + e2 * e3)}, {xi * (1 - e1 * e2), xi * e1 * (1 - e2)}, j});
        out.push_back({{xi * (1 - e1 * e2), xi * e1 * (1 - e2)}, {xi, xi * e1 * (1 - e2 + e2 * e3)}, j});
        out.push_back({{xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3)}, {xi, xi * e1 * (1 - e2)}, j});
        out.push_back({{xi, xi * e1 * (1 - e2)}, {xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3)}, j});
    });
}

std::vector<PairPoint> sauter_schwab_edge(int n)
{
    return hypercube_rule(n, [](double xi, double e1, double e2, double e3, double w, std::vector<PairPoint>& out) {
        const double j1 = w * xi * xi * xi * e1 * e1;
        const double j2 = j1 * e2;
        out.push_back({{xi, xi * e1 * e3}, {xi * (1 - e1 * e2), xi * e1 * (1 - e2)}, j1});
        out.push_back({{xi, xi * e1}, {xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3)}, j2});
        out.push_back({{xi * (1 - e1 * e2), xi * e1 * (1 - e2)}, {xi, xi * e1 * e2 * e3}, j2});
        out.push_back({{xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3)}, {xi, xi * e1}, j2});
        out.push_back({{xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3)}, {xi, xi * e1 * e2}, j2});
    });
}

std::vector<PairPoint> sauter_schwab_vertex(int n)
{
    return hypercube_rule(n, [](double xi, double e1, double e2, double e3, double w, std::vector<PairPoint>& out) {
        const double j = w * xi * xi * xi * e2;
        out.push_back({{xi, xi * e1}, {xi * e2, xi * e2 * e3}, j});
        out.push_back({{xi * e2, xi * e2 * e3}, {xi, xi * e1}, j});
    });
}

} // namespace opprec::quad
