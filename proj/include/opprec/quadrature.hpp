#pragma once

#include <array>
#include <vector>

namespace opprec::quad {

struct Rule1D {
    std::vector<double> points;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0, 1].
Rule1D gauss_legendre(int n);

/// n-point Gauss-Jacobi rule on [0, 1] for the weight x.
Rule1D gauss_jacobi_x(int n);

/// Point of the reference triangle {0 <= x2 <= x1 <= 1} with weight.
struct TrianglePoint {
    double x1;
    double x2;
    double weight;
};

/// Collapsed n x n rule on the reference triangle (weights sum to 1/2);
/// exact for polynomials of degree <= 2n - 1.
std::vector<TrianglePoint> triangle_rule(int n);

/// Pair of reference points (x on the first panel, y on the second).
struct PairPoint {
    std::array<double, 2> x;
    std::array<double, 2> y;
    double weight;
};

/// Sauter-Schwab rules on K x K for the reference triangle
/// K = {0 <= x2 <= x1 <= 1}; weights sum to |K|^2 = 1/4.
/// Identical panels: singular on x = y.
std::vector<PairPoint> sauter_schwab_identical(int n);
/// Common edge: both panels parametrized so that their edge x2 = 0 coincides pointwise.
std::vector<PairPoint> sauter_schwab_edge(int n);
/// Common vertex: both panels map the reference origin to the shared vertex.
std::vector<PairPoint> sauter_schwab_vertex(int n);

} // namespace opprec::quad
