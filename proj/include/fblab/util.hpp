#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fblab {

using Vec2 = Eigen::Vector2d;

// Nodal values of a continuous piecewise-linear function on a mesh.
using Field = Eigen::VectorXd;

// Polar angle measured from the +x2 axis toward +x1, in [0, pi] on the closed
// half-plane {x1 >= 0}. The flat boundary {x1 = 0} maps to {0, pi}.
inline double polar_angle(const Vec2& x) { return std::atan2(x.x(), x.y()); }

// Continuous inverse cotangent mapping R -> (0, pi).
inline double arccot(double t) { return std::atan2(1.0, t); }

// Deterministic pairwise (balanced-tree) summation. Summation order depends
// only on the element order of `v`, never on chunking or threading, so equal
// inputs give bit-identical results. Recursion depth is O(log n).
double pairwise_sum(std::span<const double> v);

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v.data(), v.size()));
}

// Gauss-Legendre nodes and weights on [-1, 1], computed to machine precision
// by Newton iteration on the Legendre recurrence.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

// Composite n-point Gauss-Legendre integration of f over [a, b] split into
// equal panels. All nodes are strictly interior to their panel.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int points = 16,
                    int panels = 1);

}  // namespace fblab
