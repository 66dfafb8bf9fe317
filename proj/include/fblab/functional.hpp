#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "fblab/closed_form.hpp"
#include "fblab/mesh.hpp"
#include "fblab/util.hpp"

namespace fblab {

// Area of {linear interpolant > 0} (strict) inside a triangle of the given
// area whose corner values are u0, u1, u2. Zero-level sets are null sets, so
// corner values equal to 0 contribute as non-positive:
//   (0,0,0) -> 0,   (0,0,1) -> area,   (-1,1,1) -> 3/4 * area.
double positive_area_triangle(double u0, double u1, double u2, double area);

// C^1 cubic ramp regularizing the positivity indicator:
//   0 for s <= 0,  3(s/eps)^2 - 2(s/eps)^3 for 0 < s < eps,  1 for s >= eps.
double smooth_ramp(double s, double eps);
double smooth_ramp_deriv(double s, double eps);

// Per-triangle geometry captured once per mesh: areas, barycentric gradients,
// and node->triangle adjacency for nodewise relaxation sweeps.
struct TriGeom {
  std::array<int, 3> v;
  double area;
  std::array<Vec2, 3> grad_bary;  // gradients of the three barycentric functions
};

struct FemCache {
  const Mesh* mesh = nullptr;
  std::vector<TriGeom> tri;
  // node -> (triangle index, local vertex index) pairs, construction order
  std::vector<std::vector<std::pair<int, int>>> node_tris;

  int n_tris() const { return static_cast<int>(tri.size()); }
  int n_nodes() const { return mesh->n_nodes(); }
};

FemCache build_fem_cache(const Mesh& mesh);

// Sharp-interface energy terms of
//   J(u) = integral |grad u|^2 + lambda * |{u > 0}|
// accumulated over the triangle index range [tri_begin, tri_end); a negative
// tri_end means "to the end". Per-triangle contributions are combined with
// deterministic pairwise summation.
struct EnergyBreakdown {
  double dirichlet = 0.0;      // integral of |grad u|^2
  double positive_area = 0.0;  // |{u > 0}|
  double lambda = 0.0;
  double total() const { return dirichlet + lambda * positive_area; }
};

EnergyBreakdown energy_exact(const FemCache& fem, const Field& u, double lambda,
                             int tri_begin = 0, int tri_end = -1);

// The scale-adapted functional: Dirichlet term plus eps^2 * lambda * |{u>0}|
// over the triangle range. eps = 1 reproduces energy_exact().total(); eps = 0
// leaves the pure Dirichlet energy. Throws Error(InvalidArgument) for
// negative eps.
double scaled_energy(const FemCache& fem, const Field& u, double lambda, double eps,
                     int tri_begin = 0, int tri_end = -1);

// Terms of the g-corrected energy for fields v = u - g, with
// g(x) = g_coeff * |x|^(1 + kappa):
//   total = dirichlet - g_correction + lambda * area{v > -g},
// where g_correction = integral of v * (2 * laplacian g) and the phase area
// tests v + g through its nodal linearization (vertex-sampled g).
struct CorrectedBreakdown {
  double dirichlet = 0.0;
  double g_correction = 0.0;    // integral of v * (2 laplacian g)
  double positive_area = 0.0;   // area of {v > -g}
  double lambda = 0.0;
  double total() const { return dirichlet - g_correction + lambda * positive_area; }
};

// Evaluates the corrected energy of v over the ball {|x| <= r}; r must match
// a mesh level radius within 1e-12 (Error(MeshError) otherwise). The source
// term 2*laplacian g = 2 g_coeff (1+kappa)^2 |x|^(kappa-1) is integrated by
// lumped nodal quadrature (node weight = one third of its incident in-region
// triangle area); at the origin, where the integrand has an integrable
// singularity, the lumped cell is replaced by the half-disc of equal area and
// the radial integral is taken in closed form. Throws Error(InvalidArgument)
// when spec.g_coeff == 0: the unperturbed energy_exact applies then.
CorrectedBreakdown corrected_energy(const FemCache& fem, const Field& v, const ProblemSpec& spec,
                                    double r);

// Smallest constant c with |u| <= c |x| at every non-origin node.
double linear_growth_constant(const Mesh& mesh, const Field& u);

// Constant in the source-term bound
//   |integral over B_r of v * (2 laplacian g)| <= C1 * r^(2 + kappa)
// for fields with |v(x)| <= c_lin |x|:
//   C1 = 2 * c_lin * g_coeff * (1 + kappa)^2 * pi / (kappa + 2).
double corrected_c1(double c_lin, double g_coeff, double kappa);

// Smoothed energy J_eps(u) = integral |grad u|^2 + lambda * integral H_eps(u),
// H_eps the cubic ramp above. The ramp composite is integrated exactly: each
// triangle is clipped along {u = 0} and {u = eps} and the cubic integrand is
// handled by a degree-4 quadrature on the clipped pieces.
double energy_smoothed(const FemCache& fem, const Field& u, double lambda, double eps);

// Nodal gradient of J_eps. The volume part is supported on the band
// {0 < u < eps} only.
Field grad_smoothed(const FemCache& fem, const Field& u, double lambda, double eps);

// Stiffness matrix K with K(i,j) = integral grad(phi_i) . grad(phi_j), so the
// first energy term is u^T K u and its nodal gradient is 2 K u.
Eigen::SparseMatrix<double> stiffness_matrix(const FemCache& fem);

// Interpolates a pointwise function onto mesh nodes.
template <typename F>
Field interpolate(const Mesh& mesh, F&& f) {
  Field u(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n) u[n] = f(mesh.nodes[n]);
  return u;
}

// Interpolates a kinked one-homogeneous solution with kink-consistent
// rounding: when a node sits on the kink ray up to coordinate roundoff, its
// value is exactly 0 rather than a few ulps of either sign. Without the snap
// a stray +4e-17 on the ray flips whole zero-plateau triangles into the
// positivity set and shifts area terms at order h.
Field interpolate_global(const Mesh& mesh, const GlobalSolution& sol);

}  // namespace fblab
