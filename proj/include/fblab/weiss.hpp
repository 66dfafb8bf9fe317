#pragma once

#include <vector>

#include "fblab/closed_form.hpp"
#include "fblab/functional.hpp"
#include "fblab/mesh.hpp"

namespace fblab {

// Weiss energy of a nodal field u around a center x0:
//
//   W(R, u, x0) = R^-2 [ integral_{B_R(x0)} |grad u|^2 + lambda |{u > 0}| ]
//               - R^-3  integral_{S_R(x0)} u^2 ds,
//
// the scale-normalized combination whose monotonicity in R detects blow-up
// homogeneity. Domains are always intersected with the meshed half-disc.
//
// Centered at the origin (the default), R must sit on a mesh level circle
// (Error(MeshError) otherwise): the bulk terms are then the exact triangle
// suffix sums and the circle integral is evaluated edge-by-edge on the level
// polygon, integrating the square of the linear trace exactly, so no
// quadrature error enters beyond interpolation itself.
//
// Off-center evaluation supports the two geometries that occur at contact
// and free-boundary points: x0 on the flat segment (half-ball) or x0 in the
// open half-plane with B_R(x0) clear of the flat segment (full ball). The
// ball must stay inside the unit disc; violations throw Error(MeshError).
// Bulk terms use exact per-triangle formulas away from the rim and recursive
// bisection on rim triangles; the circle integral samples the field densely
// along the true circle. Accuracy is far below the first-order tolerances
// used by every consumer.
double weiss_energy(const FemCache& fem, const Field& u, const ProblemSpec& spec, double R,
                    const Vec2& x0 = Vec2::Zero());

// Same computation with the scale-normalized parts kept separate:
// dirichlet = R^-2 integral |grad u|^2, phase_area = R^-2 |{u > 0} cap B_R|,
// sphere = R^-3 integral u^2 ds, and total() the Weiss energy itself. The
// combination dirichlet - sphere is the phase-free flux part: for the wedge
// pair it equals +-gamma (alpha_+^2 - alpha_-^2)/2, so its Small-minus-Large
// gap is gamma (alpha_+^2 - alpha_-^2) — the quantity the branch comparison
// pins — while the chi-term difference of the two positivity sectors drops
// out (compare weiss_closed_form under PhaseConvention::CommonSector).
WeissParts weiss_energy_parts(const FemCache& fem, const Field& u, const ProblemSpec& spec,
                              double R, const Vec2& x0 = Vec2::Zero());

// Weiss values along a decreasing list of radii, with per-radius homogeneity
// defects and the aggregated monotonicity defect.
struct WeissProfile {
  Vec2 center = Vec2::Zero();
  std::vector<double> radii;     // strictly decreasing
  std::vector<double> W_values;  // W at each radius (corrective term excluded)
  // Circle integral of (du/dr - u/R)^2 at each radius: zero exactly for
  // fields sampled from degree-one homogeneous functions (matching angular
  // counts), O(h^2 scale^2) otherwise.
  std::vector<double> homogeneity_defects;
  // max over consecutive pairs of (W(r_small) - W(r_big))^+, the integrated
  // failure of monotonicity; computed on corrected values when corrected.
  double monotonicity_defect = 0.0;
  bool corrected = false;
  // (C1 / kappa) t^kappa per radius when corrected; empty otherwise.
  std::vector<double> kappa_term;
};

// Profile of W(R, u, x0) over the given radii (strictly decreasing, each
// level-aligned when x0 = 0). Homogeneity defects at the origin use the
// one-sided radial difference quotient along mesh rays between a level and
// its inner neighbor, so fields with exactly degree-one nodal values have
// defect 0 wherever consecutive levels share their angular count. Off-center
// profiles compute the defect from per-triangle gradients sampled along the
// circle. Errors as in weiss_energy, plus Error(InvalidArgument) for an
// empty or non-decreasing radii list.
WeissProfile weiss_profile(const FemCache& fem, const Field& u, const ProblemSpec& spec,
                           const Vec2& x0, const std::vector<double>& radii);

// Corrected profile for data perturbed by g(x) = g_coeff |x|^(1+kappa): for
// the shifted field v = u - g it evaluates
//
//   W~(t) = t^-2 [ integral |grad v|^2 + Lambda |{v > -g}| ]
//         - t^-3 integral v^2 ds + (C1 / kappa) t^kappa,
//
// which restores monotonicity for minimizers under the perturbed datum. The
// phase region {v > -g} is measured exactly on the linearization of v + g
// (g sampled at the vertices), matching corrected_energy. C1 comes from
// corrected_c1 with the linear growth constant of v itself. W_values store
// the first two terms; kappa_term carries the corrective term, and the
// monotonicity defect is computed on their sum. Centered at the origin only.
// Throws Error(InvalidArgument) when spec.g_coeff == 0 (use weiss_profile).
WeissProfile corrected_weiss_profile(const FemCache& fem, const Field& v, const ProblemSpec& spec,
                                     const std::vector<double>& radii);

// First-order error budget for Weiss comparisons at radius R: 10x the
// shortest edge of the level polygon at R. R must be level-aligned.
double weiss_tolerance(const Mesh& mesh, double R);

// Second-order budget for homogeneity defects at radius R: 20 h_loc^2 scale^2
// with h_loc the shortest edge of the level polygon and `scale` the
// degree-one size of the field near R (max |u|/R on the ring works well).
double homogeneity_tolerance(const Mesh& mesh, double R, double field_scale);

}  // namespace fblab
