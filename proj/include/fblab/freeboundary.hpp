#pragma once

#include <utility>
#include <vector>

#include "fblab/closed_form.hpp"
#include "fblab/functional.hpp"
#include "fblab/mesh.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Extraction: the boundary of the positivity set {u > 0} of a P1 field, as a
// polyline living on mesh edges.
// ---------------------------------------------------------------------------

// A vertex of the extracted polyline.
struct FbPoint {
  Vec2 x = Vec2::Zero();
  double r = 0.0;           // |x|
  double phi = 0.0;         // polar angle from +x2 toward +x1, in [0, pi]
  bool on_contact = false;  // lies on the diameter {x1 == 0}
};

// One polyline segment between two extracted points.
struct FbSegment {
  int a = -1;           // point index
  int b = -1;           // point index
  int tri = -1;         // triangle the segment was produced from
  bool plateau = false; // a whole mesh edge with u == 0 at both endpoints
  int component = -1;
};

// The boundary of {u > 0}. Two kinds of features are collected:
//  * sign-change chords: inside every triangle carrying both a strictly
//    positive and a strictly negative vertex value, the straight segment of
//    the interpolant's zero set (edge crossings by linear interpolation,
//    zero vertices kept exactly);
//  * plateau edges: mesh edges with u == 0 at both endpoints adjacent to a
//    triangle whose third vertex is strictly positive (the closure of the
//    positivity set stops there).
// Segments are stitched into components ordered by decreasing arc length.
struct FreeBoundaryCurve {
  std::vector<FbPoint> points;
  std::vector<FbSegment> segments;
  // Ordered point indices along each component (walk order, endpoints first
  // for open chains). Components sorted by decreasing arc length.
  std::vector<std::vector<int>> component_points;
  std::vector<double> component_length;
  // False as soon as some point has more than two incident segments.
  bool simple = true;

  bool empty() const { return segments.empty(); }
  int n_components() const { return static_cast<int>(component_points.size()); }
  bool multi_component() const { return n_components() > 1; }
  double total_length() const;
};

// Extracts the boundary of {u > 0}. An empty curve (empty() == true) is the
// valid outcome for fields with no sign change, e.g. strictly positive data.
// Deterministic: identical inputs produce bit-identical curves.
FreeBoundaryCurve extract(const Mesh& mesh, const Field& u);

// ---------------------------------------------------------------------------
// Geometric diagnostics on dyadic annuli.
// ---------------------------------------------------------------------------

enum class NtMode {
  Strong,  // the curve itself meets the cone in every annulus
  Weak,    // some node in the cone has |u| <= C * rho in every annulus
};

struct NtAnnulus {
  int j = 0;          // annulus {rho <= |x| < 2 rho} with rho = 2^-j
  double rho = 0.0;
  bool has_fb = false;  // any curve sample lands in the annulus at all
  bool ok = false;
};

struct NtReport {
  double delta = 0.0;
  NtMode mode = NtMode::Strong;
  double weak_c = 0.0;
  std::vector<NtAnnulus> annuli;  // j = 1 .. levels
  bool overall = false;           // AND over annuli
};

// Cone test on dyadic annuli, apex at the origin, cone {x1 > delta|x2|}.
// Strong mode samples curve vertices and segment midpoints; Weak mode scans
// mesh nodes for a small value |u| <= weak_c * rho inside the cone. `levels`
// annuli are tested (default: one per grading ring). Throws
// Error(InvalidArgument) unless delta > 0 (and, in Weak mode, weak_c > 0).
NtReport nt_check(const Mesh& mesh, const Field& u, const FreeBoundaryCurve& curve,
                  double delta, NtMode mode, double weak_c = 0.0, int levels = -1);

// ---------------------------------------------------------------------------
// Touch-angle profile.
// ---------------------------------------------------------------------------

enum class FbSide { SmallSide, LargeSide, Mixed };

struct AngleWindow {
  double r = 0.0;      // annulus {r <= |x| <= 2r}
  int count = 0;       // curve points found in the annulus (0: nothing there)
  double phi_min = 0.0;
  double phi_max = 0.0;
  double phi_mean = 0.0;
  double sigma = 0.0;  // max |phi - theta_ref| over the annulus; NaN if empty
};

struct AngleProfile {
  FbSide side = FbSide::Mixed;
  double theta_ref = 0.0;  // theta (small side) or pi - theta (large side)
  std::vector<AngleWindow> windows;
};

// Polar-angle statistics of the curve on the annuli {r <= |x| <= 2r} for the
// given decreasing radii. The side is decided by the mean of x2/|x| over the
// quarter of the points nearest the origin; sigma measures the deviation from
// the matching one-homogeneous kink angle. Throws Error(InvalidArgument) for
// an empty curve, radii not strictly decreasing, or parameters without a
// kink angle.
AngleProfile angle_profile(const FreeBoundaryCurve& curve, const DerivedParams& params,
                           const std::vector<double>& radii);

// ---------------------------------------------------------------------------
// Linear growth.
// ---------------------------------------------------------------------------

struct GrowthReport {
  std::vector<double> S;  // S[j] = nodal sup of |u| over {|x| <= 2^-j}, j = 0..levels
  double c_fit = 0.0;     // least-squares constant in S(j) ~ c * 2^-j
  bool recursion_ok = false;  // S(j+1) <= max(c_fit 2^-(j+1), S(j)/2) for all j
};

// Nodal sup of |u| on the dyadic half-balls. Requires every radius 2^-j,
// j = 0..levels, to be a mesh level radius (q = 0.5 grading); otherwise
// throws Error(MeshError).
GrowthReport growth_report(const Mesh& mesh, const Field& u, int levels);

// ---------------------------------------------------------------------------
// Nondegeneracy.
// ---------------------------------------------------------------------------

struct NondegeneracyReport {
  std::vector<double> radii;
  std::vector<double> min_ratio;  // per radius: min over curve points of sup u / r
  double c_emp = 0.0;             // min over all samples; 0 if no sample
  bool degenerate = true;         // no sample or c_emp <= 0
};

// sup of u over the mesh nodes in the closed ball B_r(center), divided by r.
// NaN if the ball contains no node.
double sup_ball_ratio(const Mesh& mesh, const Field& u, const Vec2& center, double r);

// Empirical nondegeneracy constant: at every curve point x and radius r the
// ratio sup_{B_r(x)} u / r, aggregated as the min over samples.
NondegeneracyReport nondegeneracy_report(const Mesh& mesh, const Field& u,
                                         const FreeBoundaryCurve& curve,
                                         const std::vector<double>& radii);

// ---------------------------------------------------------------------------
// Gradient jump across the curve.
// ---------------------------------------------------------------------------

struct JumpSample {
  int segment = -1;
  Vec2 mid = Vec2::Zero();
  double grad_pos_sq = 0.0;  // |grad u|^2 recovered on the positive side
  double grad_neg_sq = 0.0;  // |grad u|^2 recovered on the non-positive side
  double defect = 0.0;       // |(grad_pos_sq - grad_neg_sq) - lambda|
};

struct JumpReport {
  std::vector<JumpSample> samples;
  double median_defect = 0.0;  // headline figure
  double mean_defect = 0.0;
  double max_defect = 0.0;
  int n_interior = 0;  // segments far enough from the diameter to be tested
  int n_skipped = 0;   // interior segments without one-sided data
};

// One-sided gradient recovery across each interior curve segment: the
// area-weighted mean P1 gradient over single-signed triangles whose
// circumcenters sit within [h, 3h] of the segment (h = largest edge of the
// host triangle), positive side from all-positive triangles, other side from
// all-negative or all-zero ones. Segments within 5h of the diameter are not
// tested. Throws Error(InvalidArgument) when no segment yields a sample.
JumpReport jump_report(const Mesh& mesh, const FemCache& fem, const Field& u,
                       const FreeBoundaryCurve& curve, double lambda);

// ---------------------------------------------------------------------------
// Gradient bound on the positive phase.
// ---------------------------------------------------------------------------

struct GradBoundReport {
  double max_grad_sq = 0.0;
  Vec2 location = Vec2::Zero();  // circumcenter of the extremal triangle
  int tri = -1;
  int n_used = 0;
};

// Max of |grad u|^2 over triangles with all three vertex values strictly
// positive, excluding triangles whose circumcenter lies within 3h of the
// curve or of the diameter (h = largest edge of the triangle itself).
GradBoundReport gradbound_report(const Mesh& mesh, const FemCache& fem, const Field& u,
                                 const FreeBoundaryCurve& curve);

// ---------------------------------------------------------------------------
// Polyline distances.
// ---------------------------------------------------------------------------

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

using Polyline = std::vector<std::pair<Vec2, Vec2>>;

// The curve's segments as coordinate pairs.
Polyline as_segments(const FreeBoundaryCurve& curve);

// The radial segment from the origin of length `len` along `dir`.
Polyline ray_segment(const Vec2& dir, double len = 1.0);

// Symmetric Hausdorff distance between two polylines, the sup side sampled
// with `samples_per_segment` points per segment (endpoints included), the
// inf side exact. Throws Error(InvalidArgument) if either polyline is empty.
double hausdorff_polylines(const Polyline& a, const Polyline& b,
                           int samples_per_segment = 17);

}  // namespace fblab
