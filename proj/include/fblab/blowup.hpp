#pragma once

#include <vector>

#include "fblab/closed_form.hpp"
#include "fblab/freeboundary.hpp"
#include "fblab/functional.hpp"
#include "fblab/mesh.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Exact nodal rescaling u -> u(r x) / r on ring-aligned scales.
// ---------------------------------------------------------------------------

// A field rescaled by r = q^m, living on its own reference mesh: the mesh
// built with the same parameters but m fewer grading rings. By construction
// that reference mesh is the submesh of the parent inside radius q^m scaled
// back to the unit half-disc, so every node of the reference mesh sits
// (exactly, up to roundoff in the radial coordinate) under a parent node and
// the rescaled values are plain quotients u/r -- no interpolation anywhere.
struct RescaledField {
  Mesh mesh;
  Field values;
  double scale = 1.0;  // r = q^m
  int steps = 0;       // m
};

// v(x) = u(r x) / r with r = q^m: node (level l, angle i) of the reference
// mesh receives u(level l + m*S, angle i) / r, where S is the number of node
// circles per grading ring. r must match a grading radius q^m, m = 0 ..
// rings-1, within 1e-12 (at least one ring must remain), otherwise
// Error(MeshError) -- scales between rings would force interpolation and are
// refused. m = 0 returns a verbatim copy. Throws Error(InvalidArgument) for a
// field size mismatch.
RescaledField rescale(const Mesh& mesh, const Field& u, double r);

// ---------------------------------------------------------------------------
// Blow-up sequences at the origin and their classification.
// ---------------------------------------------------------------------------

enum class BlowupVerdict { Small, Large, Undecided };

const char* verdict_name(BlowupVerdict v);

// The rescaled iterates u_{r_j}(x) = u(r_j x)/r_j on the scales r_j = q^j,
// j = 1 .. n, with their distance to the two one-homogeneous candidates.
// residuals_S[j-1] / residuals_L[j-1] is the nodal max-norm distance between
// iterate j and the interpolant of v_S / v_L over the outermost annulus
// {q <= |x| <= 1} of the reference mesh (the annulus every iterate shares).
struct BlowupSequence {
  Field base;                       // the field the sequence was built from
  std::vector<double> scales;       // q^1, ..., q^n (strictly decreasing)
  std::vector<RescaledField> fields;
  std::vector<double> residuals_S;  // one entry per scale
  std::vector<double> residuals_L;
  double tol_class = 0.0;           // tolerance the stored verdict used
  BlowupVerdict verdict = BlowupVerdict::Undecided;
};

// Builds the sequence on scales q^1 .. q^n_scales and classifies it.
// tol_class < 0 selects the default 10 * h (h = coarsest angular spacing).
// Requires 1 <= n_scales <= rings-1 (each iterate must keep a grading ring)
// and a regime admitting the one-homogeneous solutions; throws
// Error(InvalidArgument) otherwise.
BlowupSequence blowup_sequence(const Mesh& mesh, const Field& u, const ProblemSpec& spec,
                               int n_scales, double tol_class = -1.0);

// Verdict for a sequence of at least 3 scales (Error(InvalidArgument)
// otherwise). A branch matches when its residuals are small at the final
// scale (<= tol_class) and have not grown overall (final <= first +
// tol_class/10). Exactly one matching branch decides Small or Large; zero or
// two matching branches (the latter only when the candidates nearly coincide,
// gamma ~ 0) return Undecided -- the verdict never guesses, and genuinely
// non-homogeneous limits are reported Undecided by design.
BlowupVerdict classify(const BlowupSequence& seq, double tol_class);

// ---------------------------------------------------------------------------
// Free-boundary distance on an annulus.
// ---------------------------------------------------------------------------

// Symmetric Hausdorff distance between the two polylines restricted to the
// closed annulus {r_in <= |x| <= r_out}: segments are clipped against both
// circles first, then measured with hausdorff_polylines. Requires
// 0 <= r_in < r_out and both polylines to actually enter the annulus;
// Error(InvalidArgument) otherwise.
double fb_hausdorff(const Polyline& a, const Polyline& b, double r_in, double r_out);

// The segments of an extracted curve clipped to the annulus (exposed for
// reuse; may be empty).
Polyline clip_to_annulus(const Polyline& poly, double r_in, double r_out);

}  // namespace fblab
