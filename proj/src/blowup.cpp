#include "fblab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

// Matches r against the grading radii q^m, m = 0 .. rings-1. Returns -1 when
// nothing matches within 1e-12.
int aligned_steps(const MeshParams& params, double r) {
  double rm = 1.0;
  for (int m = 0; m < params.rings; ++m) {
    if (std::abs(rm - r) <= 1e-12) return m;
    rm *= params.q;
  }
  return -1;
}

}  // namespace

RescaledField rescale(const Mesh& mesh, const Field& u, double r) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const int m = aligned_steps(mesh.params, r);
  if (m < 0)
    throw Error(Err::MeshError,
                "scale is not an aligned grading radius q^m with at least one ring left");

  RescaledField out;
  out.scale = r;
  out.steps = m;
  if (m == 0) {
    out.mesh = mesh;
    out.values = u;
    return out;
  }

  MeshParams sub = mesh.params;
  sub.rings -= m;
  out.mesh = build_mesh(sub);

  const int shift = m * mesh.sublevels;
  if (out.mesh.n_levels() != mesh.n_levels() - shift)
    throw Error(Err::MeshError, "reference mesh level structure does not match the parent");
  for (int l = 0; l < out.mesh.n_levels(); ++l) {
    if (out.mesh.level_count[l] != mesh.level_count[l + shift])
      throw Error(Err::MeshError, "reference mesh angular structure does not match the parent");
  }

  out.values.resize(out.mesh.n_nodes());
  for (int n = 0; n < out.mesh.n_nodes(); ++n) {
    if (n == out.mesh.origin_node) {
      out.values[n] = u[mesh.origin_node] / r;
      continue;
    }
    const int l = out.mesh.level_of_node[n];
    const int i = out.mesh.index_in_level[n];
    out.values[n] = u[mesh.node_at(l + shift, i)] / r;
  }
  return out;
}

const char* verdict_name(BlowupVerdict v) {
  switch (v) {
    case BlowupVerdict::Small: return "Small";
    case BlowupVerdict::Large: return "Large";
    case BlowupVerdict::Undecided: return "Undecided";
  }
  return "Undecided";
}

namespace {

// Nodal max-norm distance between the field and the interpolant of sol over
// the outermost annulus {q <= |x| <= 1} of the mesh (levels 0 .. S).
double annulus_residual(const Mesh& mesh, const Field& values, const GlobalSolution& sol) {
  double worst = 0.0;
  const int last = mesh.level_node_offset[mesh.sublevels + 1];
  for (int n = 0; n < last; ++n)
    worst = std::max(worst, std::abs(values[n] - eval_global(sol, mesh.nodes[n])));
  return worst;
}

bool branch_matches(const std::vector<double>& res, double tol) {
  return res.back() <= tol && res.back() <= res.front() + 0.1 * tol;
}

}  // namespace

BlowupVerdict classify(const BlowupSequence& seq, double tol_class) {
  if (seq.scales.size() < 3)
    throw Error(Err::InvalidArgument, "classification needs at least three scales");
  if (seq.residuals_S.size() != seq.scales.size() || seq.residuals_L.size() != seq.scales.size())
    throw Error(Err::InvalidArgument, "residual lists must have one entry per scale");
  if (!(tol_class > 0.0)) throw Error(Err::InvalidArgument, "tol_class must be positive");

  const bool small_ok = branch_matches(seq.residuals_S, tol_class);
  const bool large_ok = branch_matches(seq.residuals_L, tol_class);
  if (small_ok && !large_ok) return BlowupVerdict::Small;
  if (large_ok && !small_ok) return BlowupVerdict::Large;
  return BlowupVerdict::Undecided;
}

BlowupSequence blowup_sequence(const Mesh& mesh, const Field& u, const ProblemSpec& spec,
                               int n_scales, double tol_class) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  if (n_scales < 1 || n_scales > mesh.params.rings - 1)
    throw Error(Err::InvalidArgument, "n_scales must be between 1 and rings-1");
  const GlobalSolution small = global_solution(spec, Branch::Small);
  const GlobalSolution large = global_solution(spec, Branch::Large);
  if (tol_class < 0.0) tol_class = 10.0 * mesh.h_coarse();
  if (!(tol_class > 0.0)) throw Error(Err::InvalidArgument, "tol_class must be positive");

  BlowupSequence seq;
  seq.base = u;
  seq.tol_class = tol_class;
  const int S = mesh.sublevels;
  for (int j = 1; j <= n_scales; ++j) {
    // The stored level radius *is* the aligned scale (exact at ring indices).
    const double r = mesh.level_radius[j * S];
    RescaledField f = rescale(mesh, u, r);
    seq.scales.push_back(r);
    seq.residuals_S.push_back(annulus_residual(f.mesh, f.values, small));
    seq.residuals_L.push_back(annulus_residual(f.mesh, f.values, large));
    seq.fields.push_back(std::move(f));
  }
  if (n_scales >= 3) seq.verdict = classify(seq, tol_class);
  return seq;
}

namespace {

// Sub-intervals of [0,1] where the segment p + t*(q - p) satisfies
// r_in <= |x| <= r_out, appended to `out` as clipped segments.
void clip_segment(const Vec2& p, const Vec2& q, double r_in, double r_out, Polyline& out) {
  const Vec2 d = q - p;
  const double dd = d.squaredNorm();
  if (dd < 1e-300) {  // degenerate segment: keep it as a point if inside
    const double rp = p.norm();
    if (rp >= r_in - 1e-15 && rp <= r_out + 1e-15) out.emplace_back(p, q);
    return;
  }
  const double pd = p.dot(d);
  const double pp = p.squaredNorm();

  // f(t) = |p + t d|^2 is an upward parabola; {f <= c} is one interval.
  const auto inside_interval = [&](double c, double& t0, double& t1) {
    const double disc = pd * pd - dd * (pp - c);
    if (disc < 0.0) return false;
    const double s = std::sqrt(disc);
    t0 = (-pd - s) / dd;
    t1 = (-pd + s) / dd;
    return true;
  };

  double o0 = 0.0, o1 = 0.0;
  if (!inside_interval(r_out * r_out, o0, o1)) return;  // never inside the outer disc
  o0 = std::max(o0, 0.0);
  o1 = std::min(o1, 1.0);
  if (o1 <= o0) return;

  // {f >= r_in^2} is the complement of an open interval (i0, i1).
  std::vector<std::pair<double, double>> spans;
  double i0 = 0.0, i1 = 0.0;
  if (r_in > 0.0 && inside_interval(r_in * r_in, i0, i1) && i1 > i0) {
    if (i0 > o0) spans.emplace_back(o0, std::min(i0, o1));
    if (i1 < o1) spans.emplace_back(std::max(i1, o0), o1);
  } else {
    spans.emplace_back(o0, o1);
  }

  for (const auto& [a, b] : spans) {
    if (b - a <= 1e-14) continue;
    const Vec2 xa = p + a * d;
    const Vec2 xb = p + b * d;
    out.emplace_back(xa, xb);
  }
}

}  // namespace

Polyline clip_to_annulus(const Polyline& poly, double r_in, double r_out) {
  Polyline out;
  for (const auto& [p, q] : poly) clip_segment(p, q, r_in, r_out, out);
  return out;
}

double fb_hausdorff(const Polyline& a, const Polyline& b, double r_in, double r_out) {
  if (!(r_in >= 0.0) || !(r_out > r_in))
    throw Error(Err::InvalidArgument, "annulus radii must satisfy 0 <= r_in < r_out");
  const Polyline ca = clip_to_annulus(a, r_in, r_out);
  const Polyline cb = clip_to_annulus(b, r_in, r_out);
  if (ca.empty() || cb.empty())
    throw Error(Err::InvalidArgument, "a curve has no points in the annulus");
  return hausdorff_polylines(ca, cb);
}

}  // namespace fblab
