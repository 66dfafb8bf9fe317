#include "fblab/functional.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

// Degree-4 triangle quadrature (6 points, barycentric orbits). Exact for
// polynomials up to total degree 4 on a triangle; weights sum to one and
// scale by the physical triangle area.
struct QuadPoint {
  double a, b, c, w;
};
constexpr QuadPoint kQuad6[6] = {
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
};

// Vertex of a clipped region in simplex coordinates (l1, l2) of the parent
// triangle, carrying the interpolated field value u.
struct ClipV {
  double l1, l2, u;
};

// Sutherland-Hodgman clip of a convex polygon against {u >= bound} or
// {u <= bound}. The clip boundary is a straight line because u is affine in
// the simplex coordinates. Crossing vertices get u = bound exactly.
void clip_by_value(const std::vector<ClipV>& in, double bound, bool keep_above,
                   std::vector<ClipV>& out) {
  out.clear();
  const std::size_t n = in.size();
  if (n == 0) return;
  auto inside = [&](const ClipV& v) { return keep_above ? v.u >= bound : v.u <= bound; };
  for (std::size_t i = 0; i < n; ++i) {
    const ClipV& a = in[i];
    const ClipV& b = in[(i + 1) % n];
    const bool ia = inside(a), ib = inside(b);
    if (ia) out.push_back(a);
    if (ia != ib) {
      const double t = (bound - a.u) / (b.u - a.u);
      out.push_back({a.l1 + t * (b.l1 - a.l1), a.l2 + t * (b.l2 - a.l2), bound});
    }
  }
}

double simplex_poly_area(const std::vector<ClipV>& poly) {
  double s = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const double ax = poly[i].l1 - poly[0].l1, ay = poly[i].l2 - poly[0].l2;
    const double bx = poly[i + 1].l1 - poly[0].l1, by = poly[i + 1].l2 - poly[0].l2;
    s += 0.5 * (ax * by - ay * bx);
  }
  return s;
}

}  // namespace

double positive_area_triangle(double u0, double u1, double u2, double area) {
  if (!(area >= 0.0)) throw Error(Err::InvalidArgument, "triangle area must be nonnegative");
  const double u[3] = {u0, u1, u2};
  int pos = -1, neg = -1, n_pos = 0, n_neg = 0;
  for (int i = 0; i < 3; ++i) {
    if (u[i] > 0.0) {
      pos = i;
      ++n_pos;
    } else if (u[i] < 0.0) {
      neg = i;
      ++n_neg;
    }
  }
  if (n_pos == 0) return 0.0;
  if (n_neg == 0) return area;
  if (n_pos == 1) {
    // Positive corner triangle cut off by the zero line.
    const double a = u[pos];
    const double b = u[(pos + 1) % 3], c = u[(pos + 2) % 3];
    return area * (a / (a - b)) * (a / (a - c));
  }
  // One negative corner: complement of the negative corner triangle.
  const double a = u[neg];
  const double b = u[(neg + 1) % 3], c = u[(neg + 2) % 3];
  return area * (1.0 - (a / (a - b)) * (a / (a - c)));
}

double smooth_ramp(double s, double eps) {
  if (s <= 0.0) return 0.0;
  if (s >= eps) return 1.0;
  const double t = s / eps;
  return t * t * (3.0 - 2.0 * t);
}

double smooth_ramp_deriv(double s, double eps) {
  if (s <= 0.0 || s >= eps) return 0.0;
  const double t = s / eps;
  return 6.0 * t * (1.0 - t) / eps;
}

FemCache build_fem_cache(const Mesh& mesh) {
  FemCache fem;
  fem.mesh = &mesh;
  fem.tri.resize(mesh.n_tris());
  fem.node_tris.assign(mesh.n_nodes(), {});
  for (int k = 0; k < mesh.n_tris(); ++k) {
    TriGeom& g = fem.tri[k];
    g.v = mesh.tris[k];
    const Vec2& p0 = mesh.nodes[g.v[0]];
    const Vec2& p1 = mesh.nodes[g.v[1]];
    const Vec2& p2 = mesh.nodes[g.v[2]];
    const double a2 = (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x());
    g.area = 0.5 * a2;
    // grad of the barycentric function of vertex i: the opposite edge vector
    // rotated by +90 degrees, over twice the area.
    const Vec2 e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
    g.grad_bary[0] = Vec2(-e0.y(), e0.x()) / a2;
    g.grad_bary[1] = Vec2(-e1.y(), e1.x()) / a2;
    g.grad_bary[2] = Vec2(-e2.y(), e2.x()) / a2;
    for (int i = 0; i < 3; ++i) fem.node_tris[g.v[i]].push_back({k, i});
  }
  return fem;
}

EnergyBreakdown energy_exact(const FemCache& fem, const Field& u, double lambda, int tri_begin,
                             int tri_end) {
  if (tri_end < 0) tri_end = fem.n_tris();
  std::vector<double> dir, pos;
  dir.reserve(tri_end - tri_begin);
  pos.reserve(tri_end - tri_begin);
  for (int k = tri_begin; k < tri_end; ++k) {
    const TriGeom& g = fem.tri[k];
    const double u0 = u[g.v[0]], u1 = u[g.v[1]], u2 = u[g.v[2]];
    const Vec2 grad = u0 * g.grad_bary[0] + u1 * g.grad_bary[1] + u2 * g.grad_bary[2];
    dir.push_back(grad.squaredNorm() * g.area);
    pos.push_back(positive_area_triangle(u0, u1, u2, g.area));
  }
  EnergyBreakdown e;
  e.dirichlet = pairwise_sum(dir);
  e.positive_area = pairwise_sum(pos);
  e.lambda = lambda;
  return e;
}

double scaled_energy(const FemCache& fem, const Field& u, double lambda, double eps,
                     int tri_begin, int tri_end) {
  if (eps < 0.0) throw Error(Err::InvalidArgument, "eps must be nonnegative");
  const EnergyBreakdown e = energy_exact(fem, u, lambda, tri_begin, tri_end);
  return e.dirichlet + eps * eps * lambda * e.positive_area;
}

CorrectedBreakdown corrected_energy(const FemCache& fem, const Field& v, const ProblemSpec& spec,
                                    double r) {
  if (spec.g_coeff == 0.0)
    throw Error(Err::InvalidArgument,
                "g_coeff is zero: the corrected energy degenerates to the plain energy");
  const Mesh& mesh = *fem.mesh;
  if (v.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  int lvl = -1;
  for (int l = 0; l < mesh.n_levels(); ++l) {
    if (std::abs(mesh.level_radius[l] - r) <= 1e-12) {
      lvl = l;
      break;
    }
  }
  if (lvl < 0) throw Error(Err::MeshError, "radius is not aligned with a mesh level");

  const int t0 = mesh.strip_tri_offset[lvl];
  const int n0 = mesh.level_node_offset[lvl];
  const double kap = spec.g_exponent;
  const DerivedParams d = derive_params(spec);

  CorrectedBreakdown out;
  out.lambda = d.Lambda;

  std::vector<double> dir, pos;
  dir.reserve(fem.n_tris() - t0);
  pos.reserve(fem.n_tris() - t0);
  for (int t = t0; t < fem.n_tris(); ++t) {
    const TriGeom& g = fem.tri[t];
    const Vec2 grad =
        v[g.v[0]] * g.grad_bary[0] + v[g.v[1]] * g.grad_bary[1] + v[g.v[2]] * g.grad_bary[2];
    dir.push_back(grad.squaredNorm() * g.area);
    double w[3];
    for (int k = 0; k < 3; ++k)
      w[k] = v[g.v[k]] + g_value(spec, mesh.nodes[g.v[k]].norm());
    pos.push_back(positive_area_triangle(w[0], w[1], w[2], g.area));
  }
  out.dirichlet = pairwise_sum(dir);
  out.positive_area = pairwise_sum(pos);

  // Lumped quadrature of v * (2 laplacian g) over the region.
  std::vector<double> lump(mesh.n_nodes() - n0, 0.0);
  for (int t = t0; t < fem.n_tris(); ++t)
    for (int k = 0; k < 3; ++k) lump[fem.tri[t].v[k] - n0] += fem.tri[t].area / 3.0;

  const double pi = std::atan2(0.0, -1.0);
  const double lap_factor = 2.0 * spec.g_coeff * (1.0 + kap) * (1.0 + kap);
  std::vector<double> src;
  src.reserve(mesh.n_nodes() - n0);
  for (int n = n0; n < mesh.n_nodes(); ++n) {
    const double wn = lump[n - n0];
    double cell;
    if (n == mesh.origin_node) {
      // Integrate |x|^(kap-1) exactly over the half-disc whose area equals
      // the lumped cell weight; the integrand is singular but integrable.
      const double rho = std::sqrt(2.0 * wn / pi);
      cell = lap_factor * pi * std::pow(rho, kap + 1.0) / (kap + 1.0);
    } else {
      cell = lap_factor * std::pow(mesh.nodes[n].norm(), kap - 1.0) * wn;
    }
    src.push_back(v[n] * cell);
  }
  out.g_correction = pairwise_sum(src);
  return out;
}

double linear_growth_constant(const Mesh& mesh, const Field& u) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  double c = 0.0;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (n == mesh.origin_node) continue;
    c = std::max(c, std::abs(u[n]) / mesh.nodes[n].norm());
  }
  return c;
}

double corrected_c1(double c_lin, double g_coeff, double kappa) {
  const double pi = std::atan2(0.0, -1.0);
  return 2.0 * c_lin * g_coeff * (1.0 + kappa) * (1.0 + kappa) * pi / (kappa + 2.0);
}

namespace {

// Integrates f(u, lam0, lam1, lam2) over a convex region of a triangle given
// in simplex coordinates, exactly for integrands of degree <= 4.
template <typename F>
double integrate_clipped(const std::vector<ClipV>& poly, double tri_area, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const ClipV& A = poly[0];
    const ClipV& B = poly[i];
    const ClipV& C = poly[i + 1];
    const double sub =
        0.5 * ((B.l1 - A.l1) * (C.l2 - A.l2) - (B.l2 - A.l2) * (C.l1 - A.l1));
    const double phys = sub * 2.0 * tri_area;
    if (phys == 0.0) continue;
    double acc = 0.0;
    for (const QuadPoint& q : kQuad6) {
      const double l1 = q.a * A.l1 + q.b * B.l1 + q.c * C.l1;
      const double l2 = q.a * A.l2 + q.b * B.l2 + q.c * C.l2;
      const double uv = q.a * A.u + q.b * B.u + q.c * C.u;
      acc += q.w * f(uv, 1.0 - l1 - l2, l1, l2);
    }
    sum += phys * acc;
  }
  return sum;
}

}  // namespace

double energy_smoothed(const FemCache& fem, const Field& u, double lambda, double eps) {
  if (!(eps > 0.0)) throw Error(Err::InvalidArgument, "eps must be positive");
  std::vector<double> contrib;
  contrib.reserve(fem.n_tris());
  std::vector<ClipV> base(3), work, band;
  for (int k = 0; k < fem.n_tris(); ++k) {
    const TriGeom& g = fem.tri[k];
    const double u0 = u[g.v[0]], u1 = u[g.v[1]], u2 = u[g.v[2]];
    const Vec2 grad = u0 * g.grad_bary[0] + u1 * g.grad_bary[1] + u2 * g.grad_bary[2];
    double c = grad.squaredNorm() * g.area;
    const double umin = std::min({u0, u1, u2}), umax = std::max({u0, u1, u2});
    if (umin >= eps) {
      c += lambda * g.area;
    } else if (umax > 0.0) {
      base[0] = {0.0, 0.0, u0};
      base[1] = {1.0, 0.0, u1};
      base[2] = {0.0, 1.0, u2};
      // Saturated part {u >= eps} contributes its plain area.
      clip_by_value(base, eps, true, work);
      double phase = simplex_poly_area(work) * 2.0 * g.area;
      // Transition band {0 <= u <= eps} carries the cubic ramp.
      clip_by_value(base, 0.0, true, work);
      clip_by_value(work, eps, false, band);
      phase += integrate_clipped(band, g.area,
                                 [&](double uv, double, double, double) {
                                   return smooth_ramp(uv, eps);
                                 });
      c += lambda * phase;
    }
    contrib.push_back(c);
  }
  return pairwise_sum(contrib);
}

Field grad_smoothed(const FemCache& fem, const Field& u, double lambda, double eps) {
  if (!(eps > 0.0)) throw Error(Err::InvalidArgument, "eps must be positive");
  Field g_out = Field::Zero(u.size());
  std::vector<ClipV> base(3), work, band;
  for (int k = 0; k < fem.n_tris(); ++k) {
    const TriGeom& g = fem.tri[k];
    const double u0 = u[g.v[0]], u1 = u[g.v[1]], u2 = u[g.v[2]];
    const Vec2 grad = u0 * g.grad_bary[0] + u1 * g.grad_bary[1] + u2 * g.grad_bary[2];
    for (int i = 0; i < 3; ++i)
      g_out[g.v[i]] += 2.0 * g.area * grad.dot(g.grad_bary[i]);
    const double umin = std::min({u0, u1, u2}), umax = std::max({u0, u1, u2});
    // The ramp derivative vanishes outside the open band {0 < u < eps}.
    if (umax <= 0.0 || umin >= eps) continue;
    base[0] = {0.0, 0.0, u0};
    base[1] = {1.0, 0.0, u1};
    base[2] = {0.0, 1.0, u2};
    clip_by_value(base, 0.0, true, work);
    clip_by_value(work, eps, false, band);
    for (int i = 0; i < 3; ++i) {
      const double val = integrate_clipped(
          band, g.area, [&](double uv, double l0, double l1, double l2) {
            const double lam = i == 0 ? l0 : (i == 1 ? l1 : l2);
            return smooth_ramp_deriv(uv, eps) * lam;
          });
      g_out[g.v[i]] += lambda * val;
    }
  }
  return g_out;
}

Field interpolate_global(const Mesh& mesh, const GlobalSolution& sol) {
  const Vec2 d = sol.direction();
  const double dn = d.norm();
  Field u(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Vec2& x = mesh.nodes[n];
    double t = d.dot(x);
    if (std::abs(t) <= 8.0 * 1.1e-16 * dn * x.norm()) t = 0.0;
    u[n] = sol.alpha_plus * std::max(t, 0.0) + sol.alpha_minus * std::min(t, 0.0);
  }
  return u;
}

Eigen::SparseMatrix<double> stiffness_matrix(const FemCache& fem) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(fem.n_tris()) * 9);
  for (const TriGeom& g : fem.tri)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(g.v[i], g.v[j], g.area * g.grad_bary[i].dot(g.grad_bary[j]));
  Eigen::SparseMatrix<double> K(fem.n_nodes(), fem.n_nodes());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

}  // namespace fblab
