#include "fblab/weiss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

// Index of the level circle whose radius matches R to absolute 1e-12.
int aligned_level(const Mesh& mesh, double R) {
  for (int l = 0; l < mesh.n_levels(); ++l)
    if (std::abs(mesh.level_radius[l] - R) <= 1e-12) return l;
  throw Error(Err::MeshError, "radius is not aligned with a mesh level circle");
}

// Exact integral of the squared linear interpolant along the level polygon:
// per edge, integral of (v_i (1-t) + v_j t)^2 over arclength.
double polygon_square_integral(const Mesh& mesh, int level, const std::vector<double>& v) {
  const int off = mesh.level_node_offset[level];
  const int c = mesh.level_count[level];
  std::vector<double> terms(static_cast<size_t>(c));
  for (int i = 0; i < c; ++i) {
    const double len = (mesh.nodes[off + i] - mesh.nodes[off + i + 1]).norm();
    const double a = v[i], b = v[i + 1];
    terms[i] = len / 3.0 * (a * a + a * b + b * b);
  }
  return pairwise_sum(terms);
}

double ring_square_integral(const Mesh& mesh, const Field& u, int level) {
  const int off = mesh.level_node_offset[level];
  const int c = mesh.level_count[level];
  std::vector<double> v(static_cast<size_t>(c) + 1);
  for (int i = 0; i <= c; ++i) v[i] = u[off + i];
  return polygon_square_integral(mesh, level, v);
}

double min_polygon_edge(const Mesh& mesh, int level) {
  const int off = mesh.level_node_offset[level];
  const int c = mesh.level_count[level];
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c; ++i)
    m = std::min(m, (mesh.nodes[off + i] - mesh.nodes[off + i + 1]).norm());
  return m;
}

// One-sided radial difference quotient between a level and its inner
// neighbor, integrated as (du/dr - u/R)^2 over the level polygon. Along a
// shared ray the quotient is exact for degree-one nodal data; where the
// angular count halves, the inner value is interpolated linearly in angle.
double radial_homogeneity_defect(const Mesh& mesh, const Field& u, int level) {
  if (level + 1 >= mesh.n_levels())
    throw Error(Err::MeshError, "innermost level circle has no inner neighbor");
  const int li = level + 1;
  const double R = mesh.level_radius[level];
  const double dr = R - mesh.level_radius[li];
  const int c_out = mesh.level_count[level];
  const int c_in = mesh.level_count[li];
  const int off_out = mesh.level_node_offset[level];
  const int off_in = mesh.level_node_offset[li];

  std::vector<double> e(static_cast<size_t>(c_out) + 1);
  for (int i = 0; i <= c_out; ++i) {
    const double t = static_cast<double>(i) * c_in / c_out;
    const int j0 = std::min(static_cast<int>(t), c_in - 1);
    const double frac = t - j0;
    const double u_in = (1.0 - frac) * u[off_in + j0] + frac * u[off_in + j0 + 1];
    const double u_out = u[off_out + i];
    e[i] = (u_out - u_in) / dr - u_out / R;
  }
  return polygon_square_integral(mesh, level, e);
}

double tri_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a;
  return ab.x() * ac.y() - ab.y() * ac.x();
}

double point_segment_dist(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

double point_tri_dist(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = tri_area2(a, b, c);
  const double l0 = tri_area2(p, b, c) / area2;
  const double l1 = tri_area2(a, p, c) / area2;
  const double l2 = 1.0 - l0 - l1;
  if (l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0) return 0.0;
  return std::min({point_segment_dist(p, a, b), point_segment_dist(p, b, c),
                   point_segment_dist(p, c, a)});
}

// Area of T cap B_R(x0) and of T cap B_R(x0) cap {u > 0} for u linear on T,
// by recursive bisection: triangles entirely inside or outside resolve
// exactly (the phase cut is exact on any sub-triangle); straddling leaves at
// full depth count by their centroid.
void rim_areas(const Vec2& a, const Vec2& b, const Vec2& c, double ua, double ub, double uc,
               const Vec2& x0, double R, int depth, double& area, double& parea) {
  const double dmax = std::sqrt(
      std::max({(a - x0).squaredNorm(), (b - x0).squaredNorm(), (c - x0).squaredNorm()}));
  if (dmax <= R) {
    const double A = 0.5 * std::abs(tri_area2(a, b, c));
    area += A;
    parea += positive_area_triangle(ua, ub, uc, A);
    return;
  }
  if (point_tri_dist(x0, a, b, c) >= R) return;
  if (depth == 0) {
    if (((a + b + c) / 3.0 - x0).norm() <= R) {
      const double A = 0.5 * std::abs(tri_area2(a, b, c));
      area += A;
      parea += positive_area_triangle(ua, ub, uc, A);
    }
    return;
  }
  const Vec2 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
  const double uab = 0.5 * (ua + ub), ubc = 0.5 * (ub + uc), uca = 0.5 * (uc + ua);
  rim_areas(a, mab, mca, ua, uab, uca, x0, R, depth - 1, area, parea);
  rim_areas(mab, b, mbc, uab, ub, ubc, x0, R, depth - 1, area, parea);
  rim_areas(mca, mbc, c, uca, ubc, uc, x0, R, depth - 1, area, parea);
  rim_areas(mab, mbc, mca, uab, ubc, uca, x0, R, depth - 1, area, parea);
}

struct Located {
  int tri = -1;
  double l0 = 0.0, l1 = 0.0, l2 = 0.0;
};

// Point location through the level structure: a query at radius r can only
// lie in the strips bracketing r (level radii are sorted outward-in).
Located locate_point(const Mesh& mesh, const Vec2& p) {
  const double r = p.norm();
  const auto& lr = mesh.level_radius;
  const int idx = static_cast<int>(
      std::lower_bound(lr.begin(), lr.end(), r, std::greater<double>()) - lr.begin());
  const int s_lo = std::max(0, idx - 2);
  const int s_hi = std::min(idx, mesh.n_levels() - 1);
  Located best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int s = s_lo; s <= s_hi; ++s) {
    const int t_begin = mesh.strip_tri_offset[s];
    const int t_end = s + 1 < mesh.n_levels() ? mesh.strip_tri_offset[s + 1] : mesh.n_tris();
    for (int t = t_begin; t < t_end; ++t) {
      const auto& v = mesh.tris[t];
      const Vec2 &a = mesh.nodes[v[0]], &b = mesh.nodes[v[1]], &c = mesh.nodes[v[2]];
      const double area2 = tri_area2(a, b, c);
      const double l0 = tri_area2(p, b, c) / area2;
      const double l1 = tri_area2(a, p, c) / area2;
      const double l2 = 1.0 - l0 - l1;
      const double m = std::min({l0, l1, l2});
      if (m > best_min) {
        best_min = m;
        best = {t, l0, l1, l2};
      }
      if (m >= 0.0) return best;
    }
  }
  if (best_min < -1e-9) throw Error(Err::MeshError, "query point lies outside the mesh");
  return best;
}

double eval_at(const FemCache& fem, const Field& u, const Located& loc) {
  const auto& v = fem.mesh->tris[loc.tri];
  return loc.l0 * u[v[0]] + loc.l1 * u[v[1]] + loc.l2 * u[v[2]];
}

Vec2 grad_at(const FemCache& fem, const Field& u, const Located& loc) {
  const auto& g = fem.tri[loc.tri];
  return u[g.v[0]] * g.grad_bary[0] + u[g.v[1]] * g.grad_bary[1] + u[g.v[2]] * g.grad_bary[2];
}

constexpr int kRimDepth = 8;       // bisection depth for rim triangles
constexpr int kCircleSamples = 4096;  // samples along an off-center circle

struct OffCenterGeometry {
  double t_begin = 0.0;
  double t_end = 0.0;  // arc parameter range with p = x0 + R (cos t, sin t)
};

// Validates the admissible off-center geometries and returns the parameter
// range of S_R(x0) inside the half-plane.
OffCenterGeometry check_off_center(const Vec2& x0, double R) {
  if (!(R > 0.0)) throw Error(Err::InvalidArgument, "radius must be positive");
  if (x0.x() < -1e-12)
    throw Error(Err::MeshError, "center lies outside the closed half-plane");
  if (x0.norm() + R > 1.0 + 1e-9)
    throw Error(Err::MeshError, "ball is not contained in the meshed half-disc");
  if (x0.x() <= 1e-12) return {-0.5 * M_PI, 0.5 * M_PI};  // half-ball at the flat segment
  if (x0.x() - R < -1e-12)
    throw Error(Err::MeshError,
                "interior center: ball reaches the flat segment; move the center or shrink R");
  return {0.0, 2.0 * M_PI};
}

WeissParts weiss_off_center(const FemCache& fem, const Field& u, double lambda, double R,
                            const Vec2& x0, double* homogeneity_defect) {
  const OffCenterGeometry geo = check_off_center(x0, R);
  const Mesh& mesh = *fem.mesh;

  std::vector<double> dir_terms, area_terms;
  dir_terms.reserve(fem.n_tris());
  area_terms.reserve(fem.n_tris());
  for (int t = 0; t < fem.n_tris(); ++t) {
    const auto& g = fem.tri[t];
    const Vec2 &a = mesh.nodes[g.v[0]], &b = mesh.nodes[g.v[1]], &c = mesh.nodes[g.v[2]];
    const double ua = u[g.v[0]], ub = u[g.v[1]], uc = u[g.v[2]];
    const double dmax = std::sqrt(
        std::max({(a - x0).squaredNorm(), (b - x0).squaredNorm(), (c - x0).squaredNorm()}));
    const Vec2 grad = ua * g.grad_bary[0] + ub * g.grad_bary[1] + uc * g.grad_bary[2];
    if (dmax <= R) {
      dir_terms.push_back(grad.squaredNorm() * g.area);
      area_terms.push_back(positive_area_triangle(ua, ub, uc, g.area));
      continue;
    }
    if (point_tri_dist(x0, a, b, c) >= R) continue;
    double clip_area = 0.0, clip_parea = 0.0;
    rim_areas(a, b, c, ua, ub, uc, x0, R, kRimDepth, clip_area, clip_parea);
    dir_terms.push_back(grad.squaredNorm() * clip_area);
    area_terms.push_back(clip_parea);
  }
  const double dir = pairwise_sum(dir_terms);
  const double parea = pairwise_sum(area_terms);

  // Dense sampling of the true circle; the squared trace integrates exactly
  // per sub-arc under linear interpolation between samples.
  const int n = kCircleSamples;
  const double dt = (geo.t_end - geo.t_begin) / n;
  std::vector<double> vals(static_cast<size_t>(n) + 1);
  std::vector<double> defect_vals(homogeneity_defect ? n + 1 : 0);
  for (int i = 0; i <= n; ++i) {
    const double t = geo.t_begin + dt * i;
    Vec2 p = x0 + R * Vec2(std::cos(t), std::sin(t));
    if (p.x() < 0.0) p.x() = 0.0;  // clamp roundoff at the flat segment
    const Located loc = locate_point(mesh, p);
    vals[i] = eval_at(fem, u, loc);
    if (homogeneity_defect) {
      const Vec2 nu = (p - x0) / R;
      defect_vals[i] = grad_at(fem, u, loc).dot(nu) - vals[i] / R;
    }
  }
  std::vector<double> sq_terms(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double a = vals[i], b = vals[i + 1];
    sq_terms[i] = R * dt / 3.0 * (a * a + a * b + b * b);
  }
  const double sphere = pairwise_sum(sq_terms);
  if (homogeneity_defect) {
    std::vector<double> d_terms(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double a = defect_vals[i], b = defect_vals[i + 1];
      d_terms[i] = R * dt / 3.0 * (a * a + a * b + b * b);
    }
    *homogeneity_defect = pairwise_sum(d_terms);
  }
  WeissParts parts;
  parts.dirichlet = dir / (R * R);
  parts.phase_area = parea / (R * R);
  parts.sphere = sphere / (R * R * R);
  parts.lambda = lambda;
  return parts;
}

WeissParts weiss_origin_parts(const FemCache& fem, const Field& u, double lambda, double R) {
  const Mesh& mesh = *fem.mesh;
  const int lvl = aligned_level(mesh, R);
  const EnergyBreakdown bulk = energy_exact(fem, u, lambda, mesh.strip_tri_offset[lvl], -1);
  WeissParts parts;
  parts.dirichlet = bulk.dirichlet / (R * R);
  parts.phase_area = bulk.positive_area / (R * R);
  parts.sphere = ring_square_integral(mesh, u, lvl) / (R * R * R);
  parts.lambda = lambda;
  return parts;
}

void check_radii(const std::vector<double>& radii) {
  if (radii.empty()) throw Error(Err::InvalidArgument, "radii list is empty");
  for (size_t k = 0; k + 1 < radii.size(); ++k)
    if (!(radii[k] > radii[k + 1]))
      throw Error(Err::InvalidArgument, "radii must be strictly decreasing");
  if (!(radii.back() > 0.0)) throw Error(Err::InvalidArgument, "radii must be positive");
}

double positive_part_max_rise(const std::vector<double>& w) {
  double defect = 0.0;
  for (size_t k = 0; k + 1 < w.size(); ++k)
    defect = std::max(defect, w[k + 1] - w[k]);  // radii decrease with k
  return std::max(defect, 0.0);
}

}  // namespace

WeissParts weiss_energy_parts(const FemCache& fem, const Field& u, const ProblemSpec& spec,
                              double R, const Vec2& x0) {
  const double lambda = derive_params(spec).Lambda;
  if (fem.n_nodes() != u.size())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  if (x0.x() == 0.0 && x0.y() == 0.0) return weiss_origin_parts(fem, u, lambda, R);
  return weiss_off_center(fem, u, lambda, R, x0, nullptr);
}

double weiss_energy(const FemCache& fem, const Field& u, const ProblemSpec& spec, double R,
                    const Vec2& x0) {
  return weiss_energy_parts(fem, u, spec, R, x0).total();
}

WeissProfile weiss_profile(const FemCache& fem, const Field& u, const ProblemSpec& spec,
                           const Vec2& x0, const std::vector<double>& radii) {
  check_radii(radii);
  if (fem.n_nodes() != u.size())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const double lambda = derive_params(spec).Lambda;
  const Mesh& mesh = *fem.mesh;

  WeissProfile out;
  out.center = x0;
  out.radii = radii;
  out.W_values.resize(radii.size());
  out.homogeneity_defects.resize(radii.size());
  if (x0.x() == 0.0 && x0.y() == 0.0) {
    for (size_t k = 0; k < radii.size(); ++k) {
      out.W_values[k] = weiss_origin_parts(fem, u, lambda, radii[k]).total();
      out.homogeneity_defects[k] = radial_homogeneity_defect(mesh, u, aligned_level(mesh, radii[k]));
    }
  } else {
    for (size_t k = 0; k < radii.size(); ++k)
      out.W_values[k] =
          weiss_off_center(fem, u, lambda, radii[k], x0, &out.homogeneity_defects[k]).total();
  }
  out.monotonicity_defect = positive_part_max_rise(out.W_values);
  return out;
}

WeissProfile corrected_weiss_profile(const FemCache& fem, const Field& v, const ProblemSpec& spec,
                                     const std::vector<double>& radii) {
  if (spec.g_coeff == 0.0)
    throw Error(Err::InvalidArgument,
                "corrected profile needs a radial perturbation; use weiss_profile when g = 0");
  check_radii(radii);
  if (fem.n_nodes() != v.size())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const double lambda = derive_params(spec).Lambda;
  const Mesh& mesh = *fem.mesh;
  const double kappa = spec.g_exponent;
  const double c1 = corrected_c1(linear_growth_constant(mesh, v), spec.g_coeff, kappa);

  // Phase indicator {v > -g} via the linearization of v + g.
  Field w(v.size());
  for (int n = 0; n < v.size(); ++n) w[n] = v[n] + g_value(spec, mesh.nodes[n].norm());

  WeissProfile out;
  out.radii = radii;
  out.corrected = true;
  out.W_values.resize(radii.size());
  out.homogeneity_defects.resize(radii.size());
  out.kappa_term.resize(radii.size());
  for (size_t k = 0; k < radii.size(); ++k) {
    const double R = radii[k];
    const int lvl = aligned_level(mesh, R);
    const int t0 = mesh.strip_tri_offset[lvl];
    std::vector<double> dir_terms(static_cast<size_t>(fem.n_tris() - t0));
    std::vector<double> area_terms(static_cast<size_t>(fem.n_tris() - t0));
    for (int t = t0; t < fem.n_tris(); ++t) {
      const auto& g = fem.tri[t];
      const Vec2 grad = v[g.v[0]] * g.grad_bary[0] + v[g.v[1]] * g.grad_bary[1] +
                        v[g.v[2]] * g.grad_bary[2];
      dir_terms[t - t0] = grad.squaredNorm() * g.area;
      area_terms[t - t0] = positive_area_triangle(w[g.v[0]], w[g.v[1]], w[g.v[2]], g.area);
    }
    const double bulk = pairwise_sum(dir_terms) + lambda * pairwise_sum(area_terms);
    const double sphere = ring_square_integral(mesh, v, lvl);
    out.W_values[k] = bulk / (R * R) - sphere / (R * R * R);
    out.homogeneity_defects[k] = radial_homogeneity_defect(mesh, v, lvl);
    out.kappa_term[k] = c1 / kappa * std::pow(R, kappa);
  }
  std::vector<double> corrected(radii.size());
  for (size_t k = 0; k < radii.size(); ++k) corrected[k] = out.W_values[k] + out.kappa_term[k];
  out.monotonicity_defect = positive_part_max_rise(corrected);
  return out;
}

double weiss_tolerance(const Mesh& mesh, double R) {
  return 10.0 * min_polygon_edge(mesh, aligned_level(mesh, R));
}

double homogeneity_tolerance(const Mesh& mesh, double R, double field_scale) {
  const double h = min_polygon_edge(mesh, aligned_level(mesh, R));
  return 20.0 * h * h * field_scale * field_scale;
}

}  // namespace fblab
