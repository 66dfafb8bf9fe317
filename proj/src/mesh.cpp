#include "fblab/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace fblab {

namespace {

const double kPi = std::atan2(0.0, -1.0);

// Node position on the circle of radius r with `count` sectors, angular index
// i in [0, count], angle i*pi/count from the +x2 axis. Mirror pairs
// (i, count-i) get bit-exact mirrored coordinates and the three axis nodes
// are exact: i=0 -> (0, r), i=count -> (0, -r), 2i=count -> (r, 0).
Vec2 circle_node(double r, int i, int count) {
  if (i == 0) return Vec2(0.0, r);
  if (i == count) return Vec2(0.0, -r);
  if (2 * i == count) return Vec2(r, 0.0);
  const bool lower = 2 * i > count;
  const int j = lower ? count - i : i;
  const double phi = kPi * j / count;
  const double x1 = r * std::sin(phi);
  const double x2 = r * std::cos(phi);
  return Vec2(x1, lower ? -x2 : x2);
}

double signed_area2(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Angular counts of the patch levels strictly inside the innermost banded
// level: repeated halving of `m` while more than 9 sectors remain. Depends
// only on m, which keeps the patch shape scale-free.
std::vector<int> patch_counts(int m) {
  std::vector<int> counts;
  int c = m;
  while (c > 9) {
    if (c % 2 != 0)
      throw Error(Err::MeshError,
                  "angular_n must halve to at most 9 sectors through even counts");
    c /= 2;
    counts.push_back(c);
  }
  return counts;
}

}  // namespace

Mesh build_mesh(const MeshParams& params) {
  if (params.rings < 1) throw Error(Err::MeshError, "rings must be >= 1");
  if (!(params.q > 0.0) || !(params.q < 1.0))
    throw Error(Err::MeshError, "q must lie strictly between 0 and 1");
  if (params.angular_n < 8 || params.angular_n % 2 != 0)
    throw Error(Err::MeshError, "angular_n must be even and >= 8");
  if (!(params.aspect >= 1.0) || !(params.aspect <= 8.0))
    throw Error(Err::MeshError, "aspect must lie in [1, 8]");

  const int m = params.angular_n;
  const std::vector<int> inner_counts = patch_counts(m);  // validates m

  Mesh mesh;
  mesh.params = params;
  const int S =
      std::max(1, static_cast<int>(std::lround(m * std::log(1.0 / params.q) /
                                               (kPi * params.aspect))));
  mesh.sublevels = S;
  mesh.banded_levels = params.rings * S + 1;

  // --- Level table ------------------------------------------------------
  for (int t = 0; t < mesh.banded_levels; ++t) {
    mesh.level_radius.push_back(std::pow(params.q, static_cast<double>(t) / S));
    mesh.level_count.push_back(m);
  }
  // Patch transition levels: entering a level of count c' shrinks the radius
  // by the factor (1 - aspect*pi/(2 c')), the angular spacing of the outer
  // circle times `aspect`, relative to the circle above it.
  {
    double rel = mesh.level_radius.back();
    for (int c : inner_counts) {
      rel *= std::max(0.3, 1.0 - params.aspect * kPi / (2.0 * c));
      mesh.level_radius.push_back(rel);
      mesh.level_count.push_back(c);
    }
  }
  const int L = mesh.n_levels();

  // --- Nodes (level-major, origin last) -----------------------------------
  for (int l = 0; l < L; ++l) {
    mesh.level_node_offset.push_back(mesh.n_nodes());
    const int c = mesh.level_count[l];
    const double r = mesh.level_radius[l];
    for (int i = 0; i <= c; ++i) {
      mesh.nodes.push_back(circle_node(r, i, c));
      mesh.level_of_node.push_back(l);
      mesh.index_in_level.push_back(i);
      mesh.on_flat.push_back(i == 0 || i == c);
      mesh.on_arc.push_back(l == 0);
    }
  }
  mesh.origin_node = mesh.n_nodes();
  mesh.nodes.push_back(Vec2(0.0, 0.0));
  mesh.level_of_node.push_back(L);
  mesh.index_in_level.push_back(0);
  mesh.on_flat.push_back(true);
  mesh.on_arc.push_back(false);

  // --- Triangles (strip by strip, then the origin fan) --------------------
  auto push_tri = [&mesh](int a, int b, int c) {
    if (signed_area2(mesh.nodes[a], mesh.nodes[b], mesh.nodes[c]) < 0.0) std::swap(b, c);
    mesh.tris.push_back({a, b, c});
  };

  for (int l = 0; l + 1 < L; ++l) {
    mesh.strip_tri_offset.push_back(mesh.n_tris());
    const int c_out = mesh.level_count[l];
    const int c_in = mesh.level_count[l + 1];
    if (c_out == c_in) {
      // Same-count strip: one quad per sector, diagonal mirrored across the
      // +x1 axis so the triangulation is symmetric under x2 -> -x2.
      for (int i = 0; i < c_out; ++i) {
        const int p0 = mesh.node_at(l, i), p1 = mesh.node_at(l, i + 1);
        const int q0 = mesh.node_at(l + 1, i), q1 = mesh.node_at(l + 1, i + 1);
        if (2 * i < c_out) {
          push_tri(p0, p1, q1);
          push_tri(p0, q1, q0);
        } else {
          push_tri(p0, p1, q0);
          push_tri(p1, q1, q0);
        }
      }
    } else if (c_out == 2 * c_in) {
      // Halving strip: three triangles per inner sector.
      for (int j = 0; j < c_in; ++j) {
        const int p0 = mesh.node_at(l, 2 * j), p1 = mesh.node_at(l, 2 * j + 1),
                  p2 = mesh.node_at(l, 2 * j + 2);
        const int q0 = mesh.node_at(l + 1, j), q1 = mesh.node_at(l + 1, j + 1);
        push_tri(p0, p1, q0);
        push_tri(q0, p1, q1);
        push_tri(p1, p2, q1);
      }
    } else {
      throw Error(Err::MeshError, "level counts must be equal or halve between strips");
    }
  }
  // Origin fan from the innermost level.
  mesh.strip_tri_offset.push_back(mesh.n_tris());
  {
    const int l = L - 1;
    for (int i = 0; i < mesh.level_count[l]; ++i)
      push_tri(mesh.origin_node, mesh.node_at(l, i), mesh.node_at(l, i + 1));
  }

  return mesh;
}

double Mesh::h_coarse() const { return kPi / params.angular_n; }

int Mesh::level_at_or_inside(double r) const {
  if (!(r > 0.0)) throw Error(Err::InvalidArgument, "radius must be positive");
  const double slack = 1.0 + 1e-12;
  for (int l = 0; l < n_levels(); ++l)
    if (level_radius[l] <= r * slack) return l;
  throw Error(Err::InvalidArgument, "radius is inside the innermost level");
}

int Mesh::suffix_begin(double r) const { return level_node_offset[level_at_or_inside(r)]; }

int Mesh::tri_suffix_begin(double r) const { return strip_tri_offset[level_at_or_inside(r)]; }

double mesh_min_angle(const Mesh& mesh) {
  double worst = kPi;
  for (const auto& t : mesh.tris) {
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = mesh.nodes[t[k]];
      const Vec2& b = mesh.nodes[t[(k + 1) % 3]];
      const Vec2& c = mesh.nodes[t[(k + 2) % 3]];
      const Vec2 u = b - a, v = c - a;
      const double ang = std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v));
      worst = std::min(worst, ang);
    }
  }
  return worst;
}

double mesh_area(const Mesh& mesh) {
  std::vector<double> areas;
  areas.reserve(mesh.tris.size());
  for (const auto& t : mesh.tris)
    areas.push_back(0.5 * signed_area2(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]));
  return pairwise_sum(areas);
}

static Field boundary_trace_impl(const Mesh& mesh, const ProblemSpec& spec,
                                 const std::function<double(const Vec2&)>& outer) {
  Field f = Field::Zero(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const Vec2& x = mesh.nodes[n];
    if (mesh.on_flat[n]) {
      f[n] = flat_datum(spec, x.y());
      if (mesh.on_arc[n]) {
        // Corner nodes (0, +-1): the flat-segment value wins, but the outer
        // datum must agree there or the combined data would be discontinuous.
        const double o = outer(x);
        if (std::abs(o - f[n]) > 1e-12)
          throw Error(Err::InvalidArgument,
                      "outer datum disagrees with the flat-segment datum at a corner node");
      }
    } else if (mesh.on_arc[n]) {
      f[n] = outer(x);
    }
  }
  return f;
}

Field boundary_trace(const Mesh& mesh, const ProblemSpec& spec, OuterDatum outer) {
  const GlobalSolution sol =
      global_solution(spec, outer == OuterDatum::SmallTrace ? Branch::Small : Branch::Large);
  return boundary_trace_impl(mesh, spec, [&sol](const Vec2& x) { return eval_global(sol, x); });
}

Field boundary_trace(const Mesh& mesh, const ProblemSpec& spec,
                     const std::function<double(const Vec2&)>& outer) {
  return boundary_trace_impl(mesh, spec, outer);
}

BallRestriction restrict_to_ball(const Mesh& mesh, const Field& field, double r) {
  if (field.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const int S = mesh.sublevels;
  int ring = -1;
  for (int k = 0; k < mesh.params.rings; ++k) {
    if (std::abs(mesh.level_radius[k * S] - r) <= 1e-12) {
      ring = k;
      break;
    }
  }
  if (ring < 0)
    throw Error(Err::MeshError,
                "radius is not aligned with a grading ring radius q^k, k = 0..rings-1");

  const int lvl = ring * S;
  const int nshift = mesh.level_node_offset[lvl];
  const int tshift = mesh.strip_tri_offset[lvl];

  BallRestriction out;
  out.node_shift = nshift;
  out.tri_shift = tshift;

  Mesh& sub = out.mesh;
  sub.params = mesh.params;
  sub.params.rings -= ring;
  sub.sublevels = S;
  sub.banded_levels = mesh.banded_levels - lvl;
  sub.origin_node = mesh.origin_node - nshift;

  sub.nodes.assign(mesh.nodes.begin() + nshift, mesh.nodes.end());
  sub.tris.reserve(mesh.n_tris() - tshift);
  for (int t = tshift; t < mesh.n_tris(); ++t) {
    std::array<int, 3> tri = mesh.tris[t];
    for (int& v : tri) v -= nshift;
    sub.tris.push_back(tri);
  }

  sub.level_radius.assign(mesh.level_radius.begin() + lvl, mesh.level_radius.end());
  sub.level_count.assign(mesh.level_count.begin() + lvl, mesh.level_count.end());
  for (int l = lvl; l < mesh.n_levels(); ++l) {
    sub.level_node_offset.push_back(mesh.level_node_offset[l] - nshift);
    sub.strip_tri_offset.push_back(mesh.strip_tri_offset[l] - tshift);
  }

  const int n_sub = static_cast<int>(sub.nodes.size());
  sub.level_of_node.reserve(n_sub);
  sub.index_in_level.reserve(n_sub);
  sub.on_flat.reserve(n_sub);
  sub.on_arc.reserve(n_sub);
  for (int n = nshift; n < mesh.n_nodes(); ++n) {
    sub.level_of_node.push_back(mesh.level_of_node[n] - lvl);
    sub.index_in_level.push_back(mesh.index_in_level[n]);
    sub.on_flat.push_back(mesh.on_flat[n]);
    // The circle at radius r becomes the arc boundary of the restriction.
    sub.on_arc.push_back(mesh.level_of_node[n] == lvl);
  }

  out.values = field.tail(field.size() - nshift);
  return out;
}

std::pair<double, double> mesh_edge_range(const Mesh& mesh) {
  double lo = 2.0, hi = 0.0;
  for (const auto& t : mesh.tris) {
    for (int k = 0; k < 3; ++k) {
      const double len = (mesh.nodes[t[k]] - mesh.nodes[t[(k + 1) % 3]]).norm();
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
  }
  return {lo, hi};
}

}  // namespace fblab
