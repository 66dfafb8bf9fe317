#include "fblab/freeboundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

long long edge_key(int i, int j) {
  if (i > j) std::swap(i, j);
  return (static_cast<long long>(i) << 32) | static_cast<unsigned int>(j);
}

struct EdgeInfo {
  int tri[2] = {-1, -1};
  int third[2] = {-1, -1};
  int n = 0;
};

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  const double ab2 = ab.squaredNorm();
  const double ac2 = ac.squaredNorm();
  return a + Vec2(ac.y() * ab2 - ab.y() * ac2, ab.x() * ac2 - ac.x() * ab2) / d;
}

double max_edge_length(const Mesh& mesh, int t) {
  const auto& tri = mesh.tris[t];
  double m = 0.0;
  for (int e = 0; e < 3; ++e)
    m = std::max(m, (mesh.nodes[tri[e]] - mesh.nodes[tri[(e + 1) % 3]]).norm());
  return m;
}

// Sign class of a triangle's vertex values: +1 all positive, -1 all negative,
// 0 all exactly zero, +9 mixed.
int sign_class(const Field& u, const std::array<int, 3>& tri) {
  int n_pos = 0, n_neg = 0, n_zero = 0;
  for (int e = 0; e < 3; ++e) {
    const double v = u[tri[e]];
    if (v > 0.0)
      ++n_pos;
    else if (v < 0.0)
      ++n_neg;
    else
      ++n_zero;
  }
  if (n_pos == 3) return +1;
  if (n_neg == 3) return -1;
  if (n_zero == 3) return 0;
  if (n_pos > 0 && n_neg == 0) return +9;  // touches zero but never negative
  if (n_neg > 0 && n_pos == 0) return -9;
  return 9;
}

Vec2 tri_gradient(const FemCache& fem, const Field& u, int t) {
  const TriGeom& g = fem.tri[t];
  Vec2 grad = Vec2::Zero();
  for (int e = 0; e < 3; ++e) grad += u[g.v[e]] * g.grad_bary[e];
  return grad;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return kNaN;
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double FreeBoundaryCurve::total_length() const {
  double s = 0.0;
  for (double l : component_length) s += l;
  return s;
}

FreeBoundaryCurve extract(const Mesh& mesh, const Field& u) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");

  // Edge adjacency, keyed by sorted endpoints, kept in first-seen order so
  // the extraction is deterministic.
  std::unordered_map<long long, EdgeInfo> edges;
  std::vector<long long> edge_order;
  edges.reserve(static_cast<size_t>(mesh.n_tris()) * 2);
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tri = mesh.tris[t];
    for (int e = 0; e < 3; ++e) {
      const int i = tri[e];
      const int j = tri[(e + 1) % 3];
      const int k = tri[(e + 2) % 3];
      const long long key = edge_key(i, j);
      auto [it, fresh] = edges.try_emplace(key);
      if (fresh) edge_order.push_back(key);
      EdgeInfo& info = it->second;
      if (info.n < 2) {
        info.tri[info.n] = t;
        info.third[info.n] = k;
        ++info.n;
      }
    }
  }

  FreeBoundaryCurve curve;
  std::unordered_map<long long, int> point_id;
  constexpr long long kVertexTag = 1LL << 62;

  auto add_point = [&](const Vec2& x) {
    FbPoint p;
    p.x = x;
    p.r = x.norm();
    p.phi = polar_angle(x);
    p.on_contact = (x.x() == 0.0);
    curve.points.push_back(p);
    return static_cast<int>(curve.points.size()) - 1;
  };
  auto vertex_point = [&](int n) {
    auto [it, fresh] = point_id.try_emplace(kVertexTag | n, -1);
    if (fresh) it->second = add_point(mesh.nodes[n]);
    return it->second;
  };
  // p carries the positive value, q the negative one.
  auto crossing_point = [&](int p, int q) {
    auto [it, fresh] = point_id.try_emplace(edge_key(p, q), -1);
    if (fresh) {
      const double a = u[p];
      const double b = u[q];
      const double t = a / (a - b);
      it->second = add_point(mesh.nodes[p] + t * (mesh.nodes[q] - mesh.nodes[p]));
    }
    return it->second;
  };

  // Sign-change chords: one straight segment of the zero set per triangle
  // carrying both signs.
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tri = mesh.tris[t];
    int n_pos = 0, n_neg = 0;
    for (int e = 0; e < 3; ++e) {
      if (u[tri[e]] > 0.0)
        ++n_pos;
      else if (u[tri[e]] < 0.0)
        ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0) continue;
    int ends[3];
    int n_ends = 0;
    for (int e = 0; e < 3; ++e) {
      const int p = tri[e];
      const int q = tri[(e + 1) % 3];
      if (u[p] > 0.0 && u[q] < 0.0)
        ends[n_ends++] = crossing_point(p, q);
      else if (u[p] < 0.0 && u[q] > 0.0)
        ends[n_ends++] = crossing_point(q, p);
    }
    for (int e = 0; e < 3 && n_ends < 3; ++e)
      if (u[tri[e]] == 0.0) ends[n_ends++] = vertex_point(tri[e]);
    if (n_ends == 2) curve.segments.push_back({ends[0], ends[1], t, false, -1});
  }

  // Plateau edges: u == 0 along the whole edge, positivity right next to it.
  for (const long long key : edge_order) {
    const int i = static_cast<int>(key >> 32);
    const int j = static_cast<int>(key & 0xffffffffLL);
    if (u[i] != 0.0 || u[j] != 0.0) continue;
    const EdgeInfo& info = edges[key];
    int host = -1;
    for (int s = 0; s < info.n; ++s)
      if (u[info.third[s]] > 0.0) {
        host = info.tri[s];
        break;
      }
    if (host < 0) continue;
    curve.segments.push_back({vertex_point(i), vertex_point(j), host, true, -1});
  }

  // Stitch segments into walk-ordered components.
  const int np = static_cast<int>(curve.points.size());
  const int ns = static_cast<int>(curve.segments.size());
  std::vector<std::vector<std::pair<int, int>>> adj(np);  // (segment, other point)
  for (int s = 0; s < ns; ++s) {
    adj[curve.segments[s].a].push_back({s, curve.segments[s].b});
    adj[curve.segments[s].b].push_back({s, curve.segments[s].a});
  }
  for (int p = 0; p < np; ++p)
    if (adj[p].size() > 2) curve.simple = false;

  struct Component {
    std::vector<int> pts;
    std::vector<int> segs;
    double length = 0.0;
  };
  std::vector<Component> comps;
  std::vector<char> seg_done(ns, 0);
  auto walk_from = [&](int start) {
    Component c;
    c.pts.push_back(start);
    int cur = start;
    for (;;) {
      int next_seg = -1, next_pt = -1;
      for (const auto& [s, o] : adj[cur])
        if (!seg_done[s]) {
          next_seg = s;
          next_pt = o;
          break;
        }
      if (next_seg < 0) break;
      seg_done[next_seg] = 1;
      c.segs.push_back(next_seg);
      c.length += (curve.points[cur].x - curve.points[next_pt].x).norm();
      c.pts.push_back(next_pt);
      cur = next_pt;
    }
    if (!c.segs.empty()) comps.push_back(std::move(c));
  };
  for (int p = 0; p < np; ++p)
    if (adj[p].size() == 1 && !seg_done[adj[p][0].first]) walk_from(p);
  for (int p = 0; p < np; ++p)
    for (const auto& [s, o] : adj[p])
      if (!seg_done[s]) walk_from(p);

  std::stable_sort(comps.begin(), comps.end(),
                   [](const Component& a, const Component& b) { return a.length > b.length; });
  for (int ci = 0; ci < static_cast<int>(comps.size()); ++ci) {
    for (int s : comps[ci].segs) curve.segments[s].component = ci;
    curve.component_points.push_back(std::move(comps[ci].pts));
    curve.component_length.push_back(comps[ci].length);
  }
  return curve;
}

NtReport nt_check(const Mesh& mesh, const Field& u, const FreeBoundaryCurve& curve,
                  double delta, NtMode mode, double weak_c, int levels) {
  if (!(delta > 0.0)) throw Error(Err::InvalidArgument, "cone parameter delta must be positive");
  if (mode == NtMode::Weak && !(weak_c > 0.0))
    throw Error(Err::InvalidArgument, "weak cone test needs a positive value bound");
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const int J = levels > 0 ? levels : mesh.params.rings;

  std::vector<Vec2> samples;
  if (mode == NtMode::Strong) {
    samples.reserve(curve.points.size() + curve.segments.size());
    for (const FbPoint& p : curve.points) samples.push_back(p.x);
    for (const FbSegment& s : curve.segments)
      samples.push_back(0.5 * (curve.points[s.a].x + curve.points[s.b].x));
  }

  NtReport rep;
  rep.delta = delta;
  rep.mode = mode;
  rep.weak_c = weak_c;
  rep.overall = true;
  for (int j = 1; j <= J; ++j) {
    NtAnnulus an;
    an.j = j;
    an.rho = std::ldexp(1.0, -j);
    if (mode == NtMode::Strong) {
      for (const Vec2& p : samples) {
        const double r = p.norm();
        if (r < an.rho || r >= 2.0 * an.rho) continue;
        an.has_fb = true;
        if (in_nt_cone(p, 0.0, delta)) {
          an.ok = true;
          break;
        }
      }
    } else {
      for (int n = 0; n < mesh.n_nodes(); ++n) {
        const double r = mesh.nodes[n].norm();
        if (r < an.rho || r >= 2.0 * an.rho) continue;
        if (!in_nt_cone(mesh.nodes[n], 0.0, delta)) continue;
        an.has_fb = true;
        if (std::abs(u[n]) <= weak_c * an.rho) {
          an.ok = true;
          break;
        }
      }
    }
    rep.overall = rep.overall && an.ok;
    rep.annuli.push_back(an);
  }
  return rep;
}

AngleProfile angle_profile(const FreeBoundaryCurve& curve, const DerivedParams& params,
                           const std::vector<double>& radii) {
  if (!params.theta)
    throw Error(Err::InvalidArgument, "touch-angle profile needs a kink angle (wedge regime)");
  if (curve.empty()) throw Error(Err::InvalidArgument, "touch-angle profile of an empty curve");
  if (radii.empty()) throw Error(Err::InvalidArgument, "no radii requested");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1]))
      throw Error(Err::InvalidArgument, "radii must be strictly decreasing");

  // Decide the side from the quarter of the points nearest the origin.
  std::vector<const FbPoint*> usable;
  usable.reserve(curve.points.size());
  for (const FbPoint& p : curve.points)
    if (p.r > 1e-14) usable.push_back(&p);
  AngleProfile prof;
  double w = 0.0;
  if (!usable.empty()) {
    std::sort(usable.begin(), usable.end(),
              [](const FbPoint* a, const FbPoint* b) { return a->r < b->r; });
    const size_t n = usable.size();
    const size_t k = std::max(std::min<size_t>(3, n), n / 4);
    for (size_t i = 0; i < k; ++i) w += usable[i]->x.y() / usable[i]->r;
    w /= static_cast<double>(k);
  }
  prof.side = std::abs(w) < 0.05 ? FbSide::Mixed : (w > 0.0 ? FbSide::SmallSide : FbSide::LargeSide);
  const double theta = *params.theta;
  prof.theta_ref = w >= 0.0 ? theta : M_PI - theta;

  for (const double r : radii) {
    AngleWindow win;
    win.r = r;
    double lo = kNaN, hi = kNaN, sum = 0.0, dev = 0.0;
    for (const FbPoint& p : curve.points) {
      if (p.r < r || p.r > 2.0 * r) continue;
      if (win.count == 0) {
        lo = hi = p.phi;
      } else {
        lo = std::min(lo, p.phi);
        hi = std::max(hi, p.phi);
      }
      sum += p.phi;
      dev = std::max(dev, std::abs(p.phi - prof.theta_ref));
      ++win.count;
    }
    win.phi_min = lo;
    win.phi_max = hi;
    win.phi_mean = win.count > 0 ? sum / win.count : kNaN;
    win.sigma = win.count > 0 ? dev : kNaN;
    prof.windows.push_back(win);
  }
  return prof;
}

GrowthReport growth_report(const Mesh& mesh, const Field& u, int levels) {
  if (levels < 1) throw Error(Err::InvalidArgument, "growth report needs at least one level");
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");

  GrowthReport rep;
  rep.S.resize(levels + 1, 0.0);
  for (int j = 0; j <= levels; ++j) {
    const double r = std::ldexp(1.0, -j);
    int lev = -1;
    for (int l = 0; l < mesh.n_levels(); ++l)
      if (std::abs(mesh.level_radius[l] - r) <= 1e-12) {
        lev = l;
        break;
      }
    if (lev < 0)
      throw Error(Err::MeshError,
                  "dyadic radius is not a mesh level radius (use q = 0.5 grading)");
    double s = 0.0;
    for (int n = mesh.level_node_offset[lev]; n < mesh.n_nodes(); ++n)
      s = std::max(s, std::abs(u[n]));
    rep.S[j] = s;
  }

  double num = 0.0, den = 0.0;
  for (int j = 0; j <= levels; ++j) {
    const double w = std::ldexp(1.0, -j);
    num += rep.S[j] * w;
    den += w * w;
  }
  rep.c_fit = den > 0.0 ? num / den : 0.0;

  rep.recursion_ok = true;
  const double slack = 1e-12 * (1.0 + rep.S[0]);
  for (int j = 0; j < levels; ++j) {
    const double bound = std::max(rep.c_fit * std::ldexp(1.0, -(j + 1)), 0.5 * rep.S[j]);
    if (rep.S[j + 1] > bound + slack) rep.recursion_ok = false;
  }
  return rep;
}

double sup_ball_ratio(const Mesh& mesh, const Field& u, const Vec2& center, double r) {
  if (!(r > 0.0)) throw Error(Err::InvalidArgument, "ball radius must be positive");
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  const double r2 = r * r;
  double best = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if ((mesh.nodes[n] - center).squaredNorm() > r2) continue;
    best = std::max(best, u[n]);
    found = true;
  }
  return found ? best / r : kNaN;
}

NondegeneracyReport nondegeneracy_report(const Mesh& mesh, const Field& u,
                                         const FreeBoundaryCurve& curve,
                                         const std::vector<double>& radii) {
  NondegeneracyReport rep;
  rep.radii = radii;
  rep.min_ratio.assign(radii.size(), kNaN);
  bool any = false;
  double overall = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < radii.size(); ++i) {
    double m = std::numeric_limits<double>::infinity();
    bool got = false;
    for (const FbPoint& p : curve.points) {
      const double q = sup_ball_ratio(mesh, u, p.x, radii[i]);
      if (std::isnan(q)) continue;
      m = std::min(m, q);
      got = true;
    }
    if (got) {
      rep.min_ratio[i] = m;
      overall = std::min(overall, m);
      any = true;
    }
  }
  rep.c_emp = any ? overall : 0.0;
  rep.degenerate = !any || !(rep.c_emp > 0.0);
  return rep;
}

JumpReport jump_report(const Mesh& mesh, const FemCache& fem, const Field& u,
                       const FreeBoundaryCurve& curve, double lambda) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");

  const int nt = mesh.n_tris();
  std::vector<Vec2> cc(nt);
  std::vector<int> cls(nt);
  std::vector<Vec2> grad(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.tris[t];
    cc[t] = circumcenter(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    cls[t] = sign_class(u, tri);
    grad[t] = tri_gradient(fem, u, t);
  }

  JumpReport rep;
  std::vector<double> defects;
  // Margin from the diameter in units of the coarse angular spacing; the
  // gradient sampling band below scales with the local triangle size instead.
  const double h_margin = M_PI / mesh.params.angular_n;
  for (int s = 0; s < static_cast<int>(curve.segments.size()); ++s) {
    const FbSegment& seg = curve.segments[s];
    const Vec2 A = curve.points[seg.a].x;
    const Vec2 B = curve.points[seg.b].x;
    const double h = max_edge_length(mesh, seg.tri);
    if (std::min(A.x(), B.x()) <= 5.0 * h_margin) continue;  // too close to the diameter
    ++rep.n_interior;

    Vec2 gp = Vec2::Zero(), gn = Vec2::Zero();
    double wp = 0.0, wn = 0.0;
    for (int t = 0; t < nt; ++t) {
      if (cls[t] != +1 && cls[t] != -1 && cls[t] != 0) continue;
      const double d = point_segment_distance(cc[t], A, B);
      if (d < h || d > 3.0 * h) continue;
      const double area = fem.tri[t].area;
      if (cls[t] == +1) {
        gp += area * grad[t];
        wp += area;
      } else {
        gn += area * grad[t];
        wn += area;
      }
    }
    if (wp == 0.0 || wn == 0.0) {
      ++rep.n_skipped;
      continue;
    }
    gp /= wp;
    gn /= wn;
    JumpSample sample;
    sample.segment = s;
    sample.mid = 0.5 * (A + B);
    sample.grad_pos_sq = gp.squaredNorm();
    sample.grad_neg_sq = gn.squaredNorm();
    sample.defect = std::abs(sample.grad_pos_sq - sample.grad_neg_sq - lambda);
    defects.push_back(sample.defect);
    rep.samples.push_back(sample);
  }

  if (rep.samples.empty())
    throw Error(Err::InvalidArgument,
                "free boundary curve has no interior segment with one-sided data");
  rep.median_defect = median_of(defects);
  rep.mean_defect = 0.0;
  rep.max_defect = 0.0;
  for (double d : defects) {
    rep.mean_defect += d;
    rep.max_defect = std::max(rep.max_defect, d);
  }
  rep.mean_defect /= static_cast<double>(defects.size());
  return rep;
}

GradBoundReport gradbound_report(const Mesh& mesh, const FemCache& fem, const Field& u,
                                 const FreeBoundaryCurve& curve) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");

  GradBoundReport rep;
  for (int t = 0; t < mesh.n_tris(); ++t) {
    const auto& tri = mesh.tris[t];
    if (!(u[tri[0]] > 0.0 && u[tri[1]] > 0.0 && u[tri[2]] > 0.0)) continue;
    const double h = max_edge_length(mesh, t);
    const Vec2 c = circumcenter(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    if (c.x() < 3.0 * h) continue;
    bool near_fb = false;
    for (const FbSegment& seg : curve.segments) {
      if (point_segment_distance(c, curve.points[seg.a].x, curve.points[seg.b].x) < 3.0 * h) {
        near_fb = true;
        break;
      }
    }
    if (near_fb) continue;
    const double g2 = tri_gradient(fem, u, t).squaredNorm();
    ++rep.n_used;
    if (g2 > rep.max_grad_sq) {
      rep.max_grad_sq = g2;
      rep.location = c;
      rep.tri = t;
    }
  }
  return rep;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double dd = d.squaredNorm();
  double t = dd > 0.0 ? (p - a).dot(d) / dd : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * d)).norm();
}

Polyline as_segments(const FreeBoundaryCurve& curve) {
  Polyline out;
  out.reserve(curve.segments.size());
  for (const FbSegment& s : curve.segments)
    out.push_back({curve.points[s.a].x, curve.points[s.b].x});
  return out;
}

Polyline ray_segment(const Vec2& dir, double len) {
  const double n = dir.norm();
  if (!(n > 0.0) || !(len > 0.0))
    throw Error(Err::InvalidArgument, "ray needs a nonzero direction and positive length");
  return {{Vec2::Zero(), dir * (len / n)}};
}

namespace {

double one_sided_hausdorff(const Polyline& a, const Polyline& b, int k) {
  double worst = 0.0;
  for (const auto& [p0, p1] : a) {
    for (int i = 0; i < k; ++i) {
      const double t = k > 1 ? static_cast<double>(i) / (k - 1) : 0.0;
      const Vec2 p = p0 + t * (p1 - p0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [q0, q1] : b) best = std::min(best, point_segment_distance(p, q0, q1));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace

double hausdorff_polylines(const Polyline& a, const Polyline& b, int samples_per_segment) {
  if (a.empty() || b.empty())
    throw Error(Err::InvalidArgument, "Hausdorff distance of an empty polyline");
  const int k = std::max(2, samples_per_segment);
  return std::max(one_sided_hausdorff(a, b, k), one_sided_hausdorff(b, a, k));
}

}  // namespace fblab
