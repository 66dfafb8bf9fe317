#include "fblab/minimize.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

std::vector<int> free_nodes(const Mesh& mesh) {
  std::vector<int> free;
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (!mesh.is_dirichlet(n)) free.push_back(n);
  return free;
}

// Smoothed-stage descent with Armijo backtracking; moves only interior nodes.
int descend_smoothed(const FemCache& fem, Field& u, double lambda, double eps, int max_iters,
                     double tol) {
  const Mesh& mesh = *fem.mesh;
  double step = 1.0;
  double J = energy_smoothed(fem, u, lambda, eps);
  int used = 0;
  for (int it = 0; it < max_iters; ++it) {
    Field g = grad_smoothed(fem, u, lambda, eps);
    for (int n = 0; n < mesh.n_nodes(); ++n)
      if (mesh.is_dirichlet(n)) g[n] = 0.0;
    const double gn2 = g.squaredNorm();
    if (g.cwiseAbs().maxCoeff() <= tol) break;
    bool accepted = false;
    for (int bt = 0; bt < 50; ++bt) {
      const Field trial = u - step * g;
      const double Jt = energy_smoothed(fem, trial, lambda, eps);
      if (Jt <= J - 1e-4 * step * gn2) {
        u = trial;
        J = Jt;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++used;
    if (!accepted) break;  // step underflow: smoothed stage is done
  }
  return used;
}

// Exact local objective for one node: restriction of the sharp energy to the
// incident triangles as a function of this node's value. Quadratic in t plus
// a continuous piecewise-rational positive-area term with its only kink at
// t = 0.
struct LocalObjective {
  struct Tri {
    double area;
    double other0, other1;       // the two fixed corner values
    Vec2 grad_rest;              // gradient contribution of the fixed corners
    Vec2 grad_self;              // barycentric gradient of this node
  };
  std::vector<Tri> tris;
  double lambda = 0.0;

  double operator()(double t) const {
    double val = 0.0;
    for (const Tri& tri : tris) {
      const Vec2 g = tri.grad_rest + t * tri.grad_self;
      val += tri.area * g.squaredNorm();
      val += lambda * positive_area_triangle(t, tri.other0, tri.other1, tri.area);
    }
    return val;
  }

  // Vertex of the quadratic part alone.
  double quad_vertex() const {
    double a = 0.0, b = 0.0;
    for (const Tri& tri : tris) {
      a += tri.area * tri.grad_self.squaredNorm();
      b += 2.0 * tri.area * tri.grad_rest.dot(tri.grad_self);
    }
    return a > 0.0 ? -b / (2.0 * a) : 0.0;
  }
};

double golden_minimize(const LocalObjective& f, double lo, double hi) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 60 && (b - a) > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

}  // namespace

Field harmonic_lift(const FemCache& fem, const Field& boundary) {
  const Mesh& mesh = *fem.mesh;
  const Eigen::SparseMatrix<double> K = stiffness_matrix(fem);
  const std::vector<int> free = free_nodes(mesh);
  std::vector<int> pos(mesh.n_nodes(), -1);
  for (std::size_t i = 0; i < free.size(); ++i) pos[free[i]] = static_cast<int>(i);

  // Assemble the interior block and move the boundary columns to the rhs.
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(free.size());
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const int r = static_cast<int>(it.row()), c = col;
      if (pos[r] < 0) continue;
      if (pos[c] >= 0)
        trips.emplace_back(pos[r], pos[c], it.value());
      else
        rhs[pos[r]] -= it.value() * boundary[c];
    }
  }
  Eigen::SparseMatrix<double> Kff(free.size(), free.size());
  Kff.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(Kff);
  if (solver.info() != Eigen::Success)
    throw Error(Err::NotConverged, "interior stiffness factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);

  Field u(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n)
    u[n] = pos[n] >= 0 ? x[pos[n]] : boundary[n];
  return u;
}

SolveResult minimize_energy(const FemCache& fem, const Field& boundary, const SolveOptions& opt,
                            const Field* init) {
  const Mesh& mesh = *fem.mesh;
  if (boundary.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "boundary field has wrong size");

  SolveResult res;
  res.u = init ? *init : harmonic_lift(fem, boundary);
  if (res.u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "initial field has wrong size");
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (mesh.is_dirichlet(n)) res.u[n] = boundary[n];

  // Stage 1: smoothed descent over the ramp schedule.
  std::vector<double> schedule = opt.eps_schedule;
  if (schedule.empty()) {
    const double h = mesh.h_coarse();
    for (int k = 0; k <= 6; ++k) schedule.push_back(h / double(1 << k));
  }
  for (double eps : schedule)
    res.gd_iterations += descend_smoothed(fem, res.u, opt.lambda, eps, opt.gd_iters, opt.gd_tol);

  // Stage 2: exact nodewise relaxation on the sharp functional.
  std::vector<int> order = free_nodes(mesh);
  if (opt.sweep_shuffle_seed != 0) {
    std::mt19937_64 rng(opt.sweep_shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  LocalObjective local;
  local.lambda = opt.lambda;
  for (int sweep = 0; sweep < opt.polish_sweeps; ++sweep) {
    int changes = 0;
    for (int n : order) {
      local.tris.clear();
      for (const auto& [k, i] : fem.node_tris[n]) {
        const TriGeom& g = fem.tri[k];
        LocalObjective::Tri t;
        t.area = g.area;
        t.grad_self = g.grad_bary[i];
        const int j1 = (i + 1) % 3, j2 = (i + 2) % 3;
        t.other0 = res.u[g.v[j1]];
        t.other1 = res.u[g.v[j2]];
        t.grad_rest = t.other0 * g.grad_bary[j1] + t.other1 * g.grad_bary[j2];
        local.tris.push_back(t);
      }
      const double t_cur = res.u[n];
      const double f_cur = local(t_cur);

      // Bracket the candidates: current value, the kink at zero, the
      // quadratic vertex, and a symmetric sample fan on both sides.
      double span = std::max({std::abs(t_cur), std::abs(local.quad_vertex()), 1e-3});
      for (const auto& tri : local.tris)
        span = std::max({span, std::abs(tri.other0), std::abs(tri.other1)});
      std::vector<double> samples = {t_cur, 0.0, local.quad_vertex()};
      for (int s = 1; s <= 8; ++s) {
        samples.push_back(span * s / 4.0);
        samples.push_back(-span * s / 4.0);
      }
      std::sort(samples.begin(), samples.end());
      std::size_t best = 0;
      double f_best = local(samples[0]);
      for (std::size_t s = 1; s < samples.size(); ++s) {
        const double fs = local(samples[s]);
        if (fs < f_best) {
          f_best = fs;
          best = s;
        }
      }
      const double lo = samples[best > 0 ? best - 1 : 0];
      const double hi = samples[std::min(best + 1, samples.size() - 1)];
      double t_new = golden_minimize(local, lo, hi);
      double f_new = local(t_new);
      if (f_best < f_new) {
        t_new = samples[best];
        f_new = f_best;
      }
      if (f_new < f_cur - opt.accept_rel_tol * (1.0 + std::abs(f_cur))) {
        res.u[n] = t_new;
        ++changes;
      }
    }
    res.sweeps_used = sweep + 1;
    if (changes == 0) {
      res.converged = true;
      break;
    }
  }

  res.parts = energy_exact(fem, res.u, opt.lambda);
  res.energy = res.parts.total();
  return res;
}

CombineResult combine_fields(const FemCache& fem, const Field& a, const Field& b, double lambda) {
  if (a.size() != fem.n_nodes() || b.size() != fem.n_nodes())
    throw Error(Err::InvalidArgument, "fields do not match the mesh");

  CombineResult out;
  out.max_field = a.cwiseMax(b);
  out.min_field = a.cwiseMin(b);
  for (int t = 0; t < fem.n_tris(); ++t) {
    const auto& v = fem.tri[t].v;
    bool pos = false, neg = false;
    for (int k = 0; k < 3; ++k) {
      const double d = a[v[k]] - b[v[k]];
      pos = pos || d > 0.0;
      neg = neg || d < 0.0;
    }
    if (pos && neg) out.mixed_tris.push_back(t);
  }
  const double j_max = energy_exact(fem, out.max_field, lambda).total();
  const double j_min = energy_exact(fem, out.min_field, lambda).total();
  const double j_a = energy_exact(fem, a, lambda).total();
  const double j_b = energy_exact(fem, b, lambda).total();
  out.energy_defect = std::abs(j_max + j_min - j_a - j_b);
  return out;
}

namespace {

ExtremalResult extremal_minimizer(const FemCache& fem, const ProblemSpec& spec,
                                  const Field& boundary, const SolveOptions& opt, bool largest) {
  const Mesh& mesh = *fem.mesh;
  const DerivedParams d = derive_params(spec);

  std::vector<Field> inits;
  if (d.regime == Regime::WedgePair || d.regime == Regime::DegenerateTangential) {
    const GlobalSolution sol = make_solution(spec.alpha_plus, spec.alpha_minus, *d.gamma,
                                             largest ? Branch::Large : Branch::Small);
    inits.push_back(interpolate_global(mesh, sol));
  }
  inits.push_back(harmonic_lift(fem, boundary));
  inits.push_back(Field::Zero(mesh.n_nodes()));

  std::vector<SolveResult> runs;
  runs.reserve(inits.size());
  for (const Field& f : inits) runs.push_back(minimize_energy(fem, boundary, opt, &f));

  // Envelope over the converged runs; if none converged, fall back to all.
  bool any_converged = false;
  for (const SolveResult& r : runs) any_converged = any_converged || r.converged;

  Field envelope;
  double e_lo = 0.0, e_hi = 0.0;
  bool first = true;
  for (const SolveResult& r : runs) {
    if (any_converged && !r.converged) continue;
    if (first) {
      envelope = r.u;
      e_lo = e_hi = r.energy;
      first = false;
    } else {
      envelope = largest ? Field(envelope.cwiseMax(r.u)) : Field(envelope.cwiseMin(r.u));
      e_lo = std::min(e_lo, r.energy);
      e_hi = std::max(e_hi, r.energy);
    }
  }

  SolveOptions polish = opt;
  polish.gd_iters = 0;

  ExtremalResult out;
  out.best = minimize_energy(fem, boundary, polish, &envelope);
  out.best.converged = out.best.converged && any_converged;
  out.run_spread = e_hi - e_lo;
  out.multiple_basins = out.run_spread > 1e-7 * (1.0 + std::abs(e_lo));
  return out;
}

}  // namespace

ExtremalResult smallest_minimizer(const FemCache& fem, const ProblemSpec& spec,
                                  const Field& boundary, const SolveOptions& opt) {
  return extremal_minimizer(fem, spec, boundary, opt, false);
}

ExtremalResult largest_minimizer(const FemCache& fem, const ProblemSpec& spec,
                                 const Field& boundary, const SolveOptions& opt) {
  return extremal_minimizer(fem, spec, boundary, opt, true);
}

}  // namespace fblab
