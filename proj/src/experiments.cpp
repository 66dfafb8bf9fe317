#include "fblab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "fblab/errors.hpp"
#include "fblab/io.hpp"
#include "fblab/minimize.hpp"

namespace fblab {

const char* verdict_label(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

constexpr const char* kLibraryVersion = "1.0.0";

// One solve context. The cache points into `mesh`, so a Lab must stay put.
struct Lab {
  Mesh mesh;
  FemCache fem;
  DerivedParams d;
  SolveOptions opt;

  Lab(const Scenario& sc, const MeshParams& mp)
      : mesh(build_mesh(mp)), fem(build_fem_cache(mesh)), d(derive_params(sc.spec)),
        opt(sc.solve) {
    opt.lambda = d.Lambda;
  }
  Lab(const Lab&) = delete;
  Lab& operator=(const Lab&) = delete;
};

// Dirichlet data for the configured datum choice: the selected wedge trace,
// with the radial perturbation g added on both boundary portions when it is
// switched on, or identically zero data.
Field scenario_datum(const Mesh& mesh, const ProblemSpec& spec, DatumChoice choice) {
  if (choice == DatumChoice::Zero) return Field::Zero(mesh.n_nodes());
  const Branch b = choice == DatumChoice::Small ? Branch::Small : Branch::Large;
  if (spec.g_coeff == 0.0)
    return boundary_trace(
        mesh, spec, b == Branch::Small ? OuterDatum::SmallTrace : OuterDatum::LargeTrace);
  const GlobalSolution sol = global_solution(spec, b);
  return boundary_trace(mesh, spec, [&](const Vec2& x) {
    return eval_global(sol, x) + g_value(spec, x.norm());
  });
}

void add_check(RunResult& res, const std::string& name, double value, double tolerance,
               bool ok) {
  res.checks.push_back({name, value, tolerance, ok});
}

// Builds the deterministic report and the final verdict. `undecided` marks a
// blow-up classification that refused to pick a side.
void finish(RunResult& res, const Scenario& sc, nlohmann::json stats, bool undecided) {
  bool all_ok = true;
  for (const CheckLine& c : res.checks) all_ok = all_ok && c.ok;
  res.verdict = (res.not_converged || undecided) ? Verdict::Inconclusive
                : all_ok                         ? Verdict::Pass
                                                 : Verdict::Fail;
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckLine& c : res.checks)
    checks.push_back(
        {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"ok", c.ok}});
  res.report["schema_version"] = 1;
  res.report["config"] = scenario_to_json(sc);
  res.report["verdict"] = verdict_label(res.verdict);
  res.report["not_converged"] = res.not_converged;
  res.report["undecided"] = undecided;
  res.report["checks"] = checks;
  res.report["stats"] = std::move(stats);
}

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Smallest positive radius where the curve meets {x2 = 0, x1 > 0}; false when
// it never does.
bool axis_crossing(const FreeBoundaryCurve& curve, double* r_cross) {
  double best = std::numeric_limits<double>::infinity();
  for (const FbSegment& s : curve.segments) {
    const Vec2& a = curve.points[s.a].x;
    const Vec2& b = curve.points[s.b].x;
    double x = -1.0;
    if (a[1] == 0.0 && b[1] == 0.0) x = std::min(a[0], b[0]);
    else if (a[1] == 0.0) x = a[0];
    else if (b[1] == 0.0) x = b[0];
    else if ((a[1] > 0.0) != (b[1] > 0.0)) {
      const double t = a[1] / (a[1] - b[1]);
      x = a[0] + t * (b[0] - a[0]);
    }
    if (x > 1e-12) best = std::min(best, x);
  }
  if (!std::isfinite(best)) return false;
  *r_cross = best;
  return true;
}

}  // namespace

RunResult run_growth_a(const Scenario& sc) {
  RunResult res;
  Lab lab(sc, sc.mesh);
  const Field data = scenario_datum(lab.mesh, sc.spec, sc.datum);
  const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
  if (!sol.converged) res.not_converged = true;

  const int levels = std::min(sc.levels, sc.mesh.rings - 1);
  const GrowthReport growth = growth_report(lab.mesh, sol.u, levels);
  add_check(res, "growth_recursion_ok", growth.recursion_ok ? 1.0 : 0.0, 0.0,
            growth.recursion_ok);

  const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
  nlohmann::json stats;
  if (curve.empty()) {
    // No free boundary, hence no contact point: the cone condition is
    // vacuous and the growth recursion alone decides.
    add_check(res, "nt_vacuous_no_free_boundary", 1.0, 0.0, true);
    stats["nt_ran"] = false;
  } else {
    const NtReport nt = nt_check(lab.mesh, sol.u, curve, sc.delta,
                                 sc.nt_weak ? NtMode::Weak : NtMode::Strong, sc.weak_c,
                                 levels);
    add_check(res, "nt_cone", nt.overall ? 1.0 : 0.0, sc.delta, nt.overall);
    stats["nt_ran"] = true;
    nlohmann::json annuli = nlohmann::json::array();
    for (const NtAnnulus& a : nt.annuli)
      annuli.push_back({{"j", a.j}, {"rho", a.rho}, {"has_fb", a.has_fb}, {"ok", a.ok}});
    stats["nt_annuli"] = annuli;
  }
  stats["c_fit"] = growth.c_fit;
  stats["S"] = growth.S;
  stats["energy"] = sol.energy;
  stats["sweeps_used"] = sol.sweeps_used;

  res.mesh = lab.mesh;
  res.field = sol.u;
  res.curve = curve;
  res.growth = growth;
  finish(res, sc, std::move(stats), false);
  return res;
}

RunResult run_classify_c(const Scenario& sc) {
  RunResult res;
  Lab lab(sc, sc.mesh);
  nlohmann::json stats;

  if (lab.d.regime == Regime::TangentialData)
    throw Error(Err::InvalidArgument,
                "classification needs a kink angle; tangential data has none");

  if (lab.d.regime == Regime::NoFreeBoundary) {
    // No wedge exists. Solve with the flat datum extended across the arc as
    // a function of x2 alone and require extraction to return nothing.
    const Field data = boundary_trace(
        lab.mesh, sc.spec, [&](const Vec2& x) { return flat_datum(sc.spec, x[1]); });
    const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
    if (!sol.converged) res.not_converged = true;
    const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
    add_check(res, "no_free_boundary_extraction_empty", curve.empty() ? 1.0 : 0.0, 0.0,
              curve.empty());
    stats["regime"] = "no_free_boundary";
    stats["energy"] = sol.energy;
    res.mesh = lab.mesh;
    res.field = sol.u;
    res.curve = curve;
    finish(res, sc, std::move(stats), false);
    return res;
  }

  const int n_scales = std::min(sc.n_scales, sc.mesh.rings - 1);
  if (n_scales < 3)
    throw Error(Err::InvalidArgument,
                "classification needs at least three blow-up scales; increase rings or "
                "n_scales");

  bool undecided = false;
  for (const Branch b : {Branch::Small, Branch::Large}) {
    const bool small = b == Branch::Small;
    const std::string tag = small ? "small" : "large";
    const Field data =
        scenario_datum(lab.mesh, sc.spec, small ? DatumChoice::Small : DatumChoice::Large);
    const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
    if (!sol.converged) {
      res.not_converged = true;
      continue;
    }

    const BlowupSequence seq =
        blowup_sequence(lab.mesh, sol.u, sc.spec, n_scales, sc.tol_class);
    const BlowupVerdict expect = small ? BlowupVerdict::Small : BlowupVerdict::Large;
    if (seq.verdict == BlowupVerdict::Undecided) undecided = true;
    add_check(res, tag + "_blowup_matches_trace", seq.verdict == expect ? 1.0 : 0.0,
              seq.tol_class, seq.verdict == expect);

    const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
    const JumpReport jump = jump_report(lab.mesh, lab.fem, sol.u, curve, lab.d.Lambda);
    add_check(res, tag + "_jump_median_defect", jump.median_defect, sc.tol_jump,
              jump.median_defect <= sc.tol_jump);

    if (sc.spec.alpha_minus == 0.0) {
      const GradBoundReport gb = gradbound_report(lab.mesh, lab.fem, sol.u, curve);
      const double bound = lab.d.Lambda * (1.0 + sc.tol_grad);
      add_check(res, tag + "_gradient_bound", gb.max_grad_sq, bound,
                gb.max_grad_sq <= bound);
    }

    stats[tag] = {{"energy", sol.energy},
                  {"residuals_S", seq.residuals_S},
                  {"residuals_L", seq.residuals_L},
                  {"blowup_verdict", verdict_name(seq.verdict)},
                  {"jump_median_defect", jump.median_defect},
                  {"jump_samples", jump.samples.size()}};

    if (small) {
      res.blowup = seq;
      res.mesh = lab.mesh;
      res.field = sol.u;
      res.curve = curve;
    }
  }

  finish(res, sc, std::move(stats), undecided);
  return res;
}

RunResult run_angle_d(const Scenario& sc) {
  if (sc.datum == DatumChoice::Zero)
    throw Error(Err::InvalidArgument, "the touch-angle scenario needs a wedge datum");
  RunResult res;
  Lab lab(sc, sc.mesh);
  const Field data = scenario_datum(lab.mesh, sc.spec, sc.datum);
  const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
  if (!sol.converged) res.not_converged = true;

  const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
  nlohmann::json stats;
  res.mesh = lab.mesh;
  res.field = sol.u;
  res.curve = curve;
  if (curve.empty()) {
    add_check(res, "fb_present", 0.0, 0.0, false);
    finish(res, sc, std::move(stats), false);
    return res;
  }

  const AngleProfile prof = angle_profile(curve, lab.d, sc.radii);
  const FbSide expect = sc.datum == DatumChoice::Small ? FbSide::SmallSide : FbSide::LargeSide;
  add_check(res, "side_matches_datum", prof.side == expect ? 1.0 : 0.0, 0.0,
            prof.side == expect);

  int min_count = std::numeric_limits<int>::max();
  for (const AngleWindow& w : prof.windows) min_count = std::min(min_count, w.count);
  const bool occupied = min_count > 0;
  add_check(res, "every_window_has_points", static_cast<double>(min_count), 1.0, occupied);

  if (occupied) {
    double worst_rise = 0.0;
    for (size_t j = 0; j + 1 < prof.windows.size(); ++j)
      worst_rise = std::max(worst_rise,
                            prof.windows[j + 1].sigma - prof.windows[j].sigma);
    add_check(res, "sigma_not_increasing_toward_origin", worst_rise, sc.sigma_slack,
              worst_rise <= sc.sigma_slack);
    const double cone = 1.05 * prof.windows.front().sigma;
    add_check(res, "finest_annulus_inside_coarse_cone", prof.windows.back().sigma, cone,
              prof.windows.back().sigma <= cone);
  } else {
    add_check(res, "sigma_not_increasing_toward_origin", -1.0, sc.sigma_slack, false);
    add_check(res, "finest_annulus_inside_coarse_cone", -1.0, 0.0, false);
  }

  stats["theta_ref"] = prof.theta_ref;
  nlohmann::json windows = nlohmann::json::array();
  for (const AngleWindow& w : prof.windows) {
    nlohmann::json jw = {{"r", w.r}, {"count", w.count}};
    if (w.count > 0) {
      jw["phi_mean"] = w.phi_mean;
      jw["sigma"] = w.sigma;
    }
    windows.push_back(jw);
  }
  stats["windows"] = windows;
  stats["energy"] = sol.energy;

  res.angle = prof;
  finish(res, sc, std::move(stats), false);
  return res;
}

RunResult run_instability_e(const Scenario& sc) {
  if (sc.spec.alpha_minus != 0.0)
    throw Error(Err::InvalidArgument, "the slope-deficit construction needs one-phase data");
  if (sc.spec.g_coeff != 0.0)
    throw Error(Err::InvalidArgument,
                "the slope-deficit datum carries no radial perturbation");
  if (sc.eps_list.empty())
    throw Error(Err::InvalidArgument, "the slope-deficit scenario needs an eps list");
  for (size_t i = 0; i < sc.eps_list.size(); ++i) {
    const double e = sc.eps_list[i];
    if (!(e > 0.0) || !(e < sc.spec.alpha_plus))
      throw Error(Err::InvalidArgument, "every eps must lie in (0, alpha_plus)");
    if (i > 0 && e >= sc.eps_list[i - 1])
      throw Error(Err::InvalidArgument, "the eps list must be strictly decreasing");
  }

  RunResult res;
  Lab lab(sc, sc.mesh);
  if (!lab.d.gamma)
    throw Error(Err::InvalidArgument,
                "the unperturbed data must admit the wedge pair (kink angle needed)");
  const double gamma0 = *lab.d.gamma;
  nlohmann::json stats;
  nlohmann::json table = nlohmann::json::array();

  double prev_r = std::numeric_limits<double>::infinity();
  for (const double eps : sc.eps_list) {
    ProblemSpec spec_eps = sc.spec;
    spec_eps.alpha_plus = sc.spec.alpha_plus - eps;

    Field data;
    if (sc.arc_variant == ArcVariant::Printed) {
      // Literal arc datum (alpha_plus - eps) * max(-gamma0 x1 + x2, 0) with
      // the unperturbed kink slope gamma0.
      const GlobalSolution ray =
          make_solution(spec_eps.alpha_plus, 0.0, gamma0, Branch::Small);
      data = boundary_trace(lab.mesh, spec_eps,
                            [&](const Vec2& x) { return eval_global(ray, x); });
    } else {
      data = boundary_trace(lab.mesh, spec_eps, OuterDatum::LargeTrace);
    }

    const ExtremalResult ext = smallest_minimizer(lab.fem, spec_eps, data, lab.opt);
    const std::string tag = "eps_" + fmt_g(eps);
    if (!ext.best.converged) {
      res.not_converged = true;
      table.push_back({{"eps", eps}, {"converged", false}});
      continue;
    }

    const FreeBoundaryCurve curve = extract(lab.mesh, ext.best.u);
    double r_cross = 0.0;
    const bool crossed = axis_crossing(curve, &r_cross);
    add_check(res, tag + "_axis_crossing_exists", crossed ? 1.0 : 0.0, 0.0, crossed);

    int large_side_near_origin = 0;
    for (const FbPoint& p : curve.points)
      if (p.r < sc.detach_radius && p.phi > M_PI / 2.0 + 1e-9) ++large_side_near_origin;
    add_check(res, tag + "_detached_from_origin",
              static_cast<double>(large_side_near_origin), 0.0,
              large_side_near_origin == 0);

    if (crossed) {
      add_check(res, tag + "_r_eps_non_increasing", r_cross, prev_r, r_cross <= prev_r);
      prev_r = r_cross;
    }

    res.eps_table.push_back({eps, crossed ? r_cross : 0.0, crossed ? 1.0 : 0.0});
    table.push_back({{"eps", eps},
                     {"converged", true},
                     {"crossed", crossed},
                     {"r_eps", crossed ? r_cross : 0.0},
                     {"multiple_basins", ext.multiple_basins},
                     {"energy", ext.best.energy}});

    res.mesh = lab.mesh;  // keep the finest-deficit run for plots
    res.field = ext.best.u;
    res.curve = curve;
  }

  if (sc.include_control) {
    const Field data = scenario_datum(lab.mesh, sc.spec, DatumChoice::Small);
    const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
    if (!sol.converged) {
      res.not_converged = true;
    } else {
      const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
      double r_cross = 0.0;
      const bool crossed = axis_crossing(curve, &r_cross);
      add_check(res, "control_no_axis_crossing", crossed ? 1.0 : 0.0, 0.0, !crossed);
      double min_r = std::numeric_limits<double>::infinity();
      for (const FbPoint& p : curve.points) min_r = std::min(min_r, p.r);
      add_check(res, "control_fb_reaches_origin", min_r, sc.detach_radius,
                min_r <= sc.detach_radius);
      const Polyline ray = ray_segment(Vec2(1.0, gamma0), 1.0);
      const double dist = curve.empty()
                              ? std::numeric_limits<double>::infinity()
                              : fb_hausdorff(as_segments(curve), ray, 0.0, 1.0);
      const double tol = 5.0 * lab.mesh.h_coarse();
      add_check(res, "control_fb_on_small_ray", dist, tol, dist <= tol);
      stats["control"] = {{"min_r", min_r}, {"ray_distance", dist}};
    }
  }

  stats["gamma_unperturbed"] = gamma0;
  stats["runs"] = table;
  finish(res, sc, std::move(stats), false);
  return res;
}

RunResult run_weiss_gap(const Scenario& sc) {
  RunResult res;
  Lab lab(sc, sc.mesh);
  if (!lab.d.gamma)
    throw Error(Err::InvalidArgument,
                "the density gap needs a kink angle (wedge or degenerate-tangential data)");
  const double gamma = *lab.d.gamma;
  const bool degenerate = gamma == 0.0;
  const double slope_gap = lab.d.slope_gap;
  const double oracle = gamma * slope_gap;
  const auto flux = [](const WeissParts& p) { return p.dirichlet - p.sphere; };

  const GlobalSolution vs = global_solution(sc.spec, Branch::Small);
  const GlobalSolution vl = global_solution(sc.spec, Branch::Large);
  const Field is = interpolate_global(lab.mesh, vs);
  const Field il = interpolate_global(lab.mesh, vl);
  const WeissParts ps = weiss_energy_parts(lab.fem, is, sc.spec, 1.0);
  const WeissParts pl = weiss_energy_parts(lab.fem, il, sc.spec, 1.0);
  const double gap_forms = flux(ps) - flux(pl);

  if (degenerate) {
    add_check(res, "degenerate_gap_vanishes", std::abs(gap_forms), 1e-3,
              std::abs(gap_forms) <= 1e-3);
  } else if (sc.spec.alpha_minus == 0.0) {
    const double tol = 1e-3 * oracle;
    add_check(res, "closed_form_gap_matches_oracle", std::abs(gap_forms - oracle), tol,
              std::abs(gap_forms - oracle) <= tol);
  } else {
    add_check(res, "closed_form_gap_positive", gap_forms, 0.0, gap_forms > 0.0);
  }

  nlohmann::json stats;
  stats["degenerate_tangential"] = degenerate;
  stats["gamma"] = gamma;
  stats["oracle_gap"] = oracle;
  stats["closed_form"] = {{"flux_small", flux(ps)},
                          {"flux_large", flux(pl)},
                          {"total_small", ps.total()},
                          {"total_large", pl.total()},
                          {"gap", gap_forms}};

  // The computed minimizers must order the same way, with margin.
  const Field ds = scenario_datum(lab.mesh, sc.spec, DatumChoice::Small);
  const Field dl = scenario_datum(lab.mesh, sc.spec, DatumChoice::Large);
  const SolveResult ss = minimize_energy(lab.fem, ds, lab.opt);
  const SolveResult sl = minimize_energy(lab.fem, dl, lab.opt);
  if (!ss.converged || !sl.converged) res.not_converged = true;

  const WeissParts qs = weiss_energy_parts(lab.fem, ss.u, sc.spec, 1.0);
  const WeissParts ql = weiss_energy_parts(lab.fem, sl.u, sc.spec, 1.0);
  const double margin = flux(qs) - flux(ql);
  if (!degenerate) {
    const double tol_w = weiss_tolerance(lab.mesh, 1.0);
    add_check(res, "minimizer_ordering_margin", margin, tol_w, margin > tol_w);
  }
  stats["minimizers"] = {{"flux_small", flux(qs)},
                         {"flux_large", flux(ql)},
                         {"margin", margin},
                         {"energy_small", ss.energy},
                         {"energy_large", sl.energy}};

  res.profile = weiss_profile(lab.fem, ss.u, sc.spec, Vec2::Zero(), sc.radii);
  res.mesh = lab.mesh;
  res.field = ss.u;
  res.curve = extract(lab.mesh, ss.u);
  finish(res, sc, std::move(stats), false);
  return res;
}

RunResult run_consistency(const Scenario& sc) {
  RunResult res;
  MeshParams fine_params = sc.mesh;
  fine_params.angular_n *= 2;
  Lab coarse(sc, sc.mesh);
  Lab fine(sc, fine_params);
  if (!coarse.d.gamma)
    throw Error(Err::InvalidArgument, "the consistency scenario needs the wedge pair");
  const double gamma = *coarse.d.gamma;
  const double h = coarse.mesh.h_coarse();
  nlohmann::json stats;
  stats["h"] = h;

  for (const Branch b : {Branch::Small, Branch::Large}) {
    const bool small = b == Branch::Small;
    const std::string tag = small ? "small" : "large";
    const GlobalSolution wedge = global_solution(sc.spec, b);
    const Vec2 ray_dir(1.0, small ? gamma : -gamma);

    double err[2] = {0.0, 0.0};
    double fb[2] = {-1.0, -1.0};
    bool fb_ok = true;
    for (const int k : {0, 1}) {
      Lab& lab = k == 0 ? coarse : fine;
      const Field data =
          scenario_datum(lab.mesh, sc.spec, small ? DatumChoice::Small : DatumChoice::Large);
      const SolveResult sol = minimize_energy(lab.fem, data, lab.opt);
      if (!sol.converged) res.not_converged = true;
      err[k] = (sol.u - interpolate_global(lab.mesh, wedge)).cwiseAbs().maxCoeff();
      const FreeBoundaryCurve curve = extract(lab.mesh, sol.u);
      if (curve.empty()) {
        fb_ok = false;
      } else {
        fb[k] = fb_hausdorff(as_segments(curve), ray_segment(ray_dir, 1.0), 0.0, 1.0);
      }
      if (k == 0 && small) {
        res.mesh = lab.mesh;
        res.field = sol.u;
        res.curve = curve;
      }
    }

    add_check(res, tag + "_max_error_h", err[0], 5.0 * h, err[0] <= 5.0 * h);
    add_check(res, tag + "_max_error_h2", err[1], 2.5 * h, err[1] <= 2.5 * h);
    add_check(res, tag + "_fb_present", fb_ok ? 1.0 : 0.0, 0.0, fb_ok);
    if (fb_ok) {
      add_check(res, tag + "_fb_ray_distance_h", fb[0], 5.0 * h, fb[0] <= 5.0 * h);
      add_check(res, tag + "_fb_ray_distance_h2", fb[1], 2.5 * h, fb[1] <= 2.5 * h);
    }
    const double ratio = err[1] > 0.0 ? err[0] / err[1] : std::numeric_limits<double>::infinity();
    add_check(res, tag + "_error_ratio_first_order", ratio, 3.0,
              ratio >= 1.5 && ratio <= 3.0);
    stats[tag] = {{"err_h", err[0]}, {"err_h2", err[1]},
                  {"fb_h", fb[0]}, {"fb_h2", fb[1]}, {"ratio", ratio}};
  }

  finish(res, sc, std::move(stats), false);
  return res;
}

RunResult run_scenario(const Scenario& sc) {
  switch (sc.kind) {
    case ScenarioKind::GrowthA: return run_growth_a(sc);
    case ScenarioKind::ClassifyC: return run_classify_c(sc);
    case ScenarioKind::AngleD: return run_angle_d(sc);
    case ScenarioKind::InstabilityE: return run_instability_e(sc);
    case ScenarioKind::WeissGap: return run_weiss_gap(sc);
    case ScenarioKind::Consistency: return run_consistency(sc);
  }
  throw Error(Err::InvalidArgument, "unknown scenario kind");
}

std::vector<std::string> write_run_outputs(const RunResult& result, const Scenario& sc,
                                           const std::string& dir, bool force,
                                           double wall_ms) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Err::IoError, "cannot create output directory '" + dir + "'");
  std::vector<std::string> written;
  const auto file = [&](const char* name) { return (fs::path(dir) / name).string(); };
  const auto note = [&](const std::string& p) { written.push_back(p); };

  {
    const std::string p = file("report.json");
    write_json_file(p, result.report, force);
    note(p);
  }
  if (result.mesh) {
    const std::string p = file("mesh.txt");
    write_mesh_cache(p, *result.mesh, force);
    note(p);
  }
  if (result.mesh && result.field) {
    const std::string p = file("field.csv");
    write_csv_file(p, field_csv(*result.mesh, *result.field), force);
    note(p);
  }
  if (result.curve) {
    const std::string p = file("curve.csv");
    write_csv_file(p, curve_csv(*result.curve), force);
    note(p);
  }
  if (result.profile) {
    const std::string p = file("weiss_profile.csv");
    write_csv_file(p, weiss_csv(*result.profile), force);
    note(p);
  }
  if (result.growth) {
    CsvTable t;
    t.header = {"level", "radius", "sup"};
    for (size_t j = 0; j < result.growth->S.size(); ++j)
      t.rows.push_back(
          {static_cast<double>(j), std::ldexp(1.0, -static_cast<int>(j)), result.growth->S[j]});
    const std::string p = file("growth.csv");
    write_csv_file(p, t, force);
    note(p);
  }
  if (result.angle) {
    CsvTable t;
    t.header = {"r", "count", "phi_min", "phi_max", "phi_mean", "sigma"};
    for (const AngleWindow& w : result.angle->windows)
      t.rows.push_back(
          {w.r, static_cast<double>(w.count), w.phi_min, w.phi_max, w.phi_mean, w.sigma});
    const std::string p = file("angle_profile.csv");
    write_csv_file(p, t, force);
    note(p);
  }
  if (result.blowup) {
    nlohmann::json b;
    b["scales"] = result.blowup->scales;
    b["residuals_S"] = result.blowup->residuals_S;
    b["residuals_L"] = result.blowup->residuals_L;
    b["tol_class"] = result.blowup->tol_class;
    b["verdict"] = verdict_name(result.blowup->verdict);
    const std::string p = file("blowup.json");
    write_json_file(p, b, force);
    note(p);
    for (size_t j = 0; j < result.blowup->fields.size(); ++j) {
      const RescaledField& f = result.blowup->fields[j];
      const std::string pj = file(("blowup_scale_" + std::to_string(j + 1) + ".csv").c_str());
      write_csv_file(pj, field_csv(f.mesh, f.values), force);
      note(pj);
    }
  }
  if (!result.eps_table.empty()) {
    CsvTable t;
    t.header = {"eps", "r_eps", "crossed"};
    for (const auto& row : result.eps_table)
      t.rows.push_back({row[0], row[1], row[2]});
    const std::string p = file("instability.csv");
    write_csv_file(p, t, force);
    note(p);
  }

  if (result.mesh) {
    SvgScene scene;
    scene.mesh = &*result.mesh;
    if (result.field) scene.field = &*result.field;
    if (result.curve) scene.curve = &*result.curve;
    const DerivedParams d = derive_params(sc.spec);
    if (d.gamma) {
      scene.rays.push_back(ray_segment(Vec2(1.0, *d.gamma), 1.0));
      if (*d.gamma > 0.0) scene.rays.push_back(ray_segment(Vec2(1.0, -*d.gamma), 1.0));
    }
    if (result.angle && !result.angle->windows.empty() &&
        result.angle->windows.front().count > 0) {
      scene.cones.push_back(
          {result.angle->theta_ref, 1.05 * result.angle->windows.front().sigma, 1.0});
    }
    const std::string p = file("fb.svg");
    write_svg_file(p, scene, force);
    note(p);
  }

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["versions"] = {{"format", 1}, {"library", kLibraryVersion}};
  manifest["wall_ms"] = wall_ms;
  manifest["scenario"] = scenario_name(sc.kind);
  manifest["verdict"] = verdict_label(result.verdict);
  manifest["outputs"] = written;
  const std::string mp = file("manifest.json");
  write_json_file(mp, manifest, force);
  note(mp);
  return written;
}

}  // namespace fblab
