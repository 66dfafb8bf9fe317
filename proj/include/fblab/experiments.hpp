#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fblab/blowup.hpp"
#include "fblab/config.hpp"
#include "fblab/freeboundary.hpp"
#include "fblab/weiss.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Scenario runners: one per experiment, plus a dispatcher. Each run solves,
// measures, and judges; every quantitative judgement carries the tolerance it
// used. Verdicts are tri-state: a failed solver or an undecided blow-up
// classification yields Inconclusive, never a scientific claim.
// ---------------------------------------------------------------------------

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdict_label(Verdict v);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

struct RunResult {
  Verdict verdict = Verdict::Inconclusive;
  bool not_converged = false;  // some solve exhausted its budget
  std::vector<CheckLine> checks;
  // Deterministic report: schema_version, full scenario echo, checks,
  // scenario statistics. Byte-identical across reruns of the same scenario.
  nlohmann::json report;

  // Artifacts for file emission; presence depends on the scenario.
  std::optional<Mesh> mesh;
  std::optional<Field> field;
  std::optional<FreeBoundaryCurve> curve;
  std::optional<WeissProfile> profile;
  std::optional<AngleProfile> angle;
  std::optional<GrowthReport> growth;
  std::optional<BlowupSequence> blowup;
  // Slope-deficit table: one row (eps, crossing radius, crossed flag) per
  // deficit; the radius entry is meaningful only when the flag is 1.
  std::vector<std::array<double, 3>> eps_table;
};

// Solves with the configured datum and audits linear growth: the dyadic sup
// recursion must close and, when a free boundary is present, the cone check
// must hold at the configured opening. Zero data passes trivially (S == 0).
RunResult run_growth_a(const Scenario& sc);

// Solves with both wedge traces and requires each minimizer's blow-up to
// classify to the matching wedge, with a small gradient-jump defect; for
// one-phase data the interior gradient bound is audited as well. In the
// no-free-boundary regime it checks that extraction returns nothing.
RunResult run_classify_c(const Scenario& sc);

// Solves (default: small trace plus radial perturbation) and measures the
// touch angle on the configured dyadic annuli: deviations must not grow
// toward the origin and the finest annulus must sit inside the cone spanned
// by the coarsest deviation times 1.05.
RunResult run_angle_d(const Scenario& sc);

// Slope-deficit construction: for each eps the flat datum loses eps of its
// positive slope while the arc keeps a wedge-type datum (see ArcVariant).
// The smallest minimizer's free boundary must leave the origin: it crosses
// the axis {x2 = 0} at some radius r_eps, the near-origin boundary stays on
// the small-wedge side, and r_eps does not increase as eps shrinks. The
// eps = 0 control keeps the free boundary through the origin with no axis
// crossing.
RunResult run_instability_e(const Scenario& sc);

// Orders the two wedges by the phase-free flux part of the density (the
// combination in which the positivity-sector difference cancels): closed
// forms and computed minimizers must order the same way with margin, and for
// one-phase data the gap must match gamma * alpha_plus^2 within 1e-3
// relative. gamma == 0 collapses the gap; that run records the degenerate
// flag and checks the gap vanishes instead.
RunResult run_weiss_gap(const Scenario& sc);

// First-order consistency: wedge-trace solves at h and h/2 reproduce the
// wedges in max norm within 5h and 5h/2, the extracted boundary stays within
// the same budget of the kink ray, and the error ratio sits in [1.5, 3].
RunResult run_consistency(const Scenario& sc);

// Dispatch on sc.kind.
RunResult run_scenario(const Scenario& sc);

// Writes the run's files into dir (created if absent): report.json plus the
// scenario's CSV/SVG/mesh artifacts, then manifest.json listing every file
// with versions and the wall time. All files except manifest.json are
// deterministic; the manifest carries the timing. Refuses to overwrite
// without force (Error(IoError)). Returns the paths written.
std::vector<std::string> write_run_outputs(const RunResult& result, const Scenario& sc,
                                           const std::string& dir, bool force,
                                           double wall_ms);

}  // namespace fblab
