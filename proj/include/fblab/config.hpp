#pragma once

#include <string>
#include <vector>

#include "fblab/closed_form.hpp"
#include "fblab/mesh.hpp"
#include "fblab/minimize.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Scenario descriptions: everything an experiment run needs, in one value.
// ---------------------------------------------------------------------------

enum class ScenarioKind {
  GrowthA,       // linear growth + non-tangential cone check
  ClassifyC,     // blow-up classification of both wedge-trace minimizers
  AngleD,        // touch-angle profile under a radial perturbation
  InstabilityE,  // datum slope deficit: the free boundary leaves the origin
  WeissGap,      // density ordering of the two wedges and their minimizers
  Consistency,   // wedge-trace solves reproduce the closed forms, first order
};

// Canonical lowercase names used in config files and file names:
// growth_a, classify_c, angle_d, instability_e, weiss_gap, consistency.
const char* scenario_name(ScenarioKind kind);
ScenarioKind scenario_kind_from_name(const std::string& name);  // ConfigError if unknown

// Which trace fills the Dirichlet data for scenarios that solve once.
enum class DatumChoice { Small, Large, Zero };

// Arc datum for the slope-deficit construction: Printed keeps the literal
// formula (alpha_plus - eps) * max(-gamma x1 + x2, 0) with gamma of the
// *unperturbed* data; LargeTrace uses the large-wedge trace of the perturbed
// slope instead. The two differ and are not interchangeable, hence a switch.
enum class ArcVariant { Printed, LargeTrace };

struct Scenario {
  ScenarioKind kind = ScenarioKind::Consistency;
  std::string label;  // free-form echo, no semantics

  ProblemSpec spec;   // [spec]
  MeshParams mesh;    // [mesh]
  SolveOptions solve; // [solve]; solve.lambda is overwritten with the derived
                      // Lambda at run time and is not a config key

  // [scenario] keys beyond `name` and `label`:
  DatumChoice datum = DatumChoice::Small;
  std::vector<double> radii = {0.25, 0.125, 0.0625};  // dyadic probe radii
  std::vector<double> eps_list = {0.2, 0.1, 0.05};    // slope deficits
  bool include_control = true;     // also run the eps = 0 control
  ArcVariant arc_variant = ArcVariant::Printed;
  double delta = 0.2;              // cone opening for the non-tangential check
  bool nt_weak = false;            // weak (small-value) cone test instead
  double weak_c = 0.5;             // constant for the weak cone test
  int levels = 4;                  // dyadic levels for the growth report
  int n_scales = 5;                // blow-up scales (capped at rings-1)
  double tol_grad = 0.1;           // gradient bound slack factor
  double tol_jump = 0.5;           // jump-defect tolerance (absolute)
  double sigma_slack = 0.0;        // allowed increase between angle windows
  double detach_radius = 0.05;     // "near the origin" radius for detachment
  double tol_class = -1.0;         // blow-up tolerance; < 0 means 10h
};

// A scenario with every field at its documented default.
Scenario default_scenario(ScenarioKind kind);

// Parses the key/value document:
//   - `[section]` headers: spec, mesh, solve, scenario;
//   - `key = value` lines; `#` or `;` start a comment; blank lines ignored;
//   - booleans: true/false/on/off/1/0; lists: comma-separated numbers;
//   - every key must live in its section's schema, unknown keys or sections
//     are errors (Error(ConfigError) naming the offender and line);
//   - [scenario] must name the scenario via `name = ...`.
// Later duplicates of a key overwrite earlier ones.
Scenario parse_scenario_text(const std::string& text);

// Reads the file and parses it. Error(IoError) when unreadable.
Scenario load_scenario_file(const std::string& path);

// Applies one `section.key=value` override (same schema and errors as the
// file form, including `scenario.name`).
void apply_override(Scenario& sc, const std::string& dotted_key, const std::string& value);

// The config schema as a human-readable listing (sections, keys, defaults).
std::string config_schema();

}  // namespace fblab
