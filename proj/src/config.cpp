#include "fblab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fblab/errors.hpp"

namespace fblab {

const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::GrowthA: return "growth_a";
    case ScenarioKind::ClassifyC: return "classify_c";
    case ScenarioKind::AngleD: return "angle_d";
    case ScenarioKind::InstabilityE: return "instability_e";
    case ScenarioKind::WeissGap: return "weiss_gap";
    case ScenarioKind::Consistency: return "consistency";
  }
  return "consistency";
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
  for (const ScenarioKind k :
       {ScenarioKind::GrowthA, ScenarioKind::ClassifyC, ScenarioKind::AngleD,
        ScenarioKind::InstabilityE, ScenarioKind::WeissGap, ScenarioKind::Consistency}) {
    if (name == scenario_name(k)) return k;
  }
  throw Error(Err::ConfigError, "unknown scenario name '" + name + "'");
}

Scenario default_scenario(ScenarioKind kind) {
  Scenario sc;
  sc.kind = kind;
  // A flat datum gives the touch-angle scenario nothing to measure, so it
  // defaults to the standard radial perturbation.
  if (kind == ScenarioKind::AngleD) sc.spec.g_coeff = 0.2;
  return sc;
}

namespace {

struct Ctx {
  int line = 0;               // 0: not from a file
  std::string what;           // override text, for non-file contexts
};

[[noreturn]] void bad(const Ctx& ctx, const std::string& msg) {
  std::string where = ctx.line > 0 ? "line " + std::to_string(ctx.line) : ctx.what;
  if (!where.empty()) where += ": ";
  throw Error(Err::ConfigError, where + msg);
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const Ctx& ctx, const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    bad(ctx, "key '" + key + "' needs a number, got '" + v + "'");
  return x;
}

int parse_int(const Ctx& ctx, const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const long x = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    bad(ctx, "key '" + key + "' needs an integer, got '" + v + "'");
  return static_cast<int>(x);
}

bool parse_bool(const Ctx& ctx, const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "on" || t == "1") return true;
  if (t == "false" || t == "off" || t == "0") return false;
  bad(ctx, "key '" + key + "' needs a boolean (true/false/on/off/1/0), got '" + v + "'");
}

std::vector<double> parse_list(const Ctx& ctx, const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) out.push_back(parse_double(ctx, key, item));
  if (out.empty()) bad(ctx, "key '" + key + "' needs a comma-separated number list");
  return out;
}

void set_spec_key(ProblemSpec& spec, const std::string& key, const std::string& v,
                  const Ctx& ctx) {
  if (key == "alpha_plus") spec.alpha_plus = parse_double(ctx, key, v);
  else if (key == "alpha_minus") spec.alpha_minus = parse_double(ctx, key, v);
  else if (key == "lambda_plus") spec.lambda_plus = parse_double(ctx, key, v);
  else if (key == "lambda_minus") spec.lambda_minus = parse_double(ctx, key, v);
  else if (key == "g_coeff") spec.g_coeff = parse_double(ctx, key, v);
  else if (key == "g_exponent") spec.g_exponent = parse_double(ctx, key, v);
  else bad(ctx, "unknown key '" + key + "' in section [spec]");
}

void set_mesh_key(MeshParams& mesh, const std::string& key, const std::string& v,
                  const Ctx& ctx) {
  if (key == "rings") mesh.rings = parse_int(ctx, key, v);
  else if (key == "q") mesh.q = parse_double(ctx, key, v);
  else if (key == "angular_n") mesh.angular_n = parse_int(ctx, key, v);
  else if (key == "aspect") mesh.aspect = parse_double(ctx, key, v);
  else bad(ctx, "unknown key '" + key + "' in section [mesh]");
}

void set_solve_key(SolveOptions& solve, const std::string& key, const std::string& v,
                   const Ctx& ctx) {
  if (key == "gd_iters") solve.gd_iters = parse_int(ctx, key, v);
  else if (key == "gd_tol") solve.gd_tol = parse_double(ctx, key, v);
  else if (key == "polish_sweeps") solve.polish_sweeps = parse_int(ctx, key, v);
  else if (key == "sweep_shuffle_seed")
    solve.sweep_shuffle_seed = static_cast<unsigned>(parse_int(ctx, key, v));
  else if (key == "accept_rel_tol") solve.accept_rel_tol = parse_double(ctx, key, v);
  else if (key == "eps_schedule") solve.eps_schedule = parse_list(ctx, key, v);
  else bad(ctx, "unknown key '" + key + "' in section [solve]");
}

void set_scenario_key(Scenario& sc, const std::string& key, const std::string& v,
                      const Ctx& ctx) {
  if (key == "name") sc.kind = scenario_kind_from_name(trim(v));
  else if (key == "label") sc.label = trim(v);
  else if (key == "datum") {
    const std::string t = trim(v);
    if (t == "small") sc.datum = DatumChoice::Small;
    else if (t == "large") sc.datum = DatumChoice::Large;
    else if (t == "zero") sc.datum = DatumChoice::Zero;
    else bad(ctx, "key 'datum' must be small, large, or zero, got '" + v + "'");
  } else if (key == "radii") sc.radii = parse_list(ctx, key, v);
  else if (key == "eps_list") sc.eps_list = parse_list(ctx, key, v);
  else if (key == "include_control") sc.include_control = parse_bool(ctx, key, v);
  else if (key == "arc_variant") {
    const std::string t = trim(v);
    if (t == "printed") sc.arc_variant = ArcVariant::Printed;
    else if (t == "large_trace") sc.arc_variant = ArcVariant::LargeTrace;
    else bad(ctx, "key 'arc_variant' must be printed or large_trace, got '" + v + "'");
  } else if (key == "delta") sc.delta = parse_double(ctx, key, v);
  else if (key == "nt_weak") sc.nt_weak = parse_bool(ctx, key, v);
  else if (key == "weak_c") sc.weak_c = parse_double(ctx, key, v);
  else if (key == "levels") sc.levels = parse_int(ctx, key, v);
  else if (key == "n_scales") sc.n_scales = parse_int(ctx, key, v);
  else if (key == "tol_grad") sc.tol_grad = parse_double(ctx, key, v);
  else if (key == "tol_jump") sc.tol_jump = parse_double(ctx, key, v);
  else if (key == "sigma_slack") sc.sigma_slack = parse_double(ctx, key, v);
  else if (key == "detach_radius") sc.detach_radius = parse_double(ctx, key, v);
  else if (key == "tol_class") sc.tol_class = parse_double(ctx, key, v);
  else bad(ctx, "unknown key '" + key + "' in section [scenario]");
}

void set_key(Scenario& sc, const std::string& section, const std::string& key,
             const std::string& value, const Ctx& ctx) {
  if (section == "spec") set_spec_key(sc.spec, key, value, ctx);
  else if (section == "mesh") set_mesh_key(sc.mesh, key, value, ctx);
  else if (section == "solve") set_solve_key(sc.solve, key, value, ctx);
  else if (section == "scenario") set_scenario_key(sc, key, value, ctx);
  else bad(ctx, "unknown section [" + section + "]");
}

struct RawLine {
  int line;
  std::string section, key, value;
};

// Syntax pass: sections, key = value, comments. Schema is checked later.
std::vector<RawLine> tokenize(const std::string& text) {
  std::vector<RawLine> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const Ctx ctx{lineno, ""};
    const size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') bad(ctx, "unterminated section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) bad(ctx, "empty section header");
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) bad(ctx, "expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) bad(ctx, "missing key before '='");
    if (section.empty()) bad(ctx, "key '" + key + "' appears before any [section]");
    out.push_back({lineno, section, key, t.substr(eq + 1)});
  }
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  const std::vector<RawLine> lines = tokenize(text);

  // The scenario name selects the per-kind defaults, so find it first; every
  // explicit key then overrides its default regardless of section order.
  const RawLine* name_line = nullptr;
  for (const RawLine& l : lines)
    if (l.section == "scenario" && l.key == "name") name_line = &l;
  if (name_line == nullptr)
    throw Error(Err::ConfigError, "missing required key 'name' in section [scenario]");

  Scenario sc = default_scenario(scenario_kind_from_name(trim(name_line->value)));
  for (const RawLine& l : lines) set_key(sc, l.section, l.key, l.value, Ctx{l.line, ""});
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

void apply_override(Scenario& sc, const std::string& dotted_key, const std::string& value) {
  const Ctx ctx{0, "override '" + dotted_key + "'"};
  const size_t dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
    bad(ctx, "overrides use the form section.key (e.g. mesh.rings)");
  set_key(sc, trim(dotted_key.substr(0, dot)), trim(dotted_key.substr(dot + 1)), value, ctx);
}

std::string config_schema() {
  return
      "[spec]            problem data\n"
      "  alpha_plus      positive-phase slope of the flat datum      (1.0)\n"
      "  alpha_minus     negative-phase slope                        (0.0)\n"
      "  lambda_plus     positive-phase volume weight                (sqrt 2)\n"
      "  lambda_minus    negative-phase volume weight                (0.0)\n"
      "  g_coeff         radial perturbation coefficient             (0.0; angle_d: 0.2)\n"
      "  g_exponent      superlinear excess kappa of g               (0.5)\n"
      "[mesh]            graded half-disc triangulation\n"
      "  rings           geometric grading rings                     (12)\n"
      "  q               grading ratio in (0,1)                      (0.5)\n"
      "  angular_n       angular sectors on the unit arc, even >= 8  (64)\n"
      "  aspect          radial/angular spacing target               (2.0)\n"
      "[solve]           minimization schedule\n"
      "  gd_iters        descent iterations per ramp width           (120)\n"
      "  gd_tol          sup-norm gradient stop                      (1e-7)\n"
      "  polish_sweeps   max nodewise relaxation sweeps              (400)\n"
      "  sweep_shuffle_seed  0 keeps natural node order              (0)\n"
      "  accept_rel_tol  relative no-change threshold                (1e-14)\n"
      "  eps_schedule    comma list of ramp widths (default: h/2^k, k=0..6)\n"
      "[scenario]        what to run and how to judge it\n"
      "  name            growth_a | classify_c | angle_d | instability_e |\n"
      "                  weiss_gap | consistency                     (required)\n"
      "  label           free-form text echoed into reports          ()\n"
      "  datum           small | large | zero                        (small)\n"
      "  radii           comma list, decreasing                      (0.25,0.125,0.0625)\n"
      "  eps_list        slope deficits, decreasing                  (0.2,0.1,0.05)\n"
      "  include_control also run the eps = 0 control                (true)\n"
      "  arc_variant     printed | large_trace                       (printed)\n"
      "  delta           cone opening for the non-tangential check   (0.2)\n"
      "  nt_weak         weak (small-value) cone test                (false)\n"
      "  weak_c          constant for the weak cone test             (0.5)\n"
      "  levels          dyadic levels for the growth report         (4)\n"
      "  n_scales        blow-up scales, capped at rings-1           (5)\n"
      "  tol_grad        gradient bound slack factor                 (0.1)\n"
      "  tol_jump        jump-defect tolerance, absolute             (0.5)\n"
      "  sigma_slack     allowed increase between angle windows      (0.0)\n"
      "  detach_radius   near-origin radius for detachment           (0.05)\n"
      "  tol_class       blow-up residual tolerance; <0 means 10h    (-1)\n";
}

}  // namespace fblab
