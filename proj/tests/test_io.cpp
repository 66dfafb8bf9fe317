#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>

#include "doctest.h"
#include "fblab/closed_form.hpp"
#include "fblab/errors.hpp"
#include "fblab/io.hpp"

using namespace fblab;

namespace {

Err error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return Err::NonPositiveLambda;  // sentinel: nothing was thrown
}

struct TempDir {
  std::filesystem::path dir;
  TempDir() {
    dir = std::filesystem::temp_directory_path() / "fblab_io_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  ~TempDir() { std::filesystem::remove_all(dir); }
  std::string path(const char* name) const { return (dir / name).string(); }
};

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("text files: round trip, overwrite refusal, missing file") {
  TempDir tmp;
  const std::string p = tmp.path("note.txt");
  write_text_file(p, "alpha\nbeta\n");
  CHECK(read_text_file(p) == "alpha\nbeta\n");

  CHECK(error_code([&] { write_text_file(p, "x", /*force=*/false); }) == Err::IoError);
  CHECK(read_text_file(p) == "alpha\nbeta\n");  // refusal left it untouched
  write_text_file(p, "gamma", /*force=*/true);
  CHECK(read_text_file(p) == "gamma");

  CHECK(error_code([&] { read_text_file(tmp.path("absent.txt")); }) == Err::IoError);
}

TEST_CASE("json files: sorted keys, stable bytes, round trip") {
  TempDir tmp;
  nlohmann::json a;
  a["zeta"] = 1;
  a["alpha"] = {{"b", 2.5}, {"a", true}};
  a["list"] = {1.0, 2.0, 3.0};
  nlohmann::json b;  // same value, different insertion order
  b["list"] = {1.0, 2.0, 3.0};
  b["alpha"] = {{"a", true}, {"b", 2.5}};
  b["zeta"] = 1;

  const std::string pa = tmp.path("a.json");
  const std::string pb = tmp.path("b.json");
  write_json_file(pa, a);
  write_json_file(pb, b);
  const std::string ta = read_text_file(pa);
  CHECK(ta == read_text_file(pb));  // byte-identical for equal values
  CHECK(ta.back() == '\n');
  CHECK(ta.find("\"alpha\"") < ta.find("\"list\""));  // sorted keys
  CHECK(ta.find("\"list\"") < ta.find("\"zeta\""));
  CHECK(read_json_file(pa) == a);

  CHECK(error_code([&] { write_json_file(pa, a, /*force=*/false); }) == Err::IoError);
  write_text_file(pa, "{broken", /*force=*/true);
  CHECK(error_code([&] { read_json_file(pa); }) == Err::IoError);
  CHECK(error_code([&] { read_json_file(tmp.path("absent.json")); }) == Err::IoError);
}

TEST_CASE("scenario json echo: full round trip of a non-default scenario") {
  Scenario sc = default_scenario(ScenarioKind::InstabilityE);
  sc.label = "probe";
  sc.spec.alpha_plus = 1.25;
  sc.spec.alpha_minus = 0.5;
  sc.spec.lambda_plus = 2.0;
  sc.spec.lambda_minus = 0.5;
  sc.spec.g_coeff = 0.1;
  sc.spec.g_exponent = 0.75;
  sc.mesh = {9, 0.5, 24, 1.5};
  sc.solve.gd_iters = 33;
  sc.solve.gd_tol = 2e-7;
  sc.solve.polish_sweeps = 77;
  sc.solve.sweep_shuffle_seed = 5;
  sc.solve.accept_rel_tol = 1e-12;
  sc.solve.eps_schedule = {0.25, 0.125};
  sc.datum = DatumChoice::Zero;
  sc.radii = {0.5, 0.25};
  sc.eps_list = {0.4, 0.2, 0.1, 0.05};
  sc.include_control = false;
  sc.arc_variant = ArcVariant::LargeTrace;
  sc.delta = 0.35;
  sc.nt_weak = true;
  sc.weak_c = 0.9;
  sc.levels = 7;
  sc.n_scales = 6;
  sc.tol_grad = 0.15;
  sc.tol_jump = 0.3;
  sc.sigma_slack = 0.02;
  sc.detach_radius = 0.07;
  sc.tol_class = 0.25;

  const nlohmann::json j = scenario_to_json(sc);
  const Scenario rt = scenario_from_json(j);
  CHECK(scenario_to_json(rt) == j);  // value-level round trip
  CHECK(rt.kind == sc.kind);
  CHECK(rt.label == sc.label);
  CHECK(rt.spec.alpha_minus == sc.spec.alpha_minus);
  CHECK(rt.mesh.angular_n == sc.mesh.angular_n);
  CHECK(rt.solve.eps_schedule == sc.solve.eps_schedule);
  CHECK(rt.datum == DatumChoice::Zero);
  CHECK(rt.arc_variant == ArcVariant::LargeTrace);
  CHECK(rt.eps_list == sc.eps_list);

  CHECK(error_code([] { scenario_from_json(nlohmann::json::object()); }) ==
        Err::ConfigError);
  nlohmann::json bad = j;
  bad["scenario"]["datum"] = "sideways";
  CHECK(error_code([&] { scenario_from_json(bad); }) == Err::ConfigError);
}

TEST_CASE("csv files: bit-exact numeric round trip including nan") {
  TempDir tmp;
  CsvTable t;
  t.header = {"a", "b", "c"};
  t.rows.push_back({1.0 / 3.0, -0.0, 1e-308});
  t.rows.push_back({std::nan(""), 2.5000000000000004, -7.1e200});
  t.rows.push_back({0.1 + 0.2, std::sqrt(2.0), std::numeric_limits<double>::min()});
  const std::string p = tmp.path("t.csv");
  write_csv_file(p, t);
  const CsvTable rt = read_csv_file(p);
  REQUIRE(rt.header == t.header);
  REQUIRE(rt.rows.size() == t.rows.size());
  for (size_t i = 0; i < t.rows.size(); ++i)
    for (size_t k = 0; k < 3; ++k) {
      const double x = t.rows[i][k], y = rt.rows[i][k];
      if (std::isnan(x)) {
        CHECK(std::isnan(y));
      } else {
        CHECK(std::memcmp(&x, &y, sizeof x) == 0);  // bitwise, sign of zero included
      }
    }

  // Rewriting what was read reproduces the bytes.
  const std::string p2 = tmp.path("t2.csv");
  write_csv_file(p2, rt);
  CHECK(read_text_file(p) == read_text_file(p2));

  CsvTable ragged;
  ragged.header = {"a", "b"};
  ragged.rows.push_back({1.0});
  CHECK(error_code([&] { write_csv_file(tmp.path("r.csv"), ragged); }) ==
        Err::InvalidArgument);
  CHECK(error_code([&] { read_csv_file(tmp.path("absent.csv")); }) == Err::IoError);
  write_text_file(tmp.path("badrow.csv"), "a,b\n1.0\n");
  CHECK(error_code([&] { read_csv_file(tmp.path("badrow.csv")); }) == Err::IoError);
  write_text_file(tmp.path("badnum.csv"), "a,b\n1.0,x7\n");
  CHECK(error_code([&] { read_csv_file(tmp.path("badnum.csv")); }) == Err::IoError);
}

TEST_CASE("standard tables: field, curve, and density-profile layouts") {
  const Mesh mesh = build_mesh({5, 0.5, 16, 2.0});
  const ProblemSpec spec;  // defaults: wedge pair with gamma = 1
  const Field u = interpolate_global(mesh, global_solution(spec, Branch::Small));

  const CsvTable f = field_csv(mesh, u);
  CHECK(f.header == std::vector<std::string>{"node", "x1", "x2", "value"});
  REQUIRE(static_cast<int>(f.rows.size()) == mesh.n_nodes());
  const int probe = mesh.n_nodes() / 2;
  CHECK(f.rows[probe][0] == probe);
  CHECK(f.rows[probe][1] == mesh.nodes[probe][0]);
  CHECK(f.rows[probe][2] == mesh.nodes[probe][1]);
  CHECK(f.rows[probe][3] == u[probe]);
  Field short_field = u.head(mesh.n_nodes() - 1);
  CHECK(error_code([&] { field_csv(mesh, short_field); }) == Err::InvalidArgument);

  const FreeBoundaryCurve curve = extract(mesh, u);
  REQUIRE_FALSE(curve.empty());
  const CsvTable c = curve_csv(curve);
  CHECK(c.header ==
        std::vector<std::string>{"component", "index", "x1", "x2", "r", "phi"});
  size_t total = 0;
  for (const auto& comp : curve.component_points) total += comp.size();
  CHECK(c.rows.size() == total);
  // Rows carry consistent polar data.
  for (const auto& row : c.rows) {
    CHECK(row[4] == doctest::Approx(std::hypot(row[2], row[3])).epsilon(1e-12));
  }

  WeissProfile prof;
  prof.radii = {0.5, 0.25};
  prof.W_values = {1.5, 1.25};
  prof.homogeneity_defects = {1e-4, 2e-5};
  const CsvTable w0 = weiss_csv(prof);
  CHECK(w0.header ==
        std::vector<std::string>{"radius", "W", "defect", "corrected_term"});
  REQUIRE(w0.rows.size() == 2);
  CHECK(w0.rows[0][3] == 0.0);  // not corrected: zero corrective column
  prof.corrected = true;
  prof.kappa_term = {0.125, 0.0625};
  const CsvTable w1 = weiss_csv(prof);
  CHECK(w1.rows[1][3] == 0.0625);
}

TEST_CASE("mesh cache: bit-exact round trip and strict parsing") {
  TempDir tmp;
  const Mesh mesh = build_mesh({6, 0.5, 20, 2.0});
  const std::string p = tmp.path("mesh.txt");
  write_mesh_cache(p, mesh);

  const MeshCacheData cache = read_mesh_cache(p);
  CHECK(cache_matches_mesh(cache, mesh));
  REQUIRE(static_cast<int>(cache.nodes.size()) == mesh.n_nodes());
  REQUIRE(static_cast<int>(cache.tris.size()) == mesh.n_tris());
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    CHECK(cache.nodes[n][0] == mesh.nodes[n][0]);  // bitwise
    CHECK(cache.nodes[n][1] == mesh.nodes[n][1]);
    const int cls = (mesh.on_flat[n] ? 1 : 0) + (mesh.on_arc[n] ? 2 : 0);
    CHECK(cache.node_class[n] == cls);
  }

  // A different mesh does not match.
  const Mesh other = build_mesh({6, 0.5, 24, 2.0});
  CHECK_FALSE(cache_matches_mesh(cache, other));
  // Nor does a perturbed coordinate.
  MeshCacheData bent = cache;
  bent.nodes[3][0] = std::nextafter(bent.nodes[3][0], 2.0);
  CHECK_FALSE(cache_matches_mesh(bent, mesh));

  // Rewriting the cache file yields the same bytes.
  const std::string text = read_text_file(p);
  CHECK(text.rfind("halfdisc-mesh v1\n", 0) == 0);
  std::remove(p.c_str());
  write_mesh_cache(p, mesh);
  CHECK(read_text_file(p) == text);

  // Strict parsing: each corruption names its line.
  const auto expect_bad = [&](const char* name, const std::string& content) {
    write_text_file(tmp.path(name), content);
    CHECK(error_code([&] { read_mesh_cache(tmp.path(name)); }) == Err::IoError);
  };
  expect_bad("h.txt", "halfdisc v9\nnodes 0\ntris 0\n");
  expect_bad("n.txt", "halfdisc-mesh v1\nnodes x\ntris 0\n");
  expect_bad("c.txt", "halfdisc-mesh v1\nnodes 1\n0.5 0.5 9\ntris 0\n");
  expect_bad("t.txt", "halfdisc-mesh v1\nnodes 1\n0.5 0.5 0\ntris 1\n0 0 5\n");
  expect_bad("e.txt", "halfdisc-mesh v1\nnodes 2\n0.5 0.5 0\n");
  CHECK(error_code([&] { read_mesh_cache(tmp.path("absent.txt")); }) == Err::IoError);
}

TEST_CASE("svg: element census follows the scene and output is stable") {
  TempDir tmp;
  const Mesh mesh = build_mesh({4, 0.5, 12, 2.0});
  const ProblemSpec spec;
  const Field u = interpolate_global(mesh, global_solution(spec, Branch::Small));
  const FreeBoundaryCurve curve = extract(mesh, u);
  REQUIRE_FALSE(curve.empty());

  SvgScene scene;
  scene.mesh = &mesh;
  scene.field = &u;
  scene.curve = &curve;
  scene.rays.push_back(ray_segment(Vec2(1.0, 1.0), 1.0));
  scene.rays.push_back(ray_segment(Vec2(1.0, -1.0), 1.0));
  scene.cones.push_back({0.5, 0.1, 1.0});
  scene.timestamp = false;

  const std::string p = tmp.path("scene.svg");
  write_svg_file(p, scene);
  const std::string svg = read_text_file(p);
  CHECK(count_occurrences(svg, "<polygon class=\"tri\"") == mesh.n_tris());
  CHECK(count_occurrences(svg, "<polyline class=\"fb\"") ==
        static_cast<int>(curve.n_components()));
  CHECK(count_occurrences(svg, "<line class=\"ray\"") == 2);
  CHECK(count_occurrences(svg, "<line class=\"cone\"") == 2);
  CHECK(count_occurrences(svg, "<path class=\"outline\"") == 1);
  CHECK(svg.find("<!--") == std::string::npos);  // no timestamp requested

  // Deterministic: a second write gives identical bytes.
  write_svg_file(tmp.path("scene2.svg"), scene);
  CHECK(read_text_file(tmp.path("scene2.svg")) == svg);

  // With the timestamp on, a comment appears.
  SvgScene stamped = scene;
  stamped.timestamp = true;
  write_svg_file(tmp.path("stamped.svg"), stamped);
  CHECK(read_text_file(tmp.path("stamped.svg")).find("<!--") != std::string::npos);

  // Outline-only scene: no triangles, no polylines.
  SvgScene bare;
  bare.timestamp = false;
  write_svg_file(tmp.path("bare.svg"), bare);
  const std::string empty_svg = read_text_file(tmp.path("bare.svg"));
  CHECK(count_occurrences(empty_svg, "<polygon") == 0);
  CHECK(count_occurrences(empty_svg, "<polyline") == 0);
  CHECK(count_occurrences(empty_svg, "<path class=\"outline\"") == 1);

  // Field without mesh is an error; size mismatch too.
  SvgScene broken;
  broken.field = &u;
  CHECK(error_code([&] { write_svg_file(tmp.path("x.svg"), broken); }) ==
        Err::InvalidArgument);
  const Field shorter = u.head(mesh.n_nodes() - 2);
  SvgScene mismatched;
  mismatched.mesh = &mesh;
  mismatched.field = &shorter;
  CHECK(error_code([&] { write_svg_file(tmp.path("y.svg"), mismatched); }) ==
        Err::InvalidArgument);

  CHECK(error_code([&] { write_svg_file(p, scene, /*force=*/false); }) == Err::IoError);
}
