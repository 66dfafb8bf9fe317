#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>

#include "doctest.h"
#include "fblab/mesh.hpp"

using namespace fblab;

namespace {
const double kPi = std::atan2(0.0, -1.0);
}

TEST_CASE("default mesh: structure counts") {
  const Mesh mesh = build_mesh({});
  CHECK(mesh.sublevels == 7);
  CHECK(mesh.banded_levels == 85);
  CHECK(mesh.n_levels() == 88);  // 85 banded + patch counts 32, 16, 8
  CHECK(mesh.level_count[85] == 32);
  CHECK(mesh.level_count[86] == 16);
  CHECK(mesh.level_count[87] == 8);
  CHECK(mesh.n_nodes() == 5585);
  CHECK(mesh.n_tris() == 10928);
  CHECK(mesh.origin_node == mesh.n_nodes() - 1);
  CHECK(mesh.h_coarse() == doctest::Approx(kPi / 64.0).epsilon(1e-15));
}

TEST_CASE("default mesh: geometric invariants") {
  const Mesh mesh = build_mesh({});

  // Disc topology: V - E + F == 1 for a triangulated disc.
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.tris)
    for (int k = 0; k < 3; ++k)
      edges.insert(std::minmax(t[k], t[(k + 1) % 3]));
  CHECK(mesh.n_nodes() - static_cast<int>(edges.size()) + mesh.n_tris() == 1);

  // Quality: every interior angle at least 20 degrees.
  const double min_angle = mesh_min_angle(mesh);
  INFO("min angle (deg) = " << min_angle * 180.0 / kPi);
  CHECK(min_angle >= 20.0 * kPi / 180.0);

  // Positive orientation everywhere.
  for (const auto& t : mesh.tris) {
    const Vec2 u = mesh.nodes[t[1]] - mesh.nodes[t[0]];
    const Vec2 v = mesh.nodes[t[2]] - mesh.nodes[t[0]];
    REQUIRE(u.x() * v.y() - u.y() * v.x() > 0.0);
  }

  // The triangles tile the inscribed polygon: the only area missing from the
  // half-disc is the sliver between the unit arc and its 64-gon chords,
  // (pi - m sin(pi/m)) / 2 ~ pi^3 / (12 m^2).
  const double deficit = kPi / 2.0 - mesh_area(mesh);
  const double m2 = 64.0 * 64.0;
  CHECK(deficit > 2.5 / m2);
  CHECK(deficit < 2.6 / m2);

  const auto [h_min, h_max] = mesh_edge_range(mesh);
  CHECK(h_min > 0.0);
  CHECK(h_max < 0.2);
}

TEST_CASE("default mesh: boundary placement is exact") {
  const Mesh mesh = build_mesh({});
  int arc_nodes = 0, flat_nodes = 0;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (mesh.on_flat[n]) {
      ++flat_nodes;
      CHECK(mesh.nodes[n].x() == 0.0);
    }
    if (mesh.on_arc[n]) {
      ++arc_nodes;
      CHECK(std::abs(mesh.nodes[n].norm() - 1.0) <= 4e-16);
    }
  }
  CHECK(arc_nodes == 65);
  CHECK(flat_nodes == 2 * 88 + 1);  // two ends of every level plus the origin
  CHECK(mesh.on_flat[mesh.origin_node]);
  CHECK(!mesh.on_arc[mesh.origin_node]);

  // Mirror symmetry about the +x1 axis is bit-exact, and even-count levels
  // carry an exact node on the axis.
  for (int l = 0; l < mesh.n_levels(); ++l) {
    const int c = mesh.level_count[l];
    for (int i = 0; i <= c; ++i) {
      const Vec2 a = mesh.nodes[mesh.node_at(l, i)];
      const Vec2 b = mesh.nodes[mesh.node_at(l, c - i)];
      CHECK(a.x() == b.x());
      CHECK(a.y() == -b.y());
    }
    CHECK(mesh.nodes[mesh.node_at(l, c / 2)].y() == 0.0);
  }
}

TEST_CASE("mesh rebuild is bit-identical") {
  const Mesh a = build_mesh({});
  const Mesh b = build_mesh({});
  REQUIRE(a.n_nodes() == b.n_nodes());
  REQUIRE(a.n_tris() == b.n_tris());
  for (int n = 0; n < a.n_nodes(); ++n) {
    CHECK(a.nodes[n].x() == b.nodes[n].x());
    CHECK(a.nodes[n].y() == b.nodes[n].y());
  }
  CHECK(a.tris == b.tris);
  CHECK(a.level_radius == b.level_radius);
}

TEST_CASE("submesh inside q^j is a scaled copy of the shallower mesh") {
  MeshParams p12;  // 12 rings
  MeshParams p9 = p12;
  p9.rings = 9;
  const Mesh big = build_mesh(p12);
  const Mesh small = build_mesh(p9);

  const int jS = 3 * big.sublevels;  // level shift for j = 3 rings
  REQUIRE(big.n_levels() == small.n_levels() + jS);
  const int node_shift = big.level_node_offset[jS];
  const int tri_shift = big.strip_tri_offset[jS];
  REQUIRE(big.n_nodes() - node_shift == small.n_nodes());
  REQUIRE(big.n_tris() - tri_shift == small.n_tris());

  const double scale = 0.125;  // q^3
  for (int n = 0; n < small.n_nodes(); ++n) {
    const Vec2 want = scale * small.nodes[n];
    const Vec2 got = big.nodes[n + node_shift];
    CHECK(std::abs(got.x() - want.x()) <= 1e-15);
    CHECK(std::abs(got.y() - want.y()) <= 1e-15);
  }
  for (int k = 0; k < small.n_tris(); ++k)
    for (int v = 0; v < 3; ++v)
      REQUIRE(big.tris[k + tri_shift][v] == small.tris[k][v] + node_shift);
  CHECK(big.origin_node == small.origin_node + node_shift);
}

TEST_CASE("radius suffix lookups") {
  const Mesh mesh = build_mesh({});
  CHECK(mesh.level_radius[mesh.level_at_or_inside(0.5)] == 0.5);
  CHECK(mesh.suffix_begin(0.5) == 7 * 65);
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const bool inside = mesh.nodes[n].norm() <= 0.5 * (1.0 + 1e-12);
    CHECK(inside == (n >= mesh.suffix_begin(0.5)));
  }
  // Triangles in the suffix stay inside the radius.
  for (int k = mesh.tri_suffix_begin(0.5); k < mesh.n_tris(); ++k)
    for (int v = 0; v < 3; ++v)
      REQUIRE(mesh.nodes[mesh.tris[k][v]].norm() <= 0.5 * (1.0 + 1e-12));

  const int l3 = mesh.level_at_or_inside(0.3);
  CHECK(mesh.level_radius[l3] <= 0.3);
  CHECK(mesh.level_radius[l3 - 1] > 0.3);
}

TEST_CASE("mesh parameter validation") {
  CHECK_THROWS_AS(build_mesh({0, 0.5, 64, 2.0}), Error);
  CHECK_THROWS_AS(build_mesh({12, 1.1, 64, 2.0}), Error);
  CHECK_THROWS_AS(build_mesh({12, 0.5, 65, 2.0}), Error);
  CHECK_THROWS_AS(build_mesh({12, 0.5, 6, 2.0}), Error);
  CHECK_THROWS_AS(build_mesh({12, 0.5, 44, 2.0}), Error);  // 44 -> 22 -> 11: stuck

  // Other even counts with a clean halving chain work and stay well-shaped.
  for (int m : {48, 40, 128}) {
    const Mesh mesh = build_mesh({6, 0.5, m, 2.0});
    CHECK(mesh_min_angle(mesh) >= 20.0 * kPi / 180.0);
  }
}

TEST_CASE("boundary trace: pinned values on flat segment and arc") {
  const Mesh mesh = build_mesh({});
  const ProblemSpec spec;  // slopes (1, 0), gamma = 1, perturbation off
  const Field f = boundary_trace(mesh, spec, OuterDatum::SmallTrace);
  REQUIRE(f.size() == mesh.n_nodes());

  // Corners carry the flat-segment datum.
  CHECK(f[mesh.node_at(0, 0)] == 1.0);                       // (0, 1)
  CHECK(f[mesh.node_at(0, mesh.params.angular_n)] == 0.0);   // (0, -1)

  // Flat nodes: alpha_plus x2^+ . The ring-2 node on the positive axis sits
  // at (0, 0.25) exactly.
  const int n025 = mesh.node_at(2 * mesh.sublevels, 0);
  CHECK(mesh.nodes[n025].x() == 0.0);
  CHECK(mesh.nodes[n025].y() == 0.25);
  CHECK(f[n025] == 0.25);
  const int n025m = mesh.node_at(2 * mesh.sublevels, mesh.level_count[2 * mesh.sublevels]);
  CHECK(mesh.nodes[n025m].y() == -0.25);
  CHECK(f[n025m] == 0.0);

  // Arc nodes carry the Small trace; interior nodes are zero.
  const GlobalSolution vs = global_solution(spec, Branch::Small);
  for (int i = 0; i <= mesh.params.angular_n; ++i) {
    const int n = mesh.node_at(0, i);
    if (mesh.on_flat[n]) continue;
    CHECK(f[n] == doctest::Approx(eval_global(vs, mesh.nodes[n])).epsilon(1e-15));
  }
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (!mesh.is_dirichlet(n)) REQUIRE(f[n] == 0.0);

  // Large trace with gamma = 1: the 45-degree arc node gets sqrt(2).
  const Field fl = boundary_trace(mesh, spec, OuterDatum::LargeTrace);
  const int diag = mesh.node_at(0, mesh.params.angular_n / 4);
  CHECK(mesh.nodes[diag].x() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(fl[diag] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("boundary trace: perturbed datum needs a matching outer datum") {
  const Mesh mesh = build_mesh({});
  ProblemSpec spec;
  spec.g_coeff = 0.1;
  spec.g_exponent = 0.5;

  // The raw branch trace misses the perturbation at the corners (0, +-1).
  try {
    boundary_trace(mesh, spec, OuterDatum::SmallTrace);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::InvalidArgument);
  }

  // A caller-supplied outer datum carrying the same perturbation passes.
  const GlobalSolution vs = global_solution(spec, Branch::Small);
  const auto outer = [&](const Vec2& x) {
    return eval_global(vs, x) + g_value(spec, x.norm());
  };
  const Field f = boundary_trace(mesh, spec, outer);
  const int n025 = mesh.node_at(2 * mesh.sublevels, 0);
  CHECK(f[n025] == doctest::Approx(0.25 + 0.1 * std::pow(0.25, 1.5)).epsilon(1e-15));
  CHECK(f[mesh.node_at(0, 0)] == doctest::Approx(1.1).epsilon(1e-15));
  CHECK(f[mesh.node_at(0, mesh.params.angular_n)] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("ball restriction: identity, one ring off, kept data bitwise") {
  const Mesh mesh = build_mesh({8, 0.5, 32, 2.0});
  Field u(mesh.n_nodes());
  for (int n = 0; n < mesh.n_nodes(); ++n) u[n] = std::sin(3.0 * n) + mesh.nodes[n].x();

  const BallRestriction id = restrict_to_ball(mesh, u, 1.0);
  CHECK(id.node_shift == 0);
  CHECK(id.tri_shift == 0);
  CHECK(id.mesh.n_nodes() == mesh.n_nodes());
  CHECK(id.mesh.n_tris() == mesh.n_tris());
  CHECK((id.values - u).norm() == 0.0);

  const BallRestriction sub = restrict_to_ball(mesh, u, 0.5);
  CHECK(sub.mesh.params.rings == 7);
  CHECK(sub.mesh.sublevels == mesh.sublevels);
  CHECK(sub.mesh.n_nodes() ==
        mesh.n_nodes() - mesh.sublevels * (mesh.params.angular_n + 1));
  CHECK(sub.mesh.n_tris() < mesh.n_tris());
  CHECK(sub.mesh.level_radius[0] == 0.5);
  CHECK(sub.mesh.origin_node == sub.mesh.n_nodes() - 1);

  for (int n = 0; n < sub.mesh.n_nodes(); ++n) {
    REQUIRE(sub.values[n] == u[n + sub.node_shift]);
    REQUIRE(sub.mesh.nodes[n].x() == mesh.nodes[n + sub.node_shift].x());
    REQUIRE(sub.mesh.nodes[n].y() == mesh.nodes[n + sub.node_shift].y());
  }
  for (int t = 0; t < sub.mesh.n_tris(); ++t)
    for (int k = 0; k < 3; ++k)
      REQUIRE(sub.mesh.tris[t][k] == mesh.tris[t + sub.tri_shift][k] - sub.node_shift);

  // The cut circle becomes the arc boundary of the restriction.
  for (int i = 0; i <= sub.mesh.level_count[0]; ++i)
    REQUIRE(sub.mesh.on_arc[sub.mesh.node_at(0, i)]);
  int arc_nodes = 0;
  for (int n = 0; n < sub.mesh.n_nodes(); ++n) arc_nodes += sub.mesh.on_arc[n] ? 1 : 0;
  CHECK(arc_nodes == sub.mesh.level_count[0] + 1);

  // The restriction is still a well-formed graded mesh.
  CHECK(mesh_min_angle(sub.mesh) >= 20.0 * kPi / 180.0);
  CHECK(sub.mesh.suffix_begin(0.25) == sub.mesh.level_node_offset[sub.mesh.sublevels]);

  // Restriction composes like the suffix structure promises.
  const BallRestriction sub2 = restrict_to_ball(sub.mesh, sub.values, 0.25);
  const BallRestriction direct = restrict_to_ball(mesh, u, 0.25);
  CHECK(sub2.mesh.n_nodes() == direct.mesh.n_nodes());
  CHECK((sub2.values - direct.values).norm() == 0.0);
}

TEST_CASE("ball restriction: unaligned radii are rejected") {
  const Mesh mesh = build_mesh({8, 0.5, 32, 2.0});
  const Field u = Field::Zero(mesh.n_nodes());
  try {
    restrict_to_ball(mesh, u, 0.3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::MeshError);
  }
  // Sublevel radii are not ring radii.
  CHECK_THROWS_AS(restrict_to_ball(mesh, u, mesh.level_radius[1]), Error);
  // The patch boundary q^rings would leave no grading ring at all.
  CHECK_THROWS_AS(restrict_to_ball(mesh, u, std::pow(0.5, 8)), Error);
  CHECK_THROWS_AS(restrict_to_ball(mesh, Field::Zero(3), 0.5), Error);
}
