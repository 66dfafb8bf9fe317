#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fblab/closed_form.hpp"
#include "fblab/errors.hpp"
#include "fblab/util.hpp"

namespace fblab {

// Parameters of the graded polar mesh of the closed half-disc
// {|x| <= 1, x1 >= 0}.
//
// The mesh has two zones:
//   * Banded zone: concentric node circles ("levels") at radii q^(t/S),
//     t = 0 .. rings*S, each carrying angular_n+1 nodes at angles
//     i*pi/angular_n measured from the +x2 axis. S (sublevels per ring) is
//     chosen so radial spacing stays about `aspect` times the angular
//     spacing.
//   * Patch zone (inside radius q^rings): the angular count is halved in
//     successive transition annuli until it reaches at most 9 sectors, then a
//     single triangle fan closes the mesh at the origin. This keeps every
//     triangle's minimum angle above 20 degrees all the way to the center.
//
// Because the banded zone is a geometric progression with a fixed angular
// count and the patch layout depends only on (angular_n, q, aspect), the
// submesh inside radius q^j of a `rings`-ring mesh is an exact scaled copy of
// the (rings - j)-ring mesh: zooming is a re-indexing, never interpolation.
struct MeshParams {
  int rings = 12;
  double q = 0.5;
  int angular_n = 64;
  double aspect = 2.0;

  bool operator==(const MeshParams&) const = default;
};

struct Mesh {
  MeshParams params;
  int sublevels = 0;  // S: node circles per grading ring

  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> tris;  // counterclockwise vertex triples

  // Levels are node circles ordered outward-in; level 0 is the unit arc.
  // Nodes are stored level-major in the same order with the origin last, so
  // the nodes inside any level radius form a suffix of the node array.
  std::vector<double> level_radius;
  std::vector<int> level_count;        // angular sectors at that level
  std::vector<int> level_node_offset;  // first node index of the level
  // strip_tri_offset[l] = first triangle of the strip between level l and
  // level l+1 (the last entry is the origin fan). Triangles are stored strip
  // by strip, outward-in, so triangles inside a level radius form a suffix.
  std::vector<int> strip_tri_offset;

  std::vector<int> level_of_node;   // level index; the origin reports n_levels()
  std::vector<int> index_in_level;  // angular index i within its level
  std::vector<bool> on_flat;        // node lies on {x1 = 0}
  std::vector<bool> on_arc;         // node lies on the unit arc

  int origin_node = -1;
  int banded_levels = 0;  // rings * S + 1

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_tris() const { return static_cast<int>(tris.size()); }
  int n_levels() const { return static_cast<int>(level_radius.size()); }
  int node_at(int level, int i) const { return level_node_offset[level] + i; }
  bool is_dirichlet(int n) const { return on_flat[n] || on_arc[n]; }

  // Coarsest angular node spacing (radians) on the unit arc. All tolerance
  // formulas treat this as the mesh-size parameter h.
  double h_coarse() const;

  // First node index of the suffix of nodes with |x| <= r (up to one part in
  // 1e-12 of slack at level radii). Also the node offset of the outermost
  // level whose radius is <= r.
  int suffix_begin(double r) const;
  // Index of the outermost level with radius <= r (throws if r < innermost
  // patch level radius).
  int level_at_or_inside(double r) const;
  // First triangle index of the suffix of triangles entirely inside radius r.
  int tri_suffix_begin(double r) const;
};

// Builds the mesh. Throws Error(MeshError) for invalid parameters
// (rings < 1, q outside (0,1), angular_n odd or < 8, or an angular count
// chain that cannot be halved down to <= 9 sectors).
Mesh build_mesh(const MeshParams& params);

// Smallest interior angle over all triangles, in radians.
double mesh_min_angle(const Mesh& mesh);

// Sum of triangle areas (the area of the inscribed polygon approximating the
// half-disc).
double mesh_area(const Mesh& mesh);

// Smallest and largest edge lengths.
std::pair<double, double> mesh_edge_range(const Mesh& mesh);

// Which datum fills the arc portion of the Dirichlet boundary.
enum class OuterDatum { SmallTrace, LargeTrace };

// Assembles Dirichlet data as a full nodal field (interior entries are 0):
//   * flat-segment nodes get f(x2) = alpha_plus x2^+ - alpha_minus x2^- +
//     g(|x2|) (see flat_datum);
//   * arc nodes get the selected outer datum: the trace of the Small or
//     Large one-homogeneous solution, or a caller-supplied function;
//   * the corner nodes (0, +-1) get the flat-segment value, and the outer
//     datum must agree with it there within 1e-12, otherwise
//     Error(InvalidArgument) is thrown.
// The branch-trace overload requires a regime admitting the one-homogeneous
// solutions (see global_solution).
Field boundary_trace(const Mesh& mesh, const ProblemSpec& spec, OuterDatum outer);
Field boundary_trace(const Mesh& mesh, const ProblemSpec& spec,
                     const std::function<double(const Vec2&)>& outer);

// A mesh restricted to the closed ball {|x| <= r} together with the
// restricted nodal values. Node and triangle order is the tail of the parent
// arrays, so parent index = sub index + node_shift (resp. tri_shift).
struct BallRestriction {
  Mesh mesh;
  Field values;
  int node_shift = 0;
  int tri_shift = 0;
};

// Restricts mesh and field to {|x| <= r}. The radius must match a grading
// ring radius q^k, k = 0..rings-1, within 1e-12 (the restriction must keep at
// least one grading ring); otherwise Error(MeshError) is thrown. Node
// coordinates and field values are copied bitwise; the nodes on radius r
// become the arc boundary of the restricted mesh.
BallRestriction restrict_to_ball(const Mesh& mesh, const Field& field, double r);

}  // namespace fblab
