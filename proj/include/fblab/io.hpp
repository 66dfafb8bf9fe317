#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"

#include "fblab/config.hpp"
#include "fblab/freeboundary.hpp"
#include "fblab/mesh.hpp"
#include "fblab/weiss.hpp"

namespace fblab {

// ---------------------------------------------------------------------------
// Plain text and JSON files.
// ---------------------------------------------------------------------------

// Whole-file helpers; Error(IoError) on failure. write_text_file refuses to
// overwrite an existing path unless force is set.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content, bool force = true);

// JSON with sorted keys, 2-space indent, trailing newline: byte-identical
// output for equal values. Every report carries schema_version = 1.
void write_json_file(const std::string& path, const nlohmann::json& j, bool force = true);
nlohmann::json read_json_file(const std::string& path);

// Scenario echo: every config field, round-trippable.
nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// CSV tables (numeric, header row, 17 significant digits: values survive the
// round trip bit-exactly, NaN included).
// ---------------------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // each row matches header size
};

void write_csv_file(const std::string& path, const CsvTable& table, bool force = true);
CsvTable read_csv_file(const std::string& path);

// Column layouts for the standard exports:
CsvTable curve_csv(const FreeBoundaryCurve& curve);  // component,index,x1,x2,r,phi
CsvTable weiss_csv(const WeissProfile& profile);     // radius,W,defect,corrected_term
CsvTable field_csv(const Mesh& mesh, const Field& u);  // node,x1,x2,value

// ---------------------------------------------------------------------------
// Mesh cache: documented textual format, bit-exact round trip.
//   halfdisc-mesh v1
//   nodes N
//   <x> <y> <class>     (N lines; class = on_flat + 2 * on_arc)
//   tris M
//   <a> <b> <c>         (M lines; node indices)
// ---------------------------------------------------------------------------

struct MeshCacheData {
  std::vector<Vec2> nodes;
  std::vector<int> node_class;
  std::vector<std::array<int, 3>> tris;
};

void write_mesh_cache(const std::string& path, const Mesh& mesh, bool force = true);
MeshCacheData read_mesh_cache(const std::string& path);  // IoError on bad syntax
// Bitwise comparison against a live mesh (coordinates, classes, triangles).
bool cache_matches_mesh(const MeshCacheData& cache, const Mesh& mesh);

// ---------------------------------------------------------------------------
// SVG emission: half-disc outline, optional field color map (one polygon per
// triangle), free-boundary polylines (one per component), ray and cone
// overlays. Deterministic output except the optional timestamp comment.
// ---------------------------------------------------------------------------

struct SvgCone {
  double phi_center = 0.0;  // polar angle from +x2 toward +x1
  double half_width = 0.0;
  double radius = 1.0;
};

struct SvgScene {
  const Mesh* mesh = nullptr;    // enables the triangle color map
  const Field* field = nullptr;  // values for the color map (needs mesh)
  const FreeBoundaryCurve* curve = nullptr;
  std::vector<Polyline> rays;    // one <line class="ray"> per segment
  std::vector<SvgCone> cones;    // two <line class="cone"> per cone
  bool timestamp = true;         // emit the metadata timestamp comment
  int px = 540;                  // half-disc radius in pixels
};

void write_svg_file(const std::string& path, const SvgScene& scene, bool force = true);

}  // namespace fblab
