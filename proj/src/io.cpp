#include "fblab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fblab/errors.hpp"

namespace fblab {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void check_overwrite(const std::string& path, bool force) {
  if (!force && std::filesystem::exists(path))
    throw Error(Err::IoError, "refusing to overwrite existing file '" + path +
                                  "' without the force flag");
}

std::ofstream open_out(const std::string& path, bool force) {
  check_overwrite(path, force);
  std::ofstream out(path);
  if (!out) throw Error(Err::IoError, "cannot write file '" + path + "'");
  return out;
}

double parse_number(const std::string& token, const std::string& path, int line) {
  char* end = nullptr;
  const double x = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size())
    throw Error(Err::IoError, path + ":" + std::to_string(line) +
                                  ": expected a number, got '" + token + "'");
  return x;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Err::IoError, "cannot read file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content, bool force) {
  std::ofstream out = open_out(path, force);
  out << content;
  if (!out) throw Error(Err::IoError, "write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& j, bool force) {
  write_text_file(path, j.dump(2) + "\n", force);
}

nlohmann::json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Err::IoError, "bad JSON in '" + path + "': " + e.what());
  }
}

namespace {

const char* datum_name(DatumChoice d) {
  switch (d) {
    case DatumChoice::Small: return "small";
    case DatumChoice::Large: return "large";
    case DatumChoice::Zero: return "zero";
  }
  return "small";
}

const char* arc_variant_name(ArcVariant v) {
  return v == ArcVariant::Printed ? "printed" : "large_trace";
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& sc) {
  nlohmann::json j;
  j["scenario"]["name"] = scenario_name(sc.kind);
  j["scenario"]["label"] = sc.label;
  j["scenario"]["datum"] = datum_name(sc.datum);
  j["scenario"]["radii"] = sc.radii;
  j["scenario"]["eps_list"] = sc.eps_list;
  j["scenario"]["include_control"] = sc.include_control;
  j["scenario"]["arc_variant"] = arc_variant_name(sc.arc_variant);
  j["scenario"]["delta"] = sc.delta;
  j["scenario"]["nt_weak"] = sc.nt_weak;
  j["scenario"]["weak_c"] = sc.weak_c;
  j["scenario"]["levels"] = sc.levels;
  j["scenario"]["n_scales"] = sc.n_scales;
  j["scenario"]["tol_grad"] = sc.tol_grad;
  j["scenario"]["tol_jump"] = sc.tol_jump;
  j["scenario"]["sigma_slack"] = sc.sigma_slack;
  j["scenario"]["detach_radius"] = sc.detach_radius;
  j["scenario"]["tol_class"] = sc.tol_class;

  j["spec"]["alpha_plus"] = sc.spec.alpha_plus;
  j["spec"]["alpha_minus"] = sc.spec.alpha_minus;
  j["spec"]["lambda_plus"] = sc.spec.lambda_plus;
  j["spec"]["lambda_minus"] = sc.spec.lambda_minus;
  j["spec"]["g_coeff"] = sc.spec.g_coeff;
  j["spec"]["g_exponent"] = sc.spec.g_exponent;

  j["mesh"]["rings"] = sc.mesh.rings;
  j["mesh"]["q"] = sc.mesh.q;
  j["mesh"]["angular_n"] = sc.mesh.angular_n;
  j["mesh"]["aspect"] = sc.mesh.aspect;

  j["solve"]["gd_iters"] = sc.solve.gd_iters;
  j["solve"]["gd_tol"] = sc.solve.gd_tol;
  j["solve"]["polish_sweeps"] = sc.solve.polish_sweeps;
  j["solve"]["sweep_shuffle_seed"] = sc.solve.sweep_shuffle_seed;
  j["solve"]["accept_rel_tol"] = sc.solve.accept_rel_tol;
  j["solve"]["eps_schedule"] = sc.solve.eps_schedule;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  try {
    Scenario sc = default_scenario(
        scenario_kind_from_name(j.at("scenario").at("name").get<std::string>()));
    const auto& s = j.at("scenario");
    sc.label = s.at("label").get<std::string>();
    const std::string datum = s.at("datum").get<std::string>();
    if (datum == "small") sc.datum = DatumChoice::Small;
    else if (datum == "large") sc.datum = DatumChoice::Large;
    else if (datum == "zero") sc.datum = DatumChoice::Zero;
    else throw Error(Err::ConfigError, "bad scenario document: datum '" + datum + "'");
    sc.radii = s.at("radii").get<std::vector<double>>();
    sc.eps_list = s.at("eps_list").get<std::vector<double>>();
    sc.include_control = s.at("include_control").get<bool>();
    const std::string arc = s.at("arc_variant").get<std::string>();
    if (arc == "printed") sc.arc_variant = ArcVariant::Printed;
    else if (arc == "large_trace") sc.arc_variant = ArcVariant::LargeTrace;
    else throw Error(Err::ConfigError, "bad scenario document: arc_variant '" + arc + "'");
    sc.delta = s.at("delta").get<double>();
    sc.nt_weak = s.at("nt_weak").get<bool>();
    sc.weak_c = s.at("weak_c").get<double>();
    sc.levels = s.at("levels").get<int>();
    sc.n_scales = s.at("n_scales").get<int>();
    sc.tol_grad = s.at("tol_grad").get<double>();
    sc.tol_jump = s.at("tol_jump").get<double>();
    sc.sigma_slack = s.at("sigma_slack").get<double>();
    sc.detach_radius = s.at("detach_radius").get<double>();
    sc.tol_class = s.at("tol_class").get<double>();

    const auto& p = j.at("spec");
    sc.spec.alpha_plus = p.at("alpha_plus").get<double>();
    sc.spec.alpha_minus = p.at("alpha_minus").get<double>();
    sc.spec.lambda_plus = p.at("lambda_plus").get<double>();
    sc.spec.lambda_minus = p.at("lambda_minus").get<double>();
    sc.spec.g_coeff = p.at("g_coeff").get<double>();
    sc.spec.g_exponent = p.at("g_exponent").get<double>();

    const auto& m = j.at("mesh");
    sc.mesh.rings = m.at("rings").get<int>();
    sc.mesh.q = m.at("q").get<double>();
    sc.mesh.angular_n = m.at("angular_n").get<int>();
    sc.mesh.aspect = m.at("aspect").get<double>();

    const auto& v = j.at("solve");
    sc.solve.gd_iters = v.at("gd_iters").get<int>();
    sc.solve.gd_tol = v.at("gd_tol").get<double>();
    sc.solve.polish_sweeps = v.at("polish_sweeps").get<int>();
    sc.solve.sweep_shuffle_seed = v.at("sweep_shuffle_seed").get<unsigned>();
    sc.solve.accept_rel_tol = v.at("accept_rel_tol").get<double>();
    sc.solve.eps_schedule = v.at("eps_schedule").get<std::vector<double>>();
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Err::ConfigError, std::string("bad scenario document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_csv_file(const std::string& path, const CsvTable& table, bool force) {
  std::ofstream out = open_out(path, force);
  for (size_t c = 0; c < table.header.size(); ++c)
    out << (c ? "," : "") << table.header[c];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw Error(Err::InvalidArgument, "CSV row width does not match the header");
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt17(row[c]);
    out << "\n";
  }
  if (!out) throw Error(Err::IoError, "write failed for '" + path + "'");
}

CsvTable read_csv_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> tokens;
    std::string token;
    std::istringstream ls(line);
    while (std::getline(ls, token, ',')) tokens.push_back(token);
    if (lineno == 1) {
      table.header = tokens;
      continue;
    }
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const std::string& t : tokens) row.push_back(parse_number(t, path, lineno));
    if (row.size() != table.header.size())
      throw Error(Err::IoError, path + ":" + std::to_string(lineno) +
                                    ": row width does not match the header");
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(Err::IoError, "empty CSV file '" + path + "'");
  return table;
}

CsvTable curve_csv(const FreeBoundaryCurve& curve) {
  CsvTable t;
  t.header = {"component", "index", "x1", "x2", "r", "phi"};
  for (size_t c = 0; c < curve.component_points.size(); ++c) {
    const auto& walk = curve.component_points[c];
    for (size_t i = 0; i < walk.size(); ++i) {
      const FbPoint& p = curve.points[walk[i]];
      t.rows.push_back({static_cast<double>(c), static_cast<double>(i), p.x[0], p.x[1],
                        p.r, p.phi});
    }
  }
  return t;
}

CsvTable weiss_csv(const WeissProfile& profile) {
  CsvTable t;
  t.header = {"radius", "W", "defect", "corrected_term"};
  for (size_t i = 0; i < profile.radii.size(); ++i) {
    const double corr = profile.corrected ? profile.kappa_term[i] : 0.0;
    t.rows.push_back(
        {profile.radii[i], profile.W_values[i], profile.homogeneity_defects[i], corr});
  }
  return t;
}

CsvTable field_csv(const Mesh& mesh, const Field& u) {
  if (u.size() != mesh.n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");
  CsvTable t;
  t.header = {"node", "x1", "x2", "value"};
  for (int n = 0; n < mesh.n_nodes(); ++n)
    t.rows.push_back({static_cast<double>(n), mesh.nodes[n][0], mesh.nodes[n][1], u[n]});
  return t;
}

// ---------------------------------------------------------------------------
// Mesh cache
// ---------------------------------------------------------------------------

void write_mesh_cache(const std::string& path, const Mesh& mesh, bool force) {
  std::ofstream out = open_out(path, force);
  out << "halfdisc-mesh v1\n";
  out << "nodes " << mesh.n_nodes() << "\n";
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    const int cls = (mesh.on_flat[n] ? 1 : 0) + (mesh.on_arc[n] ? 2 : 0);
    out << fmt17(mesh.nodes[n][0]) << " " << fmt17(mesh.nodes[n][1]) << " " << cls << "\n";
  }
  out << "tris " << mesh.n_tris() << "\n";
  for (const auto& t : mesh.tris) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  if (!out) throw Error(Err::IoError, "write failed for '" + path + "'");
}

MeshCacheData read_mesh_cache(const std::string& path) {
  std::istringstream in(read_text_file(path));
  const auto fail = [&](int line, const std::string& msg) -> void {
    throw Error(Err::IoError, path + ":" + std::to_string(line) + ": " + msg);
  };
  std::string line;
  int lineno = 0;
  const auto next_line = [&]() {
    if (!std::getline(in, line)) fail(lineno + 1, "unexpected end of file");
    ++lineno;
  };

  next_line();
  if (line != "halfdisc-mesh v1") fail(lineno, "missing 'halfdisc-mesh v1' header");

  MeshCacheData data;
  next_line();
  long n_nodes = 0;
  if (std::sscanf(line.c_str(), "nodes %ld", &n_nodes) != 1 || n_nodes < 0)
    fail(lineno, "expected 'nodes N'");
  data.nodes.reserve(n_nodes);
  data.node_class.reserve(n_nodes);
  for (long i = 0; i < n_nodes; ++i) {
    next_line();
    std::istringstream ls(line);
    std::string sx, sy, sc;
    if (!(ls >> sx >> sy >> sc)) fail(lineno, "expected 'x y class'");
    data.nodes.emplace_back(parse_number(sx, path, lineno), parse_number(sy, path, lineno));
    const double cls = parse_number(sc, path, lineno);
    if (cls != 0.0 && cls != 1.0 && cls != 2.0 && cls != 3.0)
      fail(lineno, "node class must be 0, 1, 2, or 3");
    data.node_class.push_back(static_cast<int>(cls));
  }

  next_line();
  long n_tris = 0;
  if (std::sscanf(line.c_str(), "tris %ld", &n_tris) != 1 || n_tris < 0)
    fail(lineno, "expected 'tris M'");
  data.tris.reserve(n_tris);
  for (long i = 0; i < n_tris; ++i) {
    next_line();
    std::array<int, 3> t{};
    if (std::sscanf(line.c_str(), "%d %d %d", &t[0], &t[1], &t[2]) != 3)
      fail(lineno, "expected three node indices");
    for (const int v : t)
      if (v < 0 || v >= n_nodes) fail(lineno, "triangle index out of range");
    data.tris.push_back(t);
  }
  return data;
}

bool cache_matches_mesh(const MeshCacheData& cache, const Mesh& mesh) {
  if (static_cast<int>(cache.nodes.size()) != mesh.n_nodes()) return false;
  if (static_cast<int>(cache.tris.size()) != mesh.n_tris()) return false;
  for (int n = 0; n < mesh.n_nodes(); ++n) {
    if (cache.nodes[n][0] != mesh.nodes[n][0]) return false;
    if (cache.nodes[n][1] != mesh.nodes[n][1]) return false;
    const int cls = (mesh.on_flat[n] ? 1 : 0) + (mesh.on_arc[n] ? 2 : 0);
    if (cache.node_class[n] != cls) return false;
  }
  for (int t = 0; t < mesh.n_tris(); ++t)
    if (cache.tris[t] != mesh.tris[t]) return false;
  return true;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr double kPad = 20.0;

struct Mapper {
  double px;
  double X(double x1) const { return kPad + px * x1; }
  double Y(double x2) const { return kPad + px * (1.0 - x2); }
};

std::string fmt2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string color_of(double v, double vscale) {
  double s = vscale > 0.0 ? v / vscale : 0.0;
  s = std::clamp(s, -1.0, 1.0);
  // White at zero, red for positive, blue for negative values.
  int r = 255, g = 255, b = 255;
  if (s >= 0.0) {
    r = 255 - static_cast<int>(std::lround(s * (255 - 198)));
    g = 255 - static_cast<int>(std::lround(s * (255 - 45)));
    b = 255 - static_cast<int>(std::lround(s * (255 - 67)));
  } else {
    r = 255 + static_cast<int>(std::lround(s * (255 - 54)));
    g = 255 + static_cast<int>(std::lround(s * (255 - 88)));
    b = 255 + static_cast<int>(std::lround(s * (255 - 203)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

void write_svg_file(const std::string& path, const SvgScene& scene, bool force) {
  if (scene.field != nullptr && scene.mesh == nullptr)
    throw Error(Err::InvalidArgument, "a field color map needs the mesh");
  if (scene.mesh != nullptr && scene.field != nullptr &&
      scene.field->size() != scene.mesh->n_nodes())
    throw Error(Err::InvalidArgument, "field size does not match the mesh");

  const Mapper m{static_cast<double>(scene.px)};
  const double width = 2.0 * kPad + m.px;
  const double height = 2.0 * kPad + 2.0 * m.px;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt2(width)
      << "\" height=\"" << fmt2(height) << "\" viewBox=\"0 0 " << fmt2(width) << " "
      << fmt2(height) << "\">\n";
  if (scene.timestamp) {
    char stamp[64] = "unknown";
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    if (gmtime_r(&now, &tm_utc) != nullptr)
      std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    svg << "<!-- generated: " << stamp << " -->\n";
  }

  // Field color map: one polygon per triangle.
  if (scene.mesh != nullptr && scene.field != nullptr) {
    const Mesh& mesh = *scene.mesh;
    const Field& u = *scene.field;
    const double vscale = u.size() > 0 ? u.cwiseAbs().maxCoeff() : 0.0;
    for (const auto& t : mesh.tris) {
      const double mean = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
      svg << "<polygon class=\"tri\" points=\"";
      for (int k = 0; k < 3; ++k) {
        const Vec2& p = mesh.nodes[t[k]];
        svg << (k ? " " : "") << fmt2(m.X(p[0])) << "," << fmt2(m.Y(p[1]));
      }
      svg << "\" fill=\"" << color_of(mean, vscale) << "\" stroke=\"none\"/>\n";
    }
  }

  // Half-disc outline: unit arc from (0,1) through (1,0) to (0,-1), closed
  // by the diameter.
  svg << "<path class=\"outline\" d=\"M " << fmt2(m.X(0)) << " " << fmt2(m.Y(1)) << " A "
      << fmt2(m.px) << " " << fmt2(m.px) << " 0 0 1 " << fmt2(m.X(0)) << " " << fmt2(m.Y(-1))
      << " Z\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";

  // Free boundary: one polyline per component, walk order.
  if (scene.curve != nullptr) {
    for (const auto& walk : scene.curve->component_points) {
      svg << "<polyline class=\"fb\" points=\"";
      for (size_t i = 0; i < walk.size(); ++i) {
        const Vec2& p = scene.curve->points[walk[i]].x;
        svg << (i ? " " : "") << fmt2(m.X(p[0])) << "," << fmt2(m.Y(p[1]));
      }
      svg << "\" fill=\"none\" stroke=\"#b03030\" stroke-width=\"2\"/>\n";
    }
  }

  for (const Polyline& ray : scene.rays) {
    for (const auto& [a, b] : ray) {
      svg << "<line class=\"ray\" x1=\"" << fmt2(m.X(a[0])) << "\" y1=\"" << fmt2(m.Y(a[1]))
          << "\" x2=\"" << fmt2(m.X(b[0])) << "\" y2=\"" << fmt2(m.Y(b[1]))
          << "\" stroke=\"#2060c0\" stroke-width=\"1\" stroke-dasharray=\"6 3\"/>\n";
    }
  }

  for (const SvgCone& cone : scene.cones) {
    for (const double side : {-1.0, 1.0}) {
      const double phi = cone.phi_center + side * cone.half_width;
      const double x1 = cone.radius * std::sin(phi);
      const double x2 = cone.radius * std::cos(phi);
      svg << "<line class=\"cone\" x1=\"" << fmt2(m.X(0)) << "\" y1=\"" << fmt2(m.Y(0))
          << "\" x2=\"" << fmt2(m.X(x1)) << "\" y2=\"" << fmt2(m.Y(x2))
          << "\" stroke=\"#208040\" stroke-width=\"1\" stroke-dasharray=\"2 3\"/>\n";
    }
  }

  svg << "</svg>\n";
  write_text_file(path, svg.str(), force);
}

}  // namespace fblab
