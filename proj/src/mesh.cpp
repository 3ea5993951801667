#include "gsd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace gsd {

namespace {

Vec3 triangle_normal_scaled(const TriangleMesh& mesh, int t) {
  const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Vec3& a = mesh.vertices[static_cast<std::size_t>(tri[0])];
  const Vec3& b = mesh.vertices[static_cast<std::size_t>(tri[1])];
  const Vec3& c = mesh.vertices[static_cast<std::size_t>(tri[2])];
  return (b - a).cross(c - a);
}

void check_indices(const TriangleMesh& mesh) {
  const int n = mesh.vertex_count();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int v = mesh.triangles[t][static_cast<std::size_t>(k)];
      if (v < 0 || v >= n)
        fail_data("triangle " + std::to_string(t) +
                  " references vertex " + std::to_string(v) +
                  " outside [0, " + std::to_string(n) + ")");
    }
    const auto& tri = mesh.triangles[t];
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      fail_data("triangle " + std::to_string(t) + " repeats a vertex");
  }
}

void validate_metric(const TriangleMesh& mesh, const EdgeTable& table,
                     const std::vector<double>& lengths) {
  if (lengths.size() != table.edges.size())
    fail_data("metric has " + std::to_string(lengths.size()) +
              " lengths for " + std::to_string(table.edges.size()) + " edges");
  for (std::size_t e = 0; e < lengths.size(); ++e)
    if (!(lengths[e] > 0.0) || !std::isfinite(lengths[e]))
      fail_data("edge " + std::to_string(e) + " has non-positive length " +
                format_g9(lengths[e]));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    double l[3];
    for (int k = 0; k < 3; ++k) {
      int e = table.find(tri[static_cast<std::size_t>(k)],
                         tri[static_cast<std::size_t>((k + 1) % 3)]);
      l[k] = lengths[static_cast<std::size_t>(e)];
    }
    for (int k = 0; k < 3; ++k)
      if (!(l[k] < l[(k + 1) % 3] + l[(k + 2) % 3]))
        fail_data("triangle " + std::to_string(t) +
                  " violates the strict triangle inequality: " +
                  format_g9(l[0]) + ", " + format_g9(l[1]) + ", " +
                  format_g9(l[2]));
  }
}

}  // namespace

std::string ValidationReport::summary() const {
  std::ostringstream out;
  out << (accepted() ? "accepted" : "rejected") << ": closed=" << is_closed
      << " manifold=" << is_manifold << " oriented=" << is_oriented
      << " areas_positive=" << areas_positive
      << " euler=" << euler_characteristic
      << " min_area=" << format_g9(min_triangle_area)
      << " min_edge=" << format_g9(min_edge_length);
  for (const auto& d : defect_list) out << "\n  - " << d;
  return out.str();
}

EdgeTable build_edge_table(const TriangleMesh& mesh) {
  check_indices(mesh);
  EdgeTable table;
  table.index.reserve(mesh.triangles.size() * 2);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[static_cast<std::size_t>(k)];
      int b = tri[static_cast<std::size_t>((k + 1) % 3)];
      auto key = EdgeTable::key(a, b);
      auto it = table.index.find(key);
      if (it == table.index.end()) {
        EdgeTable::Edge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.t0 = static_cast<int>(t);
        table.index.emplace(key, table.edge_count());
        table.edges.push_back(e);
      } else {
        auto& e = table.edges[static_cast<std::size_t>(it->second)];
        if (e.t1 != -1)
          fail_data("edge (" + std::to_string(e.a) + ", " +
                    std::to_string(e.b) + ") is shared by more than two triangles");
        e.t1 = static_cast<int>(t);
      }
    }
  }
  return table;
}

ValidationReport validate(const TriangleMesh& mesh) {
  ValidationReport report;
  if (mesh.vertex_count() < 3 || mesh.triangle_count() < 2) {
    report.defect_list.push_back("too few vertices or triangles");
    return report;
  }

  // referenced indices + per-triangle duplicate vertices
  try {
    check_indices(mesh);
  } catch (const Error& err) {
    report.defect_list.emplace_back(err.what());
    return report;
  }

  // duplicate vertex positions are almost always an authoring bug, and a
  // degenerate mesh downstream; report them as defects
  {
    std::map<std::array<double, 3>, int> seen;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec3& p = mesh.vertices[static_cast<std::size_t>(v)];
      std::array<double, 3> key{p.x(), p.y(), p.z()};
      auto [it, inserted] = seen.emplace(key, v);
      if (!inserted)
        report.defect_list.push_back("vertices " + std::to_string(it->second) +
                                     " and " + std::to_string(v) +
                                     " share the same position");
    }
  }

  // edge table; over-shared edges surface as non-manifold rather than a throw
  EdgeTable table;
  bool edges_ok = true;
  try {
    table = build_edge_table(mesh);
  } catch (const Error& err) {
    report.defect_list.emplace_back(err.what());
    report.is_manifold = false;
    edges_ok = false;
  }

  if (edges_ok) {
    report.is_closed = true;
    for (const auto& e : table.edges)
      if (e.t1 == -1) {
        report.is_closed = false;
        report.defect_list.push_back("boundary edge (" + std::to_string(e.a) +
                                     ", " + std::to_string(e.b) + ")");
        if (report.defect_list.size() > 20) break;
      }

    // consistent orientation: each undirected edge must be traversed once in
    // each direction by its two incident triangles
    if (report.is_closed) {
      report.is_oriented = true;
      std::unordered_map<std::uint64_t, int> directed;
      directed.reserve(mesh.triangles.size() * 3);
      auto dkey = [&](int a, int b) {
        return (static_cast<std::uint64_t>(a) << 32) |
               static_cast<std::uint32_t>(b);
      };
      for (const auto& tri : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
          int a = tri[static_cast<std::size_t>(k)];
          int b = tri[static_cast<std::size_t>((k + 1) % 3)];
          if (++directed[dkey(a, b)] > 1) {
            if (report.is_oriented)
              report.defect_list.push_back(
                  "edge (" + std::to_string(a) + ", " + std::to_string(b) +
                  ") traversed twice in the same direction");
            report.is_oriented = false;
          }
        }
    }

    // vertex umbrellas: the triangles around each vertex must form one cycle
    report.is_manifold = report.is_closed;
    if (report.is_closed) {
      std::vector<int> degree(static_cast<std::size_t>(mesh.vertex_count()), 0);
      std::vector<int> incident(static_cast<std::size_t>(mesh.vertex_count()), 0);
      for (const auto& e : table.edges) {
        ++degree[static_cast<std::size_t>(e.a)];
        ++degree[static_cast<std::size_t>(e.b)];
      }
      for (const auto& tri : mesh.triangles)
        for (int v : tri) ++incident[static_cast<std::size_t>(v)];
      for (int v = 0; v < mesh.vertex_count(); ++v) {
        // on a closed manifold, #incident triangles == #incident edges, and a
        // single umbrella is one cycle; a pinched vertex has equality too, so
        // walk the fan to count components
        if (incident[static_cast<std::size_t>(v)] == 0) {
          report.is_manifold = false;
          report.defect_list.push_back("vertex " + std::to_string(v) +
                                       " is isolated");
          continue;
        }
        if (degree[static_cast<std::size_t>(v)] !=
            incident[static_cast<std::size_t>(v)]) {
          report.is_manifold = false;
          report.defect_list.push_back("vertex " + std::to_string(v) +
                                       " has a non-disk neighborhood");
        }
      }
      if (report.is_manifold) {
        // fan walk: from each vertex, chain next-triangle-across-edge and
        // verify a single cycle covers every incident triangle
        std::vector<std::vector<int>> star(
            static_cast<std::size_t>(mesh.vertex_count()));
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
          for (int v : mesh.triangles[t])
            star[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
        for (int v = 0; v < mesh.vertex_count() && report.is_manifold; ++v) {
          const auto& fan = star[static_cast<std::size_t>(v)];
          // map outgoing-neighbor -> triangle for the corner at v
          std::unordered_map<int, int> next_tri;
          next_tri.reserve(fan.size());
          bool local_ok = true;
          for (int t : fan) {
            const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
            int i = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
            int out = tri[static_cast<std::size_t>((i + 1) % 3)];
            if (!next_tri.emplace(out, t).second) local_ok = false;
          }
          if (local_ok) {
            // walk the cycle
            const auto& tri0 =
                mesh.triangles[static_cast<std::size_t>(fan.front())];
            int i = tri0[0] == v ? 0 : (tri0[1] == v ? 1 : 2);
            int start = tri0[static_cast<std::size_t>((i + 1) % 3)];
            int cur = start;
            std::size_t steps = 0;
            do {
              auto it = next_tri.find(cur);
              if (it == next_tri.end()) break;
              const auto& tri =
                  mesh.triangles[static_cast<std::size_t>(it->second)];
              int j = tri[0] == v ? 0 : (tri[1] == v ? 1 : 2);
              cur = tri[static_cast<std::size_t>((j + 2) % 3)];
              ++steps;
            } while (cur != start && steps <= fan.size());
            local_ok = cur == start && steps == fan.size();
          }
          if (!local_ok) {
            report.is_manifold = false;
            report.defect_list.push_back("vertex " + std::to_string(v) +
                                         " has a non-disk neighborhood");
          }
        }
      }
    }

    report.euler_characteristic =
        mesh.vertex_count() - table.edge_count() + mesh.triangle_count();
    if (report.is_closed && report.is_manifold &&
        report.euler_characteristic != 2)
      report.defect_list.push_back(
          "Euler characteristic " + std::to_string(report.euler_characteristic) +
          " (genus " +
          std::to_string((2 - report.euler_characteristic) / 2) + "), expected 2");
  }

  // geometry: areas and edge lengths
  double mean_area = 0.0;
  report.min_triangle_area = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double a = triangle_area(mesh, t);
    mean_area += a;
    report.min_triangle_area = std::min(report.min_triangle_area, a);
  }
  mean_area /= std::max(1, mesh.triangle_count());
  report.areas_positive =
      report.min_triangle_area > kDegenerateAreaFactor * mean_area;
  if (!report.areas_positive)
    report.defect_list.push_back("degenerate triangle area " +
                                 format_g9(report.min_triangle_area));

  report.min_edge_length = std::numeric_limits<double>::infinity();
  if (edges_ok)
    for (const auto& e : table.edges)
      report.min_edge_length = std::min(
          report.min_edge_length,
          (mesh.vertices[static_cast<std::size_t>(e.a)] -
           mesh.vertices[static_cast<std::size_t>(e.b)]).norm());

  return report;
}

void require_valid(const TriangleMesh& mesh, const std::string& what) {
  auto report = validate(mesh);
  if (!report.accepted()) fail_data(what + " rejected -- " + report.summary());
}

double triangle_area(const TriangleMesh& mesh, int t) {
  return 0.5 * triangle_normal_scaled(mesh, t).norm();
}

std::vector<double> triangle_areas(const TriangleMesh& mesh) {
  std::vector<double> areas(static_cast<std::size_t>(mesh.triangle_count()));
  for (int t = 0; t < mesh.triangle_count(); ++t)
    areas[static_cast<std::size_t>(t)] = triangle_area(mesh, t);
  return areas;
}

double surface_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) total += triangle_area(mesh, t);
  return total;
}

TriangleMesh normalize_area(const TriangleMesh& mesh) {
  double area = surface_area(mesh);
  if (!(area > 0.0) || !std::isfinite(area))
    fail_data("cannot normalize a mesh with area " + format_g9(area));
  double s = 1.0 / std::sqrt(area);
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v *= s;
  return out;
}

DiscreteMetric discrete_metric(const TriangleMesh& mesh,
                               const EdgeTable& table) {
  std::vector<double> lengths(table.edges.size());
  for (std::size_t e = 0; e < table.edges.size(); ++e)
    lengths[e] = (mesh.vertices[static_cast<std::size_t>(table.edges[e].a)] -
                  mesh.vertices[static_cast<std::size_t>(table.edges[e].b)])
                     .norm();
  validate_metric(mesh, table, lengths);
  return DiscreteMetric{std::move(lengths)};
}

DiscreteMetric discrete_metric_from_lengths(const TriangleMesh& mesh,
                                            const EdgeTable& table,
                                            const std::vector<double>& lengths) {
  validate_metric(mesh, table, lengths);
  return DiscreteMetric{lengths};
}

std::vector<double> edge_area_weights(const TriangleMesh& mesh,
                                      const EdgeTable& table) {
  auto areas = triangle_areas(mesh);
  std::vector<double> weights(table.edges.size(), 0.0);
  for (std::size_t e = 0; e < table.edges.size(); ++e) {
    const auto& edge = table.edges[e];
    if (edge.t0 < 0 || edge.t1 < 0)
      fail_data("edge (" + std::to_string(edge.a) + ", " +
                std::to_string(edge.b) +
                ") lacks two incident triangles; the mesh is not closed");
    weights[e] = areas[static_cast<std::size_t>(edge.t0)] +
                 areas[static_cast<std::size_t>(edge.t1)];
  }
  return weights;
}

TriangleMesh reflect(const TriangleMesh& mesh) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v.z() = -v.z();
  for (auto& tri : out.triangles) std::swap(tri[1], tri[2]);
  return out;
}

TriangleMesh midpoint_subdivide(const TriangleMesh& mesh,
                                const VertexProjector& projector) {
  TriangleMesh out;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](int a, int b) {
    auto key = EdgeTable::key(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    Vec3 p = 0.5 * (mesh.vertices[static_cast<std::size_t>(a)] +
                    mesh.vertices[static_cast<std::size_t>(b)]);
    if (projector) p = projector(p);
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    midpoint.emplace(key, id);
    return id;
  };
  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& tri : mesh.triangles) {
    int m01 = mid(tri[0], tri[1]);
    int m12 = mid(tri[1], tri[2]);
    int m20 = mid(tri[2], tri[0]);
    out.triangles.push_back({tri[0], m01, m20});
    out.triangles.push_back({tri[1], m12, m01});
    out.triangles.push_back({tri[2], m20, m12});
    out.triangles.push_back({m01, m12, m20});
  }
  return out;
}

int euler_characteristic(const TriangleMesh& mesh) {
  return mesh.vertex_count() - build_edge_table(mesh).edge_count() +
         mesh.triangle_count();
}

Vec3 area_centroid(const TriangleMesh& mesh) {
  Vec3 weighted = Vec3::Zero();
  double total = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
    Vec3 c = (mesh.vertices[static_cast<std::size_t>(tri[0])] +
              mesh.vertices[static_cast<std::size_t>(tri[1])] +
              mesh.vertices[static_cast<std::size_t>(tri[2])]) /
             3.0;
    double a = triangle_area(mesh, t);
    weighted += a * c;
    total += a;
  }
  if (!(total > 0.0)) fail_data("mesh has zero total area");
  return weighted / total;
}

}  // namespace gsd
