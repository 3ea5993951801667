#pragma once

// mesh.hpp -- closed oriented genus-zero triangle meshes and the derived
// tables (edge table, discrete metric, edge area weights) every energy
// consumes. Meshes and tables are immutable value types after construction;
// all operations are pure functions.

#include "gsd/common.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace gsd {

// ---------------------------------------------------------------------------
// core types
// ---------------------------------------------------------------------------

struct TriangleMesh {
  std::vector<Vec3> vertices;
  // counterclockwise as seen from outside
  std::vector<std::array<int, 3>> triangles;

  [[nodiscard]] int vertex_count() const { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int triangle_count() const { return static_cast<int>(triangles.size()); }
};

// Undirected edge table with triangle adjacency. Edges are stored with
// a < b and listed in first-encounter order (deterministic given the mesh).
struct EdgeTable {
  struct Edge {
    int a = -1, b = -1;    // endpoint vertex ids, a < b
    int t0 = -1, t1 = -1;  // incident triangles; t1 = -1 on boundary
  };
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, int> index;  // key(a,b) -> edge id

  [[nodiscard]] static std::uint64_t key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }
  // -1 if absent
  [[nodiscard]] int find(int a, int b) const {
    auto it = index.find(key(a, b));
    return it == index.end() ? -1 : it->second;
  }
  [[nodiscard]] int edge_count() const { return static_cast<int>(edges.size()); }
};

// Per-edge lengths l_ij > 0, parallel to an EdgeTable's edge order.
struct DiscreteMetric {
  std::vector<double> edge_lengths;
};

struct ValidationReport {
  bool is_closed = false;
  bool is_manifold = false;
  bool is_oriented = false;
  bool areas_positive = false;  // all areas above the degenerate threshold
  int euler_characteristic = 0;
  double min_triangle_area = 0.0;
  double min_edge_length = 0.0;
  std::vector<std::string> defect_list;

  // acceptance rule used by every downstream module
  [[nodiscard]] bool accepted() const {
    return is_closed && is_manifold && is_oriented && areas_positive &&
           euler_characteristic == 2;
  }
  [[nodiscard]] std::string summary() const;
};

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

// Triangles below 1e-12 x (mean triangle area) count as degenerate.
inline constexpr double kDegenerateAreaFactor = 1e-12;

[[nodiscard]] EdgeTable build_edge_table(const TriangleMesh& mesh);

[[nodiscard]] ValidationReport validate(const TriangleMesh& mesh);

// throws Error(data) with the report summary when the mesh is rejected
void require_valid(const TriangleMesh& mesh, const std::string& what);

[[nodiscard]] double triangle_area(const TriangleMesh& mesh, int t);
[[nodiscard]] std::vector<double> triangle_areas(const TriangleMesh& mesh);
[[nodiscard]] double surface_area(const TriangleMesh& mesh);

// scales all positions by 1/sqrt(area); surface_area(result) == 1
[[nodiscard]] TriangleMesh normalize_area(const TriangleMesh& mesh);

// lengths from the embedding; verifies the strict triangle inequality
[[nodiscard]] DiscreteMetric discrete_metric(const TriangleMesh& mesh,
                                             const EdgeTable& table);
// alternate constructor for externally supplied lengths (validated the same)
[[nodiscard]] DiscreteMetric discrete_metric_from_lengths(
    const TriangleMesh& mesh, const EdgeTable& table,
    const std::vector<double>& lengths);

// A_ij = area(t0) + area(t1); sum of A_ij/3 over edges equals surface_area
[[nodiscard]] std::vector<double> edge_area_weights(const TriangleMesh& mesh,
                                                    const EdgeTable& table);

// z -> -z with winding reversed so the result is again CCW-from-outside
[[nodiscard]] TriangleMesh reflect(const TriangleMesh& mesh);

// 1 -> 4 midpoint split; shared midpoints welded; optional projector applied
// to the newly created vertices (e.g. radial projection onto a sphere)
using VertexProjector = std::function<Vec3(const Vec3&)>;
[[nodiscard]] TriangleMesh midpoint_subdivide(
    const TriangleMesh& mesh, const VertexProjector& projector = nullptr);

[[nodiscard]] int euler_characteristic(const TriangleMesh& mesh);

// area-weighted centroid of the surface (used for posing and PCA)
[[nodiscard]] Vec3 area_centroid(const TriangleMesh& mesh);

}  // namespace gsd
