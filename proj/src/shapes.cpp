#include "gsd/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gsd {

namespace {

TriangleMesh unit_icosahedron() {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v.normalize();
  m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  return m;
}

void check_subdivisions(int subdivisions) {
  if (subdivisions < 0 || subdivisions > 8)
    fail_data("subdivision level " + std::to_string(subdivisions) +
              " outside [0, 8]");
}

}  // namespace

TriangleMesh gen_icosphere(int subdivisions, double radius) {
  check_subdivisions(subdivisions);
  if (!(radius > 0.0)) fail_data("radius must be positive");
  TriangleMesh m = unit_icosahedron();
  VertexProjector project = [](const Vec3& p) { return p.normalized(); };
  for (int s = 0; s < subdivisions; ++s) m = midpoint_subdivide(m, project);
  if (radius != 1.0)
    for (auto& v : m.vertices) v *= radius;
  return m;
}

TriangleMesh gen_geodesic_sphere(int frequency, double radius) {
  if (frequency < 1 || frequency > 64)
    fail_data("geodesic frequency " + std::to_string(frequency) +
              " outside [1, 64]");
  if (!(radius > 0.0)) fail_data("radius must be positive");
  const TriangleMesh ico = unit_icosahedron();
  const int f = frequency;

  TriangleMesh out;
  out.vertices = ico.vertices;  // the 12 corners keep their ids

  // shared lattice points along icosahedron edges, keyed by (edge, step)
  std::map<std::pair<std::uint64_t, int>, int> edge_points;
  auto lattice_position = [&](const std::array<int, 3>& tri, int i, int j) {
    const Vec3& a = ico.vertices[static_cast<std::size_t>(tri[0])];
    const Vec3& b = ico.vertices[static_cast<std::size_t>(tri[1])];
    const Vec3& c = ico.vertices[static_cast<std::size_t>(tri[2])];
    return ((a * static_cast<double>(f - i - j) + b * static_cast<double>(i) +
             c * static_cast<double>(j)) /
            static_cast<double>(f))
        .normalized();
  };
  auto edge_point = [&](int va, int vb, int step,
                        const Vec3& position) {  // step counted from va
    int key_step = va < vb ? step : f - step;
    auto key = std::make_pair(EdgeTable::key(va, vb), key_step);
    auto it = edge_points.find(key);
    if (it != edge_points.end()) return it->second;
    int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(position);
    edge_points.emplace(key, id);
    return id;
  };

  for (const auto& tri : ico.triangles) {
    // vertex ids for the (f+1)(f+2)/2 lattice points of this face
    std::vector<std::vector<int>> id(static_cast<std::size_t>(f + 1));
    for (int i = 0; i <= f; ++i)
      id[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(f + 1 - i), -1);
    for (int i = 0; i <= f; ++i)
      for (int j = 0; j <= f - i; ++j) {
        int vid;
        if (i == 0 && j == 0)
          vid = tri[0];
        else if (i == f && j == 0)
          vid = tri[1];
        else if (i == 0 && j == f)
          vid = tri[2];
        else if (j == 0)
          vid = edge_point(tri[0], tri[1], i, lattice_position(tri, i, j));
        else if (i == 0)
          vid = edge_point(tri[0], tri[2], j, lattice_position(tri, i, j));
        else if (i + j == f)
          vid = edge_point(tri[1], tri[2], j, lattice_position(tri, i, j));
        else {
          vid = static_cast<int>(out.vertices.size());
          out.vertices.push_back(lattice_position(tri, i, j));
        }
        id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = vid;
      }
    auto at = [&](int i, int j) {
      return id[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < f; ++i)
      for (int j = 0; j < f - i; ++j) {
        out.triangles.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j < f - 1)
          out.triangles.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
  }
  if (radius != 1.0)
    for (auto& v : out.vertices) v *= radius;
  return out;
}

TriangleMesh gen_ellipsoid(double a, double b, double c, int subdivisions) {
  if (!(a > 0.0 && b > 0.0 && c > 0.0))
    fail_data("ellipsoid semi-axes must be positive");
  TriangleMesh m = gen_icosphere(subdivisions);
  for (auto& v : m.vertices) {
    v.x() *= a;
    v.y() *= b;
    v.z() *= c;
  }
  return m;
}

TriangleMesh gen_noisy_sphere(int subdivisions, double noise_multiple,
                              std::uint64_t seed) {
  if (noise_multiple < 0.0) fail_data("noise multiple must be non-negative");
  TriangleMesh m = gen_icosphere(subdivisions);
  const double sigma = noise_multiple * mean_edge_length(m);
  Rng rng(seed);
  for (auto& v : m.vertices) {
    double r = std::max(0.05, 1.0 + sigma * rng.normal());
    v *= r;
  }
  return m;
}

TriangleMesh gen_three_bump(double theta, int subdivisions) {
  struct Bump {
    Vec3 center;
    double height;
  };
  const Bump bumps[3] = {
      {Vec3(1, 0, 0), 1.4},
      {Vec3(0, 0, 1), 1.6},
      {Vec3(-std::sin(theta), std::cos(theta), 0.0), 1.2},
  };
  TriangleMesh m = gen_icosphere(subdivisions);
  for (auto& v : m.vertices) {
    Vec3 u = v.normalized();
    double r = 1.0;
    for (const auto& bump : bumps) {
      double angle = std::acos(std::clamp(u.dot(bump.center), -1.0, 1.0));
      double s = angle / kBumpWidthRad;
      r += (bump.height - 1.0) * std::exp(-s * s);
    }
    v = r * u;
  }
  return m;
}

TriangleMesh gen_random_sphere(int n_points, std::uint64_t seed, double radius) {
  if (n_points < 4) fail_data("need at least 4 points for a closed hull");
  if (!(radius > 0.0)) fail_data("radius must be positive");
  Rng rng(seed);
  std::vector<Vec3> pts(static_cast<std::size_t>(n_points));
  for (auto& p : pts) p = rng.unit_vector();

  // incremental convex hull; every point lies on the sphere, so all are hull
  // vertices and the result has 2n-4 faces
  struct Face {
    int a, b, c;
    Vec3 n;  // unit outward normal
  };
  auto make_face = [&](int a, int b, int c) {
    Vec3 n = (pts[static_cast<std::size_t>(b)] - pts[static_cast<std::size_t>(a)])
                 .cross(pts[static_cast<std::size_t>(c)] -
                        pts[static_cast<std::size_t>(a)])
                 .normalized();
    return Face{a, b, c, n};
  };

  // initial tetrahedron from the first four points, oriented outward
  std::vector<Face> faces;
  {
    const Vec3& d = pts[3];
    Vec3 n = (pts[1] - pts[0]).cross(pts[2] - pts[0]);
    int v0 = 0, v1 = 1, v2 = 2;
    if (n.dot(d - pts[0]) > 0.0) std::swap(v1, v2);  // keep 3 below (v0,v1,v2)
    faces.push_back(make_face(v0, v1, v2));
    faces.push_back(make_face(v0, v2, 3));
    faces.push_back(make_face(v2, v1, 3));
    faces.push_back(make_face(v1, v0, 3));
  }

  const double eps = 1e-12;
  for (int p = 4; p < n_points; ++p) {
    const Vec3& q = pts[static_cast<std::size_t>(p)];
    std::vector<char> visible(faces.size(), 0);
    bool any = false;
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      double d = faces[fi].n.dot(q - pts[static_cast<std::size_t>(faces[fi].a)]);
      if (d > eps) {
        visible[fi] = 1;
        any = true;
      }
    }
    if (!any)
      fail_numeric("hull insertion found no visible face for point " +
                   std::to_string(p));

    // horizon edges: directed edges of visible faces whose twin face is hidden
    std::unordered_map<std::uint64_t, std::pair<int, int>> edge_faces;
    auto ukey = [](int a, int b) { return EdgeTable::key(a, b); };
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      int vs[3] = {faces[fi].a, faces[fi].b, faces[fi].c};
      for (int k = 0; k < 3; ++k) {
        auto key = ukey(vs[k], vs[(k + 1) % 3]);
        auto it = edge_faces.find(key);
        if (it == edge_faces.end())
          edge_faces.emplace(key, std::make_pair(static_cast<int>(fi), -1));
        else
          it->second.second = static_cast<int>(fi);
      }
    }
    std::vector<Face> next;
    next.reserve(faces.size() + 4);
    for (std::size_t fi = 0; fi < faces.size(); ++fi)
      if (!visible[fi]) next.push_back(faces[fi]);
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
      if (!visible[fi]) continue;
      int vs[3] = {faces[fi].a, faces[fi].b, faces[fi].c};
      for (int k = 0; k < 3; ++k) {
        int u = vs[k], v = vs[(k + 1) % 3];
        auto [f0, f1] = edge_faces.at(ukey(u, v));
        int other = (f0 == static_cast<int>(fi)) ? f1 : f0;
        if (other < 0 || !visible[static_cast<std::size_t>(other)])
          next.push_back(make_face(u, v, p));
      }
    }
    faces = std::move(next);
  }

  TriangleMesh m;
  m.vertices = std::move(pts);
  if (radius != 1.0)
    for (auto& v : m.vertices) v *= radius;
  m.triangles.reserve(faces.size());
  for (const auto& face : faces) m.triangles.push_back({face.a, face.b, face.c});
  return m;
}

double mean_edge_length(const TriangleMesh& mesh) {
  auto table = build_edge_table(mesh);
  if (table.edges.empty()) fail_data("mesh has no edges");
  double total = 0.0;
  for (const auto& e : table.edges)
    total += (mesh.vertices[static_cast<std::size_t>(e.a)] -
              mesh.vertices[static_cast<std::size_t>(e.b)])
                 .norm();
  return total / static_cast<double>(table.edge_count());
}

}  // namespace gsd
