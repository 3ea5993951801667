#pragma once

// Shared test fixtures: tiny closed meshes with hand-checked orientation
// and a few frozen reference constants computed independently of the
// library (documented next to each value).

#include "gsd/mesh.hpp"

#include <cmath>

namespace gsd::testing {

// ---------------------------------------------------------------------------
// frozen reference values
// ---------------------------------------------------------------------------

inline constexpr double kFourPi = 12.566370614359172;
inline constexpr double kFourSqrtPi = 7.0898154036220635;  // 2|sqrt(16pi)-sqrt(4pi)|
inline constexpr double kSqrt3 = 1.7320508075688772;

// 8 pi A ln A / (A^2 - 1), cross-checked by midpoint quadrature of the
// conformal factor over the sphere (agrees to 1e-8)
inline constexpr double kE1Scaling15 = 12.228539567228164;
inline constexpr double kE1Scaling2 = 11.613792481619212;
inline constexpr double kE1Scaling5 = 8.42699720351977;

// elastic energy of the scale-2 conformal sphere automorphism between two
// unit-area-ratio spheres: 8 pi - 2 * kE1Scaling2
inline constexpr double kElastic2 = 1.9051562654799206;

// ---------------------------------------------------------------------------
// fixtures
// ---------------------------------------------------------------------------

// regular tetrahedron with unit edge length, CCW from outside
inline TriangleMesh make_tetrahedron() {
  const double s = 1.0 / (2.0 * std::sqrt(2.0));  // edge 2*sqrt(2) -> 1
  TriangleMesh m;
  m.vertices = {Vec3(1, 1, 1) * s, Vec3(1, -1, -1) * s, Vec3(-1, 1, -1) * s,
                Vec3(-1, -1, 1) * s};
  m.triangles = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return m;
}

// unit cube split into 12 triangles, CCW from outside
inline TriangleMesh make_cube() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  auto quad = [&](int a, int b, int c, int d) {
    m.triangles.push_back({a, b, c});
    m.triangles.push_back({a, c, d});
  };
  quad(0, 3, 2, 1);  // -z
  quad(4, 5, 6, 7);  // +z
  quad(0, 1, 5, 4);  // -y
  quad(1, 2, 6, 5);  // +x
  quad(2, 3, 7, 6);  // +y
  quad(3, 0, 4, 7);  // -x
  return m;
}

// two triangles glued along all three edges: combinatorially a sphere
// (V=3, E=3, F=2, Euler 2); positions chosen collinear make it a needle
inline TriangleMesh make_needle_pillow() {
  TriangleMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  m.triangles = {{0, 1, 2}, {0, 2, 1}};
  return m;
}

// flat torus grid (n x n cells), standard embedding; Euler characteristic 0
inline TriangleMesh make_torus(int n = 4, double major = 2.0,
                               double minor = 0.5) {
  TriangleMesh m;
  auto vid = [&](int i, int j) { return (i % n) * n + (j % n); };
  for (int i = 0; i < n; ++i) {
    double u = 2.0 * 3.14159265358979323846 * i / n;
    for (int j = 0; j < n; ++j) {
      double v = 2.0 * 3.14159265358979323846 * j / n;
      double r = major + minor * std::cos(v);
      m.vertices.emplace_back(r * std::cos(u), r * std::sin(u),
                              minor * std::sin(v));
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  return m;
}

}  // namespace gsd::testing
