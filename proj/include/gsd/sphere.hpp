#pragma once

// Geometry on the unit sphere: stereographic coordinates, point location in
// a spherical triangulation, and barycentric transfer back to a source mesh.
//
// Conventions (fixed throughout the project):
//   - stereographic projection from the north pole (0,0,1):
//         z = (x + iy) / (1 - p_z),   south pole -> 0, north pole -> inf
//   - the round metric pulls back to 4/(1+|z|^2)^2 |dz|^2
//   - barycentric coordinates live on the chord triangle of the three unit
//     vertex directions; the query ray is intersected with its plane

#include "gsd/common.hpp"
#include "gsd/mesh.hpp"

#include <array>
#include <complex>
#include <vector>

namespace gsd {

// ---------------------------------------------------------------------------
// points and coordinates
// ---------------------------------------------------------------------------

struct SpherePoint {
  Vec3 dir{0.0, 0.0, 1.0};  // unit norm

  SpherePoint() = default;
  explicit SpherePoint(const Vec3& v) : dir(v.normalized()) {}
};

// north pole returns complex(inf, 0); inverse accepts non-finite as the pole
[[nodiscard]] std::complex<double> stereographic_project(const SpherePoint& p);
[[nodiscard]] SpherePoint inverse_stereographic(const std::complex<double>& z);

// area form 4/(1+|z|^2)^2 of the round metric in the stereographic plane
[[nodiscard]] inline double spherical_area_element_weight(
    const std::complex<double>& z) {
  double r2 = std::norm(z);
  double d = 1.0 + r2;
  return 4.0 / (d * d);
}

// Homogeneous CP^1 coordinates (z1:z2) with |z1|^2+|z2|^2 = 1; z = z1/z2.
// Exact at both poles; the Moebius module works in these.
[[nodiscard]] std::array<std::complex<double>, 2> to_homogeneous(
    const SpherePoint& p);
[[nodiscard]] SpherePoint from_homogeneous(const std::complex<double>& z1,
                                           const std::complex<double>& z2);

// ---------------------------------------------------------------------------
// point location
// ---------------------------------------------------------------------------

struct BarycentricLocation {
  int triangle = -1;
  std::array<double, 3> coords{0.0, 0.0, 0.0};  // >= 0, sum to 1
  bool fallback = false;  // set when no triangle contained the query
};

// Queries outside every triangle by more than this (in radians, measured as
// signed sine distance from the great-circle edges) take the nearest-triangle
// fallback and are flagged.
inline constexpr double kLocateToleranceRad = 1e-9;

// Point location over a bijective spherical triangulation. Immutable after
// build; concurrent locate() calls are safe.
class SphereLocator {
 public:
  // directions must be unit; triangles consistently oriented (no flips) --
  // flipped input is rejected with Error(data)
  SphereLocator(std::vector<Vec3> unit_dirs,
                std::vector<std::array<int, 3>> triangles);

  [[nodiscard]] BarycentricLocation locate(const SpherePoint& q) const;
  // tests the hint triangle first; falls back to the full query on miss
  [[nodiscard]] BarycentricLocation locate(const SpherePoint& q,
                                           int hint_triangle) const;

  [[nodiscard]] int triangle_count() const {
    return static_cast<int>(tris_.size());
  }
  [[nodiscard]] const std::vector<Vec3>& directions() const { return dirs_; }
  [[nodiscard]] const std::vector<std::array<int, 3>>& triangles() const {
    return tris_;
  }

 private:
  struct Cell {
    std::vector<int> tris;  // ascending ids (deterministic tie-break)
  };

  [[nodiscard]] int cell_of(const Vec3& q) const;
  [[nodiscard]] bool test_triangle(int t, const Vec3& q, double* coords,
                                   double* min_signed) const;
  [[nodiscard]] BarycentricLocation finish(int t, const double* coords,
                                           bool fallback) const;

  std::vector<Vec3> dirs_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<Cell> cells_;
  int n_theta_ = 0, n_phi_ = 0;
};

[[nodiscard]] SphereLocator build_locator(
    const std::vector<Vec3>& unit_dirs,
    const std::vector<std::array<int, 3>>& triangles);

// b0*v0 + b1*v1 + b2*v2 on the surface mesh's flat triangle
[[nodiscard]] Vec3 embed(const TriangleMesh& surface,
                         const BarycentricLocation& loc);

}  // namespace gsd
