#pragma once

// Conformal flattening of a genus-zero mesh to the unit sphere via
// conformalized mean-curvature flow (fixed initial stiffness, current mass),
// followed by radial projection, flip repair, Moebius centering, and a
// quasi-conformal quality report that gates downstream use.

#include "gsd/common.hpp"
#include "gsd/mesh.hpp"
#include "gsd/mobius.hpp"
#include "gsd/sphere.hpp"

#include <string>
#include <vector>

namespace gsd {

struct FlattenOptions {
  int max_steps = 2000;           // flow iteration budget
  double step_size = 0.1;         // initial dt, halved on flip regressions
  double motion_tolerance = 1e-7; // stop when max vertex motion drops below
  int max_smoothing_passes = 20;  // post-projection flip repair budget
  double qc_warn = 1.10;          // area-weighted mean QC above this warns
  double qc_fail = 1.30;          // ... above this hard-fails
  CenteringOptions centering;
};

struct QcReport {
  std::vector<double> per_triangle;  // sigma1/sigma2 >= 1
  double mean = 1.0;
  double max = 1.0;
  double area_weighted_mean = 1.0;   // weights = source triangle areas
};

struct SphericalParameterization {
  TriangleMesh source;                      // the mesh that was flattened
  std::vector<SpherePoint> sphere_positions;  // per-vertex, bijective
  MobiusTransform centering;                // applied to reach this gauge
  QcReport quality;
  bool qc_warning = false;
};

// QC error of one source triangle -> image triangle affine map (>= 1)
[[nodiscard]] double qc_of_triangle_pair(const Vec3& p0, const Vec3& p1,
                                         const Vec3& p2, const Vec3& q0,
                                         const Vec3& q1, const Vec3& q2);

[[nodiscard]] QcReport qc_distortion(const TriangleMesh& source,
                                     const std::vector<SpherePoint>& positions);
[[nodiscard]] inline QcReport qc_distortion(const SphericalParameterization& p) {
  return qc_distortion(p.source, p.sphere_positions);
}

// main entry: validated genus-zero mesh -> bijective centered parameterization
// Error(numeric) on non-convergence, unrepairable flips, or QC hard-fail
[[nodiscard]] SphericalParameterization conformal_to_sphere(
    const TriangleMesh& mesh, const FlattenOptions& opts = {});

// Parameterization of a mesh that is already (approximately) spherical:
// radial projection about the area centroid + centering + QC. Used by tests
// and oracles; runs the same finalization as conformal_to_sphere.
[[nodiscard]] SphericalParameterization from_spherical_mesh(
    const TriangleMesh& mesh, const FlattenOptions& opts = {});

// count of spherical triangles whose orientation disagrees with the mesh
[[nodiscard]] int count_flipped(const TriangleMesh& mesh,
                                const std::vector<SpherePoint>& positions);

// QC report as JSON text (summary + per-triangle values)
[[nodiscard]] std::string qc_to_json(const QcReport& report);

}  // namespace gsd
