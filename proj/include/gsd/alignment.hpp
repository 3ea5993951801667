#pragma once

// Seeded minimization of the symmetric distortion energy over the Moebius
// group: ellipsoid axis frames, the 24/48 initial transforms, steepest
// descent in the 6-parameter chart, and the d_sd entry points (single pair,
// distance matrix, metric audit).

#include "gsd/common.hpp"
#include "gsd/conformal.hpp"
#include "gsd/energy.hpp"
#include "gsd/mesh.hpp"
#include "gsd/mobius.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gsd {

// ---------------------------------------------------------------------------
// axis frames and seeds
// ---------------------------------------------------------------------------

struct AxisFrame {
  std::array<Vec3, 3> axes;          // orthonormal, descending eigenvalue
  std::array<double, 3> eigenvalues;
  Vec3 centroid;
  // extremal surface points along +a0,-a0,+a1,-a1,+a2,-a2
  std::array<Vec3, 6> points;
  std::array<BarycentricLocation, 6> locations;  // on the mesh surface
  std::array<bool, 6> ray_fallback{};  // ray missed; nearest point used
};

[[nodiscard]] AxisFrame ellipsoid_axes(const TriangleMesh& mesh);

struct Seed {
  int id = 0;
  MobiusTransform m;
  bool reflected = false;
};

// 24 orientation-preserving seeds from the two frames; when the reflected
// frame + parameterization of F1 are supplied, 24 more (ids 24..47) computed
// against them are appended.
[[nodiscard]] std::vector<Seed> initial_seeds(
    const AxisFrame& frame1, const SphericalParameterization& param1,
    const AxisFrame& frame2, const SphericalParameterization& param2,
    const AxisFrame* frame1_reflected = nullptr,
    const SphericalParameterization* param1_reflected = nullptr);

// ---------------------------------------------------------------------------
// descent
// ---------------------------------------------------------------------------

struct MinimizeOptions {
  double fd_step = 1e-5;        // central-difference step in chart units
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  int max_halvings = 30;
  double initial_step = 0.1;
  double grad_tolerance = 1e-6;      // stop when |g| < tol * (1 + e_sd)
  double rel_decrease_tol = 1e-9;    // ... or decrease below this ...
  int stall_iterations = 3;          // ... for this many iterations
  int max_iterations = 500;
};

struct MinimizeResult {
  MobiusTransform m;
  EnergyBreakdown energy;
  CorrespondenceMap correspondence;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::vector<double> energy_trace;  // accepted energies, seed first
};

[[nodiscard]] MinimizeResult minimize(const EnergyPair& pair,
                                      const MobiusTransform& seed,
                                      const MinimizeOptions& opts = {});

// ---------------------------------------------------------------------------
// distances
// ---------------------------------------------------------------------------

struct SeedDiagnostics {
  int id = 0;
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
  bool reflected = false;
};

struct DistanceResult {
  double d_sd = 0.0;
  MobiusTransform best_mobius;
  bool orientation_reversed = false;
  std::vector<SeedDiagnostics> per_seed;
  EnergyBreakdown energy;
  CorrespondenceMap correspondence;  // from the original F1 (reflection folded in)
  bool qc_warning = false;
};

struct DsdOptions {
  bool normalize = false;        // pre-scale both meshes to unit area
  bool allow_reflection = false; // also search reflect(F1)'s flattening
  int seed_limit = 0;            // 0 = all seeds, else first N per orientation family
  int threads = 0;               // 0 = hardware concurrency
  FlattenOptions flatten;
  MinimizeOptions descent;
};

[[nodiscard]] DistanceResult dsd(const TriangleMesh& mesh1,
                                 const TriangleMesh& mesh2,
                                 const DsdOptions& opts = {});

// variant for callers that already hold flattenings (the experiment harness
// and distance_matrix cache these); reflected args may be null
[[nodiscard]] DistanceResult dsd_from_params(
    const SphericalParameterization& param1, const AxisFrame& frame1,
    const SphericalParameterization& param2, const AxisFrame& frame2,
    const SphericalParameterization* param1_reflected,
    const AxisFrame* frame1_reflected, const DsdOptions& opts);

struct MatrixResult {
  Eigen::MatrixXd distances;  // NaN marks failed pairs
  std::vector<DistanceResult> pair_results;  // row-major upper triangle order
  std::vector<std::string> failures;         // "i,j: message"
};

[[nodiscard]] MatrixResult distance_matrix(
    const std::vector<TriangleMesh>& meshes, const DsdOptions& opts = {});

struct MetricAudit {
  double max_symmetry_violation = 0.0;
  double max_triangle_violation = 0.0;  // max d(i,k) - d(i,j) - d(j,k)
  int negative_entries = 0;
  int skipped_entries = 0;  // NaN pairs excluded from the audit
};

[[nodiscard]] MetricAudit metric_audit(const Eigen::MatrixXd& distances);

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

[[nodiscard]] std::string distance_to_json(const DistanceResult& r);

// "# gsd-corr v1" followed by one "triangle b0 b1 b2" line per vertex
void write_correspondence(std::ostream& out, const CorrespondenceMap& corr);

}  // namespace gsd
