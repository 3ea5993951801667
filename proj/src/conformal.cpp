#include "gsd/conformal.hpp"

#include <Eigen/SVD>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace gsd {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// helpers on raw position matrices (one row per vertex)
// ---------------------------------------------------------------------------

// area-weighted centroid, then uniform rescale to unit surface area
void recentre_rescale(const std::vector<std::array<int, 3>>& tris,
                      Eigen::MatrixX3d& x) {
  Vec3 weighted = Vec3::Zero();
  double total = 0.0;
  for (const auto& t : tris) {
    Vec3 a = x.row(t[0]).transpose();
    Vec3 b = x.row(t[1]).transpose();
    Vec3 c = x.row(t[2]).transpose();
    double area = 0.5 * (b - a).cross(c - a).norm();
    weighted += area * (a + b + c) / 3.0;
    total += area;
  }
  if (!(total > 0.0) || !std::isfinite(total))
    fail_numeric("conformal flow: surface area collapsed");
  Vec3 centroid = weighted / total;
  x.rowwise() -= centroid.transpose();
  x *= 1.0 / std::sqrt(total);
}

bool flipped_dirs(const Vec3& d0, const Vec3& d1, const Vec3& d2) {
  return d0.dot(d1.cross(d2)) <= 0.0;
}

// flips of the radial projection of x (assumed recentred) about the origin
int flipped_after_projection(const std::vector<std::array<int, 3>>& tris,
                             const Eigen::MatrixX3d& x) {
  int count = 0;
  for (const auto& t : tris) {
    Vec3 d0 = x.row(t[0]).normalized().transpose();
    Vec3 d1 = x.row(t[1]).normalized().transpose();
    Vec3 d2 = x.row(t[2]).normalized().transpose();
    if (flipped_dirs(d0, d1, d2)) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// finite-element matrices
// ---------------------------------------------------------------------------

// cotangent stiffness of the input embedding; kept fixed over the whole flow
SpMat cotan_stiffness(const TriangleMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 12);
  for (const auto& t : mesh.triangles) {
    for (int c = 0; c < 3; ++c) {
      int i = t[c], j = t[(c + 1) % 3], k = t[(c + 2) % 3];
      Vec3 u = mesh.vertices[j] - mesh.vertices[i];
      Vec3 v = mesh.vertices[k] - mesh.vertices[i];
      double twice_area = u.cross(v).norm();
      double w = 0.5 * u.dot(v) / twice_area;  // half-cotangent at corner i
      trip.emplace_back(j, j, w);
      trip.emplace_back(k, k, w);
      trip.emplace_back(j, k, -w);
      trip.emplace_back(k, j, -w);
    }
  }
  SpMat l(mesh.vertex_count(), mesh.vertex_count());
  l.setFromTriplets(trip.begin(), trip.end());
  return l;
}

// consistent (Galerkin) mass matrix of the current positions
SpMat galerkin_mass(const std::vector<std::array<int, 3>>& tris,
                    const Eigen::MatrixX3d& x) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(tris.size() * 9);
  for (const auto& t : tris) {
    Vec3 a = x.row(t[0]).transpose();
    Vec3 b = x.row(t[1]).transpose();
    Vec3 c = x.row(t[2]).transpose();
    double area = 0.5 * (b - a).cross(c - a).norm();
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        trip.emplace_back(t[p], t[q], p == q ? area / 6.0 : area / 12.0);
  }
  SpMat m(static_cast<int>(x.rows()), static_cast<int>(x.rows()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// ---------------------------------------------------------------------------
// the flow itself
// ---------------------------------------------------------------------------

double mean_triangle_edge(const std::vector<std::array<int, 3>>& tris,
                          const Eigen::MatrixX3d& x) {
  double sum = 0.0;
  for (const auto& t : tris)
    for (int c = 0; c < 3; ++c)
      sum += (x.row(t[c]) - x.row(t[(c + 1) % 3])).norm();
  return sum / (3.0 * static_cast<double>(tris.size()));
}

// quality of the radial projection of x, or +inf while it still has flips
double projection_quality(const TriangleMesh& mesh, const Eigen::MatrixX3d& x) {
  std::vector<SpherePoint> pos;
  pos.reserve(static_cast<std::size_t>(x.rows()));
  for (int i = 0; i < x.rows(); ++i)
    pos.emplace_back(Vec3(x.row(i).transpose()));
  return qc_distortion(mesh, pos).area_weighted_mean;
}

// Time-step control: a single implicit step only tracks the flow while the
// bulk displacement stays small against the current edge scale (individual
// sliver vertices may snap to their neighbour average at any dt, which is
// harmless), so violent steps are halved and calm ones earn the budget back.
constexpr double kMotionCapFactor = 0.5;     // of the current mean edge
constexpr double kDtRecoveryShare = 0.25;    // of the cap: double dt below
constexpr int kQualityCheckInterval = 25;    // accepted steps per QC probe
constexpr double kQualityStallDelta = 1e-4;  // minimum QC gain per probe

Eigen::MatrixX3d run_flow(const TriangleMesh& mesh, const FlattenOptions& opts) {
  const int n = mesh.vertex_count();
  Eigen::MatrixX3d x(n, 3);
  for (int i = 0; i < n; ++i) x.row(i) = mesh.vertices[i].transpose();
  recentre_rescale(mesh.triangles, x);

  const SpMat stiffness = cotan_stiffness(mesh);
  double dt = opts.step_size;

  Eigen::SimplicialLDLT<SpMat> solver;
  bool analyzed = false;

  // Best repairable state seen at the periodic quality probes -- flip counts
  // small enough for the smoothing repair are tolerated, since for meshes
  // with poor triangles the flow's limit map keeps a few folds. The flow may
  // also drift along the Moebius family (area concentration) long after the
  // projection has become valid, so the snapshot -- not the last iterate --
  // is the state worth keeping when the flow stalls or runs out of budget.
  Eigen::MatrixX3d snapshot;
  double snapshot_quality = std::numeric_limits<double>::infinity();
  int stall_strikes = 0;
  const int flip_budget = std::max(6, mesh.triangle_count() / 100);

  int accepted = 0;
  for (int step = 0; step < opts.max_steps; ++step) {
    SpMat mass = galerkin_mass(mesh.triangles, x);
    Eigen::MatrixX3d rhs = mass * x;
    SpMat system = mass + dt * stiffness;
    // the sparsity pattern (vertex adjacency + diagonal) never changes
    if (!analyzed) {
      solver.analyzePattern(system);
      analyzed = true;
    }
    solver.factorize(system);
    if (solver.info() != Eigen::Success)
      fail_numeric("conformal flow: implicit step factorization failed");
    Eigen::MatrixX3d next = solver.solve(rhs);
    if (!next.allFinite())
      fail_numeric("conformal flow: positions became non-finite");
    recentre_rescale(mesh.triangles, next);

    const double cap = kMotionCapFactor * mean_triangle_edge(mesh.triangles, x);
    const double bulk_motion = (next - x).rowwise().norm().mean();
    if (bulk_motion > cap) {
      dt *= 0.5;
      continue;
    }
    const double max_motion = (next - x).rowwise().norm().maxCoeff();
    x = next;
    ++accepted;

    // genuinely stationary: the surface barely moves under a full-size step
    const bool stationary = max_motion < opts.motion_tolerance &&
                            dt >= opts.step_size;
    const bool out_of_budget = step + 1 == opts.max_steps;

    bool stalled = false;
    if (stationary || out_of_budget ||
        accepted % kQualityCheckInterval == 0) {
      if (flipped_after_projection(mesh.triangles, x) <= flip_budget) {
        const double quality = projection_quality(mesh, x);
        if (quality < snapshot_quality - kQualityStallDelta) {
          snapshot = x;
          snapshot_quality = quality;
          stall_strikes = 0;
        } else if (std::isfinite(snapshot_quality) && ++stall_strikes >= 2) {
          // a usable projection exists and the flow has stopped improving
          // it; further flowing only feeds the Moebius drift
          stalled = true;
        }
      }
    }

    if (stationary || stalled) break;
    if (bulk_motion < kDtRecoveryShare * cap)
      dt = std::min(2.0 * dt, opts.step_size);
  }

  const double final_quality =
      flipped_after_projection(mesh.triangles, x) <= flip_budget
          ? projection_quality(mesh, x)
          : std::numeric_limits<double>::infinity();
  if (std::isfinite(snapshot_quality) && snapshot_quality < final_quality)
    return snapshot;
  // possibly still flipped: finalize repairs small counts or reports failure
  return x;
}

std::vector<Vec3> project_rows(const Eigen::MatrixX3d& x) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(x.rows()));
  for (int i = 0; i < x.rows(); ++i) {
    double len = x.row(i).norm();
    if (!(len > 1e-300))
      fail_numeric("radial projection: vertex " + std::to_string(i) +
                   " collapsed onto the centroid");
    dirs.push_back(x.row(i).transpose() / len);
  }
  return dirs;
}

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> nbr(mesh.vertex_count());
  auto add = [&](int a, int b) {
    auto& v = nbr[a];
    if (std::find(v.begin(), v.end(), b) == v.end()) v.push_back(b);
  };
  for (const auto& t : mesh.triangles)
    for (int c = 0; c < 3; ++c) {
      add(t[c], t[(c + 1) % 3]);
      add(t[(c + 1) % 3], t[c]);
    }
  return nbr;
}

int count_flipped_dirs(const std::vector<std::array<int, 3>>& tris,
                       const std::vector<Vec3>& dirs) {
  int count = 0;
  for (const auto& t : tris)
    if (flipped_dirs(dirs[t[0]], dirs[t[1]], dirs[t[2]])) ++count;
  return count;
}

// shared tail of both parameterization paths: flip repair by local averaging,
// Moebius centering, and the quasi-conformal quality gate
SphericalParameterization finalize(const TriangleMesh& source,
                                   std::vector<Vec3> dirs,
                                   const FlattenOptions& opts) {
  int flips = count_flipped_dirs(source.triangles, dirs);
  if (flips > 0) {
    auto nbr = vertex_neighbors(source);
    for (int pass = 0; pass < opts.max_smoothing_passes && flips > 0; ++pass) {
      std::vector<char> bad(static_cast<std::size_t>(source.vertex_count()), 0);
      for (const auto& t : source.triangles)
        if (flipped_dirs(dirs[t[0]], dirs[t[1]], dirs[t[2]]))
          bad[t[0]] = bad[t[1]] = bad[t[2]] = 1;
      for (int v = 0; v < source.vertex_count(); ++v) {
        if (!bad[v]) continue;
        Vec3 sum = Vec3::Zero();
        for (int u : nbr[v]) sum += dirs[u];
        if (sum.norm() > 1e-12) dirs[v] = sum.normalized();
      }
      flips = count_flipped_dirs(source.triangles, dirs);
    }
    if (flips > 0)
      fail_numeric(std::to_string(flips) +
                   " flipped spherical triangles remain after repair");
  }

  SphericalParameterization out;
  out.source = source;
  out.sphere_positions.reserve(dirs.size());
  for (const auto& d : dirs) out.sphere_positions.emplace_back(d);
  out.centering = center_vertices(out.sphere_positions, opts.centering);
  for (auto& p : out.sphere_positions) p = apply(out.centering, p);
  out.quality = qc_distortion(out.source, out.sphere_positions);
  if (out.quality.area_weighted_mean > opts.qc_fail)
    fail_numeric("quasi-conformal gate: area-weighted mean distortion " +
                 format_g9(out.quality.area_weighted_mean) + " exceeds " +
                 format_g9(opts.qc_fail));
  out.qc_warning = out.quality.area_weighted_mean > opts.qc_warn;
  return out;
}

// orthonormal in-plane coordinates of a triangle as an upper-triangular 2x2;
// both diagonal entries are positive exactly when the triangle has area
Eigen::Matrix2d triangle_frame(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 u = b - a;
  Vec3 w = c - a;
  double lu = u.norm();
  Vec3 n = u.cross(w);
  double ln = n.norm();
  Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
  if (!(lu > 0.0) || !(ln > 0.0)) return f;  // degenerate marker
  Vec3 e1 = u / lu;
  Vec3 e2 = n.cross(u).normalized();
  f << lu, w.dot(e1), 0.0, w.dot(e2);
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// public interface
// ---------------------------------------------------------------------------

double qc_of_triangle_pair(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                           const Vec3& q0, const Vec3& q1, const Vec3& q2) {
  Eigen::Matrix2d src = triangle_frame(p0, p1, p2);
  Eigen::Matrix2d img = triangle_frame(q0, q1, q2);
  // degenerate pairs rate as infinitely distorted rather than throwing
  if (!(src(0, 0) > 0.0) || !(src(1, 1) > 0.0) || !(img(0, 0) > 0.0) ||
      !(img(1, 1) > 0.0))
    return std::numeric_limits<double>::infinity();
  Eigen::Matrix2d map = img * src.inverse();
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(map);
  double s1 = svd.singularValues()(0);
  double s2 = svd.singularValues()(1);
  if (!(s2 > 0.0)) return std::numeric_limits<double>::infinity();
  return s1 / s2;
}

QcReport qc_distortion(const TriangleMesh& source,
                       const std::vector<SpherePoint>& positions) {
  if (static_cast<int>(positions.size()) != source.vertex_count())
    fail_data("qc_distortion: " + std::to_string(positions.size()) +
              " positions for " + std::to_string(source.vertex_count()) +
              " vertices");
  QcReport report;
  report.per_triangle.reserve(static_cast<std::size_t>(source.triangle_count()));
  double sum = 0.0, weighted = 0.0, total_area = 0.0, worst = 1.0;
  for (const auto& t : source.triangles) {
    double qc = qc_of_triangle_pair(
        source.vertices[t[0]], source.vertices[t[1]], source.vertices[t[2]],
        positions[t[0]].dir, positions[t[1]].dir, positions[t[2]].dir);
    report.per_triangle.push_back(qc);
    Vec3 u = source.vertices[t[1]] - source.vertices[t[0]];
    Vec3 v = source.vertices[t[2]] - source.vertices[t[0]];
    double area = 0.5 * u.cross(v).norm();
    sum += qc;
    weighted += qc * area;
    total_area += area;
    worst = std::max(worst, qc);
  }
  if (!report.per_triangle.empty()) {
    report.mean = sum / static_cast<double>(report.per_triangle.size());
    report.max = worst;
    report.area_weighted_mean = total_area > 0.0 ? weighted / total_area : 1.0;
  }
  return report;
}

SphericalParameterization conformal_to_sphere(const TriangleMesh& mesh,
                                              const FlattenOptions& opts) {
  require_valid(mesh, "conformal flattening input");
  Eigen::MatrixX3d x = run_flow(mesh, opts);
  return finalize(mesh, project_rows(x), opts);
}

SphericalParameterization from_spherical_mesh(const TriangleMesh& mesh,
                                              const FlattenOptions& opts) {
  require_valid(mesh, "spherical projection input");
  Vec3 centroid = area_centroid(mesh);
  std::vector<Vec3> dirs;
  dirs.reserve(mesh.vertices.size());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    Vec3 r = mesh.vertices[i] - centroid;
    double len = r.norm();
    if (!(len > 1e-300))
      fail_data("spherical projection: vertex " + std::to_string(i) +
                " coincides with the area centroid");
    dirs.push_back(r / len);
  }
  return finalize(mesh, std::move(dirs), opts);
}

int count_flipped(const TriangleMesh& mesh,
                  const std::vector<SpherePoint>& positions) {
  if (static_cast<int>(positions.size()) != mesh.vertex_count())
    fail_data("count_flipped: position count does not match vertex count");
  int count = 0;
  for (const auto& t : mesh.triangles)
    if (flipped_dirs(positions[t[0]].dir, positions[t[1]].dir,
                     positions[t[2]].dir))
      ++count;
  return count;
}

std::string qc_to_json(const QcReport& report) {
  nlohmann::json j;
  j["mean"] = report.mean;
  j["max"] = report.max;
  j["area_weighted_mean"] = report.area_weighted_mean;
  j["triangle_count"] = report.per_triangle.size();
  j["per_triangle"] = report.per_triangle;
  return j.dump(2);
}

}  // namespace gsd
