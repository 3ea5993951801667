#include "gsd/alignment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace gsd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// axis frames
// ---------------------------------------------------------------------------

// Moeller-Trumbore intersection of one ray with one triangle; returns the ray
// parameter (> 0) and barycentric coordinates, or a negative t on miss.
double ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0,
                    const Vec3& v1, const Vec3& v2, double* u_out,
                    double* v_out) {
  Vec3 e1 = v1 - v0;
  Vec3 e2 = v2 - v0;
  Vec3 p = dir.cross(e2);
  double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return -1.0;  // ray parallel to the plane
  Vec3 s = origin - v0;
  double u = s.dot(p) / det;
  if (u < -1e-9 || u > 1.0 + 1e-9) return -1.0;
  Vec3 q = s.cross(e1);
  double v = dir.dot(q) / det;
  if (v < -1e-9 || u + v > 1.0 + 1e-9) return -1.0;
  double t = e2.dot(q) / det;
  if (t <= 1e-12) return -1.0;  // behind or at the origin
  *u_out = u;
  *v_out = v;
  return t;
}

BarycentricLocation clamped_location(int triangle, double b0, double b1,
                                     double b2) {
  b0 = std::max(b0, 0.0);
  b1 = std::max(b1, 0.0);
  b2 = std::max(b2, 0.0);
  double sum = b0 + b1 + b2;
  if (sum <= 0.0) return BarycentricLocation{triangle, {1.0, 0.0, 0.0}, false};
  return BarycentricLocation{triangle, {b0 / sum, b1 / sum, b2 / sum}, false};
}

// extremal surface point along dir from the centroid: farthest ray hit, or
// the support vertex in that direction when every ray misses
void cast_axis_point(const TriangleMesh& mesh, const Vec3& origin,
                     const Vec3& dir, AxisFrame& frame, int slot) {
  double best_t = -1.0, best_u = 0.0, best_v = 0.0;
  int best_tri = -1;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double u = 0.0, v = 0.0;
    double hit = ray_triangle(origin, dir, mesh.vertices[tri[0]],
                              mesh.vertices[tri[1]], mesh.vertices[tri[2]], &u,
                              &v);
    if (hit > best_t) {
      best_t = hit;
      best_tri = t;
      best_u = u;
      best_v = v;
    }
  }
  if (best_tri >= 0) {
    frame.locations[slot] =
        clamped_location(best_tri, 1.0 - best_u - best_v, best_u, best_v);
    frame.points[slot] = embed(mesh, frame.locations[slot]);
    frame.ray_fallback[slot] = false;
    return;
  }
  int support = 0;
  double best = -kInf;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    double d = (mesh.vertices[i] - origin).dot(dir);
    if (d > best) {
      best = d;
      support = i;
    }
  }
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int c = 0; c < 3; ++c) {
      if (tri[c] != support) continue;
      BarycentricLocation loc{t, {0.0, 0.0, 0.0}, true};
      loc.coords[c] = 1.0;
      frame.locations[slot] = loc;
      frame.points[slot] = mesh.vertices[support];
      frame.ray_fallback[slot] = true;
      return;
    }
  }
  fail_data("axis frame: vertex " + std::to_string(support) +
            " has no incident triangle");
}

// ---------------------------------------------------------------------------
// octahedral enumeration
// ---------------------------------------------------------------------------

struct SignedPermutation {
  std::array<int, 3> perm;
  std::array<double, 3> sign;
};

// the 24 rotations of the axis octahedron, in a fixed deterministic order:
// permutations lexicographically, signs with + before -, det +1 kept
const std::vector<SignedPermutation>& octahedral_rotations() {
  static const std::vector<SignedPermutation> table = [] {
    const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2},
                                                   {0, 2, 1},
                                                   {1, 0, 2},
                                                   {1, 2, 0},
                                                   {2, 0, 1},
                                                   {2, 1, 0}}};
    const std::array<double, 6> parity{1.0, -1.0, -1.0, 1.0, 1.0, -1.0};
    std::vector<SignedPermutation> out;
    out.reserve(24);
    for (int p = 0; p < 6; ++p)
      for (int mask = 0; mask < 8; ++mask) {
        std::array<double, 3> sign{(mask & 4) ? -1.0 : 1.0,
                                   (mask & 2) ? -1.0 : 1.0,
                                   (mask & 1) ? -1.0 : 1.0};
        if (parity[p] * sign[0] * sign[1] * sign[2] > 0.0)
          out.push_back(SignedPermutation{perms[p], sign});
      }
    return out;
  }();
  return table;
}

// spherical image of a surface point: normalized barycentric combination of
// its triangle's sphere positions
SpherePoint sphere_image(const SphericalParameterization& p,
                         const BarycentricLocation& loc) {
  const auto& t = p.source.triangles.at(static_cast<std::size_t>(loc.triangle));
  Vec3 s = loc.coords[0] * p.sphere_positions[t[0]].dir +
           loc.coords[1] * p.sphere_positions[t[1]].dir +
           loc.coords[2] * p.sphere_positions[t[2]].dir;
  if (s.norm() < 1e-12)
    fail_numeric("axis point has a degenerate spherical image");
  return SpherePoint(s);
}

// ---------------------------------------------------------------------------
// reflection bookkeeping
// ---------------------------------------------------------------------------

// A location on reflect(F1) names the mirror point on F1: same triangle id,
// with the coordinates of the two rewound corners swapped.
void fold_reflection(CorrespondenceMap& corr) {
  for (auto& loc : corr.backward) std::swap(loc.coords[1], loc.coords[2]);
}

DistanceResult nan_result() {
  DistanceResult r;
  r.d_sd = kNaN;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// axis frames and seeds
// ---------------------------------------------------------------------------

AxisFrame ellipsoid_axes(const TriangleMesh& mesh) {
  require_valid(mesh, "axis frame input");
  Vec3 centroid = area_centroid(mesh);

  // area-weighted covariance; edge-midpoint quadrature is exact for quadratics
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& t : mesh.triangles) {
    Vec3 a = mesh.vertices[t[0]] - centroid;
    Vec3 b = mesh.vertices[t[1]] - centroid;
    Vec3 c = mesh.vertices[t[2]] - centroid;
    double area = 0.5 * (b - a).cross(c - a).norm();
    const std::array<Vec3, 3> mids{0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
    for (const auto& m : mids) cov += (area / 3.0) * m * m.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  if (eig.info() != Eigen::Success)
    fail_numeric("axis frame: covariance eigendecomposition failed");

  AxisFrame frame;
  frame.centroid = centroid;
  for (int k = 0; k < 3; ++k) {  // Eigen sorts ascending; we want descending
    frame.eigenvalues[k] = eig.eigenvalues()(2 - k);
    frame.axes[k] = eig.eigenvectors().col(2 - k);
  }
  // deterministic signs: largest-magnitude component positive (lowest index
  // wins ties); the third axis completes a right-handed frame
  for (int k = 0; k < 2; ++k) {
    int arg = 0;
    for (int d = 1; d < 3; ++d)
      if (std::abs(frame.axes[k](d)) > std::abs(frame.axes[k](arg))) arg = d;
    if (frame.axes[k](arg) < 0.0) frame.axes[k] = -frame.axes[k];
  }
  frame.axes[2] = frame.axes[0].cross(frame.axes[1]);

  for (int k = 0; k < 3; ++k) {
    cast_axis_point(mesh, centroid, frame.axes[k], frame, 2 * k);
    cast_axis_point(mesh, centroid, -frame.axes[k], frame, 2 * k + 1);
  }
  return frame;
}

std::vector<Seed> initial_seeds(const AxisFrame& frame1,
                                const SphericalParameterization& param1,
                                const AxisFrame& frame2,
                                const SphericalParameterization& param2,
                                const AxisFrame* frame1_reflected,
                                const SphericalParameterization* param1_reflected) {
  std::array<SpherePoint, 6> targets;
  for (int i = 0; i < 6; ++i)
    targets[i] = sphere_image(param2, frame2.locations[i]);

  std::vector<Seed> seeds;
  seeds.reserve(frame1_reflected != nullptr ? 48 : 24);

  auto add_family = [&](const AxisFrame& frame,
                        const SphericalParameterization& param, bool reflected,
                        int first_id) {
    const std::array<SpherePoint, 3> sources{
        sphere_image(param, frame.locations[0]),
        sphere_image(param, frame.locations[2]),
        sphere_image(param, frame.locations[4])};
    int id = first_id;
    for (const auto& rot : octahedral_rotations()) {
      std::array<SpherePoint, 3> dst;
      for (int k = 0; k < 3; ++k)
        dst[k] = targets[2 * rot.perm[k] + (rot.sign[k] < 0.0 ? 1 : 0)];
      seeds.push_back(Seed{id++,
                           from_three_points(sources[0], sources[1], sources[2],
                                             dst[0], dst[1], dst[2]),
                           reflected});
    }
  };

  add_family(frame1, param1, false, 0);
  if (frame1_reflected != nullptr && param1_reflected != nullptr)
    add_family(*frame1_reflected, *param1_reflected, true, 24);
  return seeds;
}

// ---------------------------------------------------------------------------
// descent
// ---------------------------------------------------------------------------

MinimizeResult minimize(const EnergyPair& pair, const MobiusTransform& seed,
                        const MinimizeOptions& opts) {
  if (!(opts.fd_step > 0.0) || !(opts.initial_step > 0.0) ||
      !(opts.backtrack > 0.0) || !(opts.backtrack < 1.0) ||
      opts.max_iterations < 0)
    fail_data("minimize: invalid descent options");

  auto evaluate = [&](const MobiusTransform& m, const CorrespondenceMap* hint,
                      CorrespondenceMap* keep) {
    CorrespondenceMap c = transfer(pair, m, hint);
    double e = std::sqrt(elastic_sum(pair, c, Direction::forward)) +
               std::sqrt(elastic_sum(pair, c, Direction::backward));
    if (keep != nullptr) *keep = std::move(c);
    return e;
  };

  MinimizeResult res;
  MobiusTransform base = seed;
  CorrespondenceMap corr;
  double energy = evaluate(base, nullptr, &corr);
  res.energy_trace.push_back(energy);

  int stall = 0;
  for (int iter = 1; iter <= opts.max_iterations; ++iter) {
    res.iterations = iter;

    std::array<double, 6> grad{};
    double grad_norm_sq = 0.0;
    double stencil_min = kInf;
    for (int k = 0; k < 6; ++k) {
      MobiusChart plus{base, {}}, minus{base, {}};
      plus.offset[k] = opts.fd_step;
      minus.offset[k] = -opts.fd_step;
      double fp = evaluate(perturb(plus), &corr, nullptr);
      double fm = evaluate(perturb(minus), &corr, nullptr);
      grad[k] = (fp - fm) / (2.0 * opts.fd_step);
      grad_norm_sq += grad[k] * grad[k];
      stencil_min = std::min(stencil_min, std::min(fp, fm));
    }
    // the current point beats its entire probe stencil: minimized to the
    // finite-difference resolution (this is how a conical minimum, where both
    // elastic terms vanish and the gradient never does, terminates)
    if (energy <= stencil_min) {
      res.converged = true;
      break;
    }
    double grad_norm = std::sqrt(grad_norm_sq);
    if (grad_norm < opts.grad_tolerance * (1.0 + energy)) {
      res.converged = true;
      break;
    }

    double step = opts.initial_step;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      MobiusChart trial_chart{base, {}};
      for (int k = 0; k < 6; ++k)
        trial_chart.offset[k] = -(step / grad_norm) * grad[k];
      MobiusTransform trial = perturb(trial_chart);
      CorrespondenceMap trial_corr;
      double trial_energy = evaluate(trial, &corr, &trial_corr);
      if (trial_energy <= energy - opts.armijo_c * step * grad_norm) {
        double decrease = (energy - trial_energy) / std::max(1.0, energy);
        base = trial;  // rebase the chart at the accepted point
        corr = std::move(trial_corr);
        energy = trial_energy;
        res.energy_trace.push_back(energy);
        accepted = true;
        if (decrease < opts.rel_decrease_tol) {
          if (++stall >= opts.stall_iterations) res.converged = true;
        } else {
          stall = 0;
        }
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      res.line_search_failed = true;
      break;
    }
    if (res.converged) break;
  }

  res.m = base;
  res.correspondence = std::move(corr);
  res.energy = symmetric_distortion(pair, res.correspondence);
  return res;
}

// ---------------------------------------------------------------------------
// distances
// ---------------------------------------------------------------------------

DistanceResult dsd_from_params(const SphericalParameterization& param1,
                               const AxisFrame& frame1,
                               const SphericalParameterization& param2,
                               const AxisFrame& frame2,
                               const SphericalParameterization* param1_reflected,
                               const AxisFrame* frame1_reflected,
                               const DsdOptions& opts) {
  std::vector<Seed> seeds = initial_seeds(frame1, param1, frame2, param2,
                                          frame1_reflected, param1_reflected);
  if (opts.seed_limit > 0) {
    std::vector<Seed> kept;
    for (const auto& s : seeds)
      if (s.id % 24 < opts.seed_limit) kept.push_back(s);
    seeds = std::move(kept);
  }
  if (seeds.empty()) fail_data("dsd: no seeds to start from");

  EnergyPair pair = make_energy_pair(param1, param2);
  std::optional<EnergyPair> pair_reflected;
  if (param1_reflected != nullptr && frame1_reflected != nullptr)
    pair_reflected = make_energy_pair(*param1_reflected, param2);

  std::vector<std::optional<MinimizeResult>> results(seeds.size());
  auto work = [&](std::size_t i) {
    try {
      const EnergyPair& active = seeds[i].reflected ? *pair_reflected : pair;
      results[i] = minimize(active, seeds[i].m, opts.descent);
    } catch (const Error&) {
      // a divergent seed is reported via its diagnostics entry
    }
  };

  int threads = opts.threads > 0
                    ? opts.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min<int>(threads, static_cast<int>(seeds.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) work(i);
      });
    for (auto& t : pool) t.join();
  }

  DistanceResult out;
  int best = -1;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    SeedDiagnostics diag;
    diag.id = seeds[i].id;
    diag.reflected = seeds[i].reflected;
    if (results[i].has_value()) {
      diag.energy = results[i]->energy.e_sd;
      diag.iterations = results[i]->iterations;
      diag.converged = results[i]->converged;
      if (best < 0 || diag.energy < results[best]->energy.e_sd)
        best = static_cast<int>(i);
    } else {
      diag.energy = kInf;
    }
    out.per_seed.push_back(diag);
  }
  if (best < 0) fail_numeric("dsd: every seed failed to evaluate");

  MinimizeResult& winner = *results[best];
  out.d_sd = winner.energy.e_sd;
  out.best_mobius = winner.m;
  out.orientation_reversed = seeds[best].reflected;
  out.energy = std::move(winner.energy);
  out.correspondence = std::move(winner.correspondence);
  if (out.orientation_reversed) fold_reflection(out.correspondence);
  out.qc_warning =
      param1.qc_warning || param2.qc_warning ||
      (out.orientation_reversed && param1_reflected->qc_warning);
  return out;
}

DistanceResult dsd(const TriangleMesh& mesh1, const TriangleMesh& mesh2,
                   const DsdOptions& opts) {
  require_valid(mesh1, "first mesh");
  require_valid(mesh2, "second mesh");
  TriangleMesh m1 = opts.normalize ? normalize_area(mesh1) : mesh1;
  TriangleMesh m2 = opts.normalize ? normalize_area(mesh2) : mesh2;

  SphericalParameterization param1 = conformal_to_sphere(m1, opts.flatten);
  SphericalParameterization param2 = conformal_to_sphere(m2, opts.flatten);
  AxisFrame frame1 = ellipsoid_axes(m1);
  AxisFrame frame2 = ellipsoid_axes(m2);

  std::optional<SphericalParameterization> param1_reflected;
  std::optional<AxisFrame> frame1_reflected;
  if (opts.allow_reflection) {
    TriangleMesh mirrored = reflect(m1);
    param1_reflected = conformal_to_sphere(mirrored, opts.flatten);
    frame1_reflected = ellipsoid_axes(mirrored);
  }
  return dsd_from_params(
      param1, frame1, param2, frame2,
      param1_reflected ? &*param1_reflected : nullptr,
      frame1_reflected ? &*frame1_reflected : nullptr, opts);
}

MatrixResult distance_matrix(const std::vector<TriangleMesh>& meshes,
                             const DsdOptions& opts) {
  const int n = static_cast<int>(meshes.size());
  MatrixResult out;
  out.distances = Eigen::MatrixXd::Constant(n, n, kNaN);

  struct Cached {
    std::optional<SphericalParameterization> param, param_reflected;
    std::optional<AxisFrame> frame, frame_reflected;
  };
  std::vector<Cached> cache(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    try {
      TriangleMesh m = opts.normalize ? normalize_area(meshes[i]) : meshes[i];
      cache[i].param = conformal_to_sphere(m, opts.flatten);
      cache[i].frame = ellipsoid_axes(m);
      if (opts.allow_reflection) {
        TriangleMesh mirrored = reflect(m);
        cache[i].param_reflected = conformal_to_sphere(mirrored, opts.flatten);
        cache[i].frame_reflected = ellipsoid_axes(mirrored);
      }
    } catch (const Error& e) {
      out.failures.push_back(std::to_string(i) + "," + std::to_string(i) +
                             ": " + e.what());
    }
  }

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (!cache[i].param || !cache[j].param) {
        out.pair_results.push_back(nan_result());
        continue;
      }
      try {
        DistanceResult r = dsd_from_params(
            *cache[i].param, *cache[i].frame, *cache[j].param, *cache[j].frame,
            cache[i].param_reflected ? &*cache[i].param_reflected : nullptr,
            cache[i].frame_reflected ? &*cache[i].frame_reflected : nullptr,
            opts);
        out.distances(i, j) = out.distances(j, i) = r.d_sd;
        out.pair_results.push_back(std::move(r));
      } catch (const Error& e) {
        out.failures.push_back(std::to_string(i) + "," + std::to_string(j) +
                               ": " + e.what());
        out.pair_results.push_back(nan_result());
      }
    }
  return out;
}

MetricAudit metric_audit(const Eigen::MatrixXd& distances) {
  if (distances.rows() != distances.cols())
    fail_data("metric audit: matrix must be square");
  const int n = static_cast<int>(distances.rows());
  MetricAudit audit;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double d = distances(i, j);
      if (std::isnan(d)) {
        ++audit.skipped_entries;
        continue;
      }
      if (d < 0.0) ++audit.negative_entries;
      double back = distances(j, i);
      if (!std::isnan(back))
        audit.max_symmetry_violation =
            std::max(audit.max_symmetry_violation, std::abs(d - back));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        double direct = distances(i, k);
        double via = distances(i, j) + distances(j, k);
        if (std::isnan(direct) || std::isnan(via)) continue;
        audit.max_triangle_violation =
            std::max(audit.max_triangle_violation, direct - via);
      }
  return audit;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

std::string distance_to_json(const DistanceResult& r) {
  nlohmann::json j;
  j["d_sd"] = r.d_sd;
  j["orientation_reversed"] = r.orientation_reversed;
  j["qc_warning"] = r.qc_warning;
  j["best_mobius"] = r.best_mobius.to_array8();
  j["energy"] = {{"forward_elastic", r.energy.forward_elastic},
                 {"backward_elastic", r.energy.backward_elastic},
                 {"e_sd", r.energy.e_sd},
                 {"area_f1", r.energy.area_f1},
                 {"area_f2", r.energy.area_f2},
                 {"flagged_forward", r.energy.flagged_forward},
                 {"flagged_backward", r.energy.flagged_backward}};
  j["per_seed"] = nlohmann::json::array();
  for (const auto& s : r.per_seed)
    j["per_seed"].push_back({{"id", s.id},
                             {"energy", s.energy},
                             {"iterations", s.iterations},
                             {"converged", s.converged},
                             {"reflected", s.reflected}});
  return j.dump(2);
}

void write_correspondence(std::ostream& out, const CorrespondenceMap& corr) {
  out << "# gsd-corr v1 " << corr.forward.size() << "\n";
  for (const auto& loc : corr.forward)
    out << loc.triangle << ' ' << format_g9(loc.coords[0]) << ' '
        << format_g9(loc.coords[1]) << ' ' << format_g9(loc.coords[2]) << "\n";
}

}  // namespace gsd
