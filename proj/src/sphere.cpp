#include "gsd/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsd {

// ---------------------------------------------------------------------------
// coordinates
// ---------------------------------------------------------------------------

std::complex<double> stereographic_project(const SpherePoint& p) {
  double denom = 1.0 - p.dir.z();
  if (denom <= 0.0)
    return {std::numeric_limits<double>::infinity(), 0.0};
  return {p.dir.x() / denom, p.dir.y() / denom};
}

SpherePoint inverse_stereographic(const std::complex<double>& z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    return SpherePoint(Vec3(0, 0, 1));
  double r2 = std::norm(z);
  if (!std::isfinite(r2) || r2 > 1e300) return SpherePoint(Vec3(0, 0, 1));
  double denom = 1.0 + r2;
  return SpherePoint(
      Vec3(2.0 * z.real() / denom, 2.0 * z.imag() / denom, (r2 - 1.0) / denom));
}

std::array<std::complex<double>, 2> to_homogeneous(const SpherePoint& p) {
  const double x = p.dir.x(), y = p.dir.y(), z = p.dir.z();
  std::complex<double> z1, z2;
  if (z <= 0.0) {
    // z1/z2 = (x+iy)/(1-z), well conditioned in the southern hemisphere
    z1 = {x, y};
    z2 = {1.0 - z, 0.0};
  } else {
    // equivalent form (1+z)/(x-iy), well conditioned in the northern one
    z1 = {1.0 + z, 0.0};
    z2 = {x, -y};
  }
  double n = std::sqrt(std::norm(z1) + std::norm(z2));
  return {z1 / n, z2 / n};
}

SpherePoint from_homogeneous(const std::complex<double>& z1,
                             const std::complex<double>& z2) {
  double n1 = std::norm(z1), n2 = std::norm(z2);
  double s = n1 + n2;
  if (!(s > 0.0) || !std::isfinite(s))
    fail_numeric("degenerate homogeneous coordinates");
  std::complex<double> xy = 2.0 * z1 * std::conj(z2) / s;
  return SpherePoint(Vec3(xy.real(), xy.imag(), (n1 - n2) / s));
}

// ---------------------------------------------------------------------------
// point location
// ---------------------------------------------------------------------------

namespace {

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

SphereLocator::SphereLocator(std::vector<Vec3> unit_dirs,
                             std::vector<std::array<int, 3>> triangles)
    : dirs_(std::move(unit_dirs)), tris_(std::move(triangles)) {
  if (dirs_.empty() || tris_.empty())
    fail_data("locator needs at least one direction and one triangle");
  for (auto& d : dirs_) {
    double n = d.norm();
    if (!(n > 0.0) || !std::isfinite(n))
      fail_data("locator direction with zero or non-finite norm");
    d /= n;
  }
  const int n = static_cast<int>(dirs_.size());
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    for (int v : tris_[t])
      if (v < 0 || v >= n)
        fail_data("locator triangle " + std::to_string(t) +
                  " references direction " + std::to_string(v) +
                  " outside [0, " + std::to_string(n) + ")");
    const Vec3& u0 = dirs_[static_cast<std::size_t>(tris_[t][0])];
    const Vec3& u1 = dirs_[static_cast<std::size_t>(tris_[t][1])];
    const Vec3& u2 = dirs_[static_cast<std::size_t>(tris_[t][2])];
    if (u0.cross(u1).dot(u2) <= 0.0)
      fail_data("locator triangle " + std::to_string(t) +
                " is inverted or degenerate on the sphere");
  }

  // lat-long grid sized for a few triangles per cell
  n_theta_ = std::clamp(
      static_cast<int>(std::lround(std::sqrt(tris_.size() / 4.0))), 4, 256);
  n_phi_ = 2 * n_theta_;
  cells_.assign(static_cast<std::size_t>(n_theta_ * n_phi_), Cell{});

  const double d_theta = kPi / n_theta_;
  const double d_phi = 2.0 * kPi / n_phi_;
  // any point of a cell is within this angle of the cell center
  const double cell_radius = 0.5 * (d_theta + d_phi) + 1e-9;

  for (std::size_t t = 0; t < tris_.size(); ++t) {
    const Vec3& u0 = dirs_[static_cast<std::size_t>(tris_[t][0])];
    const Vec3& u1 = dirs_[static_cast<std::size_t>(tris_[t][1])];
    const Vec3& u2 = dirs_[static_cast<std::size_t>(tris_[t][2])];
    Vec3 center = u0 + u1 + u2;
    double cn = center.norm();
    if (!(cn > 1e-12)) {
      // pathologically spread triangle: insert everywhere
      for (auto& cell : cells_) cell.tris.push_back(static_cast<int>(t));
      continue;
    }
    center /= cn;
    double rho = std::max({angle_between(center, u0), angle_between(center, u1),
                           angle_between(center, u2)});
    // geodesic edges can bulge slightly past the vertex cap on large
    // triangles; the midpoints bound that
    rho = std::max({rho, angle_between(center, (u0 + u1).normalized()),
                    angle_between(center, (u1 + u2).normalized()),
                    angle_between(center, (u2 + u0).normalized())});
    rho += kLocateToleranceRad + 1e-9;

    double theta_c = std::acos(std::clamp(center.z(), -1.0, 1.0));
    int row_lo = std::max(
        0, static_cast<int>(std::floor((theta_c - rho - cell_radius) / d_theta)));
    int row_hi = std::min(
        n_theta_ - 1,
        static_cast<int>(std::floor((theta_c + rho + cell_radius) / d_theta)));
    for (int i = row_lo; i <= row_hi; ++i) {
      double theta_cell = (i + 0.5) * d_theta;
      double st = std::sin(theta_cell), ct = std::cos(theta_cell);
      auto cell_center = [&](int j) {
        double phi = -kPi + (j + 0.5) * d_phi;
        return Vec3(st * std::cos(phi), st * std::sin(phi), ct);
      };
      auto overlaps = [&](int j) {
        return angle_between(center, cell_center(j)) <= rho + cell_radius;
      };
      // the overlap test is monotone in longitude distance from the center
      // column, so expand outward until both sides fail
      double phi_c = std::atan2(center.y(), center.x());
      int jc = static_cast<int>(std::floor((phi_c + kPi) / d_phi));
      jc = std::clamp(jc, 0, n_phi_ - 1);
      auto push = [&](int j) {
        j = ((j % n_phi_) + n_phi_) % n_phi_;
        cells_[static_cast<std::size_t>(i * n_phi_ + j)].tris.push_back(
            static_cast<int>(t));
      };
      if (!overlaps(jc)) continue;
      push(jc);
      int covered = 1;
      for (int dj = 1; covered < n_phi_; ++dj) {
        bool left = overlaps(((jc - dj) % n_phi_ + n_phi_) % n_phi_);
        bool right = overlaps((jc + dj) % n_phi_);
        if (left && covered < n_phi_) {
          push(jc - dj);
          ++covered;
        }
        if (right && covered < n_phi_) {
          push(jc + dj);
          ++covered;
        }
        if (!left && !right) break;
      }
    }
  }
  // ascending ids give the deterministic lowest-id tie-break; insertion order
  // already ascends in t, but wrap-around pushes can disorder a cell
  for (auto& cell : cells_) {
    std::sort(cell.tris.begin(), cell.tris.end());
    cell.tris.erase(std::unique(cell.tris.begin(), cell.tris.end()),
                    cell.tris.end());
  }
}

int SphereLocator::cell_of(const Vec3& q) const {
  double theta = std::acos(std::clamp(q.z(), -1.0, 1.0));
  double phi = std::atan2(q.y(), q.x());
  int i = std::clamp(static_cast<int>(std::floor(theta / kPi * n_theta_)), 0,
                     n_theta_ - 1);
  int j = std::clamp(
      static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * n_phi_)), 0,
      n_phi_ - 1);
  return i * n_phi_ + j;
}

bool SphereLocator::test_triangle(int t, const Vec3& q, double* coords,
                                  double* min_signed) const {
  const auto& tri = tris_[static_cast<std::size_t>(t)];
  const Vec3& u0 = dirs_[static_cast<std::size_t>(tri[0])];
  const Vec3& u1 = dirs_[static_cast<std::size_t>(tri[1])];
  const Vec3& u2 = dirs_[static_cast<std::size_t>(tri[2])];
  Vec3 c01 = u0.cross(u1), c12 = u1.cross(u2), c20 = u2.cross(u0);
  double c0 = c12.dot(q);  // opposite vertex 0
  double c1 = c20.dot(q);
  double c2 = c01.dot(q);
  double s0 = c0 / std::max(c12.norm(), 1e-300);
  double s1 = c1 / std::max(c20.norm(), 1e-300);
  double s2 = c2 / std::max(c01.norm(), 1e-300);
  *min_signed = std::min({s0, s1, s2});
  double b0 = std::max(c0, 0.0), b1 = std::max(c1, 0.0), b2 = std::max(c2, 0.0);
  double sum = b0 + b1 + b2;
  if (sum > 0.0) {
    coords[0] = b0 / sum;
    coords[1] = b1 / sum;
    coords[2] = b2 / sum;
  } else {
    coords[0] = coords[1] = coords[2] = 1.0 / 3.0;
  }
  return *min_signed >= -kLocateToleranceRad;
}

BarycentricLocation SphereLocator::finish(int t, const double* coords,
                                          bool fallback) const {
  BarycentricLocation loc;
  loc.triangle = t;
  loc.coords = {coords[0], coords[1], coords[2]};
  loc.fallback = fallback;
  return loc;
}

BarycentricLocation SphereLocator::locate(const SpherePoint& q) const {
  const Vec3& v = q.dir;
  double coords[3];
  double min_signed;
  // a triangle containing q is always registered in q's cell, so the cell
  // scan is exact; ascending ids make edge/vertex ties deterministic
  for (int t : cells_[static_cast<std::size_t>(cell_of(v))].tris)
    if (test_triangle(t, v, coords, &min_signed)) return finish(t, coords, false);

  // nothing contains q (within tolerance): full scan for the best miss
  int best = -1;
  double best_signed = -std::numeric_limits<double>::infinity();
  double best_coords[3] = {0, 0, 0};
  for (int t = 0; t < triangle_count(); ++t) {
    if (test_triangle(t, v, coords, &min_signed)) return finish(t, coords, false);
    if (min_signed > best_signed) {
      best_signed = min_signed;
      best = t;
      std::copy(coords, coords + 3, best_coords);
    }
  }
  return finish(best, best_coords, true);
}

BarycentricLocation SphereLocator::locate(const SpherePoint& q,
                                          int hint_triangle) const {
  if (hint_triangle >= 0 && hint_triangle < triangle_count()) {
    double coords[3];
    double min_signed;
    if (test_triangle(hint_triangle, q.dir, coords, &min_signed))
      return finish(hint_triangle, coords, false);
  }
  return locate(q);
}

SphereLocator build_locator(const std::vector<Vec3>& unit_dirs,
                            const std::vector<std::array<int, 3>>& triangles) {
  return SphereLocator(unit_dirs, triangles);
}

Vec3 embed(const TriangleMesh& surface, const BarycentricLocation& loc) {
  if (loc.triangle < 0 || loc.triangle >= surface.triangle_count())
    fail_data("barycentric location references triangle " +
              std::to_string(loc.triangle) + " outside the surface");
  const auto& tri = surface.triangles[static_cast<std::size_t>(loc.triangle)];
  return loc.coords[0] * surface.vertices[static_cast<std::size_t>(tri[0])] +
         loc.coords[1] * surface.vertices[static_cast<std::size_t>(tri[1])] +
         loc.coords[2] * surface.vertices[static_cast<std::size_t>(tri[2])];
}

}  // namespace gsd
