#pragma once

// The six-dimensional Moebius group acting on S^2. A transform is a
// determinant-one 2x2 complex matrix [[a,b],[c,d]] acting on stereographic
// coordinates by z -> (az+b)/(cz+d), equivalently on CP^1 by (z1:z2) ->
// M (z1,z2)^T. All point evaluation happens in homogeneous coordinates, so
// both poles are ordinary points and the conformal factor
//
//     lambda(p) = |zeta|^2 / |M zeta|^2      (zeta unit-norm homogeneous)
//
// agrees with |m'(z)| (1+|z|^2)/(1+|m(z)|^2) everywhere without pole cases.

#include "gsd/common.hpp"
#include "gsd/sphere.hpp"

#include <array>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gsd {

struct MobiusTransform {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();  // det == 1

  [[nodiscard]] static MobiusTransform identity() { return {}; }
  // scales the matrix so det == 1 (principal square root)
  [[nodiscard]] static MobiusTransform from_matrix(const Eigen::Matrix2cd& m);

  [[nodiscard]] std::array<double, 8> to_array8() const;
  [[nodiscard]] static MobiusTransform from_array8(const std::array<double, 8>& a);
};

// local 6-parameter chart; offset = 0 reproduces base exactly
struct MobiusChart {
  MobiusTransform base;
  std::array<double, 6> offset{0, 0, 0, 0, 0, 0};
};

[[nodiscard]] SpherePoint apply(const MobiusTransform& m, const SpherePoint& p);
[[nodiscard]] double dilation(const MobiusTransform& m, const SpherePoint& p);

[[nodiscard]] MobiusTransform compose(const MobiusTransform& m1,
                                      const MobiusTransform& m2);
[[nodiscard]] MobiusTransform inverse(const MobiusTransform& m);

// the unique transform with apply(m, p_i) = q_i; inputs pairwise distinct
[[nodiscard]] MobiusTransform from_three_points(
    const SpherePoint& p1, const SpherePoint& p2, const SpherePoint& p3,
    const SpherePoint& q1, const SpherePoint& q2, const SpherePoint& q3);

// base * exp(sum_k offset_k X_k) over a fixed basis of the traceless 2x2
// complex matrices; stays exactly on the group
[[nodiscard]] MobiusTransform perturb(const MobiusChart& chart);

// rotation of S^2 as a Moebius transform (dilation == 1 everywhere)
[[nodiscard]] MobiusTransform mobius_from_rotation(const Eigen::Matrix3d& rot);

// Hyperbolic translation with attracting fixed point +axis, repelling -axis;
// t is the translation length (t > 0 pushes points toward +axis).
[[nodiscard]] MobiusTransform hyperbolic_translation(const Vec3& axis, double t);

// Moebius transform driving the Euclidean center of mass of the points to the
// origin (norm <= tol); damped iteration continuous from the identity.
struct CenteringOptions {
  double tolerance = 1e-8;
  int max_iterations = 1000;
};
[[nodiscard]] MobiusTransform center_vertices(
    std::span<const SpherePoint> points, const CenteringOptions& opts = {});

inline MobiusTransform center_vertices(const std::vector<SpherePoint>& points,
                                       const CenteringOptions& opts = {}) {
  return center_vertices(std::span<const SpherePoint>(points), opts);
}

}  // namespace gsd
