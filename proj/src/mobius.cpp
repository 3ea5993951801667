#include "gsd/mobius.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace gsd {

namespace {

using C = std::complex<double>;

constexpr double kDistinctTol = 1e-12;

// d_ij = z1_i z2_j - z1_j z2_i; zero exactly when the points coincide on CP^1
C pair_det(const std::array<C, 2>& a, const std::array<C, 2>& b) {
  return a[0] * b[1] - b[0] * a[1];
}

// matrix sending three pairwise-distinct points to (0, 1, infinity)
Eigen::Matrix2cd to_standard_triple(const std::array<C, 2>& h1,
                                    const std::array<C, 2>& h2,
                                    const std::array<C, 2>& h3) {
  C d23 = pair_det(h2, h3);
  C d21 = pair_det(h2, h1);
  Eigen::Matrix2cd t;
  t << h1[1] * d23, -h1[0] * d23, h3[1] * d21, -h3[0] * d21;
  return t;
}

}  // namespace

MobiusTransform MobiusTransform::from_matrix(const Eigen::Matrix2cd& m) {
  C det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double mag = std::abs(det);
  if (!(mag > 1e-300) || !std::isfinite(mag))
    fail_numeric("matrix with zero or non-finite determinant is not a Moebius transform");
  MobiusTransform out;
  out.m = m / std::sqrt(det);
  return out;
}

std::array<double, 8> MobiusTransform::to_array8() const {
  return {m(0, 0).real(), m(0, 0).imag(), m(0, 1).real(), m(0, 1).imag(),
          m(1, 0).real(), m(1, 0).imag(), m(1, 1).real(), m(1, 1).imag()};
}

MobiusTransform MobiusTransform::from_array8(const std::array<double, 8>& a) {
  Eigen::Matrix2cd m;
  m << C(a[0], a[1]), C(a[2], a[3]), C(a[4], a[5]), C(a[6], a[7]);
  return from_matrix(m);
}

SpherePoint apply(const MobiusTransform& m, const SpherePoint& p) {
  auto h = to_homogeneous(p);
  C w1 = m.m(0, 0) * h[0] + m.m(0, 1) * h[1];
  C w2 = m.m(1, 0) * h[0] + m.m(1, 1) * h[1];
  return from_homogeneous(w1, w2);
}

double dilation(const MobiusTransform& m, const SpherePoint& p) {
  auto h = to_homogeneous(p);  // unit norm
  C w1 = m.m(0, 0) * h[0] + m.m(0, 1) * h[1];
  C w2 = m.m(1, 0) * h[0] + m.m(1, 1) * h[1];
  double n = std::norm(w1) + std::norm(w2);
  if (!(n > 0.0) || !std::isfinite(n))
    fail_numeric("conformal factor overflow in dilation");
  return 1.0 / n;
}

MobiusTransform compose(const MobiusTransform& m1, const MobiusTransform& m2) {
  return MobiusTransform::from_matrix(m1.m * m2.m);
}

MobiusTransform inverse(const MobiusTransform& m) {
  Eigen::Matrix2cd inv;
  inv << m.m(1, 1), -m.m(0, 1), -m.m(1, 0), m.m(0, 0);
  return MobiusTransform::from_matrix(inv);
}

MobiusTransform from_three_points(const SpherePoint& p1, const SpherePoint& p2,
                                  const SpherePoint& p3, const SpherePoint& q1,
                                  const SpherePoint& q2, const SpherePoint& q3) {
  std::array<std::array<C, 2>, 3> hp = {to_homogeneous(p1), to_homogeneous(p2),
                                        to_homogeneous(p3)};
  std::array<std::array<C, 2>, 3> hq = {to_homogeneous(q1), to_homogeneous(q2),
                                        to_homogeneous(q3)};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      if (std::abs(pair_det(hp[static_cast<std::size_t>(i)],
                            hp[static_cast<std::size_t>(j)])) < kDistinctTol)
        fail_data("source points of a three-point transform must be pairwise distinct");
      if (std::abs(pair_det(hq[static_cast<std::size_t>(i)],
                            hq[static_cast<std::size_t>(j)])) < kDistinctTol)
        fail_data("target points of a three-point transform must be pairwise distinct");
    }
  Eigen::Matrix2cd tp = to_standard_triple(hp[0], hp[1], hp[2]);
  Eigen::Matrix2cd tq = to_standard_triple(hq[0], hq[1], hq[2]);
  return MobiusTransform::from_matrix(tq.inverse() * tp);
}

MobiusTransform perturb(const MobiusChart& chart) {
  const auto& o = chart.offset;
  if (std::all_of(o.begin(), o.end(), [](double v) { return v == 0.0; }))
    return chart.base;
  // traceless generator over the fixed basis
  Eigen::Matrix2cd a;
  a << C(o[0], o[1]), C(o[2], o[3]), C(o[4], o[5]), C(-o[0], -o[1]);
  // for traceless A: A^2 = -det(A) I, so exp(A) = cosh(mu) I + sinhc(mu) A
  // with mu^2 = -det(A)
  C mu2 = -(a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0));
  C mu = std::sqrt(mu2);
  C ch, shc;
  if (std::abs(mu) < 1e-4) {
    ch = 1.0 + mu2 / 2.0 + mu2 * mu2 / 24.0;
    shc = 1.0 + mu2 / 6.0 + mu2 * mu2 / 120.0;
  } else {
    ch = std::cosh(mu);
    shc = std::sinh(mu) / mu;
  }
  Eigen::Matrix2cd e = ch * Eigen::Matrix2cd::Identity() + shc * a;
  return MobiusTransform::from_matrix(chart.base.m * e);
}

MobiusTransform mobius_from_rotation(const Eigen::Matrix3d& rot) {
  if ((rot * rot.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-8 ||
      rot.determinant() < 0.0)
    fail_data("matrix is not a rotation");
  // a Moebius transform is determined by three point images; using the
  // coordinate axes makes it exact for any rotation
  SpherePoint e1(Vec3(1, 0, 0)), e2(Vec3(0, 1, 0)), e3(Vec3(0, 0, 1));
  return from_three_points(e1, e2, e3, SpherePoint(rot.col(0)),
                           SpherePoint(rot.col(1)), SpherePoint(rot.col(2)));
}

MobiusTransform hyperbolic_translation(const Vec3& axis, double t) {
  double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(n)) fail_data("hyperbolic axis must be nonzero");
  Vec3 a = axis / n;

  // rotation taking the axis to the north pole
  Eigen::Matrix3d rot;
  const Vec3 north(0, 0, 1);
  double c = a.dot(north);
  if (c > 1.0 - 1e-14) {
    rot.setIdentity();
  } else if (c < -1.0 + 1e-14) {
    rot = Eigen::AngleAxisd(kPi, Vec3(1, 0, 0)).toRotationMatrix();
  } else {
    Vec3 axis_r = a.cross(north).normalized();
    rot = Eigen::AngleAxisd(std::acos(std::clamp(c, -1.0, 1.0)), axis_r)
              .toRotationMatrix();
  }
  MobiusTransform r = mobius_from_rotation(rot);

  // scaling z -> e^t z attracts toward the north pole with factor e^-t there
  double half = std::exp(0.5 * t);
  Eigen::Matrix2cd s;
  s << C(half, 0), C(0, 0), C(0, 0), C(1.0 / half, 0);
  return compose(inverse(r), compose(MobiusTransform::from_matrix(s), r));
}

MobiusTransform center_vertices(std::span<const SpherePoint> points,
                                const CenteringOptions& opts) {
  if (points.empty()) fail_data("cannot center an empty point set");
  auto mean_of = [&](const MobiusTransform& m) {
    Vec3 sum = Vec3::Zero();
    for (const auto& p : points) sum += apply(m, p).dir;
    return Vec3(sum / static_cast<double>(points.size()));
  };

  MobiusTransform m = MobiusTransform::identity();
  Vec3 mean = mean_of(m);
  for (int it = 0; it < opts.max_iterations; ++it) {
    double r = mean.norm();
    if (r <= opts.tolerance) return m;
    // push mass away from the overweight direction; halve the step until the
    // residual actually decreases
    double step = 0.5 * r;
    bool advanced = false;
    for (int halving = 0; halving < 60; ++halving) {
      MobiusTransform trial =
          compose(hyperbolic_translation(-mean / r, step), m);
      Vec3 trial_mean = mean_of(trial);
      if (trial_mean.norm() < r) {
        m = trial;
        mean = trial_mean;
        advanced = true;
        break;
      }
      step *= 0.5;
    }
    if (!advanced)
      fail_numeric("centering stalled with residual " + format_g9(r));
  }
  fail_numeric("centering did not reach tolerance " +
               format_g9(opts.tolerance) + "; residual " +
               format_g9(mean_of(m).norm()));
}

}  // namespace gsd
