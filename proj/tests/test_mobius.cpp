#include "gsd/mobius.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

#include "fixtures.hpp"
#include "gsd/shapes.hpp"

using namespace gsd;
using namespace gsd::testing;

namespace {

using C = std::complex<double>;

MobiusTransform translation(C b) {
  Eigen::Matrix2cd m;
  m << C(1, 0), b, C(0, 0), C(1, 0);
  return MobiusTransform::from_matrix(m);
}

MobiusTransform scaling(C a) {
  Eigen::Matrix2cd m;
  m << std::sqrt(a), C(0, 0), C(0, 0), 1.0 / std::sqrt(a);
  return MobiusTransform::from_matrix(m);
}

MobiusTransform random_transform(Rng& rng, double scale = 1.0) {
  MobiusChart chart;
  for (auto& t : chart.offset) t = scale * rng.uniform(-1.0, 1.0);
  return perturb(chart);
}

double action_distance(const MobiusTransform& a, const MobiusTransform& b,
                       Rng& rng, int n = 20) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    SpherePoint p(rng.unit_vector());
    worst = std::max(worst, (apply(a, p).dir - apply(b, p).dir).norm());
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("mobius");

TEST_CASE("identity acts trivially with unit dilation") {
  Rng rng(7);
  auto id = MobiusTransform::identity();
  for (int i = 0; i < 100; ++i) {
    SpherePoint p(rng.unit_vector());
    CHECK((apply(id, p).dir - p.dir).norm() < 1e-15);
    CHECK(dilation(id, p) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("z + 1 moves the south pole to (1,0,0)") {
  auto m = translation({1, 0});
  auto q = apply(m, SpherePoint(Vec3(0, 0, -1)));
  CHECK((q.dir - Vec3(1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("group laws hold numerically") {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    auto m = random_transform(rng);
    SpherePoint p(rng.unit_vector());
    CHECK((apply(m, apply(inverse(m), p)).dir - p.dir).norm() < 1e-10);
    auto mm = compose(m, inverse(m));
    CHECK((apply(mm, p).dir - p.dir).norm() < 1e-10);
  }
  // associativity
  for (int i = 0; i < 100; ++i) {
    auto a = random_transform(rng), b = random_transform(rng),
         c = random_transform(rng);
    SpherePoint p(rng.unit_vector());
    auto lhs = apply(compose(compose(a, b), c), p);
    auto rhs = apply(compose(a, compose(b, c)), p);
    CHECK((lhs.dir - rhs.dir).norm() < 1e-9);
  }
}

TEST_CASE("dilation matches the translation and scaling closed forms") {
  // z -> z + 1 at z = 0 (south pole): (1+0)/(1+1) = 1/2
  CHECK(dilation(translation({1, 0}), SpherePoint(Vec3(0, 0, -1))) ==
        doctest::Approx(0.5).epsilon(1e-12));
  // z -> 2z at z = 1 (the point (1,0,0)): 2*2/(1+4) = 0.8
  CHECK(dilation(scaling({2, 0}), SpherePoint(Vec3(1, 0, 0))) ==
        doctest::Approx(0.8).epsilon(1e-12));
  // poles of the scaling map: |A| at the south pole, 1/|A| at the north
  CHECK(dilation(scaling({2, 0}), SpherePoint(Vec3(0, 0, -1))) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(dilation(scaling({2, 0}), SpherePoint(Vec3(0, 0, 1))) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("composition of scaling and translation is affine") {
  auto m = compose(scaling({2, 0}), translation({1, 0}));  // z -> 2z + 2
  Eigen::Matrix2cd expect;
  expect << std::sqrt(C(2, 0)), 2.0 / std::sqrt(C(2, 0)), C(0, 0),
      1.0 / std::sqrt(C(2, 0));
  Rng rng(13);
  auto e = MobiusTransform::from_matrix(expect);
  CHECK(action_distance(m, e, rng) < 1e-12);
  CHECK(std::abs(m.m.determinant() - C(1, 0)) < 1e-12);
}

TEST_CASE("dilation cocycle and inverse reciprocity") {
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    auto m1 = random_transform(rng), m2 = random_transform(rng);
    SpherePoint p(rng.unit_vector());
    double lhs = dilation(compose(m1, m2), p);
    double rhs = dilation(m1, apply(m2, p)) * dilation(m2, p);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));

    double li = dilation(inverse(m1), apply(m1, p));
    CHECK(li == doctest::Approx(1.0 / dilation(m1, p)).epsilon(1e-9));
  }
}

TEST_CASE("from_three_points interpolates") {
  Rng rng(19);
  SUBCASE("fixed points give the identity") {
    SpherePoint p1(Vec3(0, 0, -1)), p2(Vec3(1, 0, 0)), p3(Vec3(0, 0, 1));
    auto m = from_three_points(p1, p2, p3, p1, p2, p3);
    CHECK(action_distance(m, MobiusTransform::identity(), rng) < 1e-10);
  }
  SUBCASE("random triples map correctly") {
    for (int i = 0; i < 50; ++i) {
      SpherePoint p1(rng.unit_vector()), p2(rng.unit_vector()),
          p3(rng.unit_vector());
      SpherePoint q1(rng.unit_vector()), q2(rng.unit_vector()),
          q3(rng.unit_vector());
      auto m = from_three_points(p1, p2, p3, q1, q2, q3);
      CHECK((apply(m, p1).dir - q1.dir).norm() < 1e-9);
      CHECK((apply(m, p2).dir - q2.dir).norm() < 1e-9);
      CHECK((apply(m, p3).dir - q3.dir).norm() < 1e-9);
    }
  }
  SUBCASE("coincident points are rejected") {
    SpherePoint p(Vec3(0, 0, 1)), a(Vec3(1, 0, 0)), b(Vec3(0, 1, 0));
    CHECK_THROWS_AS((void)from_three_points(p, p, a, p, a, b), Error);
  }
}

TEST_CASE("chart: zero offset reproduces the base exactly") {
  Rng rng(23);
  auto base = random_transform(rng);
  MobiusChart chart{base, {0, 0, 0, 0, 0, 0}};
  CHECK((perturb(chart).m - base.m).norm() == 0.0);
}

TEST_CASE("chart is first-order symmetric and stays on the group") {
  Rng rng(29);
  auto base = random_transform(rng);
  for (int k = 0; k < 6; ++k) {
    const double eps = 1e-4;
    MobiusChart plus{base, {}}, minus{base, {}};
    plus.offset[k] = eps;
    minus.offset[k] = -eps;
    auto mp = perturb(plus).m, mm = perturb(minus).m;
    CHECK((mp - base.m).norm() > eps / 10.0);       // moves
    CHECK((mp + mm - 2.0 * base.m).norm() < 1e-7);  // odd part cancels
  }
  // det stays 1 along a random walk
  auto walk = MobiusTransform::identity();
  for (int i = 0; i < 100; ++i) {
    MobiusChart c{walk, {}};
    for (auto& t : c.offset) t = 0.1 * rng.uniform(-1.0, 1.0);
    walk = perturb(c);
  }
  CHECK(std::abs(walk.m.determinant() - C(1, 0)) < 1e-10);
}

TEST_CASE("rotations act as rotations with dilation 1") {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    // random rotation from a normalized quaternion
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    q.normalize();
    Eigen::Matrix3d r = q.toRotationMatrix();
    auto m = mobius_from_rotation(r);
    SpherePoint p(rng.unit_vector());
    CHECK((apply(m, p).dir - r * p.dir).norm() < 1e-10);
    CHECK(std::abs(dilation(m, p) - 1.0) < 1e-10);
  }
}

TEST_CASE("hyperbolic translation fixes the axis and contracts at the attractor") {
  Vec3 axis(0, 0, 1);
  auto h = hyperbolic_translation(axis, 0.7);
  CHECK((apply(h, SpherePoint(axis)).dir - axis).norm() < 1e-12);
  CHECK((apply(h, SpherePoint(-axis)).dir + axis).norm() < 1e-12);
  // equator points move toward +z
  auto moved = apply(h, SpherePoint(Vec3(1, 0, 0)));
  CHECK(moved.dir.z() > 0.3);
  // conformal factor at the attracting fixed point is e^{-t}
  CHECK(dilation(h, SpherePoint(axis)) == doctest::Approx(std::exp(-0.7)).epsilon(1e-10));
  CHECK(dilation(h, SpherePoint(-axis)) == doctest::Approx(std::exp(0.7)).epsilon(1e-10));

  // a tilted axis behaves the same way
  Vec3 a2 = Vec3(1, 2, -0.5).normalized();
  auto h2 = hyperbolic_translation(a2, 0.4);
  CHECK((apply(h2, SpherePoint(a2)).dir - a2).norm() < 1e-10);
  CHECK(dilation(h2, SpherePoint(a2)) == doctest::Approx(std::exp(-0.4)).epsilon(1e-9));
}

TEST_CASE("center_vertices balances a biased cloud") {
  Rng rng(37);
  // balanced input: already centered, returns ~identity
  {
    auto ico = gen_icosphere(1);
    std::vector<SpherePoint> pts;
    for (const auto& v : ico.vertices) pts.emplace_back(v);
    auto m = center_vertices(pts);
    CHECK(action_distance(m, MobiusTransform::identity(), rng) < 1e-6);
  }
  // biased input: transformed mean must land within 1e-8 of the origin
  {
    std::vector<SpherePoint> pts;
    for (int i = 0; i < 200; ++i) {
      Vec3 v = rng.unit_vector();
      v.z() = std::abs(v.z()) + 0.5;  // strong northern bias
      pts.emplace_back(v);
    }
    for (int i = 0; i < 20; ++i) pts.emplace_back(rng.unit_vector());
    auto m = center_vertices(pts);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : pts) mean += apply(m, p).dir;
    mean /= static_cast<double>(pts.size());
    CHECK(mean.norm() <= 1e-8);

    // idempotence: centering the centered cloud is the identity
    std::vector<SpherePoint> centered;
    for (const auto& p : pts) centered.push_back(apply(m, p));
    auto m2 = center_vertices(centered);
    CHECK(action_distance(m2, MobiusTransform::identity(), rng) < 1e-7);
  }
}

TEST_CASE("transform serializes to 8 reals and back") {
  Rng rng(41);
  auto m = random_transform(rng);
  auto a = m.to_array8();
  auto back = MobiusTransform::from_array8(a);
  CHECK((back.m - m.m).norm() < 1e-15);
}

TEST_SUITE_END();
