#include "gsd/shapes.hpp"

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace gsd;
using namespace gsd::testing;

TEST_SUITE_BEGIN("shapes");

TEST_CASE("icosphere level 0 is the icosahedron") {
  auto m = gen_icosphere(0);
  CHECK(m.vertex_count() == 12);
  CHECK(m.triangle_count() == 20);
  CHECK(build_edge_table(m).edge_count() == 30);
  CHECK(validate(m).accepted());
  for (const auto& v : m.vertices)
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("icosphere level 3 area approaches 4 pi") {
  auto m = gen_icosphere(3);
  CHECK(m.triangle_count() == 20 * 64);
  CHECK(m.vertex_count() == 642);
  CHECK(validate(m).accepted());
  CHECK(surface_area(m) == doctest::Approx(kFourPi).epsilon(5e-3));
}

TEST_CASE("icosphere radius scales area by r^2") {
  auto a1 = surface_area(gen_icosphere(2, 1.0));
  auto a2 = surface_area(gen_icosphere(2, 2.0));
  CHECK(a2 == doctest::Approx(4.0 * a1).epsilon(1e-12));
}

TEST_CASE("geodesic sphere frequency 10 has 1002 vertices") {
  auto m = gen_geodesic_sphere(10);
  CHECK(m.vertex_count() == 1002);
  CHECK(m.triangle_count() == 2000);
  CHECK(validate(m).accepted());
  CHECK(surface_area(m) == doctest::Approx(kFourPi).epsilon(5e-3));
  for (const auto& v : m.vertices)
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("geodesic frequency 2^s matches icosphere counts") {
  auto g = gen_geodesic_sphere(4);
  auto i = gen_icosphere(2);
  CHECK(g.vertex_count() == i.vertex_count());
  CHECK(g.triangle_count() == i.triangle_count());
}

TEST_CASE("ellipsoid generator") {
  auto e = gen_ellipsoid(2.0, 1.0, 1.0, 3);
  CHECK(validate(e).accepted());
  double max_x = 0.0, max_y = 0.0;
  for (const auto& v : e.vertices) {
    max_x = std::max(max_x, std::abs(v.x()));
    max_y = std::max(max_y, std::abs(v.y()));
  }
  CHECK(max_x == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(max_y <= 1.0 + 1e-9);

  auto round = gen_ellipsoid(1.0, 1.0, 1.0, 2);
  auto sphere = gen_icosphere(2);
  for (int i = 0; i < round.vertex_count(); ++i)
    CHECK((round.vertices[i] - sphere.vertices[i]).norm() == 0.0);

  CHECK(validate(gen_ellipsoid(10.0, 1.0, 1.0, 4)).accepted());
}

TEST_CASE("noisy sphere: zero noise is the clean sphere") {
  auto clean = gen_icosphere(3);
  auto n0 = gen_noisy_sphere(3, 0.0, 7);
  for (int i = 0; i < clean.vertex_count(); ++i)
    CHECK((clean.vertices[i] - n0.vertices[i]).norm() == 0.0);
}

TEST_CASE("noisy sphere is seeded and deterministic") {
  auto a = gen_noisy_sphere(3, 1.0, 42);
  auto b = gen_noisy_sphere(3, 1.0, 42);
  auto c = gen_noisy_sphere(3, 1.0, 43);
  bool identical = true, differs = false;
  for (int i = 0; i < a.vertex_count(); ++i) {
    identical = identical && (a.vertices[i] - b.vertices[i]).norm() == 0.0;
    differs = differs || (a.vertices[i] - c.vertices[i]).norm() > 0.0;
  }
  CHECK(identical);
  CHECK(differs);
  CHECK(validate(a).accepted());
  CHECK(validate(gen_noisy_sphere(3, 4.0, 42)).accepted());
}

TEST_CASE("noisy sphere displacement matches the half-normal mean") {
  const int level = 4;
  const double n_mult = 2.0;
  auto clean = gen_icosphere(level);
  auto noisy = gen_noisy_sphere(level, n_mult, 11);
  double sigma = n_mult * mean_edge_length(clean);
  double mean_disp = 0.0;
  for (int i = 0; i < clean.vertex_count(); ++i)
    mean_disp += (noisy.vertices[i] - clean.vertices[i]).norm();
  mean_disp /= clean.vertex_count();
  // E|N(0,sigma)| = sigma sqrt(2/pi); 2562 samples keep the error well under 10%
  double expected = sigma * std::sqrt(2.0 / 3.14159265358979323846);
  CHECK(mean_disp == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("three-bump family") {
  auto m = gen_three_bump(0.0, 3);
  CHECK(validate(m).accepted());
  double max_r = 0.0;
  for (const auto& v : m.vertices) max_r = std::max(max_r, v.norm());
  // the tails of the other two bumps add ~1e-9 of cross-talk at the +z peak
  CHECK(max_r <= 1.6 + 1e-6);
  CHECK(max_r >= 1.5);  // the 1.6 bump is resolved at level 3

  // the theta bump sits where requested: radius near +y exceeds 1.15 at theta=0
  double y_peak = 0.0, ny_peak = 0.0;
  for (const auto& v : m.vertices) {
    if (v.normalized().y() > 0.95) y_peak = std::max(y_peak, v.norm());
    if (v.normalized().y() < -0.95) ny_peak = std::max(ny_peak, v.norm());
  }
  CHECK(y_peak >= 1.15);
  CHECK(ny_peak <= 1.05);

  auto rotated = gen_three_bump(3.14159265358979323846, 3);
  double y2 = 0.0, ny2 = 0.0;
  for (const auto& v : rotated.vertices) {
    if (v.normalized().y() > 0.95) y2 = std::max(y2, v.norm());
    if (v.normalized().y() < -0.95) ny2 = std::max(ny2, v.norm());
  }
  CHECK(ny2 >= 1.15);
  CHECK(y2 <= 1.05);
}

TEST_CASE("random sphere triangulates into a valid genus-zero mesh") {
  auto m = gen_random_sphere(200, 5);
  CHECK(m.vertex_count() == 200);
  CHECK(m.triangle_count() == 2 * 200 - 4);
  CHECK(build_edge_table(m).edge_count() == 3 * 200 - 6);
  CHECK(validate(m).accepted());
  for (const auto& v : m.vertices)
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  // deterministic
  auto n = gen_random_sphere(200, 5);
  for (int i = 0; i < 200; ++i)
    CHECK((m.vertices[i] - n.vertices[i]).norm() == 0.0);
}

TEST_CASE("mean edge length of the unit tetrahedron is 1") {
  CHECK(mean_edge_length(make_tetrahedron()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_SUITE_END();
