#include "gsd/energy.hpp"

#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "gsd/shapes.hpp"

using namespace gsd;
using namespace gsd::testing;

namespace {

// a mesh and its double, sharing one triangulation: every forward stretch
// ratio is exactly 2, every backward ratio exactly 1/2
struct ScaledPair {
  SphericalParameterization p1, p2;
  ScaledPair()
      : p1(from_spherical_mesh(gen_icosphere(3))),
        p2(from_spherical_mesh(gen_icosphere(3, 2.0))) {}
};

}  // namespace

TEST_SUITE_BEGIN("energy");

TEST_CASE("surface tables agree with the mesh") {
  auto mesh = gen_icosphere(2);
  auto tables = build_surface_tables(mesh);
  CHECK(tables.edges.edge_count() == 480);
  CHECK(tables.area == doctest::Approx(surface_area(mesh)).epsilon(1e-12));
  double third = 0.0;
  for (double w : tables.weights) third += w / 3.0;
  CHECK(third == doctest::Approx(tables.area).epsilon(1e-12));
}

TEST_CASE("identity transfer of a self-pair costs nothing") {
  auto p = from_spherical_mesh(gen_icosphere(3));
  auto pair = make_energy_pair(p, p);
  auto corr = transfer(pair, MobiusTransform::identity());
  CHECK(static_cast<int>(corr.forward.size()) == p.source.vertex_count());
  CHECK(static_cast<int>(corr.backward.size()) == p.source.vertex_count());
  CHECK(corr.forward_fallbacks == 0);
  CHECK(corr.backward_fallbacks == 0);
  CHECK(elastic_sum(pair, corr, Direction::forward) < 1e-12);
  CHECK(elastic_sum(pair, corr, Direction::backward) < 1e-12);
  auto breakdown = symmetric_distortion(pair, corr);
  CHECK(breakdown.e_sd < 1e-6);
  // with unit ratios the average stretch reproduces the area identity
  CHECK(average_stretch(pair, corr, Direction::forward) ==
        doctest::Approx(pair.t1.area).epsilon(1e-9));
  CHECK(dirichlet_energy(pair, corr, Direction::forward) ==
        doctest::Approx(pair.t1.area).epsilon(1e-9));
}

TEST_CASE("uniform scaling has closed-form energies") {
  ScaledPair meshes;
  auto pair = make_energy_pair(meshes.p1, meshes.p2);
  auto corr = transfer(pair, MobiusTransform::identity());
  double a1 = pair.t1.area;
  CHECK(pair.t2.area == doctest::Approx(4.0 * a1).epsilon(1e-12));

  // forward ratios are 2: L(f) = sum (2-1)^2 A_ij/3 = area(F1)
  CHECK(elastic_sum(pair, corr, Direction::forward) ==
        doctest::Approx(a1).epsilon(1e-9));
  // backward ratios are 1/2: L(f^-1) = (1/4) area(F2) = area(F1)
  CHECK(elastic_sum(pair, corr, Direction::backward) ==
        doctest::Approx(a1).epsilon(1e-9));

  auto breakdown = symmetric_distortion(pair, corr);
  CHECK(breakdown.e_sd == doctest::Approx(2.0 * std::sqrt(a1)).epsilon(1e-9));
  CHECK(breakdown.area_f1 == doctest::Approx(a1).epsilon(1e-12));
  CHECK(breakdown.area_f2 == doctest::Approx(4.0 * a1).epsilon(1e-12));
  CHECK(static_cast<int>(breakdown.per_edge_forward.size()) ==
        pair.t1.edges.edge_count());
  CHECK(static_cast<int>(breakdown.per_edge_backward.size()) ==
        pair.t2.edges.edge_count());
  for (double r : breakdown.per_edge_forward)
    CHECK(r == doctest::Approx(2.0).epsilon(1e-9));
  for (double r : breakdown.per_edge_backward)
    CHECK(r == doctest::Approx(0.5).epsilon(1e-9));

  CHECK(average_stretch(pair, corr, Direction::forward) ==
        doctest::Approx(2.0 * a1).epsilon(1e-9));
  CHECK(dirichlet_energy(pair, corr, Direction::forward) ==
        doctest::Approx(4.0 * a1).epsilon(1e-9));

  // the expansion L(f) = area2 + area1 - 2 E1 is exact for a uniform scaling
  CHECK(lemma_e1_residual(pair, corr) == doctest::Approx(0.0).epsilon(1e-9));

  // Lp consistency: lp(2)^2 equals the elastic sum
  double l2 = lp_energy(pair, corr, Direction::forward, 2.0);
  CHECK(l2 * l2 == doctest::Approx(a1).epsilon(1e-9));
  CHECK(lp_energy(pair, corr, Direction::forward, 1.0) ==
        doctest::Approx(a1).epsilon(1e-9));
}

TEST_CASE("a generic rotation is nearly free on a self-pair") {
  auto rot = mobius_from_rotation(
      Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix());
  auto cost = [&](int level) {
    auto p = from_spherical_mesh(gen_icosphere(level));
    auto pair = make_energy_pair(p, p);
    auto corr = transfer(pair, rot);
    CHECK(corr.forward_fallbacks == 0);
    CHECK(corr.backward_fallbacks == 0);
    return symmetric_distortion(pair, corr).e_sd;
  };
  // only discretization error survives, and it shrinks under refinement
  double coarse = cost(3);
  double fine = cost(4);
  CHECK(coarse < 0.03);
  CHECK(fine < 0.5 * coarse);
}

TEST_CASE("a genuine Moebius deformation costs energy on a self-pair") {
  auto p = from_spherical_mesh(gen_icosphere(2));
  auto pair = make_energy_pair(p, p);
  auto slide = hyperbolic_translation(Vec3(0, 0, 1), 0.8);
  double at_identity =
      elastic_sum(pair, transfer(pair, MobiusTransform::identity()),
                  Direction::forward);
  double at_slide = elastic_sum(pair, transfer(pair, slide), Direction::forward);
  CHECK(at_slide > at_identity + 0.01);
}

TEST_CASE("warm-started transfer matches the cold one") {
  auto p = from_spherical_mesh(gen_icosphere(2));
  auto pair = make_energy_pair(p, p);
  auto rot = mobius_from_rotation(
      Eigen::AngleAxisd(0.3, Vec3(0, 1, 1).normalized()).toRotationMatrix());
  auto cold = transfer(pair, rot);
  MobiusChart chart;
  chart.base = rot;
  chart.offset = {1e-4, 0, -1e-4, 0, 1e-4, 0};
  auto nudged = perturb(chart);
  auto warm = transfer(pair, nudged, &cold);
  auto coldn = transfer(pair, nudged);
  CHECK(elastic_sum(pair, warm, Direction::forward) ==
        doctest::Approx(elastic_sum(pair, coldn, Direction::forward))
            .epsilon(1e-12));
  CHECK(elastic_sum(pair, warm, Direction::backward) ==
        doctest::Approx(elastic_sum(pair, coldn, Direction::backward))
            .epsilon(1e-12));
}

TEST_CASE("excess fallbacks abort the evaluation") {
  auto p = from_spherical_mesh(gen_icosphere(1));
  auto pair = make_energy_pair(p, p);
  auto corr = transfer(pair, MobiusTransform::identity());
  corr.forward_fallbacks = p.source.vertex_count();  // forge a bad transfer
  CHECK_THROWS_AS((void)elastic_sum(pair, corr, Direction::forward), Error);
  // the backward direction is unaffected
  CHECK_NOTHROW((void)elastic_sum(pair, corr, Direction::backward));
}

TEST_CASE("lp energy validates its exponent") {
  auto p = from_spherical_mesh(gen_icosphere(1));
  auto pair = make_energy_pair(p, p);
  auto corr = transfer(pair, MobiusTransform::identity());
  CHECK_THROWS_AS((void)lp_energy(pair, corr, Direction::forward, 0.5), Error);
  CHECK_NOTHROW((void)lp_energy(pair, corr, Direction::forward, 3.0));
}

TEST_CASE("distortion fields land on the right surfaces") {
  ScaledPair meshes;
  auto pair = make_energy_pair(meshes.p1, meshes.p2);
  auto corr = transfer(pair, MobiusTransform::identity());
  auto field = distortion_field(pair, corr);
  CHECK(static_cast<int>(field.on_f2.size()) == meshes.p2.source.vertex_count());
  CHECK(static_cast<int>(field.on_f1.size()) == meshes.p1.source.vertex_count());
  // forward ratios are 2 everywhere: mean |r-1| = 1 lands on every F2 vertex
  for (double v : field.on_f2) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  for (double v : field.on_f1) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("energy json carries the summary") {
  auto p = from_spherical_mesh(gen_icosphere(1));
  auto pair = make_energy_pair(p, p);
  auto text =
      energy_to_json(symmetric_distortion(pair, transfer(pair, MobiusTransform::identity())));
  CHECK(text.find("\"e_sd\"") != std::string::npos);
  CHECK(text.find("\"forward_elastic\"") != std::string::npos);
  CHECK(text.find("\"area_f1\"") != std::string::npos);
}

TEST_SUITE_END();
