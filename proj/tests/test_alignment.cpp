#include "gsd/alignment.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "gsd/shapes.hpp"

using namespace gsd;
using namespace gsd::testing;

namespace {

// spherical image of a surface point: normalized barycentric combination of
// its triangle's sphere positions (the convention the seeds are built on)
Vec3 sphere_image(const SphericalParameterization& p,
                  const BarycentricLocation& loc) {
  const auto& t = p.source.triangles[loc.triangle];
  Vec3 s = loc.coords[0] * p.sphere_positions[t[0]].dir +
           loc.coords[1] * p.sphere_positions[t[1]].dir +
           loc.coords[2] * p.sphere_positions[t[2]].dir;
  return s.normalized();
}

DsdOptions quick_options(int seeds, int iterations) {
  DsdOptions opts;
  opts.seed_limit = seeds;
  opts.descent.max_iterations = iterations;
  return opts;
}

}  // namespace

TEST_SUITE_BEGIN("alignment");

TEST_CASE("axis frame of an ellipsoid recovers the semi-axes") {
  auto mesh = gen_ellipsoid(2.0, 1.0, 0.5, 2);
  auto frame = ellipsoid_axes(mesh);
  CHECK(frame.centroid.norm() < 1e-9);
  CHECK(std::abs(frame.axes[0].dot(Vec3(1, 0, 0))) > 0.999);
  CHECK(std::abs(frame.axes[1].dot(Vec3(0, 1, 0))) > 0.999);
  CHECK(std::abs(frame.axes[2].dot(Vec3(0, 0, 1))) > 0.999);
  CHECK(frame.eigenvalues[0] > frame.eigenvalues[1]);
  CHECK(frame.eigenvalues[1] > frame.eigenvalues[2]);
  // right-handed frame
  CHECK(frame.axes[0].cross(frame.axes[1]).dot(frame.axes[2]) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // extremal points sit near the tips, found by honest ray casts
  for (int k = 0; k < 6; ++k) {
    CHECK_FALSE(frame.ray_fallback[k]);
    CHECK(frame.locations[k].triangle >= 0);
    double sum = frame.locations[k].coords[0] + frame.locations[k].coords[1] +
                 frame.locations[k].coords[2];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK((frame.points[0] - Vec3(2, 0, 0)).norm() < 0.1);
  CHECK((frame.points[1] + Vec3(2, 0, 0)).norm() < 0.1);
  CHECK((frame.points[4].cwiseAbs() - Vec3(0, 0, 0.5)).norm() < 0.1);
  // deterministic
  auto again = ellipsoid_axes(mesh);
  for (int k = 0; k < 3; ++k)
    CHECK((frame.axes[k] - again.axes[k]).norm() == 0.0);
}

TEST_CASE("axis frame follows a translation") {
  auto mesh = gen_ellipsoid(1.6, 1.0, 0.7, 2);
  auto base = ellipsoid_axes(mesh);
  auto shifted = mesh;
  for (auto& v : shifted.vertices) v += Vec3(1, 2, 3);
  auto moved = ellipsoid_axes(shifted);
  CHECK((moved.centroid - base.centroid - Vec3(1, 2, 3)).norm() < 1e-9);
  for (int k = 0; k < 3; ++k)
    CHECK((moved.axes[k] - base.axes[k]).norm() < 1e-9);
}

TEST_CASE("initial seeds enumerate the octahedral alignments") {
  auto m1 = gen_ellipsoid(1.6, 1.0, 0.7, 2);
  auto m2 = gen_ellipsoid(1.5, 0.9, 0.6, 2);
  auto p1 = from_spherical_mesh(m1);
  auto p2 = from_spherical_mesh(m2);
  auto f1 = ellipsoid_axes(m1);
  auto f2 = ellipsoid_axes(m2);

  auto seeds = initial_seeds(f1, p1, f2, p2);
  REQUIRE(static_cast<int>(seeds.size()) == 24);
  for (int i = 0; i < 24; ++i) {
    CHECK(seeds[i].id == i);
    CHECK_FALSE(seeds[i].reflected);
  }
  // seed 0 is the identity alignment: +a0,+a1,+a2 onto +b0,+b1,+b2
  for (int k = 0; k < 3; ++k) {
    SpherePoint src(sphere_image(p1, f1.locations[2 * k]));
    Vec3 dst = sphere_image(p2, f2.locations[2 * k]);
    CHECK((apply(seeds[0].m, src).dir - dst).norm() < 1e-6);
  }

  auto mr = reflect(m1);
  auto pr = from_spherical_mesh(mr);
  auto fr = ellipsoid_axes(mr);
  auto both = initial_seeds(f1, p1, f2, p2, &fr, &pr);
  REQUIRE(static_cast<int>(both.size()) == 48);
  for (int i = 0; i < 48; ++i) {
    CHECK(both[i].id == i);
    CHECK(both[i].reflected == (i >= 24));
  }
}

TEST_CASE("descent walks back a hyperbolic displacement") {
  auto p = from_spherical_mesh(gen_icosphere(2));
  auto pair = make_energy_pair(p, p);
  auto seed = hyperbolic_translation(Vec3(0, 0, 1), 0.4);

  auto result = minimize(pair, seed);
  CHECK(result.converged);
  CHECK_FALSE(result.line_search_failed);
  REQUIRE(result.energy_trace.size() >= 2);
  for (std::size_t i = 1; i < result.energy_trace.size(); ++i)
    CHECK(result.energy_trace[i] <= result.energy_trace[i - 1] + 1e-15);
  CHECK(result.energy.e_sd < 1e-2);
  CHECK(result.energy.e_sd < result.energy_trace.front() * 0.05);

  MinimizeOptions capped;
  capped.max_iterations = 1;
  auto one = minimize(pair, seed, capped);
  CHECK(one.iterations <= 1);
}

TEST_CASE("dsd of a mesh with itself is zero") {
  auto mesh = gen_icosphere(2);
  auto result = dsd(mesh, mesh, quick_options(6, 120));
  CHECK(result.d_sd < 1e-3);
  CHECK_FALSE(result.orientation_reversed);
  CHECK_FALSE(result.qc_warning);
  CHECK(static_cast<int>(result.per_seed.size()) == 6);
  CHECK(static_cast<int>(result.correspondence.forward.size()) ==
        mesh.vertex_count());
}

TEST_CASE("dsd of uniformly scaled spheres matches the closed form") {
  auto m1 = gen_icosphere(2);
  auto m2 = gen_icosphere(2, 2.0);
  double a1 = surface_area(m1);
  double expected = 2.0 * std::sqrt(a1);  // 2(sqrt(4 a1) - sqrt(a1))
  auto result = dsd(m1, m2, quick_options(2, 200));
  CHECK(std::abs(result.d_sd - expected) / expected < 0.02);
  // the returned energies belong to the winning correspondence
  CHECK(result.energy.e_sd == doctest::Approx(result.d_sd));
  CHECK(result.energy.area_f1 == doctest::Approx(a1).epsilon(1e-9));
}

TEST_CASE("reflection search recognizes a mirrored shape") {
  auto mesh = gen_three_bump(0.6, 1);
  auto mirrored = reflect(mesh);

  DsdOptions no_reflect = quick_options(0, 80);
  auto rigid = dsd(mesh, mirrored, no_reflect);

  DsdOptions with_reflect = quick_options(0, 80);
  with_reflect.allow_reflection = true;
  auto loose = dsd(mesh, mirrored, with_reflect);

  CHECK(loose.orientation_reversed);
  CHECK(loose.d_sd < 0.5 * rigid.d_sd);
  CHECK(static_cast<int>(loose.per_seed.size()) == 48);
}

TEST_CASE("distance matrix is symmetric with a clean audit") {
  std::vector<TriangleMesh> meshes{gen_icosphere(1), gen_icosphere(1, 1.3),
                                   gen_icosphere(1, 1.6)};
  auto result = distance_matrix(meshes, quick_options(2, 80));
  REQUIRE(result.distances.rows() == 3);
  CHECK(result.failures.empty());
  CHECK(static_cast<int>(result.pair_results.size()) == 6);
  for (int i = 0; i < 3; ++i) CHECK(result.distances(i, i) < 1e-6);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(result.distances(i, j) == result.distances(j, i));
  CHECK(result.distances(0, 1) > 0.0);
  CHECK(result.distances(0, 2) > result.distances(0, 1));

  auto audit = metric_audit(result.distances);
  CHECK(audit.max_symmetry_violation == 0.0);
  // the three spheres are metrically colinear, so the slack hovers near zero;
  // allow coarse-mesh minimizer noise
  CHECK(audit.max_triangle_violation <= 0.05);
  CHECK(audit.negative_entries == 0);
  CHECK(audit.skipped_entries == 0);
}

TEST_CASE("metric audit skips unavailable pairs") {
  double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd d(3, 3);
  d << 0.0, 1.0, nan, 1.0, 0.0, 2.0, nan, 2.0, 0.0;
  auto audit = metric_audit(d);
  CHECK(audit.skipped_entries == 2);
  CHECK(audit.max_symmetry_violation == 0.0);
  CHECK(audit.max_triangle_violation == 0.0);  // every triple touches the hole
  CHECK(audit.negative_entries == 0);

  d(0, 1) = -0.5;
  d(1, 0) = -0.5;
  CHECK(metric_audit(d).negative_entries == 2);
}

TEST_CASE("distance report serializes and the correspondence round-trips") {
  auto mesh = gen_icosphere(1);
  auto result = dsd(mesh, mesh, quick_options(1, 40));
  auto text = distance_to_json(result);
  CHECK(text.find("\"d_sd\"") != std::string::npos);
  CHECK(text.find("\"orientation_reversed\"") != std::string::npos);
  CHECK(text.find("\"per_seed\"") != std::string::npos);

  std::ostringstream out;
  write_correspondence(out, result.correspondence);
  std::istringstream in(out.str());
  std::string hash, tag, version;
  int count = 0;
  in >> hash >> tag >> version >> count;
  CHECK(hash == "#");
  CHECK(tag == "gsd-corr");
  CHECK(version == "v1");
  CHECK(count == mesh.vertex_count());
  for (int i = 0; i < count; ++i) {
    int tri = -1;
    double b0 = 0, b1 = 0, b2 = 0;
    in >> tri >> b0 >> b1 >> b2;
    CHECK(tri >= 0);
    CHECK(b0 + b1 + b2 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("dsd validates its inputs") {
  try {
    (void)dsd(make_torus(6), gen_icosphere(1), quick_options(1, 10));
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
  }
}

TEST_SUITE_END();
