#pragma once

// Synthetic test shapes: icospheres and geodesic spheres, ellipsoids,
// noisy spheres, the three-bump family, and random-point spheres via
// convex hull. All generators are deterministic for a given seed.

#include "gsd/common.hpp"
#include "gsd/mesh.hpp"

#include <cstdint>

namespace gsd {

// icosahedron subdivided `subdivisions` times, radially projected each level;
// F = 20 * 4^subdivisions
[[nodiscard]] TriangleMesh gen_icosphere(int subdivisions, double radius = 1.0);

// class-I geodesic sphere of frequency f: each icosahedron face split into
// f^2 triangles, projected; V = 10 f^2 + 2 (f = 10 gives V = 1002)
[[nodiscard]] TriangleMesh gen_geodesic_sphere(int frequency, double radius = 1.0);

// icosphere with coordinates scaled by the semi-axes (a, b, c)
[[nodiscard]] TriangleMesh gen_ellipsoid(double a, double b, double c,
                                         int subdivisions);

// unit icosphere with every vertex moved radially by a Gaussian sample of
// standard deviation noise_multiple x (mean edge length of the clean mesh);
// the perturbed radius is clamped below at 0.05 so an extreme draw cannot
// push a vertex through the origin
[[nodiscard]] TriangleMesh gen_noisy_sphere(int subdivisions,
                                            double noise_multiple,
                                            std::uint64_t seed);

// Unit sphere with three radial bumps: peak radius 1.4 along +x, 1.6 along
// +z, and 1.2 along (-sin theta, cos theta, 0) -- theta = 0 puts it on +y,
// theta = pi on -y. Bump profile: 1 + (h-1) exp(-(angle/w)^2), w = 0.35 rad.
[[nodiscard]] TriangleMesh gen_three_bump(double theta, int subdivisions);
inline constexpr double kBumpWidthRad = 0.35;

// n uniform random directions triangulated by their convex hull (all points
// on a sphere are extreme, so V = n)
[[nodiscard]] TriangleMesh gen_random_sphere(int n_points, std::uint64_t seed,
                                             double radius = 1.0);

// mean edge length of a mesh (used for noise calibration)
[[nodiscard]] double mean_edge_length(const TriangleMesh& mesh);

}  // namespace gsd
