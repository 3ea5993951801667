#pragma once

// Discrete distortion energies over a pair of spherical parameterizations:
// the Moebius-induced vertex correspondence (transfer) and the edge-based
// energies built on it -- elastic sum L(f), symmetric distortion
// e_sd = sqrt(L(f)) + sqrt(L(f^-1)), average stretch, Dirichlet, Lp.
//
// Every edge term of a forward quantity uses the F1 mesh's own edge length
// l_ij and weight A_ij (sum of the two adjacent triangle areas); backward
// quantities use the F2 mesh's own lengths and weights. Image edge lengths
// are chordal distances between the embedded image points.

#include "gsd/common.hpp"
#include "gsd/conformal.hpp"
#include "gsd/mesh.hpp"
#include "gsd/mobius.hpp"
#include "gsd/sphere.hpp"

#include <string>
#include <vector>

namespace gsd {

enum class Direction { forward, backward };

struct CorrespondenceMap {
  std::vector<BarycentricLocation> forward;   // V1 entries, locations on F2
  std::vector<BarycentricLocation> backward;  // V2 entries, locations on F1
  MobiusTransform mobius;
  int forward_fallbacks = 0;
  int backward_fallbacks = 0;
};

struct EnergyBreakdown {
  double forward_elastic = 0.0;   // L(f)
  double backward_elastic = 0.0;  // L(f^-1)
  double e_sd = 0.0;              // sqrt(L(f)) + sqrt(L(f^-1))
  std::vector<double> per_edge_forward;   // stretch ratios on F1 edges
  std::vector<double> per_edge_backward;  // stretch ratios on F2 edges
  double area_f1 = 0.0;
  double area_f2 = 0.0;
  int flagged_forward = 0;
  int flagged_backward = 0;
};

// immutable per-mesh tables the energies consume
struct SurfaceTables {
  EdgeTable edges;
  DiscreteMetric metric;
  std::vector<double> weights;  // A_ij, parallel to edges
  double area = 0.0;
};
[[nodiscard]] SurfaceTables build_surface_tables(const TriangleMesh& mesh);

// Evaluation context for one ordered pair (F1, F2): locators + tables built
// once, shared by any number of concurrent evaluations.
struct EnergyPair {
  const SphericalParameterization* p1 = nullptr;
  const SphericalParameterization* p2 = nullptr;
  SurfaceTables t1, t2;
  SphereLocator loc1, loc2;
};
[[nodiscard]] EnergyPair make_energy_pair(const SphericalParameterization& p1,
                                          const SphericalParameterization& p2);

// forward[i] = locate_2(m . sphere1[i]); backward[j] = locate_1(m^-1 . sphere2[j]).
// hint (optional) warm-starts point location from a nearby correspondence.
[[nodiscard]] CorrespondenceMap transfer(const EnergyPair& pair,
                                         const MobiusTransform& m,
                                         const CorrespondenceMap* hint = nullptr);

// convenience: builds the pair context, then transfers
[[nodiscard]] CorrespondenceMap transfer(const SphericalParameterization& p1,
                                         const SphericalParameterization& p2,
                                         const MobiusTransform& m);

// Maximum tolerated share of fallback-located vertices per direction;
// above it energy evaluation fails (silent fallbacks would bias d_sd).
inline constexpr double kMaxFallbackShare = 1e-3;

[[nodiscard]] double elastic_sum(const EnergyPair& pair,
                                 const CorrespondenceMap& corr, Direction dir);
[[nodiscard]] EnergyBreakdown symmetric_distortion(const EnergyPair& pair,
                                                   const CorrespondenceMap& corr);
[[nodiscard]] double average_stretch(const EnergyPair& pair,
                                     const CorrespondenceMap& corr, Direction dir);
[[nodiscard]] double dirichlet_energy(const EnergyPair& pair,
                                      const CorrespondenceMap& corr, Direction dir);
[[nodiscard]] double lp_energy(const EnergyPair& pair,
                               const CorrespondenceMap& corr, Direction dir,
                               double p);

// elastic_sum(forward) - [area(F2) + area(F1) - 2 average_stretch(forward)]
[[nodiscard]] double lemma_e1_residual(const EnergyPair& pair,
                                       const CorrespondenceMap& corr);

// per-vertex mean |ratio - 1| over incident domain edges, transferred to the
// image surface; on_f2 comes from the forward map, on_f1 from the backward
struct DistortionField {
  std::vector<double> on_f2;
  std::vector<double> on_f1;
};
[[nodiscard]] DistortionField distortion_field(const EnergyPair& pair,
                                               const CorrespondenceMap& corr);

[[nodiscard]] std::string energy_to_json(const EnergyBreakdown& e);

}  // namespace gsd
