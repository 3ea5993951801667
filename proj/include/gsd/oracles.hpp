#pragma once

// Closed-form reference values from the smooth theory plus high-accuracy
// quadrature of the average stretch over the sphere. These anchor the
// discrete pipeline in tests and back the CLI's `oracle` subcommand.

#include "gsd/common.hpp"
#include "gsd/mobius.hpp"

#include <complex>
#include <limits>

namespace gsd {

// conformal factor of z -> z + B at z (round metric)
[[nodiscard]] double lambda_translation(std::complex<double> b,
                                        std::complex<double> z);
// conformal factor of z -> A z at z
[[nodiscard]] double lambda_scaling(std::complex<double> a,
                                    std::complex<double> z);

// E1 of the scaling z -> Az over the round sphere: 8 pi A ln A / (A^2 - 1).
// Requires A > 1; for A < 1 use the reciprocity E1(A) = E1(1/A).
[[nodiscard]] double e1_scaling(double a);

// optimal distance between round spheres of areas a1, a2: 2 |sqrt a2 - sqrt a1|
[[nodiscard]] double rescaling_distance(double a1, double a2);

// elastic energy of a conformal map with the given average stretch:
// a2 + a1 - 2 e1
[[nodiscard]] double elastic_identity(double a1, double a2, double e1);

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

// Tensor Gauss-Legendre (polar) x trapezoid (azimuthal) with the substitution
// r = tan(theta/2): the plane integral with weight 4/(1+r^2)^2 becomes
// the finite integral of lambda(theta,phi) sin(theta) over [0,theta_max],
// theta_max = 2 atan(cutoff). The default infinite cutoff is exact.
struct QuadratureSpec {
  int radial_nodes = 2048;
  int angular_nodes = 512;
  double cutoff_radius = std::numeric_limits<double>::infinity();
};

// true when doubling the node counts moves the lambda == 1 integral by
// less than 1e-8 relative (the settings are then usable for quadrature_e1)
[[nodiscard]] bool quadrature_converged(const QuadratureSpec& spec);

// integral of dilation(m, .) over the sphere; Error(numeric) when the settings
// fail their own convergence check
[[nodiscard]] double quadrature_e1(const MobiusTransform& m,
                                   const QuadratureSpec& spec = {});

}  // namespace gsd
