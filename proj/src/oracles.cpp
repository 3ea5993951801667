#include "gsd/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "gsd/sphere.hpp"

namespace gsd {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1], cached per order
struct GaussRule {
  std::vector<double> nodes, weights;
};

const GaussRule& gauss_rule(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Newton from the Chebyshev-like initial guess
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P_{n-1}(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

void check_spec(const QuadratureSpec& spec) {
  if (spec.radial_nodes < 1 || spec.radial_nodes > 100000)
    fail_data("radial_nodes " + std::to_string(spec.radial_nodes) +
              " outside [1, 100000]");
  if (spec.angular_nodes < 1 || spec.angular_nodes > 100000)
    fail_data("angular_nodes " + std::to_string(spec.angular_nodes) +
              " outside [1, 100000]");
  if (!(spec.cutoff_radius > 0.0))
    fail_data("cutoff_radius must be positive");
}

double theta_max_of(const QuadratureSpec& spec) {
  return std::isinf(spec.cutoff_radius) ? kPi
                                        : 2.0 * std::atan(spec.cutoff_radius);
}

// integral of sin(theta) over [0, theta_max] under the radial rule alone;
// the azimuthal rule is exact for phi-independent integrands
double unit_integral(int radial_nodes, double theta_max) {
  const auto& rule = gauss_rule(radial_nodes);
  double sum = 0.0;
  for (int i = 0; i < radial_nodes; ++i) {
    double theta =
        0.5 * theta_max * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
    sum += rule.weights[static_cast<std::size_t>(i)] * std::sin(theta);
  }
  return 2.0 * kPi * 0.5 * theta_max * sum;
}

}  // namespace

double lambda_translation(std::complex<double> b, std::complex<double> z) {
  return (1.0 + std::norm(z)) / (1.0 + std::norm(z + b));
}

double lambda_scaling(std::complex<double> a, std::complex<double> z) {
  double mag = std::abs(a);
  return mag * (1.0 + std::norm(z)) / (1.0 + mag * mag * std::norm(z));
}

double e1_scaling(double a) {
  if (!(a > 1.0))
    fail_data("e1_scaling requires A > 1 (A = " + format_g9(a) +
              "); use the reciprocity E1(A) = E1(1/A) for A < 1");
  // 8 pi A ln A / (A^2 - 1), factored so nothing cancels as A -> 1
  double eps = a - 1.0;
  return 8.0 * kPi * a * std::log1p(eps) / (eps * (2.0 + eps));
}

double rescaling_distance(double a1, double a2) {
  if (!(a1 > 0.0) || !(a2 > 0.0))
    fail_data("sphere areas must be positive");
  return 2.0 * std::abs(std::sqrt(a2) - std::sqrt(a1));
}

double elastic_identity(double a1, double a2, double e1) {
  return a2 + a1 - 2.0 * e1;
}

bool quadrature_converged(const QuadratureSpec& spec) {
  check_spec(spec);
  double theta_max = theta_max_of(spec);
  double v1 = unit_integral(spec.radial_nodes, theta_max);
  double v2 = unit_integral(2 * spec.radial_nodes, theta_max);
  double exact_scale = 4.0 * kPi;
  return std::abs(v2 - v1) < 1e-8 * exact_scale;
}

double quadrature_e1(const MobiusTransform& m, const QuadratureSpec& spec) {
  check_spec(spec);
  if (!quadrature_converged(spec))
    fail_numeric("quadrature spec (radial " +
                 std::to_string(spec.radial_nodes) + ", angular " +
                 std::to_string(spec.angular_nodes) +
                 ") fails its own convergence check");
  const double theta_max = theta_max_of(spec);
  const auto& rule = gauss_rule(spec.radial_nodes);
  const int na = spec.angular_nodes;
  const double dphi = 2.0 * kPi / na;

  double total = 0.0;
  for (int i = 0; i < spec.radial_nodes; ++i) {
    double theta =
        0.5 * theta_max * (rule.nodes[static_cast<std::size_t>(i)] + 1.0);
    double wt = 0.5 * theta_max * rule.weights[static_cast<std::size_t>(i)] *
                std::sin(theta);
    double st = std::sin(theta), ct = std::cos(theta);
    double ring = 0.0;
    for (int j = 0; j < na; ++j) {
      double phi = j * dphi;
      // theta measures from the south pole (z = 0 in the plane)
      SpherePoint p(Vec3(st * std::cos(phi), st * std::sin(phi), -ct));
      ring += dilation(m, p);
    }
    total += wt * ring * dphi;
  }
  return total;
}

}  // namespace gsd
