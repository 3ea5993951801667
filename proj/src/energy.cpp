#include "gsd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

namespace gsd {

namespace {

// one direction of a correspondence, validated: the domain tables plus the
// located images of the domain vertices on the image surface
struct DirectionView {
  const SurfaceTables* domain = nullptr;
  const TriangleMesh* image = nullptr;
  const std::vector<BarycentricLocation>* locations = nullptr;
};

DirectionView view_of(const EnergyPair& pair, const CorrespondenceMap& corr,
                      Direction dir) {
  DirectionView v;
  if (dir == Direction::forward) {
    v.domain = &pair.t1;
    v.image = &pair.p2->source;
    v.locations = &corr.forward;
    if (static_cast<int>(corr.forward.size()) != pair.p1->source.vertex_count())
      fail_data("energy: forward correspondence does not cover the F1 vertices");
    if (corr.forward_fallbacks >
        kMaxFallbackShare * pair.p1->source.vertex_count())
      fail_numeric("energy: " + std::to_string(corr.forward_fallbacks) +
                   " forward point locations fell back to nearest-triangle");
  } else {
    v.domain = &pair.t2;
    v.image = &pair.p1->source;
    v.locations = &corr.backward;
    if (static_cast<int>(corr.backward.size()) != pair.p2->source.vertex_count())
      fail_data("energy: backward correspondence does not cover the F2 vertices");
    if (corr.backward_fallbacks >
        kMaxFallbackShare * pair.p2->source.vertex_count())
      fail_numeric("energy: " + std::to_string(corr.backward_fallbacks) +
                   " backward point locations fell back to nearest-triangle");
  }
  return v;
}

// stretch ratio per domain edge: image chord length over domain edge length
std::vector<double> stretch_ratios(const DirectionView& v) {
  std::vector<Vec3> images;
  images.reserve(v.locations->size());
  for (const auto& loc : *v.locations) images.push_back(embed(*v.image, loc));
  std::vector<double> ratios;
  ratios.reserve(v.domain->edges.edges.size());
  for (std::size_t e = 0; e < v.domain->edges.edges.size(); ++e) {
    const auto& edge = v.domain->edges.edges[e];
    double img = (images[edge.a] - images[edge.b]).norm();
    ratios.push_back(img / v.domain->metric.edge_lengths[e]);
  }
  return ratios;
}

double weighted_sum(const DirectionView& v, const std::vector<double>& ratios,
                    double (*term)(double)) {
  double sum = 0.0;
  for (std::size_t e = 0; e < ratios.size(); ++e)
    sum += term(ratios[e]) * v.domain->weights[e] / 3.0;
  return sum;
}

}  // namespace

SurfaceTables build_surface_tables(const TriangleMesh& mesh) {
  SurfaceTables t;
  t.edges = build_edge_table(mesh);
  t.metric = discrete_metric(mesh, t.edges);
  t.weights = edge_area_weights(mesh, t.edges);
  t.area = surface_area(mesh);
  return t;
}

EnergyPair make_energy_pair(const SphericalParameterization& p1,
                            const SphericalParameterization& p2) {
  std::vector<Vec3> d1, d2;
  d1.reserve(p1.sphere_positions.size());
  d2.reserve(p2.sphere_positions.size());
  for (const auto& p : p1.sphere_positions) d1.push_back(p.dir);
  for (const auto& p : p2.sphere_positions) d2.push_back(p.dir);
  return EnergyPair{&p1,
                    &p2,
                    build_surface_tables(p1.source),
                    build_surface_tables(p2.source),
                    build_locator(d1, p1.source.triangles),
                    build_locator(d2, p2.source.triangles)};
}

CorrespondenceMap transfer(const EnergyPair& pair, const MobiusTransform& m,
                           const CorrespondenceMap* hint) {
  CorrespondenceMap out;
  out.mobius = m;
  const MobiusTransform m_inv = inverse(m);

  const auto& s1 = pair.p1->sphere_positions;
  out.forward.reserve(s1.size());
  bool warm_fwd = hint != nullptr && hint->forward.size() == s1.size();
  for (std::size_t i = 0; i < s1.size(); ++i) {
    SpherePoint q = apply(m, s1[i]);
    BarycentricLocation loc =
        warm_fwd && hint->forward[i].triangle >= 0
            ? pair.loc2.locate(q, hint->forward[i].triangle)
            : pair.loc2.locate(q);
    if (loc.fallback) ++out.forward_fallbacks;
    out.forward.push_back(loc);
  }

  const auto& s2 = pair.p2->sphere_positions;
  out.backward.reserve(s2.size());
  bool warm_bwd = hint != nullptr && hint->backward.size() == s2.size();
  for (std::size_t j = 0; j < s2.size(); ++j) {
    SpherePoint q = apply(m_inv, s2[j]);
    BarycentricLocation loc =
        warm_bwd && hint->backward[j].triangle >= 0
            ? pair.loc1.locate(q, hint->backward[j].triangle)
            : pair.loc1.locate(q);
    if (loc.fallback) ++out.backward_fallbacks;
    out.backward.push_back(loc);
  }
  return out;
}

CorrespondenceMap transfer(const SphericalParameterization& p1,
                           const SphericalParameterization& p2,
                           const MobiusTransform& m) {
  auto pair = make_energy_pair(p1, p2);
  return transfer(pair, m);
}

double elastic_sum(const EnergyPair& pair, const CorrespondenceMap& corr,
                   Direction dir) {
  auto v = view_of(pair, corr, dir);
  auto ratios = stretch_ratios(v);
  return weighted_sum(v, ratios, [](double r) { return (r - 1.0) * (r - 1.0); });
}

EnergyBreakdown symmetric_distortion(const EnergyPair& pair,
                                     const CorrespondenceMap& corr) {
  auto fwd = view_of(pair, corr, Direction::forward);
  auto bwd = view_of(pair, corr, Direction::backward);
  EnergyBreakdown out;
  out.per_edge_forward = stretch_ratios(fwd);
  out.per_edge_backward = stretch_ratios(bwd);
  out.forward_elastic = weighted_sum(fwd, out.per_edge_forward,
                                     [](double r) { return (r - 1.0) * (r - 1.0); });
  out.backward_elastic = weighted_sum(bwd, out.per_edge_backward,
                                      [](double r) { return (r - 1.0) * (r - 1.0); });
  out.e_sd = std::sqrt(out.forward_elastic) + std::sqrt(out.backward_elastic);
  out.area_f1 = pair.t1.area;
  out.area_f2 = pair.t2.area;
  out.flagged_forward = corr.forward_fallbacks;
  out.flagged_backward = corr.backward_fallbacks;
  return out;
}

double average_stretch(const EnergyPair& pair, const CorrespondenceMap& corr,
                       Direction dir) {
  auto v = view_of(pair, corr, dir);
  return weighted_sum(v, stretch_ratios(v), [](double r) { return r; });
}

double dirichlet_energy(const EnergyPair& pair, const CorrespondenceMap& corr,
                        Direction dir) {
  auto v = view_of(pair, corr, dir);
  return weighted_sum(v, stretch_ratios(v), [](double r) { return r * r; });
}

double lp_energy(const EnergyPair& pair, const CorrespondenceMap& corr,
                 Direction dir, double p) {
  if (!(p >= 1.0) || !std::isfinite(p))
    fail_data("lp_energy: exponent must satisfy p >= 1, got " + format_g9(p));
  auto v = view_of(pair, corr, dir);
  auto ratios = stretch_ratios(v);
  double sum = 0.0;
  for (std::size_t e = 0; e < ratios.size(); ++e)
    sum += std::pow(std::abs(ratios[e] - 1.0), p) * v.domain->weights[e] / 3.0;
  return std::pow(sum, 1.0 / p);
}

double lemma_e1_residual(const EnergyPair& pair, const CorrespondenceMap& corr) {
  double elastic = elastic_sum(pair, corr, Direction::forward);
  double e1 = average_stretch(pair, corr, Direction::forward);
  return elastic - (pair.t2.area + pair.t1.area - 2.0 * e1);
}

DistortionField distortion_field(const EnergyPair& pair,
                                 const CorrespondenceMap& corr) {
  auto fwd = view_of(pair, corr, Direction::forward);
  auto bwd = view_of(pair, corr, Direction::backward);

  // per-domain-vertex mean |ratio - 1| over incident edges, then barycentric
  // scatter onto the image surface's vertices
  auto scatter = [](const DirectionView& v, int image_vertex_count) {
    std::vector<double> vertex_mean(v.locations->size(), 0.0);
    std::vector<int> degree(v.locations->size(), 0);
    auto ratios = stretch_ratios(v);
    for (std::size_t e = 0; e < ratios.size(); ++e) {
      const auto& edge = v.domain->edges.edges[e];
      double d = std::abs(ratios[e] - 1.0);
      vertex_mean[edge.a] += d;
      vertex_mean[edge.b] += d;
      ++degree[edge.a];
      ++degree[edge.b];
    }
    for (std::size_t i = 0; i < vertex_mean.size(); ++i)
      if (degree[i] > 0) vertex_mean[i] /= degree[i];

    std::vector<double> field(static_cast<std::size_t>(image_vertex_count), 0.0);
    std::vector<double> mass(static_cast<std::size_t>(image_vertex_count), 0.0);
    for (std::size_t i = 0; i < v.locations->size(); ++i) {
      const auto& loc = (*v.locations)[i];
      const auto& tri = v.image->triangles[loc.triangle];
      for (int k = 0; k < 3; ++k) {
        field[tri[k]] += loc.coords[k] * vertex_mean[i];
        mass[tri[k]] += loc.coords[k];
      }
    }
    for (std::size_t k = 0; k < field.size(); ++k)
      if (mass[k] > 0.0) field[k] /= mass[k];
    return field;
  };

  DistortionField out;
  out.on_f2 = scatter(fwd, pair.p2->source.vertex_count());
  out.on_f1 = scatter(bwd, pair.p1->source.vertex_count());
  return out;
}

std::string energy_to_json(const EnergyBreakdown& e) {
  nlohmann::json j;
  j["forward_elastic"] = e.forward_elastic;
  j["backward_elastic"] = e.backward_elastic;
  j["e_sd"] = e.e_sd;
  j["area_f1"] = e.area_f1;
  j["area_f2"] = e.area_f2;
  j["flagged_forward"] = e.flagged_forward;
  j["flagged_backward"] = e.flagged_backward;
  j["per_edge_forward"] = e.per_edge_forward;
  j["per_edge_backward"] = e.per_edge_backward;
  return j.dump(2);
}

}  // namespace gsd
