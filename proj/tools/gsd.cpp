// gsd -- symmetric distortion distance between genus-zero triangle meshes.
//
// Exit codes: 0 success, 1 usage error, 2 data error (bad file, failed
// validation, bad arguments), 3 numerical failure (solver non-convergence,
// quality gates).

#include "gsd/alignment.hpp"
#include "gsd/conformal.hpp"
#include "gsd/energy.hpp"
#include "gsd/experiments.hpp"
#include "gsd/mesh.hpp"
#include "gsd/mesh_io.hpp"
#include "gsd/mobius.hpp"
#include "gsd/oracles.hpp"
#include "gsd/shapes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gsd;

namespace {

// flags shared by every distance-computing subcommand
struct DistanceFlags {
  bool normalize = false;
  bool allow_reflection = false;
  int seeds = 0;
  int threads = 0;
  double qc_gate = 0.0;  // 0 = keep the default hard gate
};

void add_distance_flags(CLI::App* cmd, DistanceFlags& f) {
  cmd->add_flag("--normalize", f.normalize,
                "rescale both surfaces to unit area before comparing");
  cmd->add_flag("--allow-reflection", f.allow_reflection,
                "also search orientation-reversing correspondences");
  cmd->add_option("--seeds", f.seeds,
                  "use only the first N seeds per orientation family (0 = all)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--qc-gate", f.qc_gate,
                  "hard ceiling on the area-weighted mean conformal distortion "
                  "of a flattening")
      ->check(CLI::PositiveNumber);
}

DsdOptions to_options(const DistanceFlags& f) {
  DsdOptions opts;
  opts.normalize = f.normalize;
  opts.allow_reflection = f.allow_reflection;
  opts.seed_limit = f.seeds;
  opts.threads = f.threads;
  if (f.qc_gate > 0.0) opts.flatten.qc_fail = f.qc_gate;
  return opts;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_data("cannot write " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  auto out = open_output(path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
  if (!out) fail_data("write failed for " + path);
}

// mesh with the flattened sphere positions but the source connectivity
TriangleMesh sphere_mesh(const SphericalParameterization& param) {
  TriangleMesh out;
  out.vertices.reserve(param.sphere_positions.size());
  for (const auto& p : param.sphere_positions) out.vertices.push_back(p.dir);
  out.triangles = param.source.triangles;
  return out;
}

std::string iso_timestamp_utc() {
  std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string mesh1, mesh2;
  DistanceFlags flags;
  std::string json_path;        // "-" = stdout
  std::string corr_path;        // "-" = stdout
  std::string distortion_stem;  // writes <stem>_f1.ply / <stem>_f2.ply
};

void run_compare(const CompareArgs& args) {
  TriangleMesh m1 = load_mesh_file(args.mesh1);
  TriangleMesh m2 = load_mesh_file(args.mesh2);
  DsdOptions opts = to_options(args.flags);
  DistanceResult res = dsd(m1, m2, opts);

  std::cout << "d_sd " << format_g9(res.d_sd) << "\n";
  std::cout << "orientation "
            << (res.orientation_reversed ? "reversed" : "preserved") << "\n";
  std::cout << "qc_warning " << (res.qc_warning ? 1 : 0) << "\n";
  std::cout << "forward_elastic " << format_g9(res.energy.forward_elastic)
            << "\n";
  std::cout << "backward_elastic " << format_g9(res.energy.backward_elastic)
            << "\n";

  if (!args.json_path.empty()) write_text(args.json_path, distance_to_json(res));
  if (!args.corr_path.empty()) {
    if (args.corr_path == "-") {
      write_correspondence(std::cout, res.correspondence);
    } else {
      auto out = open_output(args.corr_path);
      write_correspondence(out, res.correspondence);
      if (!out) fail_data("write failed for " + args.corr_path);
    }
  }
  if (!args.distortion_stem.empty()) {
    // recompute the (deterministic) flattenings to color the input surfaces
    TriangleMesh f1 = opts.normalize ? normalize_area(m1) : m1;
    TriangleMesh f2 = opts.normalize ? normalize_area(m2) : m2;
    SphericalParameterization p1 = conformal_to_sphere(f1, opts.flatten);
    SphericalParameterization p2 = conformal_to_sphere(f2, opts.flatten);
    EnergyPair pair = make_energy_pair(p1, p2);
    DistortionField field = distortion_field(pair, res.correspondence);
    write_mesh_file(args.distortion_stem + "_f1.ply", f1, &field.on_f1);
    write_mesh_file(args.distortion_stem + "_f2.ply", f2, &field.on_f2);
    std::cout << "distortion " << args.distortion_stem << "_f1.ply "
              << args.distortion_stem << "_f2.ply\n";
  }
}

// ---------------------------------------------------------------------------
// matrix
// ---------------------------------------------------------------------------

struct MatrixArgs {
  std::string dir;
  DistanceFlags flags;
  std::string csv_path;
  std::string json_path;
  bool audit = false;
};

void run_matrix(const MatrixArgs& args) {
  std::vector<std::string> paths;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(args.dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off" || ext == ".obj" || ext == ".ply")
      paths.push_back(entry.path().string());
  }
  if (ec) fail_data("cannot read directory " + args.dir);
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) fail_data("no .off/.obj/.ply meshes in " + args.dir);

  std::vector<std::string> names;
  std::vector<TriangleMesh> meshes;
  for (const auto& p : paths) {
    names.push_back(fs::path(p).stem().string());
    meshes.push_back(load_mesh_file(p));
  }

  MatrixResult result = distance_matrix(meshes, to_options(args.flags));
  const int n = static_cast<int>(meshes.size());

  std::cout << "meshes " << n << "\n";
  std::cout << "failures " << result.failures.size() << "\n";
  for (const auto& f : result.failures) std::cerr << "failed pair " << f << "\n";

  if (!args.csv_path.empty()) {
    auto out = open_output(args.csv_path);
    out << "# gsd-csv v1\n";
    out << "# generated " << iso_timestamp_utc() << "\n";
    out << "# matrix n=" << n << "\n";
    out << "name";
    for (const auto& name : names) out << "," << name;
    out << "\n";
    for (int i = 0; i < n; ++i) {
      out << names[i];
      for (int j = 0; j < n; ++j) out << "," << format_g9(result.distances(i, j));
      out << "\n";
    }
    if (!out) fail_data("write failed for " + args.csv_path);
  }

  if (!args.json_path.empty()) {
    nlohmann::json doc;
    doc["schema"] = "gsd-json v1";
    doc["names"] = names;
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        rows[static_cast<std::size_t>(i)].push_back(result.distances(i, j));
    doc["distances"] = rows;  // NaN serializes as null
    doc["failures"] = result.failures;
    if (args.audit) {
      MetricAudit audit = metric_audit(result.distances);
      doc["audit"] = {{"max_symmetry_violation", audit.max_symmetry_violation},
                      {"max_triangle_violation", audit.max_triangle_violation},
                      {"negative_entries", audit.negative_entries},
                      {"skipped_entries", audit.skipped_entries}};
    }
    write_text(args.json_path, doc.dump(2));
  }

  if (args.audit) {
    MetricAudit audit = metric_audit(result.distances);
    std::cout << "audit_max_symmetry_violation "
              << format_g9(audit.max_symmetry_violation) << "\n";
    std::cout << "audit_max_triangle_violation "
              << format_g9(audit.max_triangle_violation) << "\n";
    std::cout << "audit_negative_entries " << audit.negative_entries << "\n";
    std::cout << "audit_skipped_entries " << audit.skipped_entries << "\n";
  }
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

MobiusTransform scaling_transform(double a) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(0, 0) = std::sqrt(a);
  m(1, 1) = 1.0 / std::sqrt(a);
  return MobiusTransform::from_matrix(m);
}

MobiusTransform translation_transform(double re, double im) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  m(0, 1) = std::complex<double>(re, im);
  return MobiusTransform::from_matrix(m);
}

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gsd: symmetric distortion distance between genus-zero surfaces"};
  app.require_subcommand(1);

  // ---- compare -------------------------------------------------------------
  CompareArgs compare_args;
  auto* compare = app.add_subcommand(
      "compare", "distance and correspondence between two meshes");
  compare->add_option("mesh1", compare_args.mesh1, "first mesh (.off/.obj/.ply)")
      ->required();
  compare->add_option("mesh2", compare_args.mesh2, "second mesh")->required();
  add_distance_flags(compare, compare_args.flags);
  compare->add_option("--json", compare_args.json_path,
                      "write the full result as JSON (\"-\" = stdout)");
  compare->add_option("--corr", compare_args.corr_path,
                      "write the vertex correspondence (\"-\" = stdout)");
  compare->add_option("--distortion", compare_args.distortion_stem,
                      "write <stem>_f1.ply/<stem>_f2.ply colored by the "
                      "distortion field");
  compare->callback([&] { run_compare(compare_args); });

  // ---- matrix ----------------------------------------------------------------
  MatrixArgs matrix_args;
  auto* matrix = app.add_subcommand(
      "matrix", "pairwise distance matrix over a directory of meshes");
  matrix->add_option("dir", matrix_args.dir, "directory of .off/.obj/.ply files")
      ->required();
  add_distance_flags(matrix, matrix_args.flags);
  matrix->add_option("--csv", matrix_args.csv_path, "write the matrix as CSV");
  matrix->add_option("--json", matrix_args.json_path,
                     "write matrix + failures as JSON (\"-\" = stdout)");
  matrix->add_flag("--audit", matrix_args.audit,
                   "report symmetry/triangle-inequality/positivity checks");
  matrix->callback([&] { run_matrix(matrix_args); });

  // ---- oracle ----------------------------------------------------------------
  auto* oracle =
      app.add_subcommand("oracle", "closed-form and quadrature reference values");
  oracle->require_subcommand(1);

  double oracle_a = 0.0;
  auto* e1s = oracle->add_subcommand(
      "e1-scaling", "average stretch of the conformal scaling with factor A");
  e1s->add_option("A", oracle_a, "scaling factor (> 0)")
      ->required()
      ->check(CLI::PositiveNumber);
  e1s->callback([&] {
    double a = oracle_a;
    if (a < 1.0) a = 1.0 / a;  // reciprocity
    std::cout << format_g9(a == 1.0 ? 4.0 * kPi : e1_scaling(a)) << "\n";
  });

  std::array<double, 2> oracle_areas{0.0, 0.0};
  auto* resc = oracle->add_subcommand(
      "rescaling-distance", "distance between round spheres of areas A1, A2");
  resc->add_option("A1", oracle_areas[0], "first area")
      ->required()
      ->check(CLI::NonNegativeNumber);
  resc->add_option("A2", oracle_areas[1], "second area")
      ->required()
      ->check(CLI::NonNegativeNumber);
  resc->callback([&] {
    std::cout << format_g9(rescaling_distance(oracle_areas[0], oracle_areas[1]))
              << "\n";
  });

  std::array<double, 3> elastic_args{0.0, 0.0, 0.0};
  auto* elas = oracle->add_subcommand(
      "elastic-identity",
      "elastic energy of a conformal map from areas and average stretch");
  elas->add_option("A1", elastic_args[0], "domain area")->required();
  elas->add_option("A2", elastic_args[1], "image area")->required();
  elas->add_option("E1", elastic_args[2], "average stretch")->required();
  elas->callback([&] {
    std::cout << format_g9(elastic_identity(elastic_args[0], elastic_args[1],
                                            elastic_args[2]))
              << "\n";
  });

  double quad_scaling = 0.0;
  std::vector<double> quad_translation;
  std::vector<double> quad_matrix;
  QuadratureSpec quad_spec;
  auto* quad = oracle->add_subcommand(
      "quadrature-e1", "numerical average stretch of a Moebius transform");
  auto* qs = quad->add_option("--scaling", quad_scaling,
                              "transform z -> A z (A > 0)")
                 ->check(CLI::PositiveNumber);
  auto* qt = quad->add_option("--translation", quad_translation,
                              "transform z -> z + (RE + IM i)")
                 ->expected(2);
  auto* qm = quad->add_option("--matrix", quad_matrix,
                              "2x2 complex matrix, row-major re/im pairs")
                 ->expected(8);
  quad->add_option("--radial-nodes", quad_spec.radial_nodes)
      ->check(CLI::PositiveNumber);
  quad->add_option("--angular-nodes", quad_spec.angular_nodes)
      ->check(CLI::PositiveNumber);
  quad->add_option("--cutoff", quad_spec.cutoff_radius,
                   "stereographic cutoff radius (default: infinite, exact)")
      ->check(CLI::PositiveNumber);
  quad->callback([&] {
    int chosen = (qs->count() ? 1 : 0) + (qt->count() ? 1 : 0) +
                 (qm->count() ? 1 : 0);
    if (chosen != 1)
      throw CLI::ValidationError(
          "quadrature-e1: choose exactly one of --scaling, --translation, "
          "--matrix");
    MobiusTransform m;
    if (qs->count()) {
      m = scaling_transform(quad_scaling);
    } else if (qt->count()) {
      m = translation_transform(quad_translation[0], quad_translation[1]);
    } else {
      std::array<double, 8> a{};
      std::copy(quad_matrix.begin(), quad_matrix.end(), a.begin());
      m = MobiusTransform::from_matrix(MobiusTransform::from_array8(a).m);
    }
    std::cout << format_g9(quadrature_e1(m, quad_spec)) << "\n";
  });

  // ---- flatten ---------------------------------------------------------------
  std::string flatten_in, flatten_out, flatten_qc;
  double flatten_gate = 0.0;
  auto* flatten = app.add_subcommand(
      "flatten", "conformally flatten one mesh to the unit sphere");
  flatten->add_option("mesh", flatten_in, "input mesh")->required();
  flatten->add_option("--out", flatten_out,
                      "write the spherical mesh (source connectivity)");
  flatten->add_option("--qc", flatten_qc,
                      "write the per-triangle quality report as JSON");
  flatten->add_option("--qc-gate", flatten_gate,
                      "hard ceiling on area-weighted mean distortion")
      ->check(CLI::PositiveNumber);
  flatten->callback([&] {
    TriangleMesh mesh = load_mesh_file(flatten_in);
    FlattenOptions opts;
    if (flatten_gate > 0.0) opts.qc_fail = flatten_gate;
    SphericalParameterization param = conformal_to_sphere(mesh, opts);
    std::cout << "vertices " << mesh.vertex_count() << "\n";
    std::cout << "triangles " << mesh.triangle_count() << "\n";
    std::cout << "qc_mean " << format_g9(param.quality.mean) << "\n";
    std::cout << "qc_max " << format_g9(param.quality.max) << "\n";
    std::cout << "qc_area_weighted_mean "
              << format_g9(param.quality.area_weighted_mean) << "\n";
    std::cout << "qc_warning " << (param.qc_warning ? 1 : 0) << "\n";
    if (!flatten_out.empty()) write_mesh_file(flatten_out, sphere_mesh(param));
    if (!flatten_qc.empty()) write_text(flatten_qc, qc_to_json(param.quality));
  });

  // ---- gen -------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic test mesh");
  gen->require_subcommand(1);

  struct GenCommon {
    std::string out;
    int level = 3;
    double radius = 1.0;
  };
  auto write_generated = [](const std::string& path, const TriangleMesh& mesh) {
    write_mesh_file(path, mesh);
    std::cout << "wrote " << path << " vertices " << mesh.vertex_count()
              << " triangles " << mesh.triangle_count() << "\n";
  };

  GenCommon ico;
  auto* gen_ico = gen->add_subcommand("icosphere", "subdivided icosahedron");
  gen_ico->add_option("out", ico.out, "output path")->required();
  gen_ico->add_option("--level", ico.level)->check(CLI::Range(0, 7));
  gen_ico->add_option("--radius", ico.radius)->check(CLI::PositiveNumber);
  gen_ico->callback(
      [&] { write_generated(ico.out, gen_icosphere(ico.level, ico.radius)); });

  GenCommon geo;
  geo.level = 10;
  auto* gen_geo = gen->add_subcommand("geodesic", "class-I geodesic sphere");
  gen_geo->add_option("out", geo.out, "output path")->required();
  gen_geo->add_option("--frequency", geo.level)->check(CLI::Range(1, 64));
  gen_geo->add_option("--radius", geo.radius)->check(CLI::PositiveNumber);
  gen_geo->callback([&] {
    write_generated(geo.out, gen_geodesic_sphere(geo.level, geo.radius));
  });

  GenCommon ell;
  std::array<double, 3> ell_axes{1.0, 1.0, 1.0};
  auto* gen_ell = gen->add_subcommand("ellipsoid", "scaled icosphere");
  gen_ell->add_option("out", ell.out, "output path")->required();
  gen_ell->add_option("--a", ell_axes[0])->check(CLI::PositiveNumber);
  gen_ell->add_option("--b", ell_axes[1])->check(CLI::PositiveNumber);
  gen_ell->add_option("--c", ell_axes[2])->check(CLI::PositiveNumber);
  gen_ell->add_option("--level", ell.level)->check(CLI::Range(0, 7));
  gen_ell->callback([&] {
    write_generated(
        ell.out, gen_ellipsoid(ell_axes[0], ell_axes[1], ell_axes[2], ell.level));
  });

  GenCommon noisy;
  double noise_multiple = 1.0;
  std::uint64_t noise_seed = 1;
  auto* gen_noisy =
      gen->add_subcommand("noisy-sphere", "icosphere with radial Gaussian noise");
  gen_noisy->add_option("out", noisy.out, "output path")->required();
  gen_noisy->add_option("--level", noisy.level)->check(CLI::Range(0, 7));
  gen_noisy->add_option("--noise", noise_multiple,
                        "standard deviation as a multiple of mean edge length")
      ->check(CLI::NonNegativeNumber);
  gen_noisy->add_option("--seed", noise_seed);
  gen_noisy->callback([&] {
    write_generated(noisy.out,
                    gen_noisy_sphere(noisy.level, noise_multiple, noise_seed));
  });

  GenCommon bump;
  double bump_theta = 0.0;
  auto* gen_bump = gen->add_subcommand(
      "three-bump", "sphere with three bumps; theta rotates the smallest");
  gen_bump->add_option("out", bump.out, "output path")->required();
  gen_bump->add_option("--theta", bump_theta)->check(CLI::Range(0.0, kPi));
  gen_bump->add_option("--level", bump.level)->check(CLI::Range(0, 7));
  gen_bump->callback(
      [&] { write_generated(bump.out, gen_three_bump(bump_theta, bump.level)); });

  GenCommon rnd;
  int rnd_points = 1000;
  std::uint64_t rnd_seed = 1;
  auto* gen_rnd = gen->add_subcommand(
      "random-sphere", "uniform random points triangulated by convex hull");
  gen_rnd->add_option("out", rnd.out, "output path")->required();
  gen_rnd->add_option("--points", rnd_points)->check(CLI::Range(4, 1000000));
  gen_rnd->add_option("--seed", rnd_seed);
  gen_rnd->add_option("--radius", rnd.radius)->check(CLI::PositiveNumber);
  gen_rnd->callback([&] {
    write_generated(rnd.out, gen_random_sphere(rnd_points, rnd_seed, rnd.radius));
  });

  // ---- experiment -----------------------------------------------------------
  ExperimentConfig exp_config;
  DistanceFlags exp_flags;
  auto* experiment = app.add_subcommand(
      "experiment", "run a parameter sweep and write CSV/JSON results");
  experiment
      ->add_option("name", exp_config.name,
                   "one of: rescaling, ellipsoid, noise, subdivision, chirality")
      ->required();
  experiment->add_option("--grid", exp_config.grid,
                         "comma-separated grid values (empty = default grid)")
      ->delimiter(',');
  experiment->add_option("--resolution", exp_config.resolution)
      ->check(CLI::Range(0, 7));
  experiment->add_option("--seed", exp_config.seed);
  experiment->add_option("--repetitions", exp_config.repetitions)
      ->check(CLI::PositiveNumber);
  experiment->add_option("--out-dir", exp_config.out_dir);
  add_distance_flags(experiment, exp_flags);
  experiment->callback([&] {
    exp_config.threads = exp_flags.threads;
    exp_config.dsd = to_options(exp_flags);
    ExperimentResult result = run_experiment(exp_config);
    std::cout << "csv " << result.csv_path << "\n";
    std::cout << "json " << result.json_path << "\n";
    std::cout << "rows " << result.rows << " failed " << result.failed_rows
              << "\n";
  });

  // ---- validate ---------------------------------------------------------------
  std::string validate_in;
  auto* validate_cmd =
      app.add_subcommand("validate", "check a mesh against the input contract");
  validate_cmd->add_option("mesh", validate_in, "input mesh")->required();
  validate_cmd->callback([&] {
    TriangleMesh mesh = load_mesh_file(validate_in);
    ValidationReport report = validate(mesh);
    std::cout << report.summary() << "\n";
    if (!report.accepted()) fail_data("mesh rejected");
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::data ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
