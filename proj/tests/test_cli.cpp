// End-to-end tests of the gsd command-line tool: the binary is invoked as a
// subprocess (path injected as GSD_CLI_PATH) with scratch files under
// GSD_TEST_TMPDIR, and stdout/stderr plus exit codes are checked against the
// documented contract (0 ok, 1 usage, 2 data, 3 numeric).

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsd/mesh.hpp"
#include "gsd/mesh_io.hpp"
#include "gsd/oracles.hpp"
#include "gsd/shapes.hpp"

using namespace gsd;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

fs::path tmp_dir() {
  fs::path dir(GSD_TEST_TMPDIR);
  fs::create_directories(dir);
  return dir;
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture = tmp_dir() / ("cli_capture_" + std::to_string(counter++));
  std::string cmd = std::string(GSD_CLI_PATH) + " " + args + " > " +
                    capture.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

// value of a "key value" stdout line; NaN when absent
double parse_field(const std::string& output, const std::string& key) {
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind(key + " ", 0) == 0)
      return std::stod(line.substr(key.size() + 1));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// drops the volatile "# generated ..." line so runs can be diffed
std::string without_timestamp(const std::string& text) {
  std::istringstream lines(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(lines, line))
    if (line.rfind("# generated", 0) != 0) out << line << "\n";
  return out.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("oracle subcommands print the closed forms") {
  CliResult e1 = run_cli("oracle e1-scaling 2");
  CHECK(e1.exit_code == 0);
  CHECK(e1.output == "11.6137925\n");

  // reciprocity: the stretch of z -> Az equals that of z -> z/A
  CliResult e1_half = run_cli("oracle e1-scaling 0.5");
  CHECK(e1_half.exit_code == 0);
  CHECK(e1_half.output == e1.output);

  CliResult resc = run_cli("oracle rescaling-distance 1 4");
  CHECK(resc.exit_code == 0);
  CHECK(resc.output == "2\n");

  CliResult elastic = run_cli("oracle elastic-identity 1 2 1.4");
  CHECK(elastic.exit_code == 0);
  CHECK(std::stod(elastic.output) == doctest::Approx(0.2).epsilon(1e-9));

  // identity transform: the average stretch is the sphere area
  CliResult quad = run_cli("oracle quadrature-e1 --scaling 1");
  CHECK(quad.exit_code == 0);
  CHECK(std::stod(quad.output) == doctest::Approx(4.0 * kPi).epsilon(1e-8));
}

TEST_CASE("gen writes loadable meshes of the advertised size") {
  fs::path dir = tmp_dir();
  fs::path ico = dir / "gen_ico.off";
  CliResult r1 = run_cli("gen icosphere " + ico.string() + " --level 2");
  CHECK(r1.exit_code == 0);
  TriangleMesh mesh = load_mesh_file(ico.string());
  CHECK(mesh.vertex_count() == 162);
  CHECK(mesh.triangle_count() == 320);

  fs::path bump = dir / "gen_bump.ply";
  CliResult r2 =
      run_cli("gen three-bump " + bump.string() + " --theta 0.3 --level 1");
  CHECK(r2.exit_code == 0);
  CHECK(validate(load_mesh_file(bump.string())).accepted());

  fs::path rnd = dir / "gen_rnd.obj";
  CliResult r3 =
      run_cli("gen random-sphere " + rnd.string() + " --points 50 --seed 7");
  CHECK(r3.exit_code == 0);
  CHECK(load_mesh_file(rnd.string()).vertex_count() == 50);
}

TEST_CASE("compare matches the rescaling closed form and writes json + corr") {
  fs::path dir = tmp_dir();
  fs::path a = dir / "cmp_a.off";
  fs::path b = dir / "cmp_b.off";
  REQUIRE(run_cli("gen icosphere " + a.string() + " --level 2").exit_code == 0);
  REQUIRE(run_cli("gen icosphere " + b.string() +
                  " --level 2 --radius 1.2").exit_code == 0);

  fs::path json_path = dir / "cmp.json";
  fs::path corr_path = dir / "cmp.corr";
  CliResult r = run_cli("compare " + a.string() + " " + b.string() +
                        " --seeds 2 --json " + json_path.string() + " --corr " +
                        corr_path.string());
  REQUIRE(r.exit_code == 0);

  double d_sd = parse_field(r.output, "d_sd");
  double a1 = surface_area(gen_icosphere(2, 1.0));
  double a2 = surface_area(gen_icosphere(2, 1.2));
  CHECK(d_sd == doctest::Approx(rescaling_distance(a1, a2)).epsilon(0.02));
  CHECK(parse_field(r.output, "qc_warning") == 0.0);

  auto doc = nlohmann::json::parse(slurp(json_path));
  CHECK(doc["d_sd"].get<double>() == doctest::Approx(d_sd).epsilon(1e-6));
  CHECK(doc["orientation_reversed"].get<bool>() == false);
  CHECK(doc["per_seed"].size() == 2);

  std::string corr = slurp(corr_path);
  CHECK(corr.rfind("# gsd-corr v1 162", 0) == 0);
  CHECK(std::count(corr.begin(), corr.end(), '\n') == 163);  // header + rows
}

TEST_CASE("exit codes distinguish usage, data, and numeric failures") {
  CHECK(run_cli("nonsense").exit_code == 1);
  CHECK(run_cli("compare only_one.off").exit_code == 1);
  CHECK(run_cli("oracle quadrature-e1 --scaling 2 --matrix 1 0 0 0 0 0 1 0")
            .exit_code == 1);

  CHECK(run_cli("compare missing_a.off missing_b.off").exit_code == 2);

  // a strip with boundary fails validation -> data error
  fs::path open_mesh = tmp_dir() / "open_strip.off";
  {
    std::ofstream out(open_mesh);
    out << "OFF\n4 2 0\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n3 0 1 2\n3 1 3 2\n";
  }
  CliResult bad = run_cli("validate " + open_mesh.string());
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("closed=0") != std::string::npos);

  // quadrature spec that fails its own convergence check -> numeric error
  CHECK(run_cli("oracle quadrature-e1 --scaling 2 --radial-nodes 4 "
                "--angular-nodes 4")
            .exit_code == 3);
}

TEST_CASE("flatten reports quality and writes the spherical mesh") {
  fs::path dir = tmp_dir();
  fs::path ell = dir / "flat_ell.off";
  REQUIRE(run_cli("gen ellipsoid " + ell.string() +
                  " --a 1.5 --b 1 --c 0.75 --level 3").exit_code == 0);

  fs::path sphere = dir / "flat_sphere.ply";
  fs::path qc = dir / "flat_qc.json";
  CliResult r = run_cli("flatten " + ell.string() + " --out " + sphere.string() +
                        " --qc " + qc.string());
  REQUIRE(r.exit_code == 0);
  CHECK(parse_field(r.output, "vertices") == 642.0);
  CHECK(parse_field(r.output, "qc_warning") == 0.0);
  CHECK(parse_field(r.output, "qc_area_weighted_mean") ==
        doctest::Approx(1.0).epsilon(0.1));

  TriangleMesh flattened = load_mesh_file(sphere.string());
  REQUIRE(flattened.vertex_count() == 642);
  for (const auto& v : flattened.vertices)
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-6));

  auto doc = nlohmann::json::parse(slurp(qc));
  CHECK(doc["triangle_count"].get<int>() == 1280);
  CHECK(doc["area_weighted_mean"].get<double>() < 1.1);
}

TEST_CASE("experiment emits versioned csv, identical across reruns") {
  fs::path dir1 = tmp_dir() / "exp_run1";
  fs::path dir2 = tmp_dir() / "exp_run2";
  std::string common =
      "experiment rescaling --grid 1.5 --resolution 1 --seeds 2 --out-dir ";
  CliResult r1 = run_cli(common + dir1.string());
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.output.find("rows 1 failed 0") != std::string::npos);

  std::string csv = slurp(dir1 / "rescaling.csv");
  CHECK(csv.rfind("# gsd-csv v1", 0) == 0);
  CHECK(csv.find("scale,area_1,area_2,d_sd,closed_form,rel_error") !=
        std::string::npos);
  CHECK(csv.find("seed=1") != std::string::npos);

  // the data row tracks the closed form at coarse resolution
  std::istringstream lines(csv);
  std::string line, last;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#' && line.rfind("scale", 0) != 0)
      last = line;
  std::replace(last.begin(), last.end(), ',', ' ');
  std::istringstream cells(last);
  double scale, a1, a2, d_sd, closed, rel;
  cells >> scale >> a1 >> a2 >> d_sd >> closed >> rel;
  CHECK(scale == doctest::Approx(1.5));
  CHECK(std::abs(rel) < 0.05);
  CHECK(d_sd == doctest::Approx(closed).epsilon(0.05));

  CliResult r2 = run_cli(common + dir2.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(without_timestamp(slurp(dir2 / "rescaling.csv")) ==
        without_timestamp(csv));
}

TEST_CASE("matrix writes csv with exact symmetry and a clean audit") {
  fs::path dir = tmp_dir() / "matrix_meshes";
  fs::create_directories(dir);
  REQUIRE(run_cli("gen icosphere " + (dir / "a.off").string() +
                  " --level 1 --radius 1").exit_code == 0);
  REQUIRE(run_cli("gen icosphere " + (dir / "b.off").string() +
                  " --level 1 --radius 1.3").exit_code == 0);
  REQUIRE(run_cli("gen icosphere " + (dir / "c.off").string() +
                  " --level 1 --radius 1.6").exit_code == 0);

  fs::path csv_path = tmp_dir() / "matrix.csv";
  CliResult r = run_cli("matrix " + dir.string() + " --seeds 2 --csv " +
                        csv_path.string() + " --audit");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("meshes 3") != std::string::npos);
  CHECK(r.output.find("failures 0") != std::string::npos);
  CHECK(parse_field(r.output, "audit_negative_entries") == 0.0);
  CHECK(parse_field(r.output, "audit_skipped_entries") == 0.0);
  CHECK(parse_field(r.output, "audit_max_symmetry_violation") == 0.0);

  std::string csv = slurp(csv_path);
  CHECK(csv.rfind("# gsd-csv v1", 0) == 0);
  CHECK(csv.find("name,a,b,c") != std::string::npos);

  // parse the 3x3 block back and spot-check the diagonal
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::vector<double>> values;
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("name", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream cells(line);
    std::string name;
    cells >> name;
    std::vector<double> row(3);
    cells >> row[0] >> row[1] >> row[2];
    values.push_back(row);
  }
  REQUIRE(values.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(values[i][i] < 1e-3);
  CHECK(values[0][1] > 0.1);  // different radii are far apart
}

}  // TEST_SUITE
