#include "gsd/experiments.hpp"

#include "gsd/conformal.hpp"
#include "gsd/energy.hpp"
#include "gsd/mesh.hpp"
#include "gsd/mesh_io.hpp"
#include "gsd/shapes.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace gsd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string iso_timestamp_utc() {
  std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything one grid point produces, buffered so rows can run concurrently
// yet be written in grid order.
struct RowOutcome {
  std::vector<std::string> cells;  // parallel to the experiment's columns
  double primary = kNaN;           // the row's d_sd column (NaN when failed)
  bool failed = false;
  std::string error;
  double seconds = 0.0;
  bool qc_warning = false;
  json per_seed = json::array();
  std::vector<std::string> mesh_paths;  // colorized outputs for flagged rows
};

struct RowJob {
  std::vector<std::string> param_cells;  // pre-formatted parameter columns
  std::function<RowOutcome(const std::vector<std::string>&)> run;
};

json per_seed_json(const DistanceResult& res) {
  json arr = json::array();
  for (const auto& s : res.per_seed) {
    arr.push_back({{"id", s.id},
                   {"energy", s.energy},
                   {"iterations", s.iterations},
                   {"converged", s.converged},
                   {"reflected", s.reflected}});
  }
  return arr;
}

struct TimedDsd {
  DistanceResult res;
  double seconds = 0.0;
};

TimedDsd timed_dsd(const TriangleMesh& m1, const TriangleMesh& m2,
                   const DsdOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  TimedDsd out{dsd(m1, m2, opts), 0.0};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

// Flagged rows get both meshes written with the distortion field as a
// white->red vertex ramp; the flattenings are recomputed (they are
// deterministic, so they match the ones the distance run used).
std::vector<std::string> write_flagged_meshes(const fs::path& dir,
                                              const std::string& stem,
                                              const TriangleMesh& m1,
                                              const TriangleMesh& m2,
                                              const DsdOptions& opts,
                                              const DistanceResult& res) {
  TriangleMesh f1 = opts.normalize ? normalize_area(m1) : m1;
  TriangleMesh f2 = opts.normalize ? normalize_area(m2) : m2;
  SphericalParameterization p1 = conformal_to_sphere(f1, opts.flatten);
  SphericalParameterization p2 = conformal_to_sphere(f2, opts.flatten);
  EnergyPair pair = make_energy_pair(p1, p2);
  DistortionField field = distortion_field(pair, res.correspondence);

  std::vector<std::string> paths;
  fs::path path1 = dir / (stem + "_f1.ply");
  fs::path path2 = dir / (stem + "_f2.ply");
  write_mesh_file(path1.string(), f1, &field.on_f1);
  write_mesh_file(path2.string(), f2, &field.on_f2);
  paths.push_back(path1.string());
  paths.push_back(path2.string());
  return paths;
}

RowOutcome fill_common(RowOutcome out, const TimedDsd& run) {
  out.seconds = run.seconds;
  out.qc_warning = run.res.qc_warning;
  out.per_seed = per_seed_json(run.res);
  return out;
}

// ---------------------------------------------------------------------------
// per-experiment grids, columns, and row builders
// ---------------------------------------------------------------------------

struct ExperimentPlan {
  std::vector<std::string> columns;
  std::vector<RowJob> jobs;
  bool normalize = true;          // effective value, recorded in the header
  bool allow_reflection = false;  // effective value, recorded in the header
  std::string base_mesh;          // human-readable provenance note
};

void check_grid(const std::vector<double>& grid,
                const std::function<bool(double)>& ok,
                const std::string& what) {
  for (double v : grid)
    if (!std::isfinite(v) || !ok(v))
      fail_data("experiment grid: invalid " + what + " value " + format_g9(v));
}

DsdOptions effective_options(const ExperimentConfig& config, bool normalize,
                             std::optional<bool> reflection, int pool_threads) {
  DsdOptions opts = config.dsd;
  opts.normalize = normalize;
  if (reflection) opts.allow_reflection = *reflection;
  // row-level concurrency and seed-level concurrency must not multiply
  if (pool_threads > 1) opts.threads = 1;
  return opts;
}

ExperimentPlan plan_rescaling(const ExperimentConfig& config,
                              std::vector<double> grid, int pool_threads,
                              const fs::path& dir) {
  if (grid.empty()) grid = {1.25, 1.5, 2.0, 3.0};
  check_grid(grid, [](double s) { return s > 0.0; }, "scale");

  ExperimentPlan plan;
  plan.normalize = false;  // scale is the very thing being measured
  plan.allow_reflection = config.dsd.allow_reflection;
  plan.columns = {"scale", "area_1", "area_2", "d_sd", "closed_form",
                  "rel_error"};
  plan.base_mesh = "icosphere level " + std::to_string(config.resolution);

  DsdOptions opts =
      effective_options(config, false, std::nullopt, pool_threads);
  for (double scale : grid) {
    RowJob job;
    job.param_cells = {format_g9(scale)};
    std::string stem = config.name + "_row" + std::to_string(plan.jobs.size());
    job.run = [config, opts, scale, dir,
               stem](const std::vector<std::string>& params) {
      TriangleMesh m1 = gen_icosphere(config.resolution, 1.0);
      TriangleMesh m2 = gen_icosphere(config.resolution, scale);
      double a1 = surface_area(m1), a2 = surface_area(m2);
      double closed = 2.0 * std::abs(std::sqrt(a2) - std::sqrt(a1));
      TimedDsd run = timed_dsd(m1, m2, opts);
      RowOutcome out = fill_common({}, run);
      if (run.res.qc_warning)
        out.mesh_paths =
            write_flagged_meshes(dir, stem, m1, m2, opts, run.res);
      double rel = closed > 0.0 ? (run.res.d_sd - closed) / closed : kNaN;
      out.cells = params;
      out.cells.insert(out.cells.end(),
                       {format_g9(a1), format_g9(a2), format_g9(run.res.d_sd),
                        format_g9(closed), format_g9(rel)});
      out.primary = run.res.d_sd;
      return out;
    };
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

ExperimentPlan plan_ellipsoid(const ExperimentConfig& config,
                              std::vector<double> grid, int pool_threads,
                              const fs::path& dir) {
  if (grid.empty()) grid = {1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
  check_grid(grid, [](double a) { return a > 0.0; }, "semi-axis");

  ExperimentPlan plan;
  plan.normalize = true;
  plan.allow_reflection = config.dsd.allow_reflection;
  plan.columns = {"axis_a", "d_sd", "qc_warning"};
  plan.base_mesh = "icosphere level " + std::to_string(config.resolution);

  DsdOptions opts = effective_options(config, true, std::nullopt, pool_threads);
  for (double a : grid) {
    RowJob job;
    job.param_cells = {format_g9(a)};
    std::string stem = config.name + "_row" + std::to_string(plan.jobs.size());
    job.run = [config, opts, a, dir,
               stem](const std::vector<std::string>& params) {
      TriangleMesh m1 = gen_icosphere(config.resolution, 1.0);
      TriangleMesh m2 = gen_ellipsoid(a, 1.0, 1.0, config.resolution);
      TimedDsd run = timed_dsd(m1, m2, opts);
      RowOutcome out = fill_common({}, run);
      if (run.res.qc_warning)
        out.mesh_paths =
            write_flagged_meshes(dir, stem, m1, m2, opts, run.res);
      out.cells = params;
      out.cells.insert(out.cells.end(), {format_g9(run.res.d_sd),
                                         out.qc_warning ? "1" : "0"});
      out.primary = run.res.d_sd;
      return out;
    };
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

ExperimentPlan plan_noise(const ExperimentConfig& config,
                          std::vector<double> grid, int pool_threads,
                          const fs::path& dir) {
  if (grid.empty()) grid = {0.0, 0.5, 1.0, 2.0, 4.0};
  check_grid(grid, [](double n) { return n >= 0.0; }, "noise multiple");

  ExperimentPlan plan;
  plan.normalize = true;
  plan.allow_reflection = config.dsd.allow_reflection;
  plan.columns = {"noise_multiple", "repetition", "row_seed", "d_sd"};
  plan.base_mesh = "icosphere level " + std::to_string(config.resolution);

  DsdOptions opts = effective_options(config, true, std::nullopt, pool_threads);
  for (double multiple : grid) {
    for (int rep = 0; rep < config.repetitions; ++rep) {
      std::uint64_t row_seed = config.seed + static_cast<std::uint64_t>(rep);
      RowJob job;
      job.param_cells = {format_g9(multiple), std::to_string(rep),
                         std::to_string(row_seed)};
      std::string stem =
          config.name + "_row" + std::to_string(plan.jobs.size());
      job.run = [config, opts, multiple, row_seed, dir,
                 stem](const std::vector<std::string>& params) {
        TriangleMesh m1 = gen_icosphere(config.resolution, 1.0);
        TriangleMesh m2 =
            gen_noisy_sphere(config.resolution, multiple, row_seed);
        TimedDsd run = timed_dsd(m1, m2, opts);
        RowOutcome out = fill_common({}, run);
        if (run.res.qc_warning)
          out.mesh_paths =
              write_flagged_meshes(dir, stem, m1, m2, opts, run.res);
        out.cells = params;
        out.cells.push_back(format_g9(run.res.d_sd));
        out.primary = run.res.d_sd;
        return out;
      };
      plan.jobs.push_back(std::move(job));
    }
  }
  return plan;
}

ExperimentPlan plan_subdivision(const ExperimentConfig& config,
                                std::vector<double> grid, int pool_threads,
                                const fs::path& dir) {
  if (grid.empty()) grid = {1.0, 2.0};
  check_grid(
      grid,
      [](double n) {
        return n >= 0.0 && n <= 3.0 && n == std::floor(n);
      },
      "subdivision count");

  ExperimentPlan plan;
  plan.normalize = true;
  plan.allow_reflection = config.dsd.allow_reflection;
  plan.columns = {"subdivisions", "vertices_2", "faces_2", "d_sd"};
  // The reference mesh is pinned to the ~1000-vertex geodesic sphere
  // (frequency 10, V = 1002); `resolution` does not apply here.
  plan.base_mesh = "geodesic sphere frequency 10 (V = 1002)";

  DsdOptions opts = effective_options(config, true, std::nullopt, pool_threads);
  for (double value : grid) {
    int count = static_cast<int>(value);
    RowJob job;
    job.param_cells = {std::to_string(count)};
    std::string stem = config.name + "_row" + std::to_string(plan.jobs.size());
    job.run = [config, opts, count, dir,
               stem](const std::vector<std::string>& params) {
      TriangleMesh m1 = gen_geodesic_sphere(10);
      // planar midpoint splits: the refined mesh describes the identical
      // polyhedral surface, so the distance isolates pure remeshing effects
      TriangleMesh m2 = m1;
      for (int i = 0; i < count; ++i) m2 = midpoint_subdivide(m2);
      TimedDsd run = timed_dsd(m1, m2, opts);
      RowOutcome out = fill_common({}, run);
      if (run.res.qc_warning)
        out.mesh_paths =
            write_flagged_meshes(dir, stem, m1, m2, opts, run.res);
      out.cells = params;
      out.cells.insert(out.cells.end(),
                       {std::to_string(m2.vertex_count()),
                        std::to_string(m2.triangle_count()),
                        format_g9(run.res.d_sd)});
      out.primary = run.res.d_sd;
      return out;
    };
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

ExperimentPlan plan_chirality(const ExperimentConfig& config,
                              std::vector<double> grid, int pool_threads,
                              const fs::path& dir) {
  if (grid.empty()) {
    for (int k = 0; k <= 8; ++k) grid.push_back(k * kPi / 8.0);
  }
  check_grid(grid, [](double t) { return t >= 0.0 && t <= kPi; },
             "bump angle");

  ExperimentPlan plan;
  plan.normalize = true;
  plan.allow_reflection = true;  // the experiment compares both searches
  plan.columns = {"theta", "d_sd", "dbar_sd"};
  plan.base_mesh = "three-bump sphere, subdivision level " +
                   std::to_string(config.resolution);

  DsdOptions opts = effective_options(config, true, true, pool_threads);
  for (double theta : grid) {
    RowJob job;
    job.param_cells = {format_g9(theta)};
    std::string stem = config.name + "_row" + std::to_string(plan.jobs.size());
    job.run = [config, opts, theta, dir,
               stem](const std::vector<std::string>& params) {
      TriangleMesh m1 = gen_three_bump(0.0, config.resolution);
      TriangleMesh m2 = gen_three_bump(theta, config.resolution);
      // one 48-seed search yields both distances: the oriented d_sd is the
      // best non-reflected seed, the relaxed one the best seed overall
      TimedDsd run = timed_dsd(m1, m2, opts);
      double oriented = std::numeric_limits<double>::infinity();
      for (const auto& s : run.res.per_seed)
        if (!s.reflected) oriented = std::min(oriented, s.energy);
      RowOutcome out = fill_common({}, run);
      if (run.res.qc_warning)
        out.mesh_paths =
            write_flagged_meshes(dir, stem, m1, m2, opts, run.res);
      out.cells = params;
      out.cells.push_back(std::isfinite(oriented) ? format_g9(oriented)
                                                  : "nan");
      out.cells.push_back(format_g9(run.res.d_sd));
      out.primary = std::isfinite(oriented) ? oriented : kNaN;
      return out;
    };
    plan.jobs.push_back(std::move(job));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// output writers
// ---------------------------------------------------------------------------

void write_csv(const fs::path& path, const ExperimentConfig& config,
               const ExperimentPlan& plan,
               const std::vector<RowOutcome>& outcomes,
               const std::string& timestamp) {
  std::ofstream out(path);
  if (!out) fail_data("experiment: cannot write " + path.string());
  out << "# gsd-csv v1\n";
  out << "# generated " << timestamp << "\n";
  out << "# experiment=" << config.name
      << " resolution=" << config.resolution << " seed=" << config.seed
      << " repetitions=" << config.repetitions
      << " normalize=" << (plan.normalize ? 1 : 0)
      << " allow_reflection=" << (plan.allow_reflection ? 1 : 0)
      << " seed_limit=" << config.dsd.seed_limit << "\n";
  for (std::size_t c = 0; c < plan.columns.size(); ++c)
    out << (c ? "," : "") << plan.columns[c];
  out << "\n";
  for (const auto& row : outcomes) {
    for (std::size_t c = 0; c < row.cells.size(); ++c)
      out << (c ? "," : "") << row.cells[c];
    out << "\n";
  }
  if (!out) fail_data("experiment: write failed for " + path.string());
}

void write_json(const fs::path& path, const ExperimentConfig& config,
                const ExperimentPlan& plan,
                const std::vector<RowOutcome>& outcomes,
                const std::string& timestamp, double total_seconds) {
  json doc;
  doc["schema"] = "gsd-json v1";
  doc["experiment"] = config.name;
  doc["generated"] = timestamp;
  doc["config"] = {{"resolution", config.resolution},
                   {"seed", config.seed},
                   {"repetitions", config.repetitions},
                   {"threads", config.threads},
                   {"normalize", plan.normalize},
                   {"allow_reflection", plan.allow_reflection},
                   {"seed_limit", config.dsd.seed_limit}};
  doc["base_mesh"] = plan.base_mesh;
  doc["columns"] = plan.columns;

  json rows = json::array();
  json failures = json::array();
  int failed = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const RowOutcome& row = outcomes[i];
    json cells = json::object();
    for (std::size_t c = 0; c < plan.columns.size() && c < row.cells.size();
         ++c)
      cells[plan.columns[c]] = row.cells[c];
    json entry = {{"row", i},
                  {"cells", cells},
                  {"seconds", row.seconds},
                  {"qc_warning", row.qc_warning},
                  {"per_seed", row.per_seed}};
    if (row.failed) {
      entry["error"] = row.error;
      failures.push_back(std::to_string(i) + ": " + row.error);
      ++failed;
    }
    if (!row.mesh_paths.empty()) entry["flagged_meshes"] = row.mesh_paths;
    rows.push_back(std::move(entry));
  }
  doc["rows"] = std::move(rows);
  doc["failures"] = std::move(failures);
  doc["failed_rows"] = failed;
  doc["total_seconds"] = total_seconds;

  std::ofstream out(path);
  if (!out) fail_data("experiment: cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) fail_data("experiment: write failed for " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------

std::vector<std::string> experiment_names() {
  return {"rescaling", "ellipsoid", "noise", "subdivision", "chirality"};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), config.name) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    fail_data("experiment: unknown name '" + config.name + "' (expected one of " +
              list + ")");
  }
  if (config.resolution < 0 || config.resolution > 7)
    fail_data("experiment: resolution must be in [0, 7]");
  if (config.repetitions < 1)
    fail_data("experiment: repetitions must be >= 1");
  if (config.repetitions > 1 && config.name != "noise")
    fail_data("experiment: repetitions apply to the noise experiment only");

  fs::path dir(config.out_dir.empty() ? "." : config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_data("experiment: cannot create directory " + dir.string());

  int pool = config.threads > 0
                 ? config.threads
                 : static_cast<int>(std::thread::hardware_concurrency());
  pool = std::max(1, pool);

  ExperimentPlan plan;
  if (config.name == "rescaling")
    plan = plan_rescaling(config, config.grid, pool, dir);
  else if (config.name == "ellipsoid")
    plan = plan_ellipsoid(config, config.grid, pool, dir);
  else if (config.name == "noise")
    plan = plan_noise(config, config.grid, pool, dir);
  else if (config.name == "subdivision")
    plan = plan_subdivision(config, config.grid, pool, dir);
  else
    plan = plan_chirality(config, config.grid, pool, dir);

  const int n_rows = static_cast<int>(plan.jobs.size());
  pool = std::min(pool, std::max(1, n_rows));
  std::vector<RowOutcome> outcomes(plan.jobs.size());

  auto t0 = std::chrono::steady_clock::now();
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n_rows) return;
      const RowJob& job = plan.jobs[i];
      try {
        outcomes[i] = job.run(job.param_cells);
      } catch (const std::exception& e) {
        RowOutcome& out = outcomes[i];
        out.failed = true;
        out.error = e.what();
        out.cells = job.param_cells;
        // pad result columns with nan so every row has a full cell set
        while (out.cells.size() < plan.columns.size())
          out.cells.push_back("nan");
      }
    }
  };
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  double total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const std::string timestamp = iso_timestamp_utc();
  ExperimentResult result;
  fs::path csv_path = dir / (config.name + ".csv");
  fs::path json_path = dir / (config.name + ".json");
  write_csv(csv_path, config, plan, outcomes, timestamp);
  write_json(json_path, config, plan, outcomes, timestamp, total_seconds);

  result.csv_path = csv_path.string();
  result.json_path = json_path.string();
  result.rows = n_rows;
  for (const auto& row : outcomes) {
    if (row.failed)
      ++result.failed_rows;
    else
      result.distances.push_back(row.primary);
  }
  return result;
}

}  // namespace gsd
