#pragma once

// Experiment harness: parameter sweeps over the synthetic families with
// CSV + JSON output. CSV content is deterministic for a fixed config+seed
// (the timestamp header line aside); wall-clock timings and per-seed energy
// lists live in the JSON summary.

#include "gsd/alignment.hpp"
#include "gsd/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gsd {

// rescaling   grid = radius scale factors          (default 1.25, 1.5, 2, 3)
// ellipsoid   grid = semi-axis a values            (default 1.0 .. 2.0 step 0.2)
// noise       grid = noise multiples N             (default 0, 0.5, 1, 2, 4)
// subdivision grid = subdivision counts            (default 1, 2)
// chirality   grid = bump angles theta             (default 0 .. pi step pi/8)
struct ExperimentConfig {
  std::string name;
  std::vector<double> grid;  // empty = experiment default
  int resolution = 3;        // icosphere subdivision level of the base meshes
  std::uint64_t seed = 1;
  int repetitions = 1;       // rows repeated with derived seeds (noise only)
  std::string out_dir = ".";
  int threads = 0;
  DsdOptions dsd;            // normalize forced where the experiment requires
};

struct ExperimentResult {
  std::string csv_path;
  std::string json_path;
  int rows = 0;
  int failed_rows = 0;
  std::vector<double> distances;  // d_sd per successful row, grid order
};

[[nodiscard]] std::vector<std::string> experiment_names();
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace gsd
