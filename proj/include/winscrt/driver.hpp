#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "winscrt/simulation.hpp"

namespace winscrt {

struct SimulateOptions {
  RunConfig run;
  bool resume = true;
};

struct SimulateSummary {
  int scenarios = 0;
  int completed = 0;
  int skipped = 0;
  int failed = 0;
  std::vector<std::string> failures;  // "name: message"
};

// Runs every scenario in the grid, writing results_<name>.csv per scenario
// plus manifest.json into out_dir. Scenarios already recorded in the
// manifest with a matching configuration hash are skipped.
SimulateSummary simulate_grid(const std::string& grid_path, const std::string& out_dir,
                              const SimulateOptions& opts);

// JSON report for a censoring-rate calibration of one grid row.
std::string calibrate_json(const Scenario& s, double target_pi_tie, int reps, double tol,
                           std::uint64_t seed);

}  // namespace winscrt
