#include "winscrt/driver.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "winscrt/errors.hpp"
#include "winscrt/rng.hpp"

namespace winscrt {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kManifestSchemaVersion = 1;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// configuration fingerprint used by the resume logic
std::string scenario_hash(const Scenario& s, const RunConfig& cfg) {
  std::ostringstream os;
  os << s.name << '|' << s.m << '|' << fmt_double(s.q) << '|' << fmt_double(s.nbar) << '|'
     << fmt_double(s.cv) << '|' << fmt_double(s.alpha1) << '|' << fmt_double(s.alpha2) << '|'
     << fmt_double(s.eta) << '|' << fmt_double(s.theta1) << '|' << fmt_double(s.theta2) << '|'
     << fmt_double(s.kappa1) << '|' << fmt_double(s.kappa2) << '|' << fmt_double(s.lambda1) << '|'
     << fmt_double(s.lambda2) << '|' << fmt_double(s.xi) << '|' << fmt_double(s.tau_c) << '|'
     << cfg.reps << '|' << cfg.b_perm << '|' << fmt_double(cfg.alpha) << '|' << cfg.wald_use_t
     << '|' << cfg.fs_use_t << '|' << cfg.seed;
  for (Procedure p : cfg.procedures.empty() ? std::vector<Procedure>(all_procedures().begin(),
                                                                     all_procedures().end())
                                            : cfg.procedures)
    os << '|' << procedure_name(p);
  for (Estimand e : cfg.estimands.empty()
                        ? std::vector<Estimand>(all_estimands().begin(), all_estimands().end())
                        : cfg.estimands)
    os << '|' << estimand_name(e);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : os.str()) h = splitmix64(h ^ static_cast<unsigned char>(c));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json scenario_to_json(const Scenario& s) {
  return {{"name", s.name},       {"M", s.m},
          {"q", s.q},             {"nbar", s.nbar},
          {"cv", s.cv},           {"alpha1", s.alpha1},
          {"alpha2", s.alpha2},   {"eta", s.eta},
          {"theta1", s.theta1},   {"theta2", s.theta2},
          {"kappa1", s.kappa1},   {"kappa2", s.kappa2},
          {"lambda1", s.lambda1}, {"lambda2", s.lambda2},
          {"xi", s.xi},           {"tau_c", s.tau_c}};
}

}  // namespace

SimulateSummary simulate_grid(const std::string& grid_path, const std::string& out_dir,
                              const SimulateOptions& opts) {
  const auto grid = read_scenario_grid_file(grid_path);

  fs::create_directories(out_dir);
  const fs::path manifest_path = fs::path(out_dir) / "manifest.json";

  json manifest;
  if (opts.resume && fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    try {
      in >> manifest;
    } catch (...) {
      manifest = json();
    }
  }
  if (!manifest.is_object() || !manifest.contains("scenarios") ||
      !manifest["scenarios"].is_object()) {
    manifest = json{{"schema_version", kManifestSchemaVersion},
                    {"seed", opts.run.seed},
                    {"scenarios", json::object()}};
  }

  SimulateSummary summary;
  summary.scenarios = static_cast<int>(grid.size());

  for (const auto& s : grid) {
    const std::string hash = scenario_hash(s, opts.run);
    const std::string result_name = "results_" + s.name + ".csv";
    const fs::path result_path = fs::path(out_dir) / result_name;

    auto& entry = manifest["scenarios"];
    if (opts.resume && entry.contains(s.name) && entry[s.name].value("hash", "") == hash &&
        fs::exists(result_path)) {
      ++summary.skipped;
      std::fprintf(stderr, "[simulate] %s: up to date, skipping\n", s.name.c_str());
      continue;
    }

    try {
      std::fprintf(stderr, "[simulate] %s: running %d replicates...\n", s.name.c_str(),
                   opts.run.reps);
      const ScenarioResult r = run_scenario(s, opts.run);
      {
        std::ofstream out(result_path, std::ios::trunc);
        if (!out) throw_io("WriteFailed", "cannot write '" + result_path.string() + "'");
        write_scenario_result_csv(out, r);
      }
      entry[s.name] = {{"hash", hash},
                       {"file", result_name},
                       {"scenario", scenario_to_json(s)},
                       {"reps", opts.run.reps},
                       {"b_perm", opts.run.b_perm},
                       {"alpha", opts.run.alpha},
                       {"seed", opts.run.seed},
                       {"wald_reference", r.wald_reference},
                       {"fs_reference", r.fs_reference},
                       {"xi", s.xi},
                       {"achieved_pi_tie", r.mean_pi_tie}};
      ++summary.completed;
      std::fprintf(stderr, "[simulate] %s: done in %.1fs (mean pi_tie %.3f)\n", s.name.c_str(),
                   r.seconds, r.mean_pi_tie);
    } catch (const Error& e) {
      ++summary.failed;
      summary.failures.push_back(s.name + ": " + e.what());
      std::fprintf(stderr, "[simulate] %s: FAILED (%s)\n", s.name.c_str(), e.what());
    }
  }

  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw_io("WriteFailed", "cannot write '" + manifest_path.string() + "'");
  out << manifest.dump(2) << '\n';
  return summary;
}

std::string calibrate_json(const Scenario& s, double target_pi_tie, int reps, double tol,
                           std::uint64_t seed) {
  const CalibrationResult r = calibrate_censoring(s, target_pi_tie, reps, tol, seed);
  json j;
  j["scenario"] = scenario_to_json(s);
  j["target_pi_tie"] = target_pi_tie;
  j["xi"] = r.xi;
  j["achieved_pi_tie"] = r.achieved;
  j["converged"] = r.converged;
  j["reps"] = reps;
  j["tol"] = tol;
  j["seed"] = seed;
  j["trace"] = json::array();
  for (const auto& step : r.trace) j["trace"].push_back({{"xi", step.xi}, {"pi_tie", step.pi_tie}});
  return j.dump(2) + "\n";
}

}  // namespace winscrt
