// Command-line front end. Everything goes through the C API of the shared
// library; this translation unit never touches the C++ core directly.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "winscrt.h"

namespace {

using nlohmann::json;

constexpr int kExitData = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

int exit_code_of(winscrt_status st) {
  switch (st) {
    case WINSCRT_OK: return 0;
    case WINSCRT_ERR_IO:
    case WINSCRT_ERR_PARSE:
    case WINSCRT_ERR_INVALID: return kExitData;
    case WINSCRT_ERR_INFEASIBLE: return kExitInfeasible;
    default: return kExitInternal;
  }
}

int fail(winscrt_status st, const char* errbuf) {
  std::fprintf(stderr, "error: %s\n", errbuf[0] ? errbuf : "unknown failure");
  return exit_code_of(st);
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { winscrt_string_free(ptr); }
};

struct OwnedDataset {
  winscrt_dataset* ptr = nullptr;
  ~OwnedDataset() { winscrt_dataset_free(ptr); }
};

int write_report(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) {
    std::fprintf(stderr, "error: cannot write '%s'\n", out_path.c_str());
    return kExitData;
  }
  out << text;
  return 0;
}

int default_workers() {
  if (const char* env = std::getenv("WINSCRT_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"win statistics for cluster-randomized trials"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(winscrt_version()));

  // ---- analyze ----
  std::string in_path, method = "wald_score", estimand = "WD", alternative = "two.sided";
  std::string rule = "both-events", out_path;
  double null_value = 0.0, alpha = 0.05;
  bool null_set = false, no_t = false, exact = false, wr_bivariate = false;
  std::int64_t b = 2000;
  std::uint64_t seed = 0;

  auto* analyze = app.add_subcommand("analyze", "test a win statistic on an event log");
  analyze->add_option("-i,--input", in_path, "event-log CSV (clu,id,trt,t,st)")->required();
  analyze->add_option("-m,--method", method,
                      "wald_score|wald_u|wald_jk|perm|fs|jel")
      ->check(CLI::IsMember({"wald_score", "wald_u", "wald_jk", "perm", "fs", "jel"}));
  analyze->add_option("-e,--estimand", estimand, "WD|WR|WO|DOOR")
      ->check(CLI::IsMember({"WD", "WR", "WO", "DOOR"}));
  analyze->add_option("--null", null_value, "null value on the original scale")
      ->each([&](const std::string&) { null_set = true; });
  analyze->add_option("--alternative", alternative, "two.sided|greater|less")
      ->check(CLI::IsMember({"two.sided", "greater", "less"}));
  analyze->add_option("--alpha", alpha, "test level (default 0.05)");
  analyze->add_flag("--no-t", no_t, "use a normal reference instead of t(M-2)");
  analyze->add_option("-B", b, "Monte Carlo permutation replicates (default 2000)");
  analyze->add_option("--seed", seed, "seed for the permutation draw");
  analyze->add_option("--rule", rule, "both-events|gehan")
      ->check(CLI::IsMember({"both-events", "gehan"}));
  analyze->add_flag("--exact", exact, "enumerate all treatment allocations (perm)");
  analyze->add_flag("--wr-bivariate", wr_bivariate,
                    "bivariate log(WR) variance for wald_score");
  analyze->add_option("-o,--out", out_path, "write the JSON report here instead of stdout");

  // ---- simulate ----
  std::string grid_path, out_dir;
  int reps = 2000, workers = default_workers();
  std::int64_t b_sim = 1000;
  double alpha_sim = 0.05;
  std::uint64_t seed_sim = 1;
  bool no_t_sim = false, fs_t = false, no_resume = false;
  std::vector<std::string> procedures, estimands;

  auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo scenario grid");
  simulate->add_option("-g,--grid", grid_path, "scenario grid CSV")->required();
  simulate->add_option("-o,--out", out_dir, "output directory")->required();
  simulate->add_option("-r,--reps", reps, "replicates per scenario (default 2000)");
  simulate->add_option("-B", b_sim, "permutation replicates (default 1000)");
  simulate->add_option("--alpha", alpha_sim, "test level (default 0.05)");
  simulate->add_option("--seed", seed_sim, "root seed (default 1)");
  simulate->add_flag("--no-t", no_t_sim, "normal reference for the Wald tests");
  simulate->add_flag("--fs-t", fs_t, "t(M-2) reference for the fs test");
  simulate->add_flag("--no-resume", no_resume, "recompute scenarios already in the manifest");
  simulate->add_option("--procedures", procedures, "subset of procedures to run")
      ->delimiter(',');
  simulate->add_option("--estimands", estimands, "subset of estimands to run")->delimiter(',');
  simulate->add_option("-w,--workers", workers,
                       "worker threads (default: logical cores, override WINSCRT_WORKERS)");

  // ---- calibrate ----
  std::string cal_grid;
  int cal_row = 1, cal_reps = 20;
  double target = 0.35, tol = 0.01;
  std::uint64_t cal_seed = 1;
  std::string cal_out;

  auto* calibrate = app.add_subcommand(
      "calibrate", "solve for the censoring rate that hits a target tie proportion");
  calibrate->add_option("-g,--grid", cal_grid, "scenario grid CSV")->required();
  calibrate->add_option("--row", cal_row, "1-based scenario row in the grid (default 1)");
  calibrate->add_option("-t,--target", target, "target tie proportion")->required();
  calibrate->add_option("-r,--reps", cal_reps, "datasets per evaluation (default 20)");
  calibrate->add_option("--tol", tol, "absolute tolerance (default 0.01)");
  calibrate->add_option("--seed", cal_seed, "seed (default 1)");
  calibrate->add_option("-o,--out", cal_out, "write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  char errbuf[1024] = {0};

  if (*analyze) {
    OwnedDataset d;
    winscrt_status st = winscrt_dataset_from_csv(in_path.c_str(), &d.ptr, errbuf, sizeof errbuf);
    if (st != WINSCRT_OK) return fail(st, errbuf);

    json options = {{"method", method}, {"estimand", estimand}, {"alternative", alternative},
                    {"alpha", alpha},   {"use_t", !no_t},       {"B", b},
                    {"seed", seed},     {"rule", rule},         {"exact", exact},
                    {"wr_bivariate", wr_bivariate}};
    if (null_set) options["null"] = null_value;

    OwnedString report;
    st = winscrt_analyze(d.ptr, options.dump().c_str(), &report.ptr, errbuf, sizeof errbuf);
    if (st != WINSCRT_OK) return fail(st, errbuf);
    return write_report(report.ptr, out_path);
  }

  if (*simulate) {
    json options = {{"reps", reps},          {"B", b_sim},     {"alpha", alpha_sim},
                    {"seed", seed_sim},      {"use_t", !no_t_sim}, {"fs_use_t", fs_t},
                    {"workers", workers},    {"resume", !no_resume}};
    if (!procedures.empty()) options["procedures"] = procedures;
    if (!estimands.empty()) options["estimands"] = estimands;

    OwnedString summary;
    winscrt_status st = winscrt_simulate(grid_path.c_str(), out_dir.c_str(),
                                         options.dump().c_str(), &summary.ptr, errbuf,
                                         sizeof errbuf);
    if (summary.ptr) std::fputs(summary.ptr, stdout);
    if (st != WINSCRT_OK) return fail(st, errbuf);
    return 0;
  }

  if (*calibrate) {
    // reuse the analyze CSV machinery on the library side by passing the
    // selected grid row through as a scenario object
    std::ifstream in(cal_grid);
    if (!in) {
      std::fprintf(stderr, "error: cannot open '%s'\n", cal_grid.c_str());
      return kExitData;
    }
    std::string header, line;
    if (!std::getline(in, header)) {
      std::fprintf(stderr, "error: empty grid\n");
      return kExitData;
    }
    for (int i = 0; i < cal_row; ++i) {
      if (!std::getline(in, line)) {
        std::fprintf(stderr, "error: grid has fewer than %d rows\n", cal_row);
        return kExitData;
      }
    }
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::string cur;
      for (char ch : s) {
        if (ch == ',') {
          out.push_back(cur);
          cur.clear();
        } else if (ch != '\r') {
          cur.push_back(ch);
        }
      }
      out.push_back(cur);
      return out;
    };
    const auto keys = split(header);
    const auto cells = split(line);
    if (keys.size() != cells.size()) {
      std::fprintf(stderr, "error: grid row %d does not match the header\n", cal_row);
      return kExitData;
    }
    json scenario;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (keys[i] == "name")
        scenario["name"] = cells[i];
      else
        scenario[keys[i]] = std::strtod(cells[i].c_str(), nullptr);
    }
    json options = {{"scenario", scenario}, {"target_pi_tie", target}, {"reps", cal_reps},
                    {"tol", tol},           {"seed", cal_seed}};

    OwnedString report;
    winscrt_status st =
        winscrt_calibrate(options.dump().c_str(), &report.ptr, errbuf, sizeof errbuf);
    if (st != WINSCRT_OK) return fail(st, errbuf);
    return write_report(report.ptr, cal_out);
  }

  return 0;
}
