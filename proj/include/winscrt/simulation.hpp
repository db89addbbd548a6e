#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "winscrt/estimators.hpp"
#include "winscrt/outcomes.hpp"
#include "winscrt/rng.hpp"

namespace winscrt {

// Full data-generating configuration for one Monte Carlo scenario: cluster
// structure, per-component Weibull baselines with gamma frailties, Gumbel
// dependence between the two latent times, and the censoring mechanism.
struct Scenario {
  std::string name = "scenario";
  int m = 20;
  double q = 0.5;
  double nbar = 20.0;
  double cv = 0.3;
  double alpha1 = 2.0;  // frailty shapes, Var = 1/alpha
  double alpha2 = 2.0;
  double eta = 1.0;  // Gumbel dependence, >= 1
  double theta1 = 0.0;  // log hazard ratios
  double theta2 = 0.0;
  double kappa1 = 1.0;  // Weibull shape/rate per component
  double lambda1 = 0.1;
  double kappa2 = 1.0;
  double lambda2 = 0.2;
  double xi = 0.03;    // exponential censoring rate; <= 0 disables
  double tau_c = 80.0; // administrative end time
  int min_cluster_size = 5;

  void validate() const;
  int treated_clusters() const;
};

struct ClusterSizeDraw {
  std::vector<int> sizes;
  bool poisson_fallback = false;  // requested variance at or below the Poisson floor
};

ClusterSizeDraw draw_cluster_sizes(double nbar, double cv, int m, int min_size, Rng& rng);

// Gumbel copula pair via the positive-stable mixture; independent when eta == 1.
std::pair<double, double> sample_gumbel_pair(double eta, Rng& rng);

// Inverse of S(t) = exp(-gamma * lambda * t^kappa * exp(theta * a))
double invert_weibull_ph(double u, double kappa, double lambda, double gamma, double theta, int a);

Dataset generate_dataset(const Scenario& s, Rng& rng);

enum class Procedure { WaldScore, WaldU, WaldJackknife, Perm, FS, JEL };
constexpr int kProcedureCount = 6;
constexpr int kEstimandCount = 4;

Procedure procedure_from_string(const std::string& s);
std::string procedure_name(Procedure p);
const std::array<Procedure, kProcedureCount>& all_procedures();
const std::array<Estimand, kEstimandCount>& all_estimands();

struct RunConfig {
  int reps = 2000;
  std::int64_t b_perm = 1000;
  double alpha = 0.05;
  bool wald_use_t = true;  // t(M-2) for the Wald tests; normal otherwise
  bool fs_use_t = false;   // FS keeps a normal reference by default
  std::vector<Procedure> procedures;  // empty = all
  std::vector<Estimand> estimands;    // empty = all
  std::uint64_t seed = 1;
  int workers = 1;
};

struct CellResult {
  std::int64_t rejected = 0;
  std::int64_t valid = 0;
  std::int64_t undefined = 0;
  double rate() const { return valid > 0 ? static_cast<double>(rejected) / static_cast<double>(valid) : 0.0; }
};

struct ScenarioResult {
  Scenario scenario;
  int reps = 0;
  std::int64_t b_perm = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::string wald_reference = "t";
  std::string fs_reference = "normal";
  std::array<std::array<CellResult, kEstimandCount>, kProcedureCount> cells{};
  double mean_pi_tie = 0.0;
  double seconds = 0.0;

  const CellResult& cell(Procedure p, Estimand e) const {
    return cells[static_cast<std::size_t>(p)][static_cast<std::size_t>(e)];
  }
};

ScenarioResult run_scenario(const Scenario& s, const RunConfig& cfg);

struct CalibrationStep {
  double xi = 0.0;
  double pi_tie = 0.0;
};

struct CalibrationResult {
  double xi = 0.0;
  double achieved = 0.0;
  bool converged = false;
  std::vector<CalibrationStep> trace;
};

// Bisection on log(xi) until the mean tie proportion over `reps` generated
// datasets is within tol of the target. Throws Unbracketable when the target
// is unreachable inside xi in [1e-6, 1e3].
CalibrationResult calibrate_censoring(const Scenario& s, double target_pi_tie, int reps,
                                      double tol, std::uint64_t seed);

// grid file: CSV with header
// name,M,q,nbar,cv,alpha1,alpha2,eta,theta1,theta2,kappa1,kappa2,lambda1,lambda2,xi,tau_c
std::vector<Scenario> parse_scenario_grid(std::istream& in);
std::vector<Scenario> read_scenario_grid_file(const std::string& path);

// one row per estimand x procedure; excludes wall-clock so that reruns with
// the same seed are byte-identical
void write_scenario_result_csv(std::ostream& out, const ScenarioResult& r);

}  // namespace winscrt
