#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "winscrt/estimators.hpp"
#include "winscrt/stats.hpp"

namespace winscrt {

enum class VarianceMethod { ClusterScore, ProjectedU, Jackknife };

// symmetric 2x2 over (win, loss)
struct SymMat2 {
  double ww = 0.0;
  double wl = 0.0;
  double ll = 0.0;
  double quad(double gw, double gl) const { return gw * gw * ww + 2.0 * gw * gl * wl + gl * gl * ll; }
};

struct VarianceEstimate {
  VarianceMethod method = VarianceMethod::ClusterScore;
  // variances on the inference scale; absent when undefined for this data
  std::optional<double> wd;
  std::optional<double> log_wr;
  std::optional<double> log_wo;
  std::optional<double> door;
  // intermediates
  double sigma1_sq = 0.0;  // cluster-score arm variances
  double sigma0_sq = 0.0;
  SymMat2 sigma1, sigma0, sigma_u, sigma_pi;  // projected-U covariances
  std::vector<std::string> notes;

  std::optional<double> get(Estimand e) const {
    switch (e) {
      case Estimand::WD: return wd;
      case Estimand::WR: return log_wr;
      case Estimand::WO: return log_wo;
      case Estimand::DOOR: return door;
    }
    return std::nullopt;
  }
};

struct ClusterScoreOptions {
  // when set, the log(WR) variance uses the bivariate (pi_win, pi_loss)
  // gradient with the projection covariance instead of the univariate
  // wd-only delta factor
  const ProjectionTable* bivariate_wr = nullptr;
};

VarianceEstimate cluster_score_variance(const ClusterScores& cs, const WinEstimates& est,
                              const ClusterScoreOptions& opts = {});
VarianceEstimate projected_u_covariance(const ProjectionTable& p, const WinEstimates& est);

// Leave-one-cluster plug-in estimates on the inference scale; an entry is
// absent when that deletion leaves the estimand undefined.
struct LeaveOneOutEstimates {
  std::vector<std::optional<double>> wd;
  std::vector<std::optional<double>> log_wr;
  std::vector<std::optional<double>> log_wo;
  std::vector<std::optional<double>> door;
  int m = 0;

  const std::vector<std::optional<double>>& get(Estimand e) const {
    switch (e) {
      case Estimand::WR: return log_wr;
      case Estimand::WO: return log_wo;
      case Estimand::DOOR: return door;
      default: return wd;
    }
  }
};

// throws DegenerateDeletion if any deletion empties an arm
LeaveOneOutEstimates leave_one_out_estimates(const DeletedTallySet& dt);
VarianceEstimate jackknife_variance(const LeaveOneOutEstimates& loo);

struct TestResult {
  Estimand estimand = Estimand::WD;
  std::string method;
  double estimate = 0.0;  // original scale
  std::optional<double> se;  // inference scale
  double statistic = 0.0;
  Reference reference;
  double p_value = 1.0;
  std::optional<std::pair<double, double>> ci;  // original scale
  double null_value = 0.0;  // original scale
  std::vector<std::string> warnings;
};

// Wald test from a plug-in estimate and variance; CI on the inference scale,
// back-transformed for reporting (exp for ratios, clamped to [0,1] for DOOR).
TestResult wald_test(const WinEstimates& est, const VarianceEstimate& var, Estimand estimand,
                     const Reference& ref, double alpha, Alternative alt,
                     std::optional<double> null_original = std::nullopt);

}  // namespace winscrt
