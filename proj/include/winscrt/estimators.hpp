#pragma once

#include <optional>
#include <string>

#include "winscrt/pairwise.hpp"

namespace winscrt {

enum class Estimand { WD, WR, WO, DOOR };

Estimand estimand_from_string(const std::string& s);
std::string estimand_name(Estimand e);
// inference happens on the log scale for the ratio estimands
bool estimand_log_scale(Estimand e);
// null value on the inference scale (0 for WD/logWR/logWO, 1/2 for DOOR)
double default_null(Estimand e);

// Plug-in win statistics. Ratio statistics are value states: wr/log_wr are
// absent when L == 0, wo/log_wo when L == 0 and T == 0. log_wr is -inf when
// W == 0 (a defined, maximally negative estimate).
struct WinEstimates {
  double pi_win = 0.0;
  double pi_loss = 0.0;
  double pi_tie = 0.0;
  double wd = 0.0;
  double door = 0.0;
  std::optional<double> wr;
  std::optional<double> log_wr;
  std::optional<double> wo;
  std::optional<double> log_wo;

  // estimate on the reporting (original) scale
  std::optional<double> value(Estimand e) const;
  // estimate on the inference scale (log for WR/WO)
  std::optional<double> inference_value(Estimand e) const;
};

WinEstimates estimate_all(const Tallies& t);

// Delta-method gradients with respect to (pi_win, pi_loss), plus the scalar
// derivative with respect to W_D used by the cluster-score variance.
struct EstimandGradient {
  double d_pi_win = 0.0;
  double d_pi_loss = 0.0;
  double d_wd = 0.0;
};

struct Gradients {
  EstimandGradient wd;
  EstimandGradient door;
  std::optional<EstimandGradient> log_wr;  // needs pi_win > 0 and pi_loss > 0
  std::optional<EstimandGradient> log_wo;  // needs |wd| < 1

  const EstimandGradient& require(Estimand e) const;  // throws UndefinedGradient
};

Gradients gradients(const WinEstimates& e);

}  // namespace winscrt
