#include "winscrt/estimators.hpp"

#include <cmath>

#include "winscrt/errors.hpp"
#include "winscrt/stats.hpp"

namespace winscrt {

Estimand estimand_from_string(const std::string& s) {
  if (s == "WD" || s == "wd") return Estimand::WD;
  if (s == "WR" || s == "wr") return Estimand::WR;
  if (s == "WO" || s == "wo") return Estimand::WO;
  if (s == "DOOR" || s == "door") return Estimand::DOOR;
  throw_invalid("BadEstimand", "unknown estimand '" + s + "'");
}

std::string estimand_name(Estimand e) {
  switch (e) {
    case Estimand::WD: return "WD";
    case Estimand::WR: return "WR";
    case Estimand::WO: return "WO";
    case Estimand::DOOR: return "DOOR";
  }
  return "?";
}

bool estimand_log_scale(Estimand e) { return e == Estimand::WR || e == Estimand::WO; }

double default_null(Estimand e) { return e == Estimand::DOOR ? 0.5 : 0.0; }

std::optional<double> WinEstimates::value(Estimand e) const {
  switch (e) {
    case Estimand::WD: return wd;
    case Estimand::WR: return wr;
    case Estimand::WO: return wo;
    case Estimand::DOOR: return door;
  }
  return std::nullopt;
}

std::optional<double> WinEstimates::inference_value(Estimand e) const {
  switch (e) {
    case Estimand::WD: return wd;
    case Estimand::WR: return log_wr;
    case Estimand::WO: return log_wo;
    case Estimand::DOOR: return door;
  }
  return std::nullopt;
}

WinEstimates estimate_all(const Tallies& t) {
  if (t.pairs() <= 0) throw_invalid("NoPairs", "tallies have no cross-arm pairs");
  const double np = static_cast<double>(t.pairs());
  const double w = static_cast<double>(t.wins);
  const double l = static_cast<double>(t.losses);
  const double ties = static_cast<double>(t.ties);

  WinEstimates e;
  e.pi_win = w / np;
  e.pi_loss = l / np;
  e.pi_tie = ties / np;
  e.wd = (w - l) / np;
  e.door = 0.5 * (1.0 + e.wd);
  if (t.losses > 0) {
    e.wr = w / l;
    // log(W/L) == 2 atanh((W-L)/(W+L)); -inf when W == 0
    e.log_wr = atanh2((w - l) / (w + l));
  }
  if (t.losses > 0 || t.ties > 0) {
    e.wo = (w + 0.5 * ties) / (l + 0.5 * ties);
    e.log_wo = atanh2(e.wd);
  }
  return e;
}

const EstimandGradient& Gradients::require(Estimand e) const {
  switch (e) {
    case Estimand::WD: return wd;
    case Estimand::DOOR: return door;
    case Estimand::WR:
      if (!log_wr) throw_infeasible("UndefinedGradient", "log(WR) gradient needs pi_win > 0 and pi_loss > 0");
      return *log_wr;
    case Estimand::WO:
      if (!log_wo) throw_infeasible("UndefinedGradient", "log(WO) gradient needs |WD| < 1");
      return *log_wo;
  }
  throw_invalid("BadEstimand", "unreachable");
}

Gradients gradients(const WinEstimates& e) {
  Gradients g;
  g.wd = {1.0, -1.0, 1.0};
  g.door = {0.5, -0.5, 0.5};
  if (e.pi_win > 0.0 && e.pi_loss > 0.0) {
    // d/d wd of 2 atanh(wd / (1 - pi_tie)) at fixed pi_tie
    const double r = 1.0 / (1.0 - e.pi_tie);
    const double x = e.wd * r;
    g.log_wr = {1.0 / e.pi_win, -1.0 / e.pi_loss, 2.0 * r / (1.0 - x * x)};
  }
  if (std::abs(e.wd) < 1.0) {
    const double f = 2.0 / (1.0 - e.wd * e.wd);
    g.log_wo = {f, -f, f};
  }
  return g;
}

}  // namespace winscrt
