#include "winscrt/analyze.hpp"

#include <cmath>
#include <json.hpp>

#include "winscrt/errors.hpp"
#include "winscrt/jel.hpp"
#include "winscrt/pairwise.hpp"
#include "winscrt/randomization.hpp"
#include "winscrt/variance.hpp"

namespace winscrt {

namespace {

using nlohmann::json;

constexpr int kReportSchemaVersion = 1;

double null_on_inference_scale(const AnalyzeConfig& cfg) {
  if (!cfg.null_value) return default_null(cfg.estimand);
  if (estimand_log_scale(cfg.estimand)) {
    if (!(*cfg.null_value > 0.0))
      throw_invalid("BadNull", "null value for a ratio estimand must be positive");
    return std::log(*cfg.null_value);
  }
  return *cfg.null_value;
}

json base_report(const Dataset& d, const AnalyzeConfig& cfg) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["method"] = cfg.method;
  j["estimand"] = estimand_name(cfg.estimand);
  j["alternative"] = alternative_name(cfg.alternative);
  j["alpha"] = cfg.alpha;
  j["rule"] = rule_name(cfg.rule);
  j["n_clusters"] = d.m;
  j["n_treated_clusters"] = d.m1;
  j["n_subjects"] = d.n_subjects();
  j["n1"] = d.n1;
  j["n0"] = d.n0;
  j["warnings"] = json::array();
  return j;
}

void put_tallies(json& j, const Tallies& t, const WinEstimates& est) {
  j["tallies"] = {{"wins", t.wins}, {"losses", t.losses}, {"ties", t.ties}};
  j["pi_win"] = est.pi_win;
  j["pi_loss"] = est.pi_loss;
  j["pi_tie"] = est.pi_tie;
}

void put_test_result(json& j, const TestResult& r) {
  j["estimate"] = r.estimate;
  if (r.se) j["se"] = *r.se;
  j["inference_scale"] = estimand_log_scale(r.estimand) ? "log" : "identity";
  j["statistic"] = r.statistic;
  j["reference"] = r.reference.name();
  j["p_value"] = r.p_value;
  if (r.ci) j["ci"] = {r.ci->first, r.ci->second};
  j["null_value"] = r.null_value;
  for (const auto& w : r.warnings) j["warnings"].push_back(w);
}

}  // namespace

std::string analyze_json(const Dataset& d, const AnalyzeConfig& cfg) {
  const ComparisonRule rule = d.rule(cfg.rule);
  const auto cache = CrossClusterWins::build(d, rule);
  const Tallies tallies = cache.tally_observed();
  const WinEstimates est = estimate_all(tallies);

  json j = base_report(d, cfg);
  put_tallies(j, tallies, est);

  const Reference zt_ref = cfg.use_t ? Reference::t_df(d.m - 2) : Reference::normal();
  const double null_inf = null_on_inference_scale(cfg);
  const double null_orig = cfg.null_value
                               ? *cfg.null_value
                               : (estimand_log_scale(cfg.estimand) ? 1.0 : default_null(cfg.estimand));

  if (cfg.method == "wald_score" || cfg.method == "wald_u" || cfg.method == "wald_jk") {
    VarianceEstimate var;
    if (cfg.method == "wald_score") {
      ProjectionTable proj;
      ClusterScoreOptions opts;
      if (cfg.wr_bivariate) {
        proj = subject_projections(d, rule);
        opts.bivariate_wr = &proj;
      }
      var = cluster_score_variance(cache.scores(), est, opts);
    } else if (cfg.method == "wald_u") {
      var = projected_u_covariance(subject_projections(d, rule), est);
    } else {
      var = jackknife_variance(leave_one_out_estimates(cache.leave_one_cluster()));
    }
    put_test_result(j, wald_test(est, var, cfg.estimand, zt_ref, cfg.alpha, cfg.alternative,
                                 cfg.null_value));
  } else if (cfg.method == "fs") {
    put_test_result(j, fs_score_test(cache.scores(), est, cfg.estimand, zt_ref, cfg.alpha,
                                     cfg.alternative));
    if (cfg.null_value && *cfg.null_value != null_orig)
      j["warnings"].push_back("fs tests the zero-effect null; custom null ignored");
  } else if (cfg.method == "perm") {
    PermutationPlan plan;
    plan.mode = cfg.exact ? PermutationPlan::Mode::FullEnumeration : PermutationPlan::Mode::MonteCarlo;
    plan.b = cfg.b;
    plan.seed = cfg.seed;
    plan.enumeration_cap = cfg.enumeration_cap;
    auto all = permutation_test_all(cache, plan, cfg.alternative);
    const PermutationResult* pr = nullptr;
    for (const auto& one : all)
      if (one.estimand == cfg.estimand) pr = &one;
    auto point = est.value(cfg.estimand);
    if (!point) throw_infeasible("UndefinedEstimate", estimand_name(cfg.estimand) + " is undefined");
    j["estimate"] = *point;
    j["inference_scale"] = estimand_log_scale(cfg.estimand) ? "log" : "identity";
    j["statistic"] = pr->observed;
    j["reference"] = "permutation";
    j["p_value"] = pr->p_value;
    j["null_value"] = estimand_log_scale(cfg.estimand) ? 1.0 : default_null(cfg.estimand);
    j["permutation"] = {{"mode", pr->full_enumeration ? "full_enumeration" : "monte_carlo"},
                        {"replicates", pr->replicates},
                        {"undefined_replicates", pr->undefined_replicates},
                        {"seed", cfg.seed}};
    if (pr->undefined_replicates > 0)
      j["warnings"].push_back("undefined ratio replicates counted as extreme");
    if (cfg.null_value)
      j["warnings"].push_back("permutation tests the sharp null; custom null ignored");
  } else if (cfg.method == "jel") {
    if (cfg.alternative != Alternative::TwoSided)
      throw_infeasible("OneSidedUnsupported", "jel is two-sided only (chi-square reference)");
    const auto loo = leave_one_out_estimates(cache.leave_one_cluster());
    const auto tau = est.inference_value(cfg.estimand);
    if (!tau || !std::isfinite(*tau))
      throw_infeasible("UndefinedEstimate", estimand_name(cfg.estimand) + " is undefined");
    const PseudoValues pv = pseudo_values(cfg.estimand, *tau, loo.get(cfg.estimand));
    const JelResult res = jel_test(pv, null_inf);
    j["estimate"] = *est.value(cfg.estimand);
    j["inference_scale"] = estimand_log_scale(cfg.estimand) ? "log" : "identity";
    j["statistic"] = res.r_stat;  // +inf serializes as null (hull violation)
    j["reference"] = "chisq1";
    j["p_value"] = res.p_value;
    j["null_value"] = null_orig;
    j["jel"] = {{"lambda", res.feasible ? res.lambda : 0.0}, {"feasible", res.feasible}};
    if (!res.feasible)
      j["warnings"].push_back("convex-hull violation at the null: reported as maximal evidence");
    JelInterval ci = jel_ci(pv, cfg.alpha);
    double lo = ci.lo, hi = ci.hi;
    if (estimand_log_scale(cfg.estimand)) {
      lo = std::exp(lo);
      hi = std::exp(hi);
    } else if (cfg.estimand == Estimand::DOOR) {
      lo = std::max(0.0, lo);
      hi = std::min(1.0, hi);
    }
    j["ci"] = {lo, hi};
    if (ci.lo_at_hull || ci.hi_at_hull)
      j["warnings"].push_back("confidence limit clamped at the pseudo-value hull");
  } else {
    throw_invalid("BadMethod", "unknown method '" + cfg.method + "'");
  }

  return j.dump(2) + "\n";
}

}  // namespace winscrt
