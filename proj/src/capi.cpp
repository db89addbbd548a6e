#include "winscrt.h"

#include <cstdio>
#include <cstring>
#include <json.hpp>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "winscrt/analyze.hpp"
#include "winscrt/driver.hpp"
#include "winscrt/errors.hpp"
#include "winscrt/outcomes.hpp"

using nlohmann::json;

struct winscrt_dataset {
  winscrt::Dataset data;
};

namespace {

constexpr const char* kVersion = "0.1.0";

void fill_error(char* errbuf, size_t errlen, const std::string& msg) {
  if (!errbuf || errlen == 0) return;
  std::snprintf(errbuf, errlen, "%s", msg.c_str());
}

winscrt_status status_of(const winscrt::Error& e) {
  switch (e.category()) {
    case winscrt::ErrorCategory::Io: return WINSCRT_ERR_IO;
    case winscrt::ErrorCategory::Parse: return WINSCRT_ERR_PARSE;
    case winscrt::ErrorCategory::Invalid: return WINSCRT_ERR_INVALID;
    case winscrt::ErrorCategory::Infeasible: return WINSCRT_ERR_INFEASIBLE;
  }
  return WINSCRT_ERR_INTERNAL;
}

template <typename Fn>
winscrt_status guarded(char* errbuf, size_t errlen, Fn&& fn) {
  try {
    fn();
    return WINSCRT_OK;
  } catch (const winscrt::Error& e) {
    fill_error(errbuf, errlen, e.what());
    return status_of(e);
  } catch (const json::exception& e) {
    fill_error(errbuf, errlen, std::string("BadOptions: ") + e.what());
    return WINSCRT_ERR_INVALID;
  } catch (const std::bad_alloc&) {
    fill_error(errbuf, errlen, "out of memory");
    return WINSCRT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    fill_error(errbuf, errlen, e.what());
    return WINSCRT_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return json::object();
  json j = json::parse(options_json);
  if (!j.is_object()) winscrt::throw_invalid("BadOptions", "options must be a JSON object");
  return j;
}

winscrt::AnalyzeConfig analyze_config_from(const json& j) {
  winscrt::AnalyzeConfig cfg;
  if (!j.contains("method")) winscrt::throw_invalid("BadOptions", "missing 'method'");
  if (!j.contains("estimand")) winscrt::throw_invalid("BadOptions", "missing 'estimand'");
  cfg.method = j["method"].get<std::string>();
  cfg.estimand = winscrt::estimand_from_string(j["estimand"].get<std::string>());
  if (j.contains("null") && !j["null"].is_null()) cfg.null_value = j["null"].get<double>();
  if (j.contains("alternative"))
    cfg.alternative = winscrt::alternative_from_string(j["alternative"].get<std::string>());
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.use_t = j.value("use_t", cfg.use_t);
  cfg.b = j.value("B", cfg.b);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("rule")) cfg.rule = winscrt::rule_from_string(j["rule"].get<std::string>());
  cfg.exact = j.value("exact", cfg.exact);
  cfg.enumeration_cap = j.value("enumeration_cap", cfg.enumeration_cap);
  cfg.wr_bivariate = j.value("wr_bivariate", cfg.wr_bivariate);
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    winscrt::throw_invalid("BadOptions", "alpha must lie in (0,1)");
  if (cfg.b < 1) winscrt::throw_invalid("BadOptions", "B must be positive");
  return cfg;
}

winscrt::RunConfig run_config_from(const json& j) {
  winscrt::RunConfig cfg;
  cfg.reps = j.value("reps", cfg.reps);
  cfg.b_perm = j.value("B", cfg.b_perm);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.wald_use_t = j.value("use_t", cfg.wald_use_t);
  cfg.fs_use_t = j.value("fs_use_t", cfg.fs_use_t);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  if (j.contains("procedures"))
    for (const auto& p : j["procedures"])
      cfg.procedures.push_back(winscrt::procedure_from_string(p.get<std::string>()));
  if (j.contains("estimands"))
    for (const auto& e : j["estimands"])
      cfg.estimands.push_back(winscrt::estimand_from_string(e.get<std::string>()));
  if (cfg.reps < 1) winscrt::throw_invalid("BadOptions", "reps must be positive");
  if (cfg.b_perm < 1) winscrt::throw_invalid("BadOptions", "B must be positive");
  return cfg;
}

winscrt::Scenario scenario_from(const json& j) {
  winscrt::Scenario s;
  s.name = j.value("name", s.name);
  s.m = j.value("M", s.m);
  s.q = j.value("q", s.q);
  s.nbar = j.value("nbar", s.nbar);
  s.cv = j.value("cv", s.cv);
  s.alpha1 = j.value("alpha1", s.alpha1);
  s.alpha2 = j.value("alpha2", s.alpha2);
  s.eta = j.value("eta", s.eta);
  s.theta1 = j.value("theta1", s.theta1);
  s.theta2 = j.value("theta2", s.theta2);
  s.kappa1 = j.value("kappa1", s.kappa1);
  s.kappa2 = j.value("kappa2", s.kappa2);
  s.lambda1 = j.value("lambda1", s.lambda1);
  s.lambda2 = j.value("lambda2", s.lambda2);
  s.xi = j.value("xi", s.xi);
  s.tau_c = j.value("tau_c", s.tau_c);
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* winscrt_version(void) { return kVersion; }

winscrt_status winscrt_dataset_from_csv(const char* path, winscrt_dataset** out, char* errbuf,
                                        size_t errlen) {
  if (!path || !out) {
    fill_error(errbuf, errlen, "null argument");
    return WINSCRT_ERR_INVALID;
  }
  *out = nullptr;
  return guarded(errbuf, errlen, [&] {
    auto rows = winscrt::read_event_log_csv_file(path);
    auto d = std::make_unique<winscrt_dataset>();
    d->data = winscrt::parse_event_log(rows, winscrt::ComparisonRule{});
    *out = d.release();
  });
}

winscrt_status winscrt_dataset_from_string(const char* csv_text, winscrt_dataset** out,
                                           char* errbuf, size_t errlen) {
  if (!csv_text || !out) {
    fill_error(errbuf, errlen, "null argument");
    return WINSCRT_ERR_INVALID;
  }
  *out = nullptr;
  return guarded(errbuf, errlen, [&] {
    std::istringstream in(csv_text);
    auto rows = winscrt::read_event_log_csv(in);
    auto d = std::make_unique<winscrt_dataset>();
    d->data = winscrt::parse_event_log(rows, winscrt::ComparisonRule{});
    *out = d.release();
  });
}

void winscrt_dataset_free(winscrt_dataset* d) { delete d; }

int winscrt_dataset_n_clusters(const winscrt_dataset* d) { return d ? d->data.m : 0; }

int64_t winscrt_dataset_n_subjects(const winscrt_dataset* d) {
  return d ? d->data.n_subjects() : 0;
}

int winscrt_dataset_components(const winscrt_dataset* d) { return d ? d->data.components : 0; }

winscrt_status winscrt_analyze(const winscrt_dataset* d, const char* options_json,
                               char** report_json, char* errbuf, size_t errlen) {
  if (!d || !report_json) {
    fill_error(errbuf, errlen, "null argument");
    return WINSCRT_ERR_INVALID;
  }
  *report_json = nullptr;
  return guarded(errbuf, errlen, [&] {
    const auto cfg = analyze_config_from(parse_options(options_json));
    *report_json = copy_string(winscrt::analyze_json(d->data, cfg));
  });
}

winscrt_status winscrt_simulate(const char* grid_csv_path, const char* out_dir,
                                const char* options_json, char** summary_json, char* errbuf,
                                size_t errlen) {
  if (!grid_csv_path || !out_dir) {
    fill_error(errbuf, errlen, "null argument");
    return WINSCRT_ERR_INVALID;
  }
  if (summary_json) *summary_json = nullptr;
  return guarded(errbuf, errlen, [&] {
    const json j = parse_options(options_json);
    winscrt::SimulateOptions opts;
    opts.run = run_config_from(j);
    opts.resume = j.value("resume", true);
    const auto summary = winscrt::simulate_grid(grid_csv_path, out_dir, opts);
    if (summary_json) {
      json out = {{"scenarios", summary.scenarios},
                  {"completed", summary.completed},
                  {"skipped", summary.skipped},
                  {"failed", summary.failed},
                  {"failures", summary.failures}};
      *summary_json = copy_string(out.dump(2) + "\n");
    }
    if (summary.failed == summary.scenarios && summary.scenarios > 0)
      winscrt::throw_infeasible("AllScenariosFailed", summary.failures.front());
  });
}

winscrt_status winscrt_calibrate(const char* options_json, char** report_json, char* errbuf,
                                 size_t errlen) {
  if (!report_json) {
    fill_error(errbuf, errlen, "null argument");
    return WINSCRT_ERR_INVALID;
  }
  *report_json = nullptr;
  return guarded(errbuf, errlen, [&] {
    const json j = parse_options(options_json);
    if (!j.contains("target_pi_tie"))
      winscrt::throw_invalid("BadOptions", "missing 'target_pi_tie'");
    const auto s = scenario_from(j.value("scenario", json::object()));
    *report_json = copy_string(winscrt::calibrate_json(
        s, j["target_pi_tie"].get<double>(), j.value("reps", 20), j.value("tol", 0.01),
        j.value("seed", static_cast<std::uint64_t>(1))));
  });
}

void winscrt_string_free(char* s) { delete[] s; }

}  // extern "C"
