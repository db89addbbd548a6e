#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace winscrt {

// One row of a long-format event log. status 0 is censoring; positive codes
// name event types, larger code = higher clinical priority.
struct EventRecord {
  std::string cluster_id;
  std::string subject_id;
  int trt = 0;
  double time = 0.0;
  int status = 0;
};

struct OutcomeComponent {
  double time = 0.0;
  bool event = false;
};

// Per-subject outcome vector ordered by priority (index 0 = highest).
struct SubjectOutcome {
  std::string id;
  std::vector<OutcomeComponent> components;
};

struct Cluster {
  std::string id;
  int arm = 0;  // 0 control, 1 treated
  std::vector<SubjectOutcome> subjects;
};

enum class RuleVariant { BothEvents, Gehan };

RuleVariant rule_from_string(const std::string& s);
std::string rule_name(RuleVariant v);

struct ComparisonRule {
  RuleVariant variant = RuleVariant::BothEvents;
  int components = 0;  // V
};

struct Dataset {
  std::vector<Cluster> clusters;  // sorted by cluster id
  int components = 0;             // V, identical across subjects

  // derived on finalize()
  int m = 0;   // clusters
  int m1 = 0;  // treated clusters
  int m0 = 0;
  std::int64_t n1 = 0;  // treated subjects
  std::int64_t n0 = 0;

  double q() const { return static_cast<double>(m1) / static_cast<double>(m); }
  std::int64_t n_subjects() const { return n1 + n0; }
  std::int64_t pair_count() const { return n1 * n0; }

  ComparisonRule rule(RuleVariant v) const { return ComparisonRule{v, components}; }

  // sorts clusters/subjects, computes counts, enforces invariants
  void finalize();
};

// Signed pairwise score in {-1, 0, +1}; +1 means `a` is more favorable.
// Components are scanned in priority order; the first resolvable one decides.
int compare(const SubjectOutcome& a, const SubjectOutcome& b, const ComparisonRule& rule);

// Assemble per-subject outcome vectors from event-log rows.
// If rule.components > 0 it must match the number of distinct positive
// status codes; 0 means infer from the data.
Dataset parse_event_log(const std::vector<EventRecord>& rows, const ComparisonRule& rule);

// CSV with header `clu,id,trt,t,st`. Any unparseable cell is a hard error
// reported with its 1-based row number.
std::vector<EventRecord> read_event_log_csv(std::istream& in);
std::vector<EventRecord> read_event_log_csv_file(const std::string& path);

}  // namespace winscrt
