#include "winscrt/outcomes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>

#include "csv_util.hpp"
#include "winscrt/errors.hpp"

namespace winscrt {

RuleVariant rule_from_string(const std::string& s) {
  if (s == "both-events" || s == "both_events" || s == "bothevents") return RuleVariant::BothEvents;
  if (s == "gehan") return RuleVariant::Gehan;
  throw_invalid("BadRule", "unknown comparison rule '" + s + "'");
}

std::string rule_name(RuleVariant v) {
  return v == RuleVariant::BothEvents ? "both-events" : "gehan";
}

void Dataset::finalize() {
  if (clusters.empty()) throw_invalid("EmptyDataset", "no clusters");
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < clusters.size(); ++i) {
    if (clusters[i].id == clusters[i - 1].id)
      throw_invalid("DuplicateCluster", "cluster id '" + clusters[i].id + "' occurs twice");
  }
  m = static_cast<int>(clusters.size());
  m1 = m0 = 0;
  n1 = n0 = 0;
  for (auto& c : clusters) {
    if (c.subjects.empty()) throw_invalid("EmptyCluster", "cluster '" + c.id + "' has no subjects");
    std::sort(c.subjects.begin(), c.subjects.end(),
              [](const SubjectOutcome& a, const SubjectOutcome& b) { return a.id < b.id; });
    for (std::size_t j = 1; j < c.subjects.size(); ++j) {
      if (c.subjects[j].id == c.subjects[j - 1].id)
        throw_invalid("DuplicateSubject",
                      "subject id '" + c.subjects[j].id + "' occurs twice in cluster '" + c.id + "'");
    }
    for (const auto& s : c.subjects) {
      if (static_cast<int>(s.components.size()) != components)
        throw_invalid("ComponentMismatch",
                      "subject '" + s.id + "' has " + std::to_string(s.components.size()) +
                          " components, dataset has " + std::to_string(components));
    }
    if (c.arm == 1) {
      ++m1;
      n1 += static_cast<std::int64_t>(c.subjects.size());
    } else {
      ++m0;
      n0 += static_cast<std::int64_t>(c.subjects.size());
    }
  }
  if (m1 < 1 || m0 < 1) throw_invalid("EmptyArm", "both arms must contain at least one cluster");
  if (components < 1) throw_invalid("NoComponents", "dataset has no outcome components");
  // 64-bit tallies are exact far beyond this, but permutation sums of scores
  // also scale with n * N_i; stay well inside the safe range
  if (static_cast<double>(n1) * static_cast<double>(n0) > 3.0e9)
    throw_invalid("TooManyPairs", "cross-arm pair count exceeds 3e9");
}

namespace {

inline int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

int compare(const SubjectOutcome& a, const SubjectOutcome& b, const ComparisonRule& rule) {
  if (a.components.size() != b.components.size() ||
      static_cast<int>(a.components.size()) != rule.components) {
    throw_invalid("ComponentMismatch", "outcome vectors have differing component counts");
  }
  const bool gehan = rule.variant == RuleVariant::Gehan;
  for (int v = 0; v < rule.components; ++v) {
    const auto& x = a.components[static_cast<std::size_t>(v)];
    const auto& y = b.components[static_cast<std::size_t>(v)];
    if (x.event && y.event && x.time != y.time) return sign(x.time - y.time);
    if (gehan) {
      // an observed event strictly before the other side's censoring time
      // resolves the component; later is always more favorable
      if (x.event && !y.event && x.time < y.time) return -1;
      if (!x.event && y.event && y.time < x.time) return 1;
    }
    // unresolvable or tied: fall through to the next component
  }
  return 0;
}

namespace {

struct SubjectRows {
  // earliest record per positive status code
  std::map<int, double> event_time;
  // latest censoring record, if any
  std::optional<double> censor_time;
};

}  // namespace

Dataset parse_event_log(const std::vector<EventRecord>& rows, const ComparisonRule& rule) {
  if (rows.empty()) throw_parse("EmptyInput", "event log has no rows");

  std::map<std::string, int> cluster_arm;
  std::map<std::string, std::map<std::string, SubjectRows>> grouped;
  std::set<int> statuses;

  for (const auto& r : rows) {
    if (!(r.time >= 0.0) || !std::isfinite(r.time))
      throw_parse("NegativeTime", "subject '" + r.subject_id + "' has time " + std::to_string(r.time));
    if (r.status < 0)
      throw_parse("UnknownStatus", "subject '" + r.subject_id + "' has status " + std::to_string(r.status));
    if (r.trt != 0 && r.trt != 1)
      throw_parse("BadTreatment", "cluster '" + r.cluster_id + "' has trt " + std::to_string(r.trt));
    auto [it, inserted] = cluster_arm.emplace(r.cluster_id, r.trt);
    if (!inserted && it->second != r.trt)
      throw_parse("MixedArmCluster", "cluster '" + r.cluster_id + "' mixes trt values");

    auto& subj = grouped[r.cluster_id][r.subject_id];
    if (r.status == 0) {
      if (!subj.censor_time || r.time > *subj.censor_time) subj.censor_time = r.time;
    } else {
      statuses.insert(r.status);
      auto [et, fresh] = subj.event_time.emplace(r.status, r.time);
      if (!fresh && r.time < et->second) et->second = r.time;  // first occurrence
    }
  }

  // Priority order: descending status code. A log with no events at all is a
  // single all-censored component.
  std::vector<int> priority(statuses.rbegin(), statuses.rend());
  const int v_count = priority.empty() ? 1 : static_cast<int>(priority.size());
  if (rule.components > 0 && rule.components != v_count)
    throw_invalid("ComponentMismatch",
                  "rule expects " + std::to_string(rule.components) + " components, log has " +
                      std::to_string(v_count));

  Dataset d;
  d.components = v_count;
  for (const auto& [cid, subjects] : grouped) {
    Cluster c;
    c.id = cid;
    c.arm = cluster_arm[cid];
    for (const auto& [sid, sr] : subjects) {
      SubjectOutcome out;
      out.id = sid;
      if (priority.empty()) {
        if (!sr.censor_time)
          throw_parse("MissingComponent", "subject '" + sid + "' has no usable record");
        out.components.push_back({*sr.censor_time, false});
      } else {
        for (int st : priority) {
          auto it = sr.event_time.find(st);
          if (it != sr.event_time.end()) {
            out.components.push_back({it->second, true});
          } else if (sr.censor_time) {
            out.components.push_back({*sr.censor_time, false});
          } else {
            throw_parse("MissingComponent", "subject '" + sid + "' in cluster '" + cid +
                                                "' has neither an event for status " +
                                                std::to_string(st) + " nor a censoring record");
          }
        }
      }
      c.subjects.push_back(std::move(out));
    }
    d.clusters.push_back(std::move(c));
  }
  d.finalize();
  return d;
}

std::vector<EventRecord> read_event_log_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw_parse("EmptyInput", "no header line");
  auto header = csv::split_line(line);
  const std::vector<std::string> expected = {"clu", "id", "trt", "t", "st"};
  if (header != expected)
    throw_parse("BadHeader", "expected header 'clu,id,trt,t,st'");

  std::vector<EventRecord> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    auto cells = csv::split_line(line);
    if (cells.size() != 5)
      throw_parse("BadRow", "row " + std::to_string(row_no) + ": expected 5 cells, got " +
                                std::to_string(cells.size()));
    EventRecord r;
    r.cluster_id = cells[0];
    r.subject_id = cells[1];
    r.trt = static_cast<int>(csv::parse_int(cells[2], "trt", row_no));
    r.time = csv::parse_double(cells[3], "t", row_no);
    r.status = static_cast<int>(csv::parse_int(cells[4], "st", row_no));
    if (r.cluster_id.empty() || r.subject_id.empty())
      throw_parse("BadCell", "row " + std::to_string(row_no) + ": empty id");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<EventRecord> read_event_log_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_io("FileNotFound", "cannot open '" + path + "'");
  return read_event_log_csv(in);
}

}  // namespace winscrt
