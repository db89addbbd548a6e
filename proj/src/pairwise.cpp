#include "winscrt/pairwise.hpp"

#include <numeric>
#include <thread>

#include "winscrt/errors.hpp"

namespace winscrt {

CrossClusterWins CrossClusterWins::build(const Dataset& d, const ComparisonRule& rule, int threads) {
  CrossClusterWins c;
  c.m_ = d.m;
  c.w_.assign(static_cast<std::size_t>(d.m) * d.m, 0);
  c.sizes_.resize(static_cast<std::size_t>(d.m));
  c.arm_.resize(static_cast<std::size_t>(d.m));
  for (int i = 0; i < d.m; ++i) {
    c.sizes_[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(d.clusters[static_cast<std::size_t>(i)].subjects.size());
    c.arm_[static_cast<std::size_t>(i)] = d.clusters[static_cast<std::size_t>(i)].arm;
  }

  // unordered cluster pairs, flattened for chunking
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(d.m) * (d.m - 1) / 2);
  for (int i = 0; i < d.m; ++i)
    for (int k = i + 1; k < d.m; ++k) pairs.emplace_back(i, k);

  auto scan = [&](std::size_t begin, std::size_t end, std::vector<std::int64_t>& w) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto [i, k] = pairs[p];
      const auto& ci = d.clusters[static_cast<std::size_t>(i)].subjects;
      const auto& ck = d.clusters[static_cast<std::size_t>(k)].subjects;
      std::int64_t w_ik = 0, w_ki = 0;
      for (const auto& a : ci) {
        for (const auto& b : ck) {
          int s = compare(a, b, rule);
          if (s > 0)
            ++w_ik;
          else if (s < 0)
            ++w_ki;
        }
      }
      w[static_cast<std::size_t>(i) * d.m + k] += w_ik;
      w[static_cast<std::size_t>(k) * d.m + i] += w_ki;
    }
  };

  if (threads <= 1 || pairs.size() < 64) {
    scan(0, pairs.size(), c.w_);
  } else {
    const int t = std::min<int>(threads, static_cast<int>(pairs.size()));
    std::vector<std::vector<std::int64_t>> partial(
        static_cast<std::size_t>(t), std::vector<std::int64_t>(c.w_.size(), 0));
    std::vector<std::thread> workers;
    const std::size_t chunk = (pairs.size() + t - 1) / t;
    for (int ti = 0; ti < t; ++ti) {
      std::size_t b = static_cast<std::size_t>(ti) * chunk;
      std::size_t e = std::min(pairs.size(), b + chunk);
      if (b >= e) break;
      workers.emplace_back(scan, b, e, std::ref(partial[static_cast<std::size_t>(ti)]));
    }
    for (auto& th : workers) th.join();
    for (const auto& w : partial)
      for (std::size_t j = 0; j < c.w_.size(); ++j) c.w_[j] += w[j];
  }
  return c;
}

Tallies CrossClusterWins::tally_for(const std::vector<int>& arm) const {
  Tallies t;
  for (int i = 0; i < m_; ++i) {
    if (arm[static_cast<std::size_t>(i)] == 1)
      t.n1 += sizes_[static_cast<std::size_t>(i)];
    else
      t.n0 += sizes_[static_cast<std::size_t>(i)];
  }
  for (int i = 0; i < m_; ++i) {
    if (arm[static_cast<std::size_t>(i)] != 1) continue;
    for (int k = 0; k < m_; ++k) {
      if (arm[static_cast<std::size_t>(k)] == 1) continue;
      t.wins += wins(i, k);
      t.losses += wins(k, i);
    }
  }
  t.ties = t.n1 * t.n0 - t.wins - t.losses;
  return t;
}

ClusterScores CrossClusterWins::scores() const {
  ClusterScores cs;
  cs.score.assign(static_cast<std::size_t>(m_), 0);
  cs.arm = arm_;
  for (int i = 0; i < m_; ++i) {
    std::int64_t s = 0;
    for (int k = 0; k < m_; ++k) s += wins(i, k) - wins(k, i);
    cs.score[static_cast<std::size_t>(i)] = s;
    if (arm_[static_cast<std::size_t>(i)] == 1) {
      ++cs.m1;
      cs.n1 += sizes_[static_cast<std::size_t>(i)];
    } else {
      ++cs.m0;
      cs.n0 += sizes_[static_cast<std::size_t>(i)];
    }
  }
  return cs;
}

DeletedTallySet CrossClusterWins::leave_one_cluster() const {
  DeletedTallySet out;
  out.full = tally_observed();
  out.arm = arm_;
  out.deleted.resize(static_cast<std::size_t>(m_));
  out.degenerate.resize(static_cast<std::size_t>(m_));
  for (int i = 0; i < m_; ++i) {
    // subtract cluster i's cross-arm contributions from the full tallies
    Tallies t = out.full;
    std::int64_t dw = 0, dl = 0;
    if (arm_[static_cast<std::size_t>(i)] == 1) {
      for (int k = 0; k < m_; ++k) {
        if (arm_[static_cast<std::size_t>(k)] == 1) continue;
        dw += wins(i, k);
        dl += wins(k, i);
      }
      t.n1 -= sizes_[static_cast<std::size_t>(i)];
    } else {
      for (int k = 0; k < m_; ++k) {
        if (arm_[static_cast<std::size_t>(k)] != 1) continue;
        dw += wins(k, i);
        dl += wins(i, k);
      }
      t.n0 -= sizes_[static_cast<std::size_t>(i)];
    }
    t.wins -= dw;
    t.losses -= dl;
    t.ties = t.n1 * t.n0 - t.wins - t.losses;
    out.deleted[static_cast<std::size_t>(i)] = t;
    out.degenerate[static_cast<std::size_t>(i)] = (t.n1 == 0 || t.n0 == 0);
  }
  return out;
}

Tallies tally_cross_arm(const Dataset& d, const ComparisonRule& rule, int threads) {
  return CrossClusterWins::build(d, rule, threads).tally_observed();
}

ClusterScores cluster_scores(const Dataset& d, const ComparisonRule& rule, int threads) {
  return CrossClusterWins::build(d, rule, threads).scores();
}

ProjectionTable subject_projections(const Dataset& d, const ComparisonRule& rule) {
  if (d.n1 <= 0 || d.n0 <= 0) throw_infeasible("EmptyArm", "projections need both arms nonempty");

  ProjectionTable p;
  const std::size_t m = static_cast<std::size_t>(d.m);
  p.phi_win.resize(m);
  p.phi_loss.resize(m);
  p.g_win.assign(m, 0.0);
  p.g_loss.assign(m, 0.0);
  p.arm.resize(m);
  p.m1 = d.m1;
  p.m0 = d.m0;
  p.nbar1 = static_cast<double>(d.n1) / d.m1;
  p.nbar0 = static_cast<double>(d.n0) / d.m0;

  // raw per-subject cross-arm counts: for treated subjects the pairs they
  // win/lose; for control subjects the pairs the treated side wins/loses
  std::vector<std::vector<std::int64_t>> win_ct(m), loss_ct(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto n = d.clusters[i].subjects.size();
    win_ct[i].assign(n, 0);
    loss_ct[i].assign(n, 0);
    p.arm[i] = d.clusters[i].arm;
  }

  std::int64_t total_w = 0, total_l = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (d.clusters[i].arm != 1) continue;
    for (std::size_t k = 0; k < m; ++k) {
      if (d.clusters[k].arm == 1) continue;
      const auto& ti = d.clusters[i].subjects;
      const auto& ck = d.clusters[k].subjects;
      for (std::size_t j = 0; j < ti.size(); ++j) {
        for (std::size_t l = 0; l < ck.size(); ++l) {
          int s = compare(ti[j], ck[l], rule);
          if (s > 0) {
            ++win_ct[i][j];
            ++win_ct[k][l];
            ++total_w;
          } else if (s < 0) {
            ++loss_ct[i][j];
            ++loss_ct[k][l];
            ++total_l;
          }
        }
      }
    }
  }

  const double pairs = static_cast<double>(d.n1) * static_cast<double>(d.n0);
  p.pi_win = static_cast<double>(total_w) / pairs;
  p.pi_loss = static_cast<double>(total_l) / pairs;

  for (std::size_t i = 0; i < m; ++i) {
    const double denom = d.clusters[i].arm == 1 ? static_cast<double>(d.n0) : static_cast<double>(d.n1);
    auto n = d.clusters[i].subjects.size();
    p.phi_win[i].resize(n);
    p.phi_loss[i].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      p.phi_win[i][j] = static_cast<double>(win_ct[i][j]) / denom - p.pi_win;
      p.phi_loss[i][j] = static_cast<double>(loss_ct[i][j]) / denom - p.pi_loss;
      p.g_win[i] += p.phi_win[i][j];
      p.g_loss[i] += p.phi_loss[i][j];
    }
  }
  return p;
}

DeletedTallySet leave_one_cluster(const Dataset& d, const ComparisonRule& rule) {
  return CrossClusterWins::build(d, rule).leave_one_cluster();
}

}  // namespace winscrt
