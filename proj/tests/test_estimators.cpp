#include <doctest.h>

#include <cmath>
#include <limits>
#include <functional>
#include <vector>

#include "winscrt/errors.hpp"
#include "winscrt/estimators.hpp"
#include "winscrt/rng.hpp"
#include "winscrt/stats.hpp"

using namespace winscrt;

namespace {

Tallies tal(std::int64_t w, std::int64_t l, std::int64_t t, std::int64_t n1, std::int64_t n0) {
  return {w, l, t, n1, n0};
}

// central finite difference of f along (pi_win, pi_loss)
template <typename F>
double fd(F f, double pw, double pl, double hw, double hl) {
  const double step = 1e-6;
  return (f(pw + step * hw, pl + step * hl) - f(pw - step * hw, pl - step * hl)) / (2.0 * step);
}

}  // namespace

TEST_CASE("estimates: boundary and hand values") {
  // single winning pair: ratio statistics undefined
  auto e1 = estimate_all(tal(1, 0, 0, 1, 1));
  CHECK(e1.wd == 1.0);
  CHECK(e1.door == 1.0);
  CHECK_FALSE(e1.wr.has_value());
  CHECK_FALSE(e1.wo.has_value());

  // all ties
  auto e2 = estimate_all(tal(0, 0, 4, 2, 2));
  CHECK(e2.wd == 0.0);
  CHECK(e2.door == 0.5);
  CHECK_FALSE(e2.wr.has_value());
  REQUIRE(e2.wo.has_value());
  CHECK(*e2.wo == 1.0);

  // (W,L,T) = (3,1,2)
  auto e3 = estimate_all(tal(3, 1, 2, 2, 3));
  CHECK(e3.wd == doctest::Approx(1.0 / 3));
  CHECK(*e3.wr == doctest::Approx(3.0));
  CHECK(*e3.wo == doctest::Approx(2.0));
  CHECK(e3.door == doctest::Approx(2.0 / 3));
  // log WR == 2 atanh(0.5) == log 3
  CHECK(*e3.log_wr == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("estimates: transformation identities on random tallies") {
  Rng rng(1234);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::int64_t n1 = 1 + static_cast<std::int64_t>(rng.below(40));
    const std::int64_t n0 = 1 + static_cast<std::int64_t>(rng.below(40));
    const std::int64_t pairs = n1 * n0;
    const std::int64_t w = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pairs + 1)));
    const std::int64_t l = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(pairs - w + 1)));
    const auto t = tal(w, l, pairs - w - l, n1, n0);
    const auto e = estimate_all(t);

    CHECK(std::abs(e.pi_win + e.pi_loss + e.pi_tie - 1.0) < 1e-12);
    CHECK(std::abs(e.door - 0.5 * (1.0 + e.wd)) < 1e-10);
    // DOOR as the Mann-Whitney mean over pairs of (s+1)/2
    CHECK(std::abs(e.door - (static_cast<double>(w) + 0.5 * static_cast<double>(t.ties)) /
                               static_cast<double>(pairs)) < 1e-12);
    if (e.wr && w == 0) {
      // boundary: WR = 0, the log estimate is exactly -inf
      CHECK(*e.log_wr == -std::numeric_limits<double>::infinity());
    } else if (e.wr && e.pi_tie < 1.0) {
      const double x = (e.pi_win - e.pi_loss) / (e.pi_win + e.pi_loss);
      CHECK(std::abs(*e.log_wr - atanh2(x)) < 1e-10);
      CHECK(std::abs(*e.wr - std::exp(*e.log_wr)) / *e.wr < 1e-10);
    }
    if (e.wo && *e.wo > 0.0 && std::abs(e.wd) < 1.0) {
      CHECK(std::abs(*e.log_wo - atanh2(e.wd)) < 1e-10);
      CHECK(std::abs(*e.wo - std::exp(*e.log_wo)) / *e.wo < 1e-10);
    }
  }
}

TEST_CASE("gradients: hand values") {
  auto e0 = estimate_all(tal(2, 2, 4, 2, 4));  // wd = 0
  auto g0 = gradients(e0);
  REQUIRE(g0.log_wo.has_value());
  CHECK(g0.log_wo->d_pi_win == doctest::Approx(2.0));
  CHECK(g0.log_wo->d_pi_loss == doctest::Approx(-2.0));

  auto eh = estimate_all(tal(2, 2, 0, 2, 2));  // pi_win = pi_loss = 0.5
  auto gh = gradients(eh);
  REQUIRE(gh.log_wr.has_value());
  CHECK(gh.log_wr->d_pi_win == doctest::Approx(2.0));
  CHECK(gh.log_wr->d_pi_loss == doctest::Approx(-2.0));

  auto e3 = estimate_all(tal(3, 1, 2, 2, 3));  // (pi_win, pi_loss) = (1/2, 1/6)
  auto g3 = gradients(e3);
  REQUIRE(g3.log_wr.has_value());
  CHECK(g3.log_wr->d_pi_win == doctest::Approx(2.0));
  CHECK(g3.log_wr->d_pi_loss == doctest::Approx(-6.0));
}

TEST_CASE("gradients: undefined denominators surface as absent") {
  auto e = estimate_all(tal(4, 0, 0, 2, 2));  // wd = 1, pi_loss = 0
  auto g = gradients(e);
  CHECK_FALSE(g.log_wr.has_value());
  CHECK_FALSE(g.log_wo.has_value());
  CHECK_THROWS_WITH_AS(g.require(Estimand::WO), doctest::Contains("UndefinedGradient"), Error);
}

TEST_CASE("gradients: match central finite differences on interior tallies") {
  auto log_wr_of = [](double pw, double pl) { return std::log(pw) - std::log(pl); };
  auto log_wo_of = [](double pw, double pl) {
    const double wd = pw - pl;
    return std::log1p(2.0 * wd / (1.0 - wd));
  };
  auto wd_of = [](double pw, double pl) { return pw - pl; };
  auto door_of = [](double pw, double pl) { return 0.5 * (1.0 + pw - pl); };

  Rng rng(555);
  int done = 0;
  while (done < 200) {
    const std::int64_t pairs = 400;
    const std::int64_t w = 40 + static_cast<std::int64_t>(rng.below(150));
    const std::int64_t l = 40 + static_cast<std::int64_t>(rng.below(150));
    const auto e = estimate_all(tal(w, l, pairs - w - l, 20, 20));
    const auto g = gradients(e);
    REQUIRE(g.log_wr.has_value());
    REQUIRE(g.log_wo.has_value());

    const std::vector<std::pair<EstimandGradient, std::function<double(double, double)>>> rows = {
        {g.wd, wd_of}, {g.door, door_of}, {*g.log_wr, log_wr_of}, {*g.log_wo, log_wo_of}};
    for (const auto& [grad, f] : rows) {
      const double num_w = fd(f, e.pi_win, e.pi_loss, 1.0, 0.0);
      const double num_l = fd(f, e.pi_win, e.pi_loss, 0.0, 1.0);
      CHECK(std::abs(grad.d_pi_win - num_w) / std::max(1.0, std::abs(num_w)) < 1e-5);
      CHECK(std::abs(grad.d_pi_loss - num_l) / std::max(1.0, std::abs(num_l)) < 1e-5);
    }
    ++done;
  }
}
