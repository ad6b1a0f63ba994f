#include <random>
#include <sstream>

#include "auctionshape/core.hpp"
#include "auctionshape/numeric.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auctionshape;
using doctest::Approx;

TEST_CASE("empirical quantile examples") {
  MaxRivalSample s({4, 1, 3, 2});
  CHECK(empirical_quantile(s, 0.5) == 2.0);
  CHECK(empirical_quantile(s, 1.0) == 4.0);
  CHECK(empirical_quantile(s, 0.0) == 1.0);
  CHECK(empirical_quantile(s, 0.25) == 1.0);
  CHECK(empirical_quantile(s, 0.2500001) == 2.0);
  CHECK(empirical_quantile(MaxRivalSample({0.3}), 0.7) == 0.3);
  CHECK_THROWS_WITH(empirical_quantile(MaxRivalSample(), 0.5), "empty sample");
}

TEST_CASE("empirical quantile is monotone and inverse-compatible") {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 50; ++rep) {
    MaxRivalSample s(oracle::uniform_sample(g, 1 + rep % 13));
    auto q = empirical_quantile_fn(s);
    double prev = -1.0;
    for (double p : numeric::linspace(0.0, 1.0, 257)) {
      double v = empirical_quantile(s, p);
      CHECK(v >= prev);
      CHECK(v == q(p));
      CHECK(s.cdf(v) >= p - 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("unconstrained payment") {
  auto e1 = unconstrained_payment(MaxRivalSample({0.5}));
  CHECK(e1(0.3) == Approx(0.15));
  CHECK(e1(1.0) == Approx(0.5));

  auto e2 = unconstrained_payment(MaxRivalSample({0.4, 0.2}));
  CHECK(e2.left_limit(0.5) == Approx(0.1));
  CHECK(e2.right_limit(0.5) == Approx(0.2));
  CHECK(e2(0.25) == Approx(0.05));
  CHECK(e2(0.75) == Approx(0.3));

  auto ep = unconstrained_payment(MaxRivalSample({0.2, 0.4}), PaymentMode::pooled_symmetric, 2);
  CHECK(ep(0.5) == Approx(0.1));
  CHECK(ep(0.6) == Approx(0.24));
  CHECK_THROWS(unconstrained_payment(MaxRivalSample({0.2, 0.4}), PaymentMode::pooled_symmetric, 1));

  // n = 3 breakpoints at (l / nT)^2
  auto e3 = unconstrained_payment(MaxRivalSample({1, 2, 3}), PaymentMode::pooled_symmetric, 3);
  CHECK(e3.segments()[0].hi == Approx(1.0 / 9.0));
  CHECK(e3.segments()[1].hi == Approx(4.0 / 9.0));
  CHECK(e3(0.3) == Approx(0.6));
}

TEST_CASE("integrate_step") {
  auto c = integrate_step(MonotoneStepFn({0, 1}, {2.5}));
  CHECK(c(0.4) == Approx(1.0));
  auto h = integrate_step(MonotoneStepFn({0, 0.5, 1}, {0, 1}));
  CHECK(h(1.0) == Approx(0.5));
  CHECK(h(0.5) == Approx(0.0));
  auto t = integrate_step(MonotoneStepFn({0, 1.0 / 3, 2.0 / 3, 1}, {1, 2, 3}));
  CHECK(t(1.0) == Approx(2.0));
  CHECK(t(0.0) == 0.0);
}

TEST_CASE("integrate_step left-derivatives recover the levels") {
  std::mt19937_64 g(3);
  for (int rep = 0; rep < 30; ++rep) {
    std::size_t L = 1 + rep % 9;
    auto knots = oracle::uniform_sample(g, L - 1);
    knots.push_back(0.0);
    knots.push_back(1.0);
    std::sort(knots.begin(), knots.end());
    auto levels = oracle::uniform_sample(g, L, 0.0, 3.0);
    std::sort(levels.begin(), levels.end());
    MonotoneStepFn a(knots, levels);
    auto e = integrate_step(a);
    for (std::size_t j = 0; j < L; ++j) {
      double mid = 0.5 * (knots[j] + knots[j + 1]);
      CHECK(e.left_derivative(mid) == Approx(levels[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("integrate_pwl_power examples") {
  PwlFn id({Segment{0, 1, 0, 1}});
  CHECK(integrate_pwl_power(id, 0.0) == Approx(0.5));
  PwlFn one({Segment{0, 1, 1, 0}});
  CHECK(integrate_pwl_power(one, -0.5) == Approx(2.0));
  PwlFn kinked({Segment{0, 0.5, 0, 1}, Segment{0.5, 1, -0.5, 2}});
  // 1/8 + 1/2 by hand
  CHECK(integrate_pwl_power(kinked, 0.0) == Approx(5.0 / 8.0));
  CHECK_THROWS_WITH(integrate_pwl_power(one, -1.0), "divergent weight");
}

TEST_CASE("integrate_pwl_power agrees with adaptive quadrature") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 40; ++rep) {
    std::size_t L = 1 + rep % 7;
    auto cuts = oracle::uniform_sample(g, L - 1);
    cuts.push_back(0.0);
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    std::vector<Segment> segs;
    for (std::size_t j = 0; j < L; ++j) segs.push_back(Segment{cuts[j], cuts[j + 1], u(g), u(g)});
    PwlFn f(segs);
    double a = 0.25 + 2.0 * std::abs(u(g));
    double exact = integrate_pwl_power(f, a);
    double quad = 0.0;
    for (const auto& s : segs)
      quad += numeric::integrate([&](double p) { return (s.intercept + s.slope * p) * std::pow(p, a); },
                                 s.lo, s.hi, 1e-12);
    CHECK(exact == Approx(quad).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("step function continuity conventions") {
  MonotoneStepFn l({0, 0.5, 1}, {1, 2}, Continuity::left);
  MonotoneStepFn r({0, 0.5, 1}, {1, 2}, Continuity::right);
  CHECK(l(0.5) == 1.0);
  CHECK(r(0.5) == 2.0);
  CHECK(l(0.0) == 1.0);
  CHECK(r(1.0) == 2.0);
  CHECK_THROWS(l(1.5));
  CHECK_THROWS(MonotoneStepFn({0, 0.5, 1}, {2, 1}));
  CHECK_THROWS(MonotoneStepFn({0, 0.5, 0.5, 1}, {1, 2, 3}));
}

TEST_CASE("convex pwl rejects nonconvex nodes") {
  CHECK_THROWS(ConvexPwlFn({{0, 0}, {0.5, 1}, {1, 1}}));
  ConvexPwlFn f({{0, 0}, {0.5, 0.1}, {1, 1}});
  CHECK(f(0.25) == Approx(0.05));
  CHECK(f.left_derivative(0.5) == Approx(0.2));
  CHECK(f.left_derivative(0.75) == Approx(1.8));
}

TEST_CASE("bid csv ingestion") {
  std::istringstream ok("auction_id,bidder_id,bid\n1,a,0.3\n1,b,0.5\n2,b,0.1\n2,a,0.2\n");
  auto d = read_bid_csv(ok);
  CHECK(d.size() == 2);
  CHECK(d.n_bidders() == 2);
  CHECK(d.bidder_ids().front() == "a");
  CHECK(d.max_rival_bids("a") == std::vector<double>{0.5, 0.1});
  CHECK(d.own_bids("a") == std::vector<double>{0.3, 0.2});

  std::istringstream bad("auction_id,bidder_id,bid\n1,a,0.3\n1,b,x\n");
  try {
    read_bid_csv(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  std::istringstream mismatch("auction_id,bidder_id,bid\n1,a,0.3\n1,b,0.4\n2,a,0.1\n2,c,0.2\n");
  CHECK_THROWS_AS(read_bid_csv(mismatch), ParseError);
  std::istringstream negative("auction_id,bidder_id,bid\n1,a,-0.3\n1,b,0.4\n");
  CHECK_THROWS_AS(read_bid_csv(negative), ParseError);
}
