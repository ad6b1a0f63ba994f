#include <cmath>
#include <random>

#include "auctionshape/numeric.hpp"
#include "auctionshape/winprob.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auctionshape;

TEST_CASE("symmetric F_p closed forms") {
  auto f2 = fp_symmetric(2);
  CHECK(f2.cdf(0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(f2.pdf(0.7) == doctest::Approx(1.0).epsilon(1e-15));

  auto f3 = fp_symmetric(3);
  CHECK(f3.cdf(0.25) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f3.pdf(0.25) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(fp_symmetric(1), std::invalid_argument);
}

TEST_CASE("symmetric density integrates to one") {
  for (int n = 2; n <= 6; ++n) {
    auto f = fp_symmetric(n);
    double mass = numeric::integrate_singular_left([&](double p) { return f.pdf(p); }, 0.0, 1.0);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(f.expect([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    // E p = 1/n under p = U^{n-1}
    CHECK(f.expect([](double p) { return p; }) == doctest::Approx(1.0 / n).epsilon(1e-12));
  }
}

TEST_CASE("symmetric density derivatives") {
  auto f2 = fp_symmetric(2);
  for (double p : {0.1, 0.5, 0.9}) {
    CHECK(f2.pdf_d1(p) == 0.0);
    CHECK(f2.pdf_d2(p) == 0.0);
  }
  for (int n = 3; n <= 5; ++n) {
    auto f = fp_symmetric(n);
    const double d = 1e-4;
    for (double p : {0.2, 0.5, 0.8}) {
      double fd1 = (f.pdf(p + d) - f.pdf(p - d)) / (2 * d);
      double fd2 = (f.pdf(p + d) - 2 * f.pdf(p) + f.pdf(p - d)) / (d * d);
      CHECK(f.pdf_d1(p) == doctest::Approx(fd1).epsilon(1e-6));
      CHECK(f.pdf_d2(p) == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("symmetric quantile inverts the cdf") {
  for (int n = 2; n <= 5; ++n) {
    auto f = fp_symmetric(n);
    for (double tau : numeric::linspace(0.0, 1.0, 41)) {
      CHECK(f.cdf(f.quantile(tau)) == doctest::Approx(tau).epsilon(1e-12));
    }
  }
}

TEST_CASE("empirical F_pT") {
  std::mt19937_64 g(11);
  auto rivals = oracle::uniform_sample(g, 50);
  MaxRivalSample s(rivals);

  SUBCASE("self-composition") {
    auto f = fp_empirical(rivals, s);
    for (std::size_t t = 1; t <= 50; ++t)
      CHECK(f.cdf(t / 50.0) == doctest::Approx(t / 50.0).epsilon(1e-15));
  }
  SUBCASE("own bids below all rivals") {
    std::vector<double> own(20, s.min() / 2);
    auto f = fp_empirical(own, s);
    for (double p : {1e-9, 0.3, 1.0}) CHECK(f.cdf(p) == 1.0);
  }
  SUBCASE("proper cdf on random designs") {
    for (int rep = 0; rep < 20; ++rep) {
      auto own = oracle::uniform_sample(g, 30, 0.0, 1.2);
      auto f = fp_empirical(own, s);
      double prev = 0.0;
      for (double p : numeric::linspace(0.0, 1.0, 201)) {
        double c = f.cdf(p);
        CHECK(c >= prev);
        CHECK(c <= 1.0);
        prev = c;
      }
      CHECK(f.cdf(1.0) == 1.0);
      for (double tau : {0.1, 0.5, 0.9}) CHECK(f.cdf(f.quantile(tau)) >= tau);
    }
  }
  CHECK_THROWS_AS(fp_empirical({}, s), std::invalid_argument);
  CHECK_THROWS_AS(fp_empirical({0.5}, MaxRivalSample{}), std::invalid_argument);
}

TEST_CASE("default entropy degree") {
  CHECK(default_entropy_degree(1) == 1);
  CHECK(default_entropy_degree(8) == 2);
  CHECK(default_entropy_degree(9) == 3);
  CHECK(default_entropy_degree(100000) == 8);
}

namespace {

// Convex dual of the degree-1 problem with mu_0 profiled out:
// min over mu1 of log((n-1) int exp(mu1 u^{n-1}) du) - mu1 m1.
double profiled_dual(double mu1, double m1, int n) {
  double z = oracle::simpson([&](double u) { return std::exp(mu1 * std::pow(u, n - 1)); }, 0.0, 1.0, 4000);
  return std::log((n - 1) * z) - mu1 * m1;
}

}  // namespace

TEST_CASE("min-entropy degree 0 is the symmetric density") {
  std::mt19937_64 g(5);
  for (int n : {2, 3, 4}) {
    auto u = oracle::uniform_sample(g, 200);
    for (auto& x : u) x = std::pow(x, n - 1);
    auto f = fp_min_entropy(FpModel::empirical(u), n, 0);
    REQUIRE(f.mu().size() == 1);
    CHECK(f.mu()[0] == doctest::Approx(-std::log(n - 1.0)).epsilon(1e-12));
    auto s = fp_symmetric(n);
    for (double p : {0.1, 0.4, 0.9}) CHECK(f.pdf(p) == doctest::Approx(s.pdf(p)).epsilon(1e-12));
  }
}

TEST_CASE("min-entropy degree 1 matches a dual grid search") {
  for (int n : {2, 3}) {
    for (double m1 : {0.3, 0.45, 0.6}) {
      std::vector<double> atoms = {m1 - 0.1, m1, m1 + 0.1};
      auto f = fp_min_entropy(FpModel::empirical(atoms), n, 1);
      // scan then ternary refinement
      double best = 0.0, bv = 1e300;
      for (double x = -30.0; x <= 30.0; x += 0.25) {
        double v = profiled_dual(x, m1, n);
        if (v < bv) bv = v, best = x;
      }
      double lo = best - 0.25, hi = best + 0.25;
      for (int it = 0; it < 100; ++it) {
        double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
        if (profiled_dual(a, m1, n) < profiled_dual(b, m1, n))
          hi = b;
        else
          lo = a;
      }
      CHECK(f.mu()[1] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-6));
    }
  }
}

TEST_CASE("min-entropy moments, positivity and mass") {
  std::mt19937_64 g(23);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 2 + rep % 3;
    auto atoms = oracle::uniform_sample(g, 40 + 10 * rep);
    for (auto& a : atoms) a = std::pow(a, 1.0 + 0.3 * rep);
    auto emp = FpModel::empirical(atoms);
    auto f = fp_min_entropy(emp, n, -1);
    CHECK(f.kind() == FpKind::min_entropy);
    CHECK(f.residual() < 1e-8);
    for (int k = 0; k <= f.degree(); ++k) {
      double mk = emp.expect([k](double p) { return std::pow(p, k); });
      CHECK(std::abs(f.expect([k](double p) { return std::pow(p, k); }) - mk) < 1e-8);
    }
    for (double p : numeric::linspace(0.01, 0.99, 25)) CHECK(f.pdf(p) > 0.0);
    CHECK(f.cdf(1.0) == doctest::Approx(1.0).epsilon(1e-8));
    double mass = numeric::integrate_singular_left([&](double p) { return f.pdf(p); }, 0.0, 1.0, 1e-11);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    double q = f.quantile(0.4);
    CHECK(f.cdf(q) == doctest::Approx(0.4).epsilon(1e-9));
  }
}

TEST_CASE("min-entropy reports non-convergence") {
  // all mass at 1 has no interior solution
  std::vector<double> atoms(10, 1.0);
  try {
    fp_min_entropy(FpModel::empirical(atoms), 2, 3);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("residual") != std::string::npos);
  }
  CHECK_THROWS_AS(fp_min_entropy(fp_symmetric(2), 2, 1), std::invalid_argument);
}
