#include <cmath>
#include <random>

#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/numeric.hpp"
#include "auctionshape/smooth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auctionshape;
using doctest::Approx;

namespace {

const Kernel epa{KernelFamily::epanechnikov};
const Kernel gau{KernelFamily::gaussian};

std::vector<Transform> transforms() {
  return {Transform::identity(), Transform::log(), Transform::sqrt(), Transform::fifthroot()};
}

MonotoneStepFn grid_step(const std::function<double(double)>& a, std::size_t L) {
  std::vector<double> k = numeric::linspace(0.0, 1.0, L + 1), v(L);
  for (std::size_t j = 0; j < L; ++j) v[j] = a((j + 0.5) / L);
  return MonotoneStepFn(k, v);
}

// Inside placement: (1/h) int alpha w(u) k(u) dt over t = psi(s).
// Outside placement: (psi'(p)/h) int alpha w(u) k(u) ds.
// Adaptive quadrature per piece, restricted to the effective kernel support.
double smooth_oracle(const MonotoneStepFn& a, const Kernel& K, const Transform& psi, double h,
                     double p, bool outside) {
  double xp = psi.f(std::max(p, outside ? 1e-12 : 1e-300));
  double lo = (psi.at0() - xp) / h, hi = (psi.at1() - xp) / h;
  auto w = boundary_weights_range(lo, hi, K);
  double c = K.family == KernelFamily::epanechnikov ? 1.0 : 8.5;
  double s = 0.0;
  const auto& kn = a.knots();
  for (std::size_t j = 0; j < a.pieces(); ++j) {
    double t0 = std::max(psi.f(kn[j]), xp - c * h), t1 = std::min(psi.f(kn[j + 1]), xp + c * h);
    if (!(t1 > t0)) continue;
    if (outside) {
      double jac = psi.d1(std::max(p, 1e-12)) / h;
      auto f = [&](double q) {
        double u = (psi.f(q) - xp) / h;
        return (w.w1 + w.w2 * u) * K.pdf(u) * jac;
      };
      double q0 = psi.inv(t0), q1 = psi.inv(t1), qm = psi.inv(xp);
      if (qm > q0 && qm < q1)
        s += a.levels()[j] * (numeric::integrate(f, q0, qm, 1e-12) + numeric::integrate(f, qm, q1, 1e-12));
      else
        s += a.levels()[j] * numeric::integrate(f, q0, q1, 1e-12);
    } else {
      auto f = [&](double t) {
        double u = (t - xp) / h;
        return (w.w1 + w.w2 * u) * K.pdf(u) / h;
      };
      if (xp > t0 && xp < t1)
        s += a.levels()[j] * (numeric::integrate(f, t0, xp, 1e-12) + numeric::integrate(f, xp, t1, 1e-12));
      else
        s += a.levels()[j] * numeric::integrate(f, t0, t1, 1e-12);
    }
  }
  return s;
}

// fourth-order one-sided stencils
double fd1_right(const std::function<double(double)>& f, double x, double d) {
  return (-25.0 * f(x) + 48.0 * f(x + d) - 36.0 * f(x + 2 * d) + 16.0 * f(x + 3 * d) -
          3.0 * f(x + 4 * d)) /
         (12 * d);
}
double fd2_right(const std::function<double(double)>& f, double x, double d) {
  return (45.0 * f(x) - 154.0 * f(x + d) + 214.0 * f(x + 2 * d) - 156.0 * f(x + 3 * d) +
          61.0 * f(x + 4 * d) - 10.0 * f(x + 5 * d)) /
         (12 * d * d);
}

}  // namespace

TEST_CASE("kernel moments against quadrature") {
  for (const Kernel& K : {epa, gau}) {
    double L = K.family == KernelFamily::epanechnikov ? 1.0 : 12.0;
    CHECK(numeric::integrate([&](double u) { return K.pdf(u); }, -L, L, 1e-12) == Approx(1.0));
    CHECK(numeric::integrate([&](double u) { return K.pdf(u) * K.pdf(u); }, -L, L, 1e-12) ==
          Approx(K.kappa2()));
    CHECK(numeric::integrate([&](double u) { return u * u * K.pdf(u); }, -L, L, 1e-12) ==
          Approx(K.mu2()));
    CHECK(numeric::integrate([&](double u) { return K.deriv(u) * K.deriv(u); }, -L, L, 1e-12) ==
          Approx(K.kappa2_deriv()));
    std::mt19937_64 g(71);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int rep = 0; rep < 20; ++rep) {
      double a = U(g), b = U(g);
      if (a > b) std::swap(a, b);
      double qa = std::max(a, -L), qb = std::min(b, L);
      for (int j = 0; j <= 4; ++j) {
        double q = qb > qa ? numeric::integrate([&](double u) { return std::pow(u, j) * K.pdf(u); }, qa, qb, 1e-12)
                           : 0.0;
        CHECK(K.partial_moment(j, a, b) == Approx(q).epsilon(1e-10).scale(1.0));
      }
      CHECK(K.cdf(b) - K.cdf(a) == Approx(K.partial_moment(0, a, b)).scale(1.0));
      CHECK(K.first_moment_cdf(b) - K.first_moment_cdf(a) ==
            Approx(K.partial_moment(1, a, b)).scale(1.0));
    }
  }
  // Epanechnikov half-support moments
  CHECK(epa.partial_moment(0, -1, 0) == Approx(0.5));
  CHECK(epa.partial_moment(1, -1, 0) == Approx(-3.0 / 16.0));
  CHECK(epa.partial_moment(2, -1, 0) == Approx(0.1));
}

TEST_CASE("boundary kernel moment conditions on random (p, h, psi)") {
  std::mt19937_64 g(73);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto ts = transforms();
  for (int rep = 0; rep < 100; ++rep) {
    double p = U(g), h = 0.02 + 0.3 * U(g);
    const Transform& psi = ts[rep % ts.size()];
    for (const Kernel& K : {gau, epa}) {
      auto w = boundary_weights_general(p, h, psi, K);
      double xp = psi.f(p);
      double lo = std::max((psi.at0() - xp) / h, -12.0), hi = std::min((psi.at1() - xp) / h, 12.0);
      if (K.family == KernelFamily::epanechnikov) {
        lo = std::max(lo, -1.0);
        hi = std::min(hi, 1.0);
      }
      auto m = [&](int j) {
        return numeric::integrate(
            [&](double u) { return std::pow(u, j) * (w.w1 + w.w2 * u) * K.pdf(u); }, lo, hi, 1e-12);
      };
      CHECK(std::abs(m(0) - 1.0) < 1e-10);
      CHECK(std::abs(m(1)) < 1e-10);
    }
  }
  CHECK_THROWS(boundary_weights_range(0.3, 0.3, epa));
}

TEST_CASE("quadratic boundary kernel matches three moments") {
  for (double hi : {0.0, 0.3, 0.9, 5.0}) {
    for (const Kernel& K : {epa, gau}) {
      auto w = quadratic_boundary_weights_range(-1e300, hi, K);
      double L = K.family == KernelFamily::epanechnikov ? 1.0 : 12.0;
      double top = std::min(hi, L);
      auto m = [&](int j) {
        return numeric::integrate(
            [&](double u) { return std::pow(u, j) * (w.w1 + w.w2 * u + w.w3 * u * u) * K.pdf(u); }, -L,
            top, 1e-12);
      };
      CHECK(m(0) == Approx(1.0));
      CHECK(std::abs(m(1)) < 1e-9);
      CHECK(m(2) == Approx(K.mu2()));
    }
  }
}

TEST_CASE("transforms: derivatives and inverses") {
  for (const auto& psi : transforms()) {
    for (double p : {0.05, 0.3, 0.7, 1.0, 1.2}) {
      double d = 1e-5;
      CHECK(psi.d1(p) == Approx((psi.f(p + d) - psi.f(p - d)) / (2 * d)).epsilon(1e-7));
      CHECK(psi.d2(p) == Approx((psi.d1(p + d) - psi.d1(p - d)) / (2 * d)).epsilon(1e-6).scale(1.0));
      CHECK(psi.d3(p) == Approx((psi.d2(p + d) - psi.d2(p - d)) / (2 * d)).epsilon(1e-5).scale(1.0));
      CHECK(psi.inv(psi.f(p)) == Approx(p).epsilon(1e-13));
    }
  }
  CHECK(std::isinf(Transform::log().at0()));
  CHECK_THROWS(Transform::by_name("cube"));
  CHECK(Transform::by_name("sqrt").kind == TransformKind::sqrt);

  auto pilot = Transform::alpha_pilot(MonotoneStepFn({0, 0.5, 1}, {1, 1}));
  double prev = -1e300;
  for (double p : numeric::linspace(0.0, 1.0, 101)) {
    CHECK(pilot.f(p) > prev);
    prev = pilot.f(p);
    CHECK(pilot.inv(pilot.f(p)) == Approx(p).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("smoothed alpha agrees with direct quadrature") {
  std::mt19937_64 g(79);
  auto ts = transforms();
  for (int rep = 0; rep < 24; ++rep) {
    MaxRivalSample s(oracle::uniform_sample(g, 10 + rep));
    auto a = solve_ls(s).alpha;
    const Transform& psi = ts[rep % ts.size()];
    for (const Kernel& K : {epa, gau}) {
      for (Placement pl : {Placement::psi_prime_inside, Placement::psi_prime_outside}) {
        SmoothSpec sp{K, psi, 0.15, BoundaryScheme::boundary_kernel, pl};
        AlphaSmoother sm(a, sp);
        for (double p : {0.0, 0.02, 0.3, 0.61, 0.97, 1.0}) {
          if (pl == Placement::psi_prime_outside && p == 0.0) continue;
          double o = smooth_oracle(a, K, psi, 0.15, p, pl == Placement::psi_prime_outside);
          INFO("rep " << rep << " K " << int(K.family) << " pl " << int(pl) << " p " << p);
          CHECK(sm(p) == Approx(o).epsilon(1e-7).scale(1.0));
        }
      }
    }
  }
}

TEST_CASE("boundary kernel reproduces constants and psi-linear functions") {
  for (const auto& psi : transforms()) {
    for (const Kernel& K : {epa, gau}) {
      AlphaSmoother c(MonotoneStepFn({0, 0.4, 1}, {2.5, 2.5}),
                      SmoothSpec{K, psi, 0.2, BoundaryScheme::boundary_kernel});
      for (double p : numeric::linspace(0.0, 1.0, 11)) CHECK(c(p) == Approx(2.5).epsilon(1e-10));
    }
  }
  // identity psi: linear alpha on a fine grid is reproduced up to discretization
  auto lin = grid_step([](double p) { return 1.0 + p; }, 4000);
  AlphaSmoother s(lin, SmoothSpec{epa, Transform::identity(), 0.1});
  for (double p : {0.0, 0.05, 0.5, 0.99, 1.0}) CHECK(s(p) == Approx(1.0 + p).epsilon(1e-4));
}

TEST_CASE("interior smoothing ignores the boundary scheme") {
  std::mt19937_64 g(83);
  MaxRivalSample smp(oracle::uniform_sample(g, 40));
  auto a = solve_ls(smp).alpha;
  AlphaSmoother none(a, SmoothSpec{epa, Transform::identity(), 0.1, BoundaryScheme::none});
  AlphaSmoother bk(a, SmoothSpec{epa, Transform::identity(), 0.1, BoundaryScheme::boundary_kernel});
  AlphaSmoother rf(a, SmoothSpec{epa, Transform::identity(), 0.1, BoundaryScheme::reflection});
  for (double p : {0.15, 0.5, 0.85}) {
    CHECK(bk(p) == Approx(none(p)).epsilon(1e-12));
    CHECK(rf(p) == Approx(none(p)).epsilon(1e-12));
  }
  // zero bandwidth returns the step function
  AlphaSmoother z(a, SmoothSpec{epa, Transform::identity(), 0.0});
  for (double p : {0.0, 0.33, 1.0}) CHECK(z(p) == a(p));
  CHECK_THROWS(AlphaSmoother(a, SmoothSpec{gau, Transform::identity(), 0.1, BoundaryScheme::reflection}));
}

TEST_CASE("derivative matches finite differences of the smoother") {
  std::mt19937_64 g(89);
  auto ts = transforms();
  for (int rep = 0; rep < 8; ++rep) {
    auto a = solve_ls(MaxRivalSample(oracle::uniform_sample(g, 30))).alpha;
    const Transform& psi = ts[rep % ts.size()];
    for (BoundaryScheme b : {BoundaryScheme::none, BoundaryScheme::reflection}) {
      AlphaSmoother sm(a, SmoothSpec{epa, psi, 0.2, b});
      for (double p : {0.1, 0.4, 0.8, 0.95}) {
        double d = 1e-6;
        double fd = (sm(p + d) - sm(p - d)) / (2 * d);
        CHECK(sm.derivative(p) == Approx(fd).epsilon(1e-4).scale(1.0));
      }
    }
  }
  auto a = grid_step([](double p) { return p * p; }, 4000);
  CHECK(alpha_derivative(a, SmoothSpec{epa, Transform::identity(), 0.1}, 0.5) == Approx(1.0).epsilon(1e-3));
  // true slope d = 2: the extension is 1 + 2x + x^2 - 40x^3 + ..., so the
  // third-derivative jump biases the derivative by -40 h^2 * 3/10
  auto st = make_reflection_state(2.0, 0.0, false, Transform::identity());
  for (double h : {0.1, 0.05}) {
    AlphaSmoother r(a, SmoothSpec{epa, Transform::identity(), h}, st);
    CHECK(std::abs(r.derivative(1.0) - (2.0 - 12.0 * h * h)) < 12.0 * h * h * h);
  }
  // estimated slope: the line fit is biased by alpha'' over the window
  CHECK(alpha_derivative(a, SmoothSpec{epa, Transform::identity(), 0.1}, 1.0) == Approx(2.0).epsilon(0.15));
}

TEST_CASE("reflection pastes value and two derivatives at the boundaries") {
  std::vector<std::function<double(double)>> polys{
      [](double p) { return 1.0 + p; },
      [](double p) { return 0.5 + p * p; },
      [](double p) { return 0.2 + 0.5 * p + p * p * p; },
      [](double p) { return 1.0 + 0.3 * p - 0.1 * p * p + 0.4 * p * p * p * p; }};
  std::vector<std::function<double(double)>> dpolys{
      [](double) { return 1.0; }, [](double p) { return 2 * p; },
      [](double p) { return 0.5 + 3 * p * p; },
      [](double p) { return 0.3 - 0.2 * p + 1.6 * p * p * p; }};
  const double d = 1e-3;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    for (const auto& psi : transforms()) {
      bool left = std::isfinite(psi.at0()) && std::isfinite(psi.d1(0.0));
      auto st = make_reflection_state(dpolys[i](1.0) / polys[i](1.0), dpolys[i](0.0) / polys[i](0.0),
                                      left, psi);
      auto ext = [&](double q) { return reflect_extend(polys[i], st, psi, q); };
      auto inner = [&](double x) { return polys[i](1.0 - x); };
      auto outer = [&](double x) { return ext(1.0 + x); };
      CHECK(ext(1.0 + 1e-12) == Approx(polys[i](1.0)).epsilon(1e-9));
      // outward one-sided stencils; the inner side is mirrored so signs flip for odd orders
      CHECK(std::abs(fd1_right(outer, 0.0, d) + fd1_right(inner, 0.0, d)) < 1e-4);
      CHECK(std::abs(fd2_right(outer, 0.0, d) - fd2_right(inner, 0.0, d)) < 1e-4);
      if (left) {
        auto inl = [&](double x) { return polys[i](x); };
        auto outl = [&](double x) { return ext(-x); };
        CHECK(std::abs(fd1_right(outl, 0.0, d) + fd1_right(inl, 0.0, d)) < 1e-4);
        CHECK(std::abs(fd2_right(outl, 0.0, d) - fd2_right(inl, 0.0, d)) < 1e-4);
      }
    }
  }
}

TEST_CASE("reflection smoother reproduces constants and tracks smooth alpha") {
  for (const auto& psi : transforms()) {
    AlphaSmoother c(grid_step([](double) { return 1.7; }, 200),
                    SmoothSpec{epa, psi, 0.1, BoundaryScheme::reflection});
    for (double p : {0.0, 0.01, 0.5, 0.99, 1.0}) CHECK(c(p) == Approx(1.7).epsilon(1e-9));
  }
  auto a = grid_step([](double p) { return 0.5 + p * p; }, 4000);
  AlphaSmoother s(a, SmoothSpec{epa, Transform::identity(), 0.1, BoundaryScheme::reflection});
  CHECK(s(1.0) == Approx(1.5).epsilon(2e-3));
  CHECK(s(0.0) == Approx(0.5).epsilon(2e-3));
  CHECK(s.reflection().left_active);
  // monotone extension keeps the smoother nondecreasing
  std::mt19937_64 g(97);
  auto b = solve_ls(MaxRivalSample(oracle::uniform_sample(g, 60))).alpha;
  AlphaSmoother m(b, SmoothSpec{epa, Transform::identity(), 0.15, BoundaryScheme::reflection,
                                Placement::psi_prime_inside, true});
  CHECK(m.reflection().monotone);
  double prev = -1.0;
  for (double p : numeric::linspace(0.85, 1.0, 61)) {
    CHECK(m(p) >= prev - 1e-12);
    prev = m(p);
  }
}

TEST_CASE("estimate_d") {
  auto sq = grid_step([](double p) { return p * p; }, 2000);
  CHECK(estimate_d(sq, Side::right, 0.05) == Approx(2.0).epsilon(0.06));
  auto c = grid_step([](double) { return 3.0; }, 500);
  CHECK(std::abs(estimate_d(c, Side::right, 0.1)) < 1e-12);
  CHECK(std::abs(estimate_d(c, Side::left, 0.1)) < 1e-12);
  auto e = grid_step([](double p) { return std::exp(p); }, 4000);
  CHECK(estimate_d(e, Side::left, 0.02) == Approx(1.0).epsilon(0.02));
  CHECK_THROWS_WITH(estimate_d(MonotoneStepFn({0, 0.5, 1}, {1, 2}), Side::right, 0.1),
                    "window too narrow");
}

TEST_CASE("cummax and monotonize") {
  CHECK(cummax({1, 3, 2, 5, 4}) == std::vector<double>{1, 3, 3, 5, 5});
  auto m = monotonize_cummax([](double p) { return std::sin(6.0 * p); }, 101);
  CHECK(m(1.0) == Approx(1.0).epsilon(1e-3));
  CHECK(m(0.0) == 0.0);
  auto id = monotonize_cummax([](double p) { return p; }, 11);
  CHECK(id(0.5) == Approx(0.5));
  CHECK(integrate_smoothed([](double p) { return 3 * p * p; }, 0.5) == Approx(0.125).epsilon(1e-12));
}

TEST_CASE("jackknife") {
  // T = 2 by hand: sqrt(5) (b2 - b1) + b1 at p = 1/2
  MaxRivalSample s({0.2, 0.6});
  CHECK(jackknife_alpha(s, JackknifeVariant::breve, 0.5) == Approx(std::sqrt(5.0) * 0.4 + 0.2));
  CHECK(jackknife_alpha(s, JackknifeVariant::breve, 0.0) == 0.0);
  CHECK_THROWS(jackknife_alpha(MaxRivalSample({0.3}), JackknifeVariant::breve, 0.5));
  CHECK_THROWS(jackknife_alpha(s, JackknifeVariant::hat, 0.5));
  SmoothSpec sp{epa, Transform::identity(), 0.2};
  std::mt19937_64 g(101);
  MaxRivalSample big(oracle::uniform_sample(g, 50));
  double q = jackknife_alpha(big, JackknifeVariant::hat, 0.5, &sp);
  CHECK(std::isfinite(q));
  CHECK(q > 0.0);
  // ties reuse the leave-one-out fit
  MaxRivalSample tied({0.1, 0.3, 0.3, 0.8});
  CHECK(std::isfinite(jackknife_alpha(tied, JackknifeVariant::breve, 0.4)));
}
