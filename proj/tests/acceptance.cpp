// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "auctionshape/io.hpp"
#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/npmle.hpp"
#include "auctionshape/numeric.hpp"
#include "auctionshape/objects.hpp"
#include "auctionshape/simlab.hpp"
#include "auctionshape/smooth.hpp"
#include "auctionshape/winprob.hpp"
#include "oracles.hpp"

using namespace auctionshape;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. Isotonic LS against active-set enumeration of the monotone-cone QP.
// Targets y_t = t b_(t) - (t-1) b_(t-1) with weights 1/T are built here from
// the order statistics, not by the library.
Outcome criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(1001);
  std::uniform_int_distribution<int> size(1, 8);
  double obj_gap = 0.0, level_gap = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    auto b = oracle::uniform_sample(g, static_cast<std::size_t>(size(g)));
    std::sort(b.begin(), b.end());
    const std::size_t T = b.size();
    std::vector<double> y(T), w(T, 1.0 / static_cast<double>(T));
    for (std::size_t t = 1; t <= T; ++t)
      y[t - 1] = static_cast<double>(t) * b[t - 1] - (t > 1 ? (t - 1.0) * b[t - 2] : 0.0);
    auto ref = oracle::monotone_qp_active_set(y, w);
    auto fit = solve_ls(MaxRivalSample(b));
    obj_gap = std::max(obj_gap, std::abs(fit.objective - ref.objective));
    const auto& lv = fit.alpha.levels();
    if (lv.size() != T) return {false, "level count " + std::to_string(lv.size()) + " != T"};
    for (std::size_t k = 0; k < T; ++k) level_gap = std::max(level_gap, std::abs(lv[k] - ref.levels[k]));
  }
  double secs = seconds_since(t0);
  bool ok = obj_gap <= 1e-6 && level_gap <= 1e-4 && secs < 10.0;
  return {ok, "200 samples, T<=8: max objective gap " + fmt(obj_gap) + ", max level gap " +
                  fmt(level_gap) + ", " + fmt(secs, "%.2f") + " s"};
}

// 2. NPMLE against the best monotone sequence on a 0.01 grid, and KKT.
Outcome criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 g(1002);
  double worst_margin = std::numeric_limits<double>::infinity(), worst_kkt = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    MaxRivalSample s(oracle::uniform_sample(g, 5));
    auto fit = pava_mle(s);
    const auto& b = fit.bids;
    auto c = max_rival_coefs(5);
    auto term = [&](std::size_t i, double x) {
      std::size_t t = i + c.first_free;
      if (!(x > b[t])) return -std::numeric_limits<double>::infinity();
      return c.a[t] * std::log(x - b[t]) - c.c[t] * std::log(x - b[t - 1]);
    };
    double upper = *std::max_element(fit.alpha_levels.begin(), fit.alpha_levels.end()) + 1.0;
    double grid = oracle::monotone_grid_max(5 - c.first_free, term, 0.0, upper, 0.01);
    worst_margin = std::min(worst_margin, fit.loglik - grid);
    auto k = kkt_check(fit.alpha_levels, b, c);
    worst_kkt = std::max({worst_kkt, k.max_stationarity, k.max_slackness, k.max_primal_violation,
                          -std::min(0.0, k.min_multiplier)});
  }
  double secs = seconds_since(t0);
  bool ok = worst_margin >= -1e-6 && worst_kkt < 1e-9 && secs < 60.0;
  return {ok, "100 samples, T=5: min loglik - grid best " + fmt(worst_margin) +
                  ", max KKT residual " + fmt(worst_kkt) + ", " + fmt(secs, "%.2f") + " s"};
}

// 3. The NPMLE payment lies above the GCM payment.
Outcome criterion3() {
  std::mt19937_64 g(1003);
  std::uniform_int_distribution<int> size(3, 60);
  long violations = 0;
  double worst = 0.0;
  auto grid = numeric::linspace(0.0, 1.0, 1001);
  for (int rep = 0; rep < 500; ++rep) {
    MaxRivalSample s(oracle::uniform_sample(g, static_cast<std::size_t>(size(g))));
    auto mle = pava_mle(s);
    auto ls = solve_ls(s);
    for (double p : grid) {
      double d = ls.payment(p) - mle.payment(p);
      worst = std::max(worst, d);
      if (d > 1e-12) ++violations;
    }
  }
  return {violations == 0, "500 samples on a 1001-grid: " + std::to_string(violations) +
                               " violations, max GCM excess " + fmt(worst)};
}

// 4. Boundary-kernel moments by adaptive quadrature.
Outcome criterion4() {
  std::mt19937_64 g(1004);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Transform> ts{Transform::identity(), Transform::log(), Transform::sqrt(),
                            Transform::fifthroot()};
  double e0 = 0.0, e1 = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    double p = U(g), h = 0.02 + 0.3 * U(g);
    const Transform& psi = ts[rep % ts.size()];
    for (KernelFamily fam : {KernelFamily::epanechnikov, KernelFamily::gaussian}) {
      Kernel K{fam};
      auto w = boundary_weights_general(p, h, psi, K);
      double xp = psi.f(p);
      double L = fam == KernelFamily::epanechnikov ? 1.0 : 12.0;
      double lo = std::max((psi.at0() - xp) / h, -L), hi = std::min((psi.at1() - xp) / h, L);
      auto m = [&](int j) {
        return numeric::integrate(
            [&](double u) { return std::pow(u, j) * (w.w1 + w.w2 * u) * K.pdf(u); }, lo, hi, 1e-13);
      };
      e0 = std::max(e0, std::abs(m(0) - 1.0));
      e1 = std::max(e1, std::abs(m(1)));
    }
  }
  return {e0 <= 1e-10 && e1 <= 1e-10, "100 (p, h, psi) triples, both kernels: max |int k - 1| " +
                                          fmt(e0) + ", max |int s k| " + fmt(e1)};
}

// 5. Reflection extension pastes value, slope and curvature at p = 1.
Outcome criterion5() {
  std::vector<std::function<double(double)>> f{
      [](double p) { return 1.0 + p; }, [](double p) { return 0.5 + p * p; },
      [](double p) { return 0.2 + 0.5 * p + p * p * p; },
      [](double p) { return 1.0 + 0.3 * p - 0.1 * p * p + 0.4 * p * p * p * p; }};
  std::vector<std::function<double(double)>> df{
      [](double) { return 1.0; }, [](double p) { return 2 * p; },
      [](double p) { return 0.5 + 3 * p * p; },
      [](double p) { return 0.3 - 0.2 * p + 1.6 * p * p * p; }};
  // fourth-order one-sided stencils at step d
  const double d = 1e-3;
  auto fd1 = [d](const std::function<double(double)>& h) {
    return (-25 * h(0) + 48 * h(d) - 36 * h(2 * d) + 16 * h(3 * d) - 3 * h(4 * d)) / (12 * d);
  };
  auto fd2 = [d](const std::function<double(double)>& h) {
    return (45 * h(0) - 154 * h(d) + 214 * h(2 * d) - 156 * h(3 * d) + 61 * h(4 * d) -
            10 * h(5 * d)) /
           (12 * d * d);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (const auto& psi : {Transform::identity(), Transform::log(), Transform::sqrt(),
                            Transform::fifthroot()}) {
      bool left = std::isfinite(psi.at0()) && std::isfinite(psi.d1(0.0));
      auto st = make_reflection_state(df[i](1.0) / f[i](1.0), df[i](0.0) / f[i](0.0), left, psi);
      std::function<double(double)> outer = [&](double x) {
        return reflect_extend(f[i], st, psi, 1.0 + x);
      };
      std::function<double(double)> inner = [&](double x) { return f[i](1.0 - x); };
      worst = std::max({worst, std::abs(outer(1e-12) - f[i](1.0)),
                        std::abs(fd1(outer) + fd1(inner)), std::abs(fd2(outer) - fd2(inner))});
    }
  }
  return {worst <= 1e-4, "4 polynomials x 4 transforms, step 1e-3: max mismatch " + fmt(worst)};
}

double slope(const std::vector<double>& Ts, const std::vector<double>& ys) {
  // least-squares slope of log y on log T
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    mx += std::log(Ts[i]);
    my += std::log(ys[i]);
  }
  mx /= Ts.size();
  my /= Ts.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < Ts.size(); ++i) {
    sxy += (std::log(Ts[i]) - mx) * (std::log(ys[i]) - my);
    sxx += (std::log(Ts[i]) - mx) * (std::log(Ts[i]) - mx);
  }
  return sxy / sxx;
}

// 6. Convergence rates of the unsmoothed alpha_T(1/2) and BS^symm.
Outcome criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  McConfig c;
  std::vector<double> Ts{100, 400, 1600};
  for (double T : Ts) {
    DgpSpec d;
    d.gamma = d.theta = 1.0 / 3;
    d.T = static_cast<std::size_t>(T);
    d.seed = 1006;
    c.designs.push_back(d);
  }
  c.estimators = {McEstimator::ls};
  c.objects = {McObject::alpha_half, McObject::bs_symm};
  c.replications = 200;
  auto rep = run_monte_carlo(c);
  std::vector<double> med_a, med_bs, rmse_a, rmse_bs;
  for (const auto& cell : rep.cells) {
    if (cell.object == McObject::alpha_half) {
      med_a.push_back(cell.median_abs_error);
      rmse_a.push_back(cell.rmse);
    } else {
      med_bs.push_back(cell.median_abs_error);
      rmse_bs.push_back(cell.rmse);
    }
  }
  double sa = slope(Ts, med_a), sb = slope(Ts, med_bs);
  double secs = seconds_since(t0);
  bool ok = sa >= -0.45 && sa <= -0.20 && sb >= -0.65 && sb <= -0.35 && secs < 600.0;
  return {ok, "median-abs-error slopes: alpha_T(1/2) " + fmt(sa) + " (RMSE " +
                  fmt(slope(Ts, rmse_a)) + "), BS^symm " + fmt(sb) + " (RMSE " +
                  fmt(slope(Ts, rmse_bs)) + "), " + fmt(secs, "%.1f") + " s"};
}

// 7. Uniform two-bidder anchors.
Outcome criterion7() {
  DgpSpec u;
  u.gamma = u.theta = 1.0;
  u.value_dist_exponent = 1.0;
  u.T = 4000;
  u.seed = 1007;
  TruthSet tr(u);
  double e_gap = std::abs(tr.e(0.5) - 0.125);
  double bs_gap = std::abs(tr.bs() - 1.0 / 6);

  McConfig c;
  c.designs = {u};
  c.estimators = {McEstimator::ls};
  c.objects = {McObject::bs};
  c.replications = 200;
  auto rep = run_monte_carlo(c);
  double med = rep.cells.at(0).median_abs_error;

  double vs = bs_variance_symmetric([&](double q) { return tr.Qc_d1(q); }, 2);
  AsymmetricPlugins pl;
  pl.qc_d1 = [&](double p) { return tr.Qc_d1(p); };
  pl.qc_d2 = [&](double p) {
    const double s = 1e-4;
    return (tr.Qc_d1(std::min(p + s, 1.0)) - tr.Qc_d1(std::max(p - s, 0.0))) /
           (std::min(p + s, 1.0) - std::max(p - s, 0.0));
  };
  pl.fp_pdf = [&](double p) { return tr.fv(tr.alpha(p)) * tr.alpha_d1(p); };
  pl.fp_pdf_d1 = [](double) { return 0.0; };  // f_p = 1 on this design
  pl.own_cdf_at_qc = [&](double p) { return tr.Fp(p); };
  pl.alpha_d1 = [&](double p) { return tr.alpha_d1(p); };
  double va = bs_variance_asymmetric(pl);
  double v_gap = std::max(std::abs(vs - 1.0 / 90), std::abs(va - 1.0 / 9));

  bool ok = e_gap <= 1e-12 && bs_gap <= 1e-10 && med < 0.01 && v_gap <= 1e-10;
  return {ok, "|e(1/2) - 1/8| " + fmt(e_gap) + ", |BS - 1/6| " + fmt(bs_gap) +
                  ", LS median |error| at T=4000 " + fmt(med) + " (200 reps), variance gap " +
                  fmt(v_gap)};
}

// \int e dF_p for the symmetric n-bidder F_p, by substituting u = p^{1/(n-1)}:
// e(u^{n-1}) is a polynomial in u between kinks, so Gauss-Legendre is exact.
double expected_payment_oracle(const ConvexPwlFn& e, int n) {
  const auto& nd = e.nodes();
  double s = 0.0;
  auto piece = [&](double u) { return e(std::pow(u, n - 1.0)); };
  for (std::size_t k = 0; k + 1 < nd.size(); ++k) {
    double u0 = std::pow(nd[k].p, 1.0 / (n - 1.0)), u1 = std::pow(nd[k + 1].p, 1.0 / (n - 1.0));
    if (u1 > u0) s += numeric::gauss_legendre(piece, u0, u1);
  }
  return s;
}

// 8. PR*(m = n) against \int e dF_p, and PR*(3) on the uniform design.
Outcome criterion8() {
  std::mt19937_64 g(1008);
  double gap = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    MaxRivalSample s(oracle::uniform_sample(g, 20));
    auto fit = solve_ls(s);
    auto est = AlphaEstimate::unsmoothed(fit.alpha, fit.payment);
    for (int n = 2; n <= 4; ++n) {
      double pr = profit_counterfactual_n(est, n, n).per_bidder;
      gap = std::max(gap, std::abs(pr - expected_payment_oracle(fit.payment, n)));
    }
  }
  DgpSpec u;
  u.gamma = u.theta = 1.0;
  u.value_dist_exponent = 1.0;
  u.T = 4000;
  std::vector<double> revenue;
  for (int r = 0; r < 50; ++r) {
    Philox4x32 rng(1008 ^ static_cast<std::uint64_t>(r), 0);
    auto sample = dgp_sample(u, rng);
    auto fit = solve_ls(MaxRivalSample(sample.rival_bids));
    revenue.push_back(
        profit_counterfactual_n(AlphaEstimate::unsmoothed(fit.alpha, fit.payment), 2, 3).total);
  }
  double first = std::abs(revenue[0] - 0.5);
  double med = numeric::median(revenue);
  double worst = 0.0;
  for (double x : revenue) worst = std::max(worst, std::abs(x - 0.5));
  bool ok = gap <= 1e-10 && first <= 0.02 && std::abs(med - 0.5) <= 0.02;
  return {ok, "max |PR*(n) - int e dF_p| " + fmt(gap) + " (150 cases); PR*(3) at T=4000: first rep " +
                  fmt(revenue[0], "%.4f") + ", median " + fmt(med, "%.4f") +
                  ", max |dev| over 50 reps " + fmt(worst)};
}

// 9. Bandwidth robustness: smoothed LS against IBF-BC.
Outcome criterion9() {
  McConfig c;
  DgpSpec d;
  d.gamma = 1.0 / 7;
  d.theta = 1.0 / 9;
  d.T = 500;
  d.seed = 1009;
  c.designs = {d};
  c.estimators = {McEstimator::smoothed_ls, McEstimator::ibf_bc};
  c.objects = {McObject::bs};
  c.scales = {0.2, 0.5, 1.0, 1.5};
  c.replications = 200;
  auto rep = run_monte_carlo(c);
  auto ratio = [&](McEstimator e) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& cell : rep.cells)
      if (cell.estimator == e) {
        lo = std::min(lo, cell.rmse);
        hi = std::max(hi, cell.rmse);
      }
    return hi / lo;
  };
  double rs = ratio(McEstimator::smoothed_ls), ri = ratio(McEstimator::ibf_bc);
  return {rs < ri, "max/min RMSE over scales {1/5,1/2,1,3/2}: smoothed-ls " + fmt(rs, "%.4f") +
                       ", ibf-bc " + fmt(ri, "%.4f") + " (reflection KDE stand-in)"};
}

// 10. cmd_simulate output is byte-identical across runs and thread counts.
Outcome criterion10() {
  std::random_device rd;
  fs::path dir = fs::temp_directory_path() / ("auctionshape_acceptance_" + std::to_string(rd()));
  fs::create_directories(dir);
  const std::string cli = AUCTIONSHAPE_CLI;
  const std::string args =
      " simulate --gamma 1/3,3/2 --theta 1/3,1/9 --T 100 --reps 20 --seed 42"
      " --estimator ls,mle,smoothed-ls,smoothed-mle,ibf,ibf-bc,jackknife"
      " --objects alpha,alpha_half,bs,mv,fv,qv,bs_symm --bandwidth-scale 1/2,1";
  auto run = [&](int threads, const std::string& sub) {
    std::string cmd = "AUCTIONSHAPE_THREADS=" + std::to_string(threads) + " " + cli + args +
                      " --output-dir " + (dir / sub).string() + " > /dev/null 2>&1";
    int s = std::system(cmd.c_str());
    return WIFEXITED(s) && WEXITSTATUS(s) == 0;
  };
  bool ran = run(1, "a") && run(1, "b") && run(8, "c");
  bool same = false;
  if (ran) {
    same = true;
    for (const char* f : {"mc_report.csv", "mc_report.json"}) {
      std::string a = io::read_file(dir / "a" / f);
      same = same && a == io::read_file(dir / "b" / f) && a == io::read_file(dir / "c" / f);
    }
  }
  fs::remove_all(dir);
  return {ran && same, ran ? (same ? "two runs with 1 thread and one with 8 are byte-identical"
                                   : "outputs differ")
                           : "simulate exited with an error"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"isotonic-LS oracle equivalence", criterion1},
      {"NPMLE oracle equivalence", criterion2},
      {"GCM/MLE dominance", criterion3},
      {"boundary-kernel moments", criterion4},
      {"reflection smooth pasting", criterion5},
      {"rate checks", criterion6},
      {"closed-form anchors", criterion7},
      {"counterfactual consistency", criterion8},
      {"bandwidth robustness", criterion9},
      {"determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
