#include "auctionshape/objects.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <stdexcept>

#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/numeric.hpp"

namespace auctionshape {

namespace {

using GL20 = boost::math::quadrature::gauss<double, 20>;

template <class F>
double gl20(F&& f, double a, double b) {
  const auto& x = GL20::abscissa();
  const auto& w = GL20::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * (f(c - r * x[i]) + f(c + r * x[i]));
  return s * r;
}

template <class F>
double composite(F&& f, double a, double b, int panels) {
  double s = 0.0, step = (b - a) / panels;
  for (int k = 0; k < panels; ++k) s += gl20(f, a + k * step, a + (k + 1) * step);
  return s;
}

// Panel breakpoints on [lo, hi], geometrically graded towards lo.
std::vector<double> graded_breaks(double lo, double hi) {
  std::vector<double> b = {lo};
  const double L = hi - lo;
  for (int k = 30; k > 4; k -= 2) b.push_back(lo + L * std::ldexp(1.0, -k));
  for (int j = 1; j <= 16; ++j) b.push_back(lo + L * j / 16.0);
  b.back() = hi;
  return b;
}

void check_n(int n) {
  if (n < 2) throw std::invalid_argument("need at least 2 bidders");
}

double fp_exponent(int n) { return (2.0 - n) / (n - 1.0); }

// (sum a_i G_i (a_i + 2 sum_{j>i} a_j)) - (sum a_i G_i)^2 for the empirical
// pooled cdf with weights a_i = gap_i * G_i^power.
double empirical_g_form(const MaxRivalSample& pooled, double power) {
  const auto& x = pooled.values();
  const std::size_t N = x.size();
  if (N < 2) return 0.0;
  std::vector<double> a(N - 1), G(N - 1);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    G[i] = static_cast<double>(i + 1) / N;
    a[i] = (x[i + 1] - x[i]) * std::pow(G[i], power);
  }
  double tail = 0.0, quad = 0.0, lin = 0.0;
  for (std::size_t i = N - 1; i-- > 0;) {
    quad += a[i] * G[i] * (a[i] + 2.0 * tail);
    lin += a[i] * G[i];
    tail += a[i];
  }
  return std::max(0.0, quad - lin * lin);
}

}  // namespace

// ------------------------------------------------------------ AlphaEstimate

AlphaEstimate AlphaEstimate::unsmoothed(MonotoneStepFn alpha) {
  ConvexPwlFn e = integrate_step(alpha);
  return unsmoothed(std::move(alpha), std::move(e));
}

AlphaEstimate AlphaEstimate::unsmoothed(MonotoneStepFn alpha, ConvexPwlFn payment) {
  AlphaEstimate a;
  a.kind_ = AlphaKind::unsmoothed;
  a.step_ = std::move(alpha);
  a.step_payment_ = std::move(payment);
  return a;
}

AlphaEstimate AlphaEstimate::smoothed(MonotoneStepFn alpha, const SmoothSpec& spec) {
  return smoothed(std::make_shared<const AlphaSmoother>(std::move(alpha), spec));
}

AlphaEstimate AlphaEstimate::smoothed(std::shared_ptr<const AlphaSmoother> smoother) {
  if (!smoother) throw std::invalid_argument("null smoother");
  AlphaEstimate a;
  a.kind_ = AlphaKind::smoothed;
  a.smoother_ = std::move(smoother);
  return a;
}

AlphaEstimate AlphaEstimate::from_function(std::function<double(double)> alpha,
                                           std::function<double(double)> payment,
                                           std::function<double(double)> derivative) {
  if (!alpha || !payment) throw std::invalid_argument("alpha and payment are required");
  AlphaEstimate a;
  a.kind_ = AlphaKind::function;
  a.f_ = std::move(alpha);
  a.e_ = std::move(payment);
  a.d1_ = std::move(derivative);
  return a;
}

double AlphaEstimate::operator()(double p) const {
  switch (kind_) {
    case AlphaKind::unsmoothed:
      return step_(p);
    case AlphaKind::smoothed:
      return (*smoother_)(p);
    case AlphaKind::function:
      break;
  }
  return f_(p);
}

double AlphaEstimate::payment(double p) const {
  switch (kind_) {
    case AlphaKind::unsmoothed:
      return step_payment_(p);
    case AlphaKind::smoothed:
      return integrate_smoothed([this](double s) { return (*smoother_)(s); }, p);
    case AlphaKind::function:
      break;
  }
  return e_(p);
}

double AlphaEstimate::derivative(double p) const {
  switch (kind_) {
    case AlphaKind::unsmoothed:
      throw std::logic_error("step estimate has no derivative");
    case AlphaKind::smoothed:
      return smoother_->derivative(p);
    case AlphaKind::function:
      break;
  }
  if (!d1_) throw std::logic_error("no derivative supplied");
  return d1_(p);
}

double AlphaEstimate::inverse(double v) const {
  if (kind_ == AlphaKind::unsmoothed) return theta_inverse(step_, v);
  if ((*this)(0.0) >= v) return 0.0;
  if ((*this)(1.0) < v) return 1.0;
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-12) {
    double m = 0.5 * (lo + hi);
    ((*this)(m) < v ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

double AlphaEstimate::moment(double c, double lo, double hi) const {
  if (!(c > -1.0)) throw std::domain_error("divergent weight");
  if (!(lo >= 0.0 && hi <= 1.0)) throw std::domain_error("argument outside [0,1]");
  if (!(hi > lo)) return 0.0;
  const double c1 = c + 1.0;
  if (kind_ == AlphaKind::unsmoothed) {
    const auto& k = step_.knots();
    const auto& l = step_.levels();
    double s = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      double a = std::max(k[j], lo), b = std::min(k[j + 1], hi);
      if (b > a) s += l[j] * (std::pow(b, c1) - std::pow(a, c1)) / c1;
    }
    return s;
  }
  // panels graded towards 0 absorb endpoint singularities of alpha and the weight
  auto graded = [](auto&& f, double a, double b) {
    if (a > 0.0) return composite(f, a, b, 16);
    auto br = graded_breaks(a, b);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) s += gl20(f, br[k], br[k + 1]);
    return s;
  };
  if (c >= 0.0) return graded([&](double s) { return (*this)(s) * std::pow(s, c); }, lo, hi);
  // s = u^{1/(c+1)} removes the singular weight
  auto g = [&](double u) { return (*this)(std::min(1.0, std::pow(u, 1.0 / c1))); };
  return graded(g, std::pow(lo, c1), std::pow(hi, c1)) / c1;
}

const MonotoneStepFn* AlphaEstimate::step() const {
  if (kind_ == AlphaKind::unsmoothed) return &step_;
  if (kind_ == AlphaKind::smoothed) return &smoother_->alpha();
  return nullptr;
}

const ConvexPwlFn* AlphaEstimate::step_payment() const {
  return kind_ == AlphaKind::unsmoothed ? &step_payment_ : nullptr;
}

// ------------------------------------------------------------ value distribution

double quantile_v(const AlphaEstimate& alpha, const FpModel& fp, double tau) {
  return alpha(fp.quantile(tau));
}

double cdf_v(const AlphaEstimate& alpha, const FpModel& fp, double v) {
  if (v < alpha.lower()) return 0.0;
  if (v >= alpha.upper()) return 1.0;
  return fp.cdf(alpha.inverse(v));
}

double pdf_v_onestep(const AlphaEstimate& alpha, const FpModel& fp, double v) {
  if (v < alpha.lower() || v > alpha.upper()) return 0.0;
  double p = alpha.inverse(v);
  double d = alpha.derivative(p);
  if (!(d > 0.0)) throw std::runtime_error("nonmonotone derivative estimate");
  return fp.pdf(p) / d;
}

ReflectionKde::ReflectionKde(std::vector<double> x, double bandwidth, double lo, double hi,
                             Kernel kernel, bool reflect)
    : x_(std::move(x)), h_(bandwidth), lo_(lo), hi_(hi), kernel_(kernel), reflect_(reflect) {
  if (x_.empty()) throw std::invalid_argument("empty sample");
  if (!(h_ > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (!(hi_ > lo_)) throw std::invalid_argument("empty support");
  std::sort(x_.begin(), x_.end());
}

double ReflectionKde::raw(double v) const {
  double s = 0.0;
  auto first = x_.begin(), last = x_.end();
  if (kernel_.family == KernelFamily::epanechnikov) {
    first = std::lower_bound(x_.begin(), x_.end(), v - h_);
    last = std::upper_bound(first, x_.end(), v + h_);
  }
  for (auto it = first; it != last; ++it) s += kernel_.pdf((v - *it) / h_);
  return s / (static_cast<double>(x_.size()) * h_);
}

double ReflectionKde::operator()(double v) const {
  if (!reflect_) return raw(v);
  if (v < lo_ || v > hi_) return 0.0;
  return raw(v) + raw(2.0 * lo_ - v) + raw(2.0 * hi_ - v);
}

ReflectionKde pdf_v_twostep(const std::vector<double>& pseudo_values, double bandwidth,
                            Kernel kernel) {
  if (pseudo_values.empty()) throw std::invalid_argument("empty sample");
  double hi = *std::max_element(pseudo_values.begin(), pseudo_values.end());
  double lo = std::min(0.0, *std::min_element(pseudo_values.begin(), pseudo_values.end()));
  if (!(hi > lo)) hi = lo + bandwidth;
  return ReflectionKde(pseudo_values, bandwidth, lo, hi, kernel, true);
}

double bid_function(const AlphaEstimate& alpha, const MonotoneStepFn& rival_quantile, double v) {
  return rival_quantile(alpha.inverse(v));
}

// ------------------------------------------------------------ variances

double kernel_double_integral(const std::function<double(double)>& gamma,
                              const std::function<double(double)>& F, double lo, double hi) {
  // 2 \int Gamma(p) S(p) dp - (\int Gamma F)^2 with S(p) = \int_lo^p Gamma F
  const auto br = graded_breaks(lo, hi);
  const auto& x = GL20::abscissa();
  const auto& w = GL20::weights();
  auto gf = [&](double s) { return gamma(s) * F(s); };
  double cum = 0.0, quad = 0.0;
  for (std::size_t k = 0; k + 1 < br.size(); ++k) {
    double a = br[k], b = br[k + 1], c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (double sgn : {-1.0, 1.0}) {
        double p = c + sgn * r * x[i];
        double S = cum + numeric::gauss_legendre(gf, a, p);
        quad += w[i] * r * gamma(p) * S;
      }
    }
    cum += gl20(gf, a, b);
  }
  return std::max(0.0, 2.0 * quad - cum * cum);
}

double bs_variance_symmetric(const std::function<double(double)>& q_d1, int n) {
  check_n(n);
  auto q = [&](double u) { return q_d1(u) * std::pow(u, n - 1); };
  double D = kernel_double_integral(q, [](double u) { return u; });
  return n / ((n - 1.0) * (n - 1.0)) * D;
}

double bs_variance_symmetric_g(const std::function<double(double)>& G, double bbar, int n) {
  check_n(n);
  auto w = [&](double b) { return std::pow(G(b), n - 1); };
  return n / ((n - 1.0) * (n - 1.0)) * kernel_double_integral(w, G, 0.0, bbar);
}

double bs_variance_symmetric(const MaxRivalSample& pooled, int n) {
  check_n(n);
  return n / ((n - 1.0) * (n - 1.0)) * empirical_g_form(pooled, n - 1.0);
}

double mv_variance_symmetric(const std::function<double(double)>& q_d1, int n) {
  check_n(n);
  if (n == 2) return 0.0;
  double D = kernel_double_integral(q_d1, [](double u) { return u; });
  return (n - 2.0) * (n - 2.0) / ((n - 1.0) * (n - 1.0) * n) * D;
}

double mv_variance_symmetric(const MaxRivalSample& pooled, int n) {
  check_n(n);
  if (n == 2) return 0.0;
  return (n - 2.0) * (n - 2.0) / ((n - 1.0) * (n - 1.0) * n) * empirical_g_form(pooled, 0.0);
}

namespace {

void check_plugins(const AsymmetricPlugins& pl) {
  if (!pl.qc_d1 || !pl.qc_d2 || !pl.fp_pdf || !pl.fp_pdf_d1 || !pl.own_cdf_at_qc || !pl.alpha_d1)
    throw std::invalid_argument("incomplete plug-ins");
}

double asymmetric_variance(const AsymmetricPlugins& pl, bool divide_by_p) {
  check_plugins(pl);
  auto g1 = [&](double p) {
    double f = pl.fp_pdf(p), f1 = pl.fp_pdf_d1(p);
    double v = divide_by_p ? pl.qc_d2(p) * p * f + pl.qc_d1(p) * (p * f1 + 4.0 * f)
                           : pl.qc_d2(p) * p * p * f + pl.qc_d1(p) * (p * p * f1 + 4.0 * p * f);
    return v;
  };
  auto g2 = [&](double p) { return divide_by_p ? pl.alpha_d1(p) : pl.alpha_d1(p) * p; };
  return kernel_double_integral(g1, [](double p) { return p; }) +
         kernel_double_integral(g2, pl.own_cdf_at_qc);
}

}  // namespace

double bs_variance_asymmetric(const AsymmetricPlugins& plugins) {
  return asymmetric_variance(plugins, false);
}

double mv_variance_asymmetric(const AsymmetricPlugins& plugins) {
  return asymmetric_variance(plugins, true);
}

// ------------------------------------------------------------ surplus, mean value

VarianceReport bidder_surplus_symmetric(const ConvexPwlFn& payment, int n,
                                        const MaxRivalSample* pooled) {
  check_n(n);
  VarianceReport r;
  r.formula = VarianceFormula::bs_symmetric;
  r.estimate = payment(1.0) / (n - 1.0) -
               n / ((n - 1.0) * (n - 1.0)) * integrate_pwl_power(payment, fp_exponent(n));
  if (pooled) r.asymptotic_variance = bs_variance_symmetric(*pooled, n);
  return r;
}

VarianceReport bidder_surplus_symmetric(const AlphaEstimate& alpha, int n,
                                        const MaxRivalSample* pooled) {
  check_n(n);
  VarianceReport r;
  r.formula = VarianceFormula::bs_symmetric;
  r.estimate = n / (n - 1.0) * alpha.moment(1.0 / (n - 1.0)) - alpha.moment(0.0);
  if (pooled) r.asymptotic_variance = bs_variance_symmetric(*pooled, n);
  return r;
}

namespace {

// e at sorted points, cumulatively for a smoothed alpha.
std::vector<double> payments_at(const AlphaEstimate& alpha, const std::vector<double>& sorted) {
  std::vector<double> e(sorted.size());
  if (alpha.kind() != AlphaKind::smoothed) {
    for (std::size_t i = 0; i < sorted.size(); ++i) e[i] = alpha.payment(sorted[i]);
    return e;
  }
  double prev = 0.0, acc = 0.0;
  auto f = [&](double s) { return alpha(s); };
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double gap = sorted[i] - prev;
    int panels = std::max(1, static_cast<int>(std::ceil(gap / 0.02)));
    if (gap > 0.0) acc += composite(f, prev, sorted[i], panels);
    e[i] = acc;
    prev = sorted[i];
  }
  return e;
}

}  // namespace

VarianceReport bidder_surplus_asymmetric(const AlphaEstimate& alpha, const FpModel& fp,
                                         const AsymmetricPlugins* plugins) {
  VarianceReport r;
  r.formula = VarianceFormula::bs_asymmetric;
  if (fp.kind() == FpKind::empirical) {
    const auto& at = fp.atoms();
    auto e = payments_at(alpha, at);
    double s = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) s += alpha(at[i]) * at[i] - e[i];
    r.estimate = s / at.size();
  } else {
    r.estimate = fp.expect([&](double p) { return alpha(p) * p - alpha.payment(p); });
  }
  if (plugins) r.asymptotic_variance = bs_variance_asymmetric(*plugins);
  return r;
}

VarianceReport mean_valuation(const AlphaEstimate& alpha, const FpModel& fp,
                              const MaxRivalSample* pooled, const AsymmetricPlugins* plugins) {
  VarianceReport r;
  switch (fp.kind()) {
    case FpKind::symmetric: {
      int n = fp.n();
      r.formula = VarianceFormula::mv_symmetric;
      r.estimate = alpha.moment(fp_exponent(n)) / (n - 1.0);
      if (n == 2)
        r.asymptotic_variance = 0.0;
      else if (pooled)
        r.asymptotic_variance = mv_variance_symmetric(*pooled, n);
      return r;
    }
    case FpKind::empirical: {
      double s = 0.0;
      for (double p : fp.atoms()) s += alpha(p);
      r.estimate = s / fp.atoms().size();
      break;
    }
    case FpKind::min_entropy:
      r.estimate = fp.expect([&](double p) { return alpha(p); });
      break;
  }
  r.formula = VarianceFormula::mv_asymmetric;
  if (plugins) r.asymptotic_variance = mv_variance_asymmetric(*plugins);
  return r;
}

VarianceReport mean_valuation_shortcut(const MaxRivalSample& pooled, int n) {
  check_n(n);
  if (pooled.empty()) throw std::invalid_argument("empty sample");
  VarianceReport r;
  r.formula = VarianceFormula::mv_symmetric;
  r.estimate = (pooled.max() + (n - 2.0) * numeric::mean(pooled.values())) / (n - 1.0);
  r.asymptotic_variance = mv_variance_symmetric(pooled, n);
  return r;
}

// ------------------------------------------------------------ counterfactuals

CounterfactualProfit profit_counterfactual_n(const AlphaEstimate& alpha, int n, int m) {
  check_n(n);
  if (m < 2) throw std::invalid_argument("need at least 2 bidders");
  const double xi = (n - 1.0) / (m - 1.0);
  const double c = (m - n) / (n - 1.0);
  CounterfactualProfit out;
  out.per_bidder = (alpha.moment(c) - alpha.moment(c + 1.0 / (n - 1.0))) / xi;
  out.total = m * out.per_bidder;
  return out;
}

namespace {

// \int_0^1 e(p) p^chi dp for chi > -2; needs e(0) = 0 when chi <= -1.
double payment_power(const ConvexPwlFn& e, double chi) {
  if (chi > -1.0) return integrate_pwl_power(e, chi);
  if (!(chi > -2.0)) throw std::domain_error("divergent weight");
  auto f = PwlFn::from_convex(e);
  double total = 0.0, scale = 0.0;
  for (const auto& s : f.segments()) scale = std::max(scale, std::abs(s.intercept) + std::abs(s.slope));
  for (const auto& s : f.segments()) {
    double x0 = s.lo, x1 = s.hi;
    if (!(x1 > x0)) continue;
    if (x0 == 0.0) {
      if (std::abs(s.intercept) > 1e-12 * scale) throw std::domain_error("divergent weight");
    } else {
      double i0 = chi == -1.0 ? std::log(x1 / x0)
                              : (std::pow(x1, chi + 1.0) - std::pow(x0, chi + 1.0)) / (chi + 1.0);
      total += s.intercept * i0;
    }
    total += s.slope * (std::pow(x1, chi + 2.0) - std::pow(x0, chi + 2.0)) / (chi + 2.0);
  }
  return total;
}

}  // namespace

CounterfactualProfit profit_counterfactual_n(const ConvexPwlFn& payment, int n, int m) {
  check_n(n);
  if (m < 2) throw std::invalid_argument("need at least 2 bidders");
  const double xi = (n - 1.0) / (m - 1.0);
  const double chi1 = (m - 2.0 * n + 1.0) / (n - 1.0), chi2 = (m - 2.0 * n + 2.0) / (n - 1.0);
  double v = (chi2 + 1.0) * payment_power(payment, chi2);
  if (chi1 + 1.0 != 0.0) v -= (chi1 + 1.0) * payment_power(payment, chi1);
  CounterfactualProfit out;
  out.per_bidder = v / xi;
  out.total = m * out.per_bidder;
  return out;
}

namespace {

ReserveProfit reserve_point(const AlphaEstimate& alpha, int n, double& r) {
  check_n(n);
  ReserveProfit out;
  double lo = alpha.lower(), hi = alpha.upper();
  if (r < lo || r > hi) {
    out.clamped = true;
    r = std::clamp(r, lo, hi);
  }
  out.p_star = alpha.inverse(r);
  return out;
}

}  // namespace

ReserveProfit profit_counterfactual_reserve(const AlphaEstimate& alpha, int n, double r) {
  ReserveProfit out = reserve_point(alpha, n, r);
  const double ps = out.p_star, k = 1.0 / (n - 1.0);
  double inner = alpha.moment(0.0, ps, 1.0) - alpha.moment(k, ps, 1.0);
  out.revenue = n * (ps * r * (1.0 - std::pow(ps, k)) + inner);
  return out;
}

ReserveProfit profit_counterfactual_reserve_payment(const AlphaEstimate& alpha, int n, double r) {
  ReserveProfit out = reserve_point(alpha, n, r);
  const double ps = out.p_star, k = 1.0 / (n - 1.0), a = fp_exponent(n);
  double ep = alpha.payment(ps);
  double ie;  // \int_{p*}^1 e(p) p^a dp
  if (const ConvexPwlFn* e = alpha.step_payment()) {
    ie = integrate_pwl_power(PwlFn::from_convex(*e), a, ps, 1.0);
  } else {
    // u = p^{1/(n-1)}
    auto g = [&](double u) { return alpha.payment(std::min(1.0, std::pow(u, n - 1))); };
    ie = (n - 1.0) * composite(g, std::pow(ps, k), 1.0, 16);
  }
  double inner = (ie - ep * (n - 1.0) * (1.0 - std::pow(ps, k))) / (n - 1.0);
  out.revenue = n * (ps * r * (1.0 - std::pow(ps, k)) + inner);
  return out;
}

// ------------------------------------------------------------ alpha variance

double asy_variance_alpha(AlphaVarianceMode mode, const AlphaVarianceInputs& in) {
  const double zeta = in.qc_d1 * in.p;
  switch (mode) {
    case AlphaVarianceMode::max_rival:
      return zeta * zeta * in.kappa2;
    case AlphaVarianceMode::symmetric: {
      check_n(in.n);
      return std::pow(in.p, in.n / (in.n - 1.0)) * in.q_d1 * in.q_d1 * in.kappa2 /
             (in.n * (in.n - 1.0));
    }
    case AlphaVarianceMode::asymmetric: {
      if (in.g_minus_i1.empty() || in.g_minus_i1.size() != in.g_i.size())
        throw std::invalid_argument("missing marginals for the asymmetric variance");
      double s = 0.0;
      for (std::size_t i = 0; i < in.g_i.size(); ++i) s += in.g_minus_i1[i] * in.g_minus_i1[i] * in.g_i[i];
      return in.kappa2 * zeta * zeta * in.qc_d1 * s;
    }
  }
  return 0.0;
}

QuantileFit local_quadratic_quantile(const MaxRivalSample& sample, double p, double bandwidth) {
  if (sample.size() < 3) throw std::invalid_argument("need at least 3 observations");
  const std::size_t T = sample.size();
  double h = bandwidth > 0.0 ? bandwidth : 0.5 * std::pow(static_cast<double>(T), -1.0 / 7.0);
  for (;;) {
    Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
    Eigen::Vector3d y = Eigen::Vector3d::Zero();
    int used = 0;
    for (std::size_t t = 0; t < T; ++t) {
      double x = (t + 0.5) / T - p, u = x / h;
      if (std::abs(u) >= 1.0) continue;
      double w = 1.0 - u * u;
      Eigen::Vector3d z(1.0, x, x * x);
      A += w * z * z.transpose();
      y += w * z * sample.values()[t];
      ++used;
    }
    if (used >= 4 || h >= 2.0) {
      Eigen::Vector3d b = A.ldlt().solve(y);
      return QuantileFit{b[0], b[1], 2.0 * b[2]};
    }
    h *= 2.0;
  }
}

}  // namespace auctionshape
