#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <vector>

#include "auctionshape/core.hpp"
#include "auctionshape/smooth.hpp"
#include "auctionshape/winprob.hpp"

namespace auctionshape {

enum class AlphaKind { unsmoothed, smoothed, function };

//! Estimate of the inverse strategy alpha with its payment e and inverse.
class AlphaEstimate {
 public:
  //! Step estimate; the payment is its exact antiderivative.
  static AlphaEstimate unsmoothed(MonotoneStepFn alpha);
  //! Step estimate with a given payment (e.g. the MLE nodes).
  static AlphaEstimate unsmoothed(MonotoneStepFn alpha, ConvexPwlFn payment);
  static AlphaEstimate smoothed(MonotoneStepFn alpha, const SmoothSpec& spec);
  static AlphaEstimate smoothed(std::shared_ptr<const AlphaSmoother> smoother);
  //! Known closed forms. `derivative` may be empty.
  static AlphaEstimate from_function(std::function<double(double)> alpha,
                                     std::function<double(double)> payment,
                                     std::function<double(double)> derivative = {});

  AlphaKind kind() const { return kind_; }
  double operator()(double p) const;
  double payment(double p) const;
  //! alpha'(p). Throws std::logic_error for a step estimate.
  double derivative(double p) const;
  //! sup{p : alpha(p) < v}; 0 below the range, 1 above it.
  double inverse(double v) const;
  double lower() const { return (*this)(0.0); }
  double upper() const { return (*this)(1.0); }

  //! \int_lo^hi alpha(s) s^c ds for c > -1. Exact for step estimates.
  double moment(double c, double lo = 0.0, double hi = 1.0) const;

  //! Step function (unsmoothed) or the smoother's input step function.
  const MonotoneStepFn* step() const;
  //! Payment of a step estimate, else nullptr.
  const ConvexPwlFn* step_payment() const;

 private:
  AlphaKind kind_ = AlphaKind::function;
  MonotoneStepFn step_;
  ConvexPwlFn step_payment_;
  std::shared_ptr<const AlphaSmoother> smoother_;
  std::function<double(double)> f_, e_, d1_;
};

enum class VarianceFormula {
  none,
  bs_symmetric,
  bs_asymmetric,
  mv_symmetric,
  mv_asymmetric,
};

//! Point estimate and plug-in asymptotic variance of sqrt(T)(estimate - truth).
//! The variance is NaN when the required inputs were not supplied.
struct VarianceReport {
  double estimate = 0.0;
  double asymptotic_variance = std::numeric_limits<double>::quiet_NaN();
  VarianceFormula formula = VarianceFormula::none;
};

//! Q_v(tau) = alpha(Q_p(tau)).
double quantile_v(const AlphaEstimate& alpha, const FpModel& fp, double tau);
//! F_v(v) = F_p(alpha^{-1}(v)), clamped to 0 / 1 outside the range of alpha.
double cdf_v(const AlphaEstimate& alpha, const FpModel& fp, double v);
//! f_v(v) = f_p / alpha' at alpha^{-1}(v); 0 outside [alpha(0), alpha(1)].
//! Needs a density model for fp.
double pdf_v_onestep(const AlphaEstimate& alpha, const FpModel& fp, double v);

//! Kernel density estimate on [lo, hi], reflected at both ends.
class ReflectionKde {
 public:
  ReflectionKde(std::vector<double> x, double bandwidth, double lo, double hi,
                Kernel kernel = {}, bool reflect = true);
  double operator()(double v) const;
  double bandwidth() const { return h_; }
  double lower() const { return lo_; }
  double upper() const { return hi_; }
  const std::vector<double>& points() const { return x_; }

 private:
  double raw(double v) const;
  std::vector<double> x_;
  double h_, lo_, hi_;
  Kernel kernel_;
  bool reflect_;
};

//! Two-step density: KDE of pseudo-values on [0, max], reflected at both ends.
ReflectionKde pdf_v_twostep(const std::vector<double>& pseudo_values, double bandwidth,
                            Kernel kernel = {});

//! Q_c(alpha^{-1}(v)).
double bid_function(const AlphaEstimate& alpha, const MonotoneStepFn& rival_quantile, double v);

//! Plug-in ingredients of the asymmetric variance formulas, as functions of p.
struct AsymmetricPlugins {
  std::function<double(double)> qc_d1;        // Q_c'
  std::function<double(double)> qc_d2;        // Q_c''
  std::function<double(double)> fp_pdf;       // f_p
  std::function<double(double)> fp_pdf_d1;    // f_p'
  std::function<double(double)> own_cdf_at_qc;  // G(Q_c(p)), bidder one's bid cdf
  std::function<double(double)> alpha_d1;     // alpha'
};

//! \int\int Gamma(p) Gamma(p*) {min(F(p), F(p*)) - F(p) F(p*)} dp dp* on [lo, hi]
//! for nondecreasing F.
double kernel_double_integral(const std::function<double(double)>& gamma,
                              const std::function<double(double)>& F, double lo = 0.0,
                              double hi = 1.0);

//! V_BS^symm from the pooled bid quantile derivative Q'(u), u in [0,1].
double bs_variance_symmetric(const std::function<double(double)>& q_d1, int n);
//! Same from the pooled bid cdf G on [0, bbar].
double bs_variance_symmetric_g(const std::function<double(double)>& G, double bbar, int n);
//! Same with the empirical pooled G, exact.
double bs_variance_symmetric(const MaxRivalSample& pooled, int n);

double mv_variance_symmetric(const std::function<double(double)>& q_d1, int n);
double mv_variance_symmetric(const MaxRivalSample& pooled, int n);

double bs_variance_asymmetric(const AsymmetricPlugins& plugins);
//! V_BS^a with Gamma_1, Gamma_2 divided by p.
double mv_variance_asymmetric(const AsymmetricPlugins& plugins);

//! e(1)/(n-1) - n/(n-1)^2 \int e p^{(2-n)/(n-1)}, exact for piecewise-linear e.
//! Variance from the empirical pooled bids when given.
VarianceReport bidder_surplus_symmetric(const ConvexPwlFn& payment, int n,
                                        const MaxRivalSample* pooled = nullptr);
//! Same written as \int alpha(s) {n/(n-1) s^{1/(n-1)} - 1} ds.
VarianceReport bidder_surplus_symmetric(const AlphaEstimate& alpha, int n,
                                        const MaxRivalSample* pooled = nullptr);

//! Atom average of alpha(p) p - e(p) over an empirical F_pT.
VarianceReport bidder_surplus_asymmetric(const AlphaEstimate& alpha, const FpModel& fp,
                                         const AsymmetricPlugins* plugins = nullptr);

//! \int alpha dF_p. Symmetric fp: exact for step alpha. Empirical fp: atom
//! average. Min-entropy fp: quadrature.
VarianceReport mean_valuation(const AlphaEstimate& alpha, const FpModel& fp,
                              const MaxRivalSample* pooled = nullptr,
                              const AsymmetricPlugins* plugins = nullptr);
//! {bbar + (n-2) mean bid}/(n-1) from pooled bids.
VarianceReport mean_valuation_shortcut(const MaxRivalSample& pooled, int n);

struct CounterfactualProfit {
  double per_bidder = 0.0;
  double total = 0.0;  // m * per_bidder
};

//! Expected revenue with m symmetric bidders from an n-bidder alpha:
//! per bidder (1/xi) \int alpha(q) q^{(m-n)/(n-1)} (1 - q^{1/(n-1)}) dq, xi = (n-1)/(m-1).
CounterfactualProfit profit_counterfactual_n(const AlphaEstimate& alpha, int n, int m);
//! Same from the payment: \int {(chi2+1) p^chi2 - (chi1+1) p^chi1} e(p) dp / xi,
//! chi_j = (m-2n+j)/(n-1). Throws std::domain_error if the weight is not integrable.
CounterfactualProfit profit_counterfactual_n(const ConvexPwlFn& payment, int n, int m);

struct ReserveProfit {
  double revenue = 0.0;
  double p_star = 0.0;
  bool clamped = false;  // r was outside [alpha(0), alpha(1)]
};

//! PR(r) = n {p* r (1 - p*^{1/(n-1)}) + \int_{p*}^1 alpha(s)(1 - s^{1/(n-1)}) ds}
//! with p* = alpha^{-1}(r), symmetric model.
ReserveProfit profit_counterfactual_reserve(const AlphaEstimate& alpha, int n, double r);
//! Same with the inner term (1/(n-1)) \int_{p*}^1 {e(p) - e(p*)} p^{(2-n)/(n-1)} dp,
//! exact for a step estimate.
ReserveProfit profit_counterfactual_reserve_payment(const AlphaEstimate& alpha, int n, double r);

enum class AlphaVarianceMode { max_rival, symmetric, asymmetric };

struct AlphaVarianceInputs {
  double p = 0.5;
  double kappa2 = 0.6;  // \int k^2, Epanechnikov by default
  double qc_d1 = 0.0;   // Q_c'(p), max-rival and asymmetric modes
  int n = 2;
  double q_d1 = 0.0;    // Q'(p^{1/(n-1)}), symmetric mode
  //! G_{-i1}(Q_c(p)) and g_i(Q_c(p)) for i = 2..n, asymmetric mode.
  std::vector<double> g_minus_i1;
  std::vector<double> g_i;
};

//! Asymptotic variance of the smoothed alpha at p.
double asy_variance_alpha(AlphaVarianceMode mode, const AlphaVarianceInputs& in);

struct QuantileFit {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

//! Local quadratic fit of the empirical quantile (t/T, b_(t)) at p with
//! Epanechnikov weights. bandwidth <= 0 selects 0.5 T^{-1/7}.
QuantileFit local_quadratic_quantile(const MaxRivalSample& sample, double p,
                                     double bandwidth = 0.0);

}  // namespace auctionshape
