#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace auctionshape::numeric {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684759;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

//! Fixed 10-point Gauss-Legendre rule on [a,b]; exact for degree <= 19.
template <class F>
double gauss_legendre(F&& f, double a, double b) {
  using rule = boost::math::quadrature::gauss<double, 10>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  // boost stores nonnegative abscissae; x[0] == 0 for even rules is absent
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      s += w[i] * f(c);
    } else {
      s += w[i] * (f(c + r * x[i]) + f(c - r * x[i]));
    }
  }
  return s * r;
}

//! Adaptive Gauss-Kronrod integration.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, unsigned max_depth = 12);

//! Adaptive integration on [a, b) where f may be singular at a.
double integrate_singular_left(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12);

//! Bracketed root of f on [lo, hi] (TOMS 748). Requires a sign change.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double xtol = 1e-14, int max_iter = 200);

//! Trapezoid rule on a grid.
double trapezoid(const std::vector<double>& x, const std::vector<double>& y);

//! Equispaced grid of n points on [a,b].
std::vector<double> linspace(double a, double b, std::size_t n);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);  // linear interpolation

}  // namespace auctionshape::numeric
