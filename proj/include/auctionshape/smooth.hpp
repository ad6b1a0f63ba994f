#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "auctionshape/core.hpp"

namespace auctionshape {

enum class KernelFamily { epanechnikov, gaussian };

//! Second-order symmetric kernel with closed-form antiderivatives.
struct Kernel {
  KernelFamily family = KernelFamily::epanechnikov;

  double pdf(double u) const;
  double cdf(double u) const;
  double deriv(double u) const;
  //! \int_{-inf}^u t k(t) dt
  double first_moment_cdf(double u) const;
  //! \int_a^b u^j k(u) du for j = 0..4; infinite limits allowed.
  double partial_moment(int j, double a, double b) const;
  //! Half-width of the support (infinity for the Gaussian).
  double support() const;
  //! \int k^2
  double kappa2() const;
  //! \int u^2 k
  double mu2() const;
  //! \int k'^2
  double kappa2_deriv() const;
};

enum class TransformKind { identity, alpha, log, sqrt, fifthroot, custom };

//! Strictly increasing transform psi with three derivatives and an inverse.
//! psi may be -inf at 0 (log); derivatives may be +inf at 0.
struct Transform {
  TransformKind kind = TransformKind::identity;
  std::string name = "identity";
  std::function<double(double)> f, d1, d2, d3, inv;

  double at0() const { return f(0.0); }
  double at1() const { return f(1.0); }

  static Transform identity();
  static Transform log();
  static Transform sqrt();
  static Transform fifthroot();
  static Transform custom(std::string name, std::function<double(double)> f,
                          std::function<double(double)> d1, std::function<double(double)> d2,
                          std::function<double(double)> d3, std::function<double(double)> inv);
  //! psi = alpha for a known smooth strictly increasing alpha (infeasible benchmark).
  static Transform from_alpha(std::function<double(double)> a, std::function<double(double)> d1,
                              std::function<double(double)> d2, std::function<double(double)> d3,
                              std::function<double(double)> inv);
  //! Data-driven stand-in for psi = alpha: piecewise-linear interpolation of
  //! the step levels at piece midpoints, plus eps*p so it is strictly increasing.
  static Transform alpha_pilot(const MonotoneStepFn& alpha);
  static Transform by_name(const std::string& name);
};

enum class BoundaryScheme { none, boundary_kernel, reflection };
enum class Placement { psi_prime_inside, psi_prime_outside };

struct SmoothSpec {
  Kernel kernel;
  Transform transform = Transform::identity();
  double bandwidth = 0.1;
  BoundaryScheme boundary = BoundaryScheme::boundary_kernel;
  Placement placement = Placement::psi_prime_inside;
  //! Cumulative-maximum post-processing of the reflected extension.
  bool monotone_extension = false;
  //! Auxiliary bandwidth for the reflection slope d; 0 means the main bandwidth.
  double aux_bandwidth = 0.0;
  //! Quadratic boundary kernel (also matches the second moment) for the
  //! boundary_kernel scheme. Experimental.
  bool quadratic_boundary_kernel = false;
};

struct BoundaryWeights {
  double w1 = 1.0;
  double w2 = 0.0;
  double w3 = 0.0;  // quadratic term, only for the quadratic boundary kernel
};

//! Kernel weights (w1 + w2 u) k(u) on u in [lo, hi] with unit mass and zero
//! first moment, where u = (psi(s) - psi(p))/h. Gaussian family.
BoundaryWeights boundary_weights(double p, double h, const Transform& psi);
//! Same for any kernel family, from the truncated moments.
BoundaryWeights boundary_weights_general(double p, double h, const Transform& psi,
                                         const Kernel& kernel);
BoundaryWeights boundary_weights_range(double lo, double hi, const Kernel& kernel);
//! (w1 + w2 u + w3 u^2) k(u) matching moments 0, 1, 2 to (1, 0, mu2).
BoundaryWeights quadratic_boundary_weights_range(double lo, double hi, const Kernel& kernel);

enum class Side { left, right };

//! Slope over level at the boundary of a continuous least-squares line fit
//! of the step function on [1-h_d, 1] (right) or [0, h_d] (left).
double estimate_d(const MonotoneStepFn& alpha, Side side, double h_d);

//! Cubic reflection maps in the normalized coordinate
//! psi~ = (psi - psi(1)) / psi'(1).
struct ReflectionState {
  double d_hat_right = 0.0;
  double d_hat_left = 0.0;
  bool left_active = false;
  double rho2 = 0.0, rho3 = 0.0;    // rho(s) = s + rho2 s^2 + rho3 s^3
  double rho0_2 = 0.0, rho0_3 = 0.0;  // rho0(u) = u + rho0_2 u^2 + rho0_3 u^3
  bool monotone = false;
};

ReflectionState make_reflection_state(const MonotoneStepFn& alpha, const Transform& psi,
                                      double h_d, bool monotone = false);
//! Same from known boundary slopes d = alpha'(1)/alpha(1), d0 = alpha'(0)/alpha(0).
ReflectionState make_reflection_state(double d_right, double d_left, bool left_active,
                                      const Transform& psi, bool monotone = false);

//! Extension of alpha to q > 1 (right) or q < 0 (left, when active). Inside
//! [0,1] returns alpha(q). Without the monotone option the extension is the
//! cubic-reflection formula; with it the right extension is the running
//! maximum from 1 outward (running minimum to the left).
double reflect_extend(const std::function<double(double)>& alpha, const ReflectionState& state,
                      const Transform& psi, double q);

//! Smoothed alpha evaluator for one step function and spec.
class AlphaSmoother {
 public:
  AlphaSmoother(MonotoneStepFn alpha, SmoothSpec spec);
  //! Reflection scheme with a supplied state instead of an estimated one.
  AlphaSmoother(MonotoneStepFn alpha, SmoothSpec spec, const ReflectionState& state);

  double operator()(double p) const;
  double derivative(double p) const;
  const SmoothSpec& spec() const { return spec_; }
  const ReflectionState& reflection() const { return refl_; }
  const MonotoneStepFn& alpha() const { return alpha_; }

 private:
  double inside(double p) const;
  double outside(double p) const;
  double reflected(double p, bool derivative) const;
  double extension_integral(double xp, double ht, double ulo, double uhi, bool right,
                            bool derivative, const BoundaryWeights& w) const;

  MonotoneStepFn alpha_;
  SmoothSpec spec_;
  std::vector<double> psi_knots_;
  double psi0_, psi1_, dpsi1_;
  ReflectionState refl_;
};

double smooth_alpha(const MonotoneStepFn& alpha, const SmoothSpec& spec, double p);
double smooth_alpha_reflected(const MonotoneStepFn& alpha, const ReflectionState& state,
                              const Transform& psi, double h, double p);
double alpha_derivative(const MonotoneStepFn& alpha, const SmoothSpec& spec, double p,
                        bool clamp_nonnegative = false);

//! Running maximum of values.
std::vector<double> cummax(std::vector<double> values);
//! Running maximum of f on an equispaced grid, as a step function with the
//! grid points as piece midpoints.
MonotoneStepFn monotonize_cummax(const std::function<double(double)>& f,
                                 std::size_t grid_size = 2001);

//! Exact \int_0^p of a smoothed alpha by Gauss-Legendre panels.
double integrate_smoothed(const std::function<double(double)>& a, double p, int panels = 64);

enum class JackknifeVariant { breve, hat };

double jackknife_alpha(const MaxRivalSample& sample, JackknifeVariant variant, double p,
                       const SmoothSpec* spec = nullptr);

}  // namespace auctionshape
