#include "auctionshape/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/numeric.hpp"

namespace auctionshape {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGaussCut = 9.0;

double cut(const Kernel& k) { return k.family == KernelFamily::epanechnikov ? 1.0 : kGaussCut; }

// Antiderivative of (w1 + w2 u + w3 u^2) k(u).
double W(const Kernel& k, const BoundaryWeights& w, double u) {
  double s = w.w1 * k.cdf(u) + w.w2 * k.first_moment_cdf(u);
  if (w.w3 != 0.0) s += w.w3 * k.partial_moment(2, -kInf, u);
  return s;
}

double wk(const Kernel& k, const BoundaryWeights& w, double u) {
  return (w.w1 + w.w2 * u + w.w3 * u * u) * k.pdf(u);
}

// u^j phi(u), zero at infinity.
double upow_phi(int j, double u) {
  if (std::abs(u) > 60.0) return 0.0;
  return std::pow(u, j) * numeric::normal_pdf(u);
}

void check_unit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("argument outside [0,1]");
}

double det3(double a, double b, double c, double d, double e, double f, double g, double h,
            double i) {
  return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

}  // namespace

// ------------------------------------------------------------------ Kernel

double Kernel::pdf(double u) const {
  if (family == KernelFamily::gaussian) return numeric::normal_pdf(u);
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double Kernel::cdf(double u) const {
  if (family == KernelFamily::gaussian) return numeric::normal_cdf(u);
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return 0.5 + 0.75 * u - 0.25 * u * u * u;
}

double Kernel::deriv(double u) const {
  if (family == KernelFamily::gaussian) return -u * numeric::normal_pdf(u);
  return std::abs(u) < 1.0 ? -1.5 * u : 0.0;
}

double Kernel::first_moment_cdf(double u) const {
  if (family == KernelFamily::gaussian) return std::isinf(u) ? 0.0 : -numeric::normal_pdf(u);
  if (std::abs(u) >= 1.0) return 0.0;
  double u2 = u * u;
  return 0.75 * (0.5 * u2 - 0.25 * u2 * u2 - 0.25);
}

double Kernel::partial_moment(int j, double a, double b) const {
  if (j < 0 || j > 4) throw std::invalid_argument("moment order must be 0..4");
  if (!(b > a)) return 0.0;
  if (family == KernelFamily::epanechnikov) {
    a = std::clamp(a, -1.0, 1.0);
    b = std::clamp(b, -1.0, 1.0);
    auto F = [j](double u) {
      return 0.75 * (std::pow(u, j + 1) / (j + 1) - std::pow(u, j + 3) / (j + 3));
    };
    return F(b) - F(a);
  }
  // int u^j phi = -u^{j-1} phi + (j-1) int u^{j-2} phi
  double m0 = numeric::normal_cdf(b) - numeric::normal_cdf(a);
  double m1 = upow_phi(0, a) - upow_phi(0, b);
  if (j == 0) return m0;
  if (j == 1) return m1;
  double m2 = m0 + upow_phi(1, a) - upow_phi(1, b);
  if (j == 2) return m2;
  double m3 = 2.0 * m1 + upow_phi(2, a) - upow_phi(2, b);
  if (j == 3) return m3;
  return 3.0 * m2 + upow_phi(3, a) - upow_phi(3, b);
}

double Kernel::support() const { return family == KernelFamily::epanechnikov ? 1.0 : kInf; }

double Kernel::kappa2() const {
  return family == KernelFamily::epanechnikov ? 0.6 : 0.5 / std::sqrt(M_PI);
}

double Kernel::mu2() const { return family == KernelFamily::epanechnikov ? 0.2 : 1.0; }

double Kernel::kappa2_deriv() const {
  return family == KernelFamily::epanechnikov ? 1.5 : 0.25 / std::sqrt(M_PI);
}

// --------------------------------------------------------------- Transform

Transform Transform::identity() {
  return Transform{TransformKind::identity,
                   "identity",
                   [](double p) { return p; },
                   [](double) { return 1.0; },
                   [](double) { return 0.0; },
                   [](double) { return 0.0; },
                   [](double x) { return x; }};
}

Transform Transform::log() {
  return Transform{TransformKind::log,
                   "log",
                   [](double p) { return std::log(p); },
                   [](double p) { return 1.0 / p; },
                   [](double p) { return -1.0 / (p * p); },
                   [](double p) { return 2.0 / (p * p * p); },
                   [](double x) { return std::exp(x); }};
}

Transform Transform::sqrt() {
  return Transform{TransformKind::sqrt,
                   "sqrt",
                   [](double p) { return std::sqrt(p); },
                   [](double p) { return 0.5 / std::sqrt(p); },
                   [](double p) { return -0.25 * std::pow(p, -1.5); },
                   [](double p) { return 0.375 * std::pow(p, -2.5); },
                   [](double x) { return x * std::abs(x); }};
}

Transform Transform::fifthroot() {
  return Transform{TransformKind::fifthroot,
                   "fifthroot",
                   [](double p) { return std::pow(p, 0.2); },
                   [](double p) { return 0.2 * std::pow(p, -0.8); },
                   [](double p) { return -0.16 * std::pow(p, -1.8); },
                   [](double p) { return 0.288 * std::pow(p, -2.8); },
                   [](double x) {
                     double x2 = x * x;
                     return x2 * x2 * x;
                   }};
}

Transform Transform::custom(std::string name, std::function<double(double)> f,
                            std::function<double(double)> d1, std::function<double(double)> d2,
                            std::function<double(double)> d3, std::function<double(double)> inv) {
  return Transform{TransformKind::custom, std::move(name), std::move(f), std::move(d1),
                   std::move(d2), std::move(d3), std::move(inv)};
}

Transform Transform::from_alpha(std::function<double(double)> a, std::function<double(double)> d1,
                                std::function<double(double)> d2, std::function<double(double)> d3,
                                std::function<double(double)> inv) {
  return Transform{TransformKind::alpha, "alpha", std::move(a), std::move(d1),
                   std::move(d2), std::move(d3), std::move(inv)};
}

Transform Transform::alpha_pilot(const MonotoneStepFn& alpha) {
  const auto& k = alpha.knots();
  const auto& l = alpha.levels();
  auto xs = std::make_shared<std::vector<double>>();
  auto ys = std::make_shared<std::vector<double>>();
  for (std::size_t j = 0; j < l.size(); ++j) {
    xs->push_back(0.5 * (k[j] + k[j + 1]));
    ys->push_back(l[j]);
  }
  double range = l.back() - l.front();
  double eps = 1e-3 * std::max({range, std::abs(l.back()), 1e-12});
  if (xs->size() == 1) {
    xs->push_back(xs->front() + 0.5);
    ys->push_back(ys->front());
  }
  // piecewise-linear with linear extrapolation beyond the end midpoints
  auto seg = [xs](double p) {
    auto it = std::upper_bound(xs->begin(), xs->end(), p);
    std::size_t i = it == xs->begin() ? 0 : static_cast<std::size_t>(it - xs->begin()) - 1;
    return std::min(i, xs->size() - 2);
  };
  auto slope = [xs, ys](std::size_t i) {
    return ((*ys)[i + 1] - (*ys)[i]) / ((*xs)[i + 1] - (*xs)[i]);
  };
  auto f = [xs, ys, seg, slope, eps](double p) {
    std::size_t i = seg(p);
    return (*ys)[i] + slope(i) * (p - (*xs)[i]) + eps * p;
  };
  auto d1 = [seg, slope, eps](double p) { return slope(seg(p)) + eps; };
  auto zero = [](double) { return 0.0; };
  auto inv = [f](double x) {
    double lo = -1.0, hi = 2.0;
    while (f(lo) > x) lo -= 1.0 + (hi - lo);
    while (f(hi) < x) hi += 1.0 + (hi - lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      double m = 0.5 * (lo + hi);
      (f(m) < x ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
  };
  return Transform{TransformKind::alpha, "alpha", f, d1, zero, zero, inv};
}

Transform Transform::by_name(const std::string& name) {
  if (name == "identity") return identity();
  if (name == "log") return log();
  if (name == "sqrt") return sqrt();
  if (name == "fifthroot") return fifthroot();
  throw std::invalid_argument("unknown transform '" + name + "'");
}

// --------------------------------------------------------- boundary weights

BoundaryWeights boundary_weights_range(double lo, double hi, const Kernel& kernel) {
  if (!(hi > lo)) throw std::invalid_argument("degenerate boundary kernel range");
  double m0 = kernel.partial_moment(0, lo, hi);
  double m1 = kernel.partial_moment(1, lo, hi);
  double m2 = kernel.partial_moment(2, lo, hi);
  double den = m0 * m2 - m1 * m1;
  if (!(den > 1e-300) || !(m2 > 0.0)) throw std::invalid_argument("degenerate boundary kernel range");
  BoundaryWeights w;
  w.w1 = m2 / den;
  w.w2 = -m1 / den;
  return w;
}

BoundaryWeights quadratic_boundary_weights_range(double lo, double hi, const Kernel& kernel) {
  if (!(hi > lo)) throw std::invalid_argument("degenerate boundary kernel range");
  double m[5];
  for (int j = 0; j < 5; ++j) m[j] = kernel.partial_moment(j, lo, hi);
  double mu2 = kernel.mu2();
  double D = det3(m[0], m[1], m[2], m[1], m[2], m[3], m[2], m[3], m[4]);
  if (!(std::abs(D) > 1e-300)) throw std::invalid_argument("degenerate boundary kernel range");
  BoundaryWeights w;
  w.w1 = det3(1.0, m[1], m[2], 0.0, m[2], m[3], mu2, m[3], m[4]) / D;
  w.w2 = det3(m[0], 1.0, m[2], m[1], 0.0, m[3], m[2], mu2, m[4]) / D;
  w.w3 = det3(m[0], m[1], 1.0, m[1], m[2], 0.0, m[2], m[3], mu2) / D;
  return w;
}

BoundaryWeights boundary_weights_general(double p, double h, const Transform& psi,
                                         const Kernel& kernel) {
  check_unit(p);
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  double x = psi.f(p);
  return boundary_weights_range((psi.at0() - x) / h, (psi.at1() - x) / h, kernel);
}

BoundaryWeights boundary_weights(double p, double h, const Transform& psi) {
  return boundary_weights_general(p, h, psi, Kernel{KernelFamily::gaussian});
}

// --------------------------------------------------------------- reflection

double estimate_d(const MonotoneStepFn& alpha, Side side, double h_d) {
  if (!(h_d > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  h_d = std::min(h_d, 1.0);
  const double a = side == Side::right ? 1.0 - h_d : 0.0;
  const double b = side == Side::right ? 1.0 : h_d;
  const double origin = side == Side::right ? 1.0 : 0.0;
  const auto& k = alpha.knots();
  const auto& l = alpha.levels();
  std::size_t in_window = 0;
  for (double x : k)
    if (x >= a && x <= b) ++in_window;
  if (in_window < 2) throw std::invalid_argument("window too narrow");
  // continuous least squares of the step function on a + slope (s - origin)
  double S0 = 0, S1 = 0, S2 = 0, Y0 = 0, Y1 = 0;
  for (std::size_t j = 0; j < l.size(); ++j) {
    double lo = std::max(j == 0 ? 0.0 : k[j], a), hi = std::min(j + 1 == l.size() ? 1.0 : k[j + 1], b);
    if (!(hi > lo)) continue;
    double t0 = lo - origin, t1 = hi - origin;
    double i0 = t1 - t0, i1 = 0.5 * (t1 * t1 - t0 * t0), i2 = (t1 * t1 * t1 - t0 * t0 * t0) / 3.0;
    S0 += i0;
    S1 += i1;
    S2 += i2;
    Y0 += l[j] * i0;
    Y1 += l[j] * i1;
  }
  double slope = (S0 * Y1 - S1 * Y0) / (S0 * S2 - S1 * S1);
  double level = (Y0 - slope * S1) / S0;
  if (!(level > 0.0)) throw std::domain_error("alpha vanishes at the boundary");
  return slope / level;
}

ReflectionState make_reflection_state(double d_right, double d_left, bool left_active,
                                      const Transform& psi, bool monotone) {
  ReflectionState s;
  s.monotone = monotone;
  s.d_hat_right = d_right;
  double c1 = psi.d2(1.0) / psi.d1(1.0);  // psi~''(1)
  s.rho2 = d_right;
  s.rho3 = d_right * d_right - c1 * d_right / 6.0;
  s.left_active = left_active;
  if (left_active) {
    s.d_hat_left = d_left;
    double c0 = psi.d2(0.0) / psi.d1(0.0);
    s.rho0_2 = -d_left;
    s.rho0_3 = d_left * d_left - c0 * d_left / 6.0;
  }
  return s;
}

namespace {

bool left_reflection_possible(const Transform& psi) {
  double f0 = psi.at0(), d0 = psi.d1(0.0), dd0 = psi.d2(0.0);
  return std::isfinite(f0) && std::isfinite(d0) && d0 > 0.0 && std::isfinite(dd0);
}

double estimate_d_widening(const MonotoneStepFn& alpha, Side side, double h_d, bool* ok) {
  for (double h = h_d; h <= 0.5 + 1e-12; h *= 2.0) {
    try {
      double d = estimate_d(alpha, side, h);
      if (ok) *ok = true;
      return d;
    } catch (const std::exception&) {
    }
  }
  if (ok) *ok = false;
  return 0.0;
}

double rho(const ReflectionState& s, double x) { return x + s.rho2 * x * x + s.rho3 * x * x * x; }
double rho_d(const ReflectionState& s, double x) {
  return 1.0 + 2.0 * s.rho2 * x + 3.0 * s.rho3 * x * x;
}
double rho0(const ReflectionState& s, double u) {
  return u + s.rho0_2 * u * u + s.rho0_3 * u * u * u;
}
double rho0_d(const ReflectionState& s, double u) {
  return 1.0 + 2.0 * s.rho0_2 * u + 3.0 * s.rho0_3 * u * u;
}

// Raw extension values; x is the normalized psi coordinate for the right
// side and the left distance u0 in p units for the left side.
double ext_right_raw(const std::function<double(double)>& a, const ReflectionState& s, double x) {
  return a(std::clamp(1.0 - rho(s, x), 0.0, 1.0)) * rho_d(s, x);
}
double ext_left_raw(const std::function<double(double)>& a, const ReflectionState& s, double u0) {
  return a(std::clamp(rho0(s, u0), 0.0, 1.0)) * rho0_d(s, u0);
}

}  // namespace

ReflectionState make_reflection_state(const MonotoneStepFn& alpha, const Transform& psi, double h_d,
                                      bool monotone) {
  double d_right = estimate_d_widening(alpha, Side::right, h_d, nullptr);
  bool left = left_reflection_possible(psi) && alpha(0.0) > 1e-12 * std::max(1.0, alpha(1.0));
  double d_left = 0.0;
  if (left) {
    double h0 = h_d * psi.d1(1.0) / psi.d1(0.0);
    bool ok = false;
    d_left = estimate_d_widening(alpha, Side::left, std::max(h0, 1e-12), &ok);
    left = ok;
  }
  return make_reflection_state(d_right, d_left, left, psi, monotone);
}

double reflect_extend(const std::function<double(double)>& alpha, const ReflectionState& state,
                      const Transform& psi, double q) {
  if (q >= 0.0 && q <= 1.0) return alpha(q);
  if (q > 1.0) {
    double x = (psi.f(q) - psi.at1()) / psi.d1(1.0);
    if (!state.monotone) return ext_right_raw(alpha, state, x);
    double m = alpha(1.0);
    const int n = 256;
    for (int i = 1; i <= n; ++i) m = std::max(m, ext_right_raw(alpha, state, x * i / n));
    return m;
  }
  if (!state.left_active) throw std::domain_error("left reflection inactive");
  double u0 = -q;  // psi extended linearly below 0
  if (!state.monotone) return ext_left_raw(alpha, state, u0);
  double m = alpha(0.0);
  const int n = 256;
  for (int i = 1; i <= n; ++i) m = std::min(m, ext_left_raw(alpha, state, u0 * i / n));
  return m;
}

// ---------------------------------------------------------------- smoother

AlphaSmoother::AlphaSmoother(MonotoneStepFn alpha, SmoothSpec spec)
    : alpha_(std::move(alpha)), spec_(std::move(spec)) {
  if (spec_.bandwidth < 0.0) throw std::invalid_argument("bandwidth must be nonnegative");
  const auto& k = alpha_.knots();
  psi_knots_.resize(k.size());
  for (std::size_t j = 0; j < k.size(); ++j) psi_knots_[j] = spec_.transform.f(k[j]);
  psi_knots_.front() = spec_.transform.at0();
  psi_knots_.back() = spec_.transform.at1();
  psi0_ = spec_.transform.at0();
  psi1_ = spec_.transform.at1();
  dpsi1_ = spec_.transform.d1(1.0);
  if (spec_.boundary == BoundaryScheme::reflection) {
    if (spec_.kernel.family != KernelFamily::epanechnikov)
      throw std::invalid_argument("reflection requires the Epanechnikov kernel");
    double hd = spec_.aux_bandwidth > 0.0 ? spec_.aux_bandwidth : spec_.bandwidth / dpsi1_;
    if (spec_.bandwidth > 0.0)
      refl_ = make_reflection_state(alpha_, spec_.transform, std::min(hd, 0.5),
                                    spec_.monotone_extension);
  }
}

AlphaSmoother::AlphaSmoother(MonotoneStepFn alpha, SmoothSpec spec, const ReflectionState& state)
    : AlphaSmoother(std::move(alpha), [&] {
        spec.boundary = BoundaryScheme::none;
        return spec;
      }()) {
  if (spec_.kernel.family != KernelFamily::epanechnikov)
    throw std::invalid_argument("reflection requires the Epanechnikov kernel");
  spec_.boundary = BoundaryScheme::reflection;
  spec_.monotone_extension = state.monotone;
  refl_ = state;
}

double AlphaSmoother::operator()(double p) const {
  check_unit(p);
  if (spec_.bandwidth == 0.0) return alpha_(p);
  if (spec_.boundary == BoundaryScheme::reflection) return reflected(p, false);
  if (spec_.placement == Placement::psi_prime_outside) return outside(p);
  return inside(p);
}

double AlphaSmoother::derivative(double p) const {
  check_unit(p);
  if (spec_.bandwidth == 0.0) return 0.0;
  if (spec_.boundary == BoundaryScheme::none) {
    const Kernel& K = spec_.kernel;
    const double h = spec_.bandwidth;
    double xp = spec_.transform.f(std::max(p, 1e-300));
    double c = cut(K);
    auto lo_it = std::upper_bound(psi_knots_.begin() + 1, psi_knots_.end(), xp - c * h);
    std::size_t j = static_cast<std::size_t>(lo_it - (psi_knots_.begin() + 1));
    double s = 0.0;
    for (; j < alpha_.pieces() && psi_knots_[j] < xp + c * h; ++j) {
      double u0 = std::max((psi_knots_[j] - xp) / h, -c), u1 = std::min((psi_knots_[j + 1] - xp) / h, c);
      s += alpha_.levels()[j] * (K.pdf(u0) - K.pdf(u1));
    }
    return s * spec_.transform.d1(std::max(p, 1e-300)) / h;
  }
  if (spec_.kernel.family != KernelFamily::epanechnikov)
    throw std::invalid_argument("boundary-corrected derivatives require the Epanechnikov kernel");
  if (spec_.boundary == BoundaryScheme::reflection) {
    double lo = (psi0_ - spec_.transform.f(std::max(p, 1e-300))) / spec_.bandwidth;
    if (refl_.left_active || lo <= -1.0) return reflected(p, true);
    // position-dependent weights on the left: differentiate the value numerically
    double d = 1e-4 * std::min(spec_.bandwidth / spec_.transform.d1(std::max(p, 1e-12)), 0.1);
    auto f = [this](double q) { return reflected(q, false); };
    if (p - 2 * d < 0.0)
      return (-3.0 * f(p) + 4.0 * f(p + d) - f(p + 2 * d)) / (2 * d);
    if (p + 2 * d > 1.0)
      return (3.0 * f(p) - 4.0 * f(p - d) + f(p - 2 * d)) / (2 * d);
    return (-f(p + 2 * d) + 8.0 * f(p + d) - 8.0 * f(p - d) + f(p - 2 * d)) / (12 * d);
  }
  // boundary_kernel scheme: derivative from the reflected extension
  AlphaSmoother r(alpha_, SmoothSpec{spec_.kernel, spec_.transform, spec_.bandwidth,
                                     BoundaryScheme::reflection, spec_.placement,
                                     spec_.monotone_extension, spec_.aux_bandwidth, false});
  return r.reflected(p, true);
}

double AlphaSmoother::inside(double p) const {
  const Kernel& K = spec_.kernel;
  const double h = spec_.bandwidth;
  double xp = spec_.transform.f(std::max(p, 1e-300));
  double lo = (psi0_ - xp) / h, hi = (psi1_ - xp) / h;
  BoundaryWeights w;
  if (spec_.boundary == BoundaryScheme::boundary_kernel) {
    w = spec_.quadratic_boundary_kernel ? quadratic_boundary_weights_range(lo, hi, K)
                                        : boundary_weights_range(lo, hi, K);
  }
  double c = cut(K);
  auto lo_it = std::upper_bound(psi_knots_.begin() + 1, psi_knots_.end(), xp - c * h);
  std::size_t j = static_cast<std::size_t>(lo_it - (psi_knots_.begin() + 1));
  double s = 0.0;
  for (; j < alpha_.pieces() && psi_knots_[j] < xp + c * h; ++j) {
    double u0 = std::max((psi_knots_[j] - xp) / h, -c), u1 = std::min((psi_knots_[j + 1] - xp) / h, c);
    s += alpha_.levels()[j] * (W(K, w, u1) - W(K, w, u0));
  }
  return s;
}

double AlphaSmoother::outside(double p) const {
  const Kernel& K = spec_.kernel;
  const Transform& psi = spec_.transform;
  const double h = spec_.bandwidth;
  double pe = std::max(p, 1e-12);
  double xp = psi.f(pe);
  double lo = (psi0_ - xp) / h, hi = (psi1_ - xp) / h;
  BoundaryWeights w;
  if (spec_.boundary == BoundaryScheme::boundary_kernel) {
    w = spec_.quadratic_boundary_kernel ? quadratic_boundary_weights_range(lo, hi, K)
                                        : boundary_weights_range(lo, hi, K);
  }
  double c = cut(K);
  double a = std::max(lo, -c), b = std::min(hi, c);
  auto lo_it = std::upper_bound(psi_knots_.begin() + 1, psi_knots_.end(), xp + a * h);
  std::size_t j = static_cast<std::size_t>(lo_it - (psi_knots_.begin() + 1));
  double s = 0.0;
  for (; j < alpha_.pieces() && psi_knots_[j] < xp + b * h; ++j) {
    double u0 = std::max((psi_knots_[j] - xp) / h, a), u1 = std::min((psi_knots_[j + 1] - xp) / h, b);
    if (!(u1 > u0)) continue;
    int panels = std::max(1, static_cast<int>(std::ceil((u1 - u0) / 0.25)));
    double step = (u1 - u0) / panels;
    for (int q = 0; q < panels; ++q) {
      s += alpha_.levels()[j] * numeric::gauss_legendre(
                                    [&](double u) {
                                      double sp = psi.inv(xp + h * u);
                                      return wk(K, w, u) / psi.d1(sp);
                                    },
                                    u0 + q * step, u0 + (q + 1) * step);
    }
  }
  return s * psi.d1(pe);
}

double AlphaSmoother::extension_integral(double xp, double ht, double ulo, double uhi, bool right,
                                         bool derivative, const BoundaryWeights& w) const {
  if (!(uhi > ulo)) return 0.0;
  const Kernel& K = spec_.kernel;
  const Transform& psi = spec_.transform;
  auto a = [this](double q) { return alpha_(q); };
  // x -> extension value
  double psi0 = psi0_, dpsi0 = right ? 1.0 : psi.d1(0.0);
  auto value_at = [&](double x) {
    if (right) return ext_right_raw(a, refl_, x);
    double u0 = (psi0 - psi1_ - dpsi1_ * x) / dpsi0;
    return ext_left_raw(a, refl_, u0);
  };
  auto kern = [&](double u) { return derivative ? -K.deriv(u) : wk(K, w, u); };

  if (refl_.monotone) {
    // running max (right) / min (left) outward from the boundary on a fine grid
    const int cells = 256;
    double xb = right ? 0.0 : (psi0 - psi1_) / dpsi1_;
    double xlo = xp + ht * ulo, xhi = xp + ht * uhi;
    double xfar = right ? xhi : xlo;
    double span = std::abs(xfar - xb);
    double run = right ? alpha_(1.0) : alpha_(0.0);
    double s = 0.0;
    for (int i = 0; i < cells; ++i) {
      double x0 = xb + (right ? 1 : -1) * span * i / cells;
      double x1 = xb + (right ? 1 : -1) * span * (i + 1) / cells;
      double v = value_at(0.5 * (x0 + x1));
      run = right ? std::max(run, v) : std::min(run, v);
      double ua = (std::min(x0, x1) - xp) / ht, ub = (std::max(x0, x1) - xp) / ht;
      ua = std::max(ua, ulo);
      ub = std::min(ub, uhi);
      if (!(ub > ua)) continue;
      if (derivative)
        s += run * (K.pdf(ua) - K.pdf(ub));
      else
        s += run * (W(K, w, ub) - W(K, w, ua));
    }
    return s;
  }

  // breakpoints where the reflected argument crosses a knot of alpha_T
  std::vector<double> cuts{ulo, uhi};
  const auto& k = alpha_.knots();
  auto arg = [&](double u) {
    double x = xp + ht * u;
    if (right) return 1.0 - rho(refl_, x);
    double u0 = (psi0 - psi1_ - dpsi1_ * x) / dpsi0;
    return rho0(refl_, u0);
  };
  const int probe = 64;
  for (int i = 0; i < probe; ++i) {
    double ua = ulo + (uhi - ulo) * i / probe, ub = ulo + (uhi - ulo) * (i + 1) / probe;
    double ga = arg(ua), gb = arg(ub);
    double gl = std::min(ga, gb), gh = std::max(ga, gb);
    auto it = std::upper_bound(k.begin(), k.end(), gl);
    for (; it != k.end() && *it < gh; ++it) {
      double target = *it, l = ua, r = ub;
      for (int b = 0; b < 100 && r - l > 1e-15; ++b) {
        double m = 0.5 * (l + r);
        ((arg(m) < target) == (ga < target) ? l : r) = m;
      }
      cuts.push_back(0.5 * (l + r));
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    s += numeric::gauss_legendre([&](double u) { return value_at(xp + ht * u) * kern(u); }, cuts[i],
                                 cuts[i + 1]);
  }
  return s;
}

double AlphaSmoother::reflected(double p, bool derivative) const {
  const Kernel& K = spec_.kernel;
  const Transform& psi = spec_.transform;
  const double h = spec_.bandwidth;
  double pe = std::max(p, 1e-300);
  double xpsi = psi.f(pe);
  double ht = h / dpsi1_;
  double xp = (xpsi - psi1_) / dpsi1_;
  double lo = (psi0_ - xpsi) / h, hi = (psi1_ - xpsi) / h;
  BoundaryWeights w;
  if (!refl_.left_active && lo > -1.0 && !derivative) w = boundary_weights_range(lo, kInf, K);
  auto lo_it = std::upper_bound(psi_knots_.begin() + 1, psi_knots_.end(), xpsi - h);
  std::size_t j = static_cast<std::size_t>(lo_it - (psi_knots_.begin() + 1));
  double s = 0.0;
  for (; j < alpha_.pieces() && psi_knots_[j] < xpsi + h; ++j) {
    double u0 = std::max((psi_knots_[j] - xpsi) / h, -1.0);
    double u1 = std::min((psi_knots_[j + 1] - xpsi) / h, 1.0);
    if (derivative)
      s += alpha_.levels()[j] * (K.pdf(u0) - K.pdf(u1));
    else
      s += alpha_.levels()[j] * (W(K, w, u1) - W(K, w, u0));
  }
  if (hi < 1.0) s += extension_integral(xp, ht, std::max(hi, -1.0), 1.0, true, derivative, w);
  if (refl_.left_active && lo > -1.0)
    s += extension_integral(xp, ht, -1.0, std::min(lo, 1.0), false, derivative, w);
  if (derivative) return s * psi.d1(pe) / h;
  return s;
}

double smooth_alpha(const MonotoneStepFn& alpha, const SmoothSpec& spec, double p) {
  if (spec.boundary == BoundaryScheme::reflection)
    throw std::invalid_argument("use smooth_alpha_reflected for the reflection scheme");
  return AlphaSmoother(alpha, spec)(p);
}

double smooth_alpha_reflected(const MonotoneStepFn& alpha, const ReflectionState& state,
                              const Transform& psi, double h, double p) {
  SmoothSpec spec;
  spec.transform = psi;
  spec.bandwidth = h;
  return AlphaSmoother(alpha, spec, state)(p);
}

double alpha_derivative(const MonotoneStepFn& alpha, const SmoothSpec& spec, double p,
                        bool clamp_nonnegative) {
  double d = AlphaSmoother(alpha, spec).derivative(p);
  return clamp_nonnegative ? std::max(d, 0.0) : d;
}

std::vector<double> cummax(std::vector<double> v) {
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = std::max(v[i], v[i - 1]);
  return v;
}

MonotoneStepFn monotonize_cummax(const std::function<double(double)>& f, std::size_t n) {
  if (n < 2) throw std::invalid_argument("grid needs at least two points");
  auto g = numeric::linspace(0.0, 1.0, n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(g[i]);
  v = cummax(std::move(v));
  std::vector<double> knots{0.0};
  for (std::size_t i = 0; i + 1 < n; ++i) knots.push_back(0.5 * (g[i] + g[i + 1]));
  knots.push_back(1.0);
  return MonotoneStepFn(std::move(knots), std::move(v), Continuity::left);
}

double integrate_smoothed(const std::function<double(double)>& a, double p, int panels) {
  if (p <= 0.0) return 0.0;
  double s = 0.0;
  for (int i = 0; i < panels; ++i)
    s += numeric::gauss_legendre(a, p * i / panels, p * (i + 1) / panels);
  return s;
}

double jackknife_alpha(const MaxRivalSample& sample, JackknifeVariant variant, double p,
                       const SmoothSpec* spec) {
  check_unit(p);
  const std::size_t T = sample.size();
  if (T < 2) throw std::invalid_argument("jackknife needs at least two observations");
  const auto& v = sample.values();
  auto loo = [&](std::size_t t) {
    std::vector<double> w;
    w.reserve(T - 1);
    for (std::size_t i = 0; i < T; ++i)
      if (i != t) w.push_back(v[i]);
    return MaxRivalSample(std::move(w), sample.source());
  };
  LsFit fit = solve_ls(sample);
  if (variant == JackknifeVariant::breve) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    double e1 = fit.payment(1.0), ep = fit.payment(p), ss = 0.0, d = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      // tied values give the same leave-one-out sample
      if (t == 0 || v[t] != v[t - 1]) {
        LsFit f = solve_ls(loo(t));
        d = e1 - ep - f.payment(1.0) + f.payment(p);
      }
      ss += d * d;
    }
    return std::sqrt((T - 1.0) * ss / (p * (1.0 - p))) + ep / p;
  }
  if (!spec || !(spec->bandwidth > 0.0))
    throw std::invalid_argument("hat jackknife needs a smoothing spec with positive bandwidth");
  AlphaSmoother full(fit.alpha, *spec);
  double a = full(p), ss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    AlphaSmoother s(solve_ls(loo(t)).alpha, *spec);
    double d = a - s(p);
    ss += d * d;
  }
  double q = p > 0.0 ? integrate_smoothed([&](double x) { return full(x); }, p) / p : 0.0;
  return std::sqrt(spec->bandwidth * (T - 1.0) * ss / spec->kernel.kappa2()) + q;
}

}  // namespace auctionshape
