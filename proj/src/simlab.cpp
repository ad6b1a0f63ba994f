#include "auctionshape/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "auctionshape/io.hpp"
#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/npmle.hpp"
#include "auctionshape/numeric.hpp"
#include "auctionshape/winprob.hpp"
#include "json.hpp"

namespace auctionshape {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

// ------------------------------------------------------------ designs

void validate(const DgpSpec& spec) {
  if (!positive_finite(spec.gamma)) throw std::invalid_argument("gamma must be positive");
  if (!positive_finite(spec.theta)) throw std::invalid_argument("theta must be positive");
  if (spec.T < 1) throw std::invalid_argument("T must be at least 1");
  if (!positive_finite(spec.value_dist_exponent))
    throw std::invalid_argument("value_dist_exponent must be positive");
  if (spec.n < 2) throw std::invalid_argument("n must be at least 2");
}

double dgp_bbar(double gamma, double theta) {
  return 2.0 / (1.0 + theta + std::sqrt(4.0 * gamma + (theta - 1.0) * (theta - 1.0)));
}

TruthSet::TruthSet(const DgpSpec& spec) : spec_(spec) {
  validate(spec);
  const double g = spec.gamma, th = spec.theta;
  bbar_ = dgp_bbar(g, th);
  c_ = bbar_ / (th + bbar_ * (g - th));
  k_ = spec.value_dist_exponent;

  // dF_p = k alpha^{k-1} alpha' dp
  auto dFp = [this](double p) { return k_ * std::pow(alpha(p), k_ - 1.0) * alpha_d1(p); };
  bs_ = numeric::integrate_singular_left(
      [&](double p) { return p <= 0.0 ? 0.0 : (alpha(p) * p - e(p)) * dFp(p); }, 0.0, 1.0, 1e-10);
  mv_ = numeric::integrate_singular_left(
      [&](double p) { return p <= 0.0 ? 0.0 : alpha(p) * dFp(p); }, 0.0, 1.0, 1e-10);
  const int n = spec.n;
  const double a = (2.0 - n) / (n - 1.0);
  double I = numeric::integrate_singular_left(
      [&](double p) { return p <= 0.0 ? 0.0 : e(p) * std::pow(p, a); }, 0.0, 1.0, 1e-10);
  bs_symm_ = e(1.0) / (n - 1.0) - n / ((n - 1.0) * (n - 1.0)) * I;
}

double TruthSet::Qc(double p) const {
  if (p <= 0.0) return 0.0;
  p = std::min(p, 1.0);
  const double th = spec_.theta, pt = std::pow(p, th);
  return th * c_ * pt / (1.0 - c_ * (spec_.gamma - th) * pt);
}

double TruthSet::Qc_d1(double p) const {
  const double th = spec_.theta, pt = std::pow(p, th);
  const double D = 1.0 - c_ * (spec_.gamma - th) * pt;
  return th * th * c_ * std::pow(p, th - 1.0) / (D * D);
}

double TruthSet::Gc(double b) const {
  if (b <= 0.0) return 0.0;
  if (b >= bbar_) return 1.0;
  const double th = spec_.theta, d = spec_.gamma - th;
  return std::pow((th / bbar_ + d) / (th / b + d), 1.0 / th);
}

double TruthSet::gc(double b) const {
  if (b <= 0.0 || b > bbar_) return 0.0;
  const double th = spec_.theta, d = spec_.gamma - th;
  return Gc(b) / (th * b + d * b * b);
}

double TruthSet::inverse_bid(double b) const {
  return (1.0 + spec_.theta) * b + (spec_.gamma - spec_.theta) * b * b;
}

double TruthSet::bid(double v) const {
  // root of (gamma - theta) b^2 + (1 + theta) b - v in [0, bbar], cancellation free
  const double a1 = 1.0 + spec_.theta;
  return 2.0 * v / (a1 + std::sqrt(a1 * a1 + 4.0 * (spec_.gamma - spec_.theta) * v));
}

double TruthSet::alpha(double p) const { return inverse_bid(Qc(p)); }

double TruthSet::alpha_d1(double p) const {
  return (1.0 + spec_.theta + 2.0 * (spec_.gamma - spec_.theta) * Qc(p)) * Qc_d1(p);
}

double TruthSet::e(double p) const { return p * Qc(p); }

double TruthSet::Fv(double v) const {
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return std::pow(v, k_);
}

double TruthSet::fv(double v) const {
  if (v <= 0.0 || v > 1.0) return 0.0;
  return k_ * std::pow(v, k_ - 1.0);
}

double TruthSet::Qv(double tau) const { return std::pow(std::clamp(tau, 0.0, 1.0), 1.0 / k_); }

double TruthSet::Fp(double p) const { return Fv(alpha(p)); }

TruthSet dgp_truths(const DgpSpec& spec) { return TruthSet(spec); }

DgpSample dgp_sample(const DgpSpec& spec, Philox4x32& rng) {
  TruthSet truth(spec);
  DgpSample s;
  s.rival_bids.reserve(spec.T);
  s.own_bids.reserve(spec.T);
  s.own_values.reserve(spec.T);
  for (std::size_t t = 0; t < spec.T; ++t) s.rival_bids.push_back(truth.Qc(rng.uniform01()));
  for (std::size_t t = 0; t < spec.T; ++t) {
    double v = truth.Qv(rng.uniform01());
    s.own_values.push_back(v);
    s.own_bids.push_back(truth.bid(v));
  }
  return s;
}

// ------------------------------------------------------------ bandwidths

ReferenceFit fit_reference_model(const std::vector<double>& p_atoms,
                                 const std::vector<double>& values) {
  if (p_atoms.empty() || p_atoms.size() != values.size())
    throw std::invalid_argument("reference fit needs matching nonempty samples");
  const double N = static_cast<double>(values.size());
  double m1 = 0.0, m2 = 0.0;
  for (double v : values) m1 += v, m2 += v * v;
  m1 /= N;
  m2 /= N;
  auto pm = [&](double g) {
    double s = 0.0;
    for (double p : p_atoms) s += std::pow(p, g);
    return s / N;
  };
  ReferenceFit fit;
  auto fall_back = [&]() {
    fit.gamma = 1.0;
    fit.fallback = true;
    double ep = pm(1.0);
    fit.vbar = ep > 0.0 ? m1 / ep : 1.0;
    return fit;
  };
  if (!(m1 > 0.0)) return fall_back();
  const double target = m2 / (m1 * m1);
  // E p^{2g} / (E p^g)^2 is nondecreasing in g and equals 1 at g = 0
  auto eq = [&](double g) {
    double a = pm(g);
    return pm(2.0 * g) / (a * a) - target;
  };
  const double lo = 1e-4, hi = 50.0;
  double flo = eq(lo), fhi = eq(hi);
  if (!(std::isfinite(flo) && std::isfinite(fhi)) || flo > 0.0 || fhi < 0.0) return fall_back();
  try {
    fit.gamma = numeric::find_root(eq, lo, hi, 1e-12);
  } catch (const std::exception&) {
    return fall_back();
  }
  fit.vbar = m1 / pm(fit.gamma);
  return fit;
}

double silverman_bandwidth(const std::vector<double>& x, const Kernel& kernel) {
  if (x.size() < 2) throw std::invalid_argument("bandwidth needs at least two observations");
  double sd = std::sqrt(numeric::variance(x));
  double iqr = numeric::quantile(x, 0.75) - numeric::quantile(x, 0.25);
  double s = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
  if (!(s > 0.0)) throw std::invalid_argument("sample has no spread");
  double C = kernel.family == KernelFamily::gaussian ? 1.06 : 2.345;
  return C * s * std::pow(static_cast<double>(x.size()), -0.2);
}

namespace {

// psi'(p) = p^{-lambda} / c for the built-in transforms
bool power_transform(const Transform& psi, double& lambda, double& c) {
  switch (psi.kind) {
    case TransformKind::identity:
      lambda = 0.0, c = 1.0;
      return true;
    case TransformKind::sqrt:
      lambda = 0.5, c = 2.0;
      return true;
    case TransformKind::fifthroot:
      lambda = 0.8, c = 5.0;
      return true;
    case TransformKind::log:
      lambda = 1.0, c = 1.0;
      return true;
    default:
      return false;
  }
}

// \int_lo^1 p^k dp
double power_integral(double k, double lo) {
  if (std::abs(k + 1.0) < 1e-12) return -std::log(lo);
  return (1.0 - std::pow(lo, k + 1.0)) / (k + 1.0);
}

constexpr double kTrimmedLower = 0.05;

}  // namespace

double rule_of_thumb_bandwidth(const ReferenceFit& fit, std::size_t T, const Transform& psi_in,
                               BandwidthTarget target, const BandwidthOptions& opt) {
  if (T < 1) throw std::invalid_argument("T must be positive");
  if (!(opt.scale > 0.0)) throw std::invalid_argument("bandwidth scale must be positive");
  if (target == BandwidthTarget::density)
    throw std::invalid_argument("density target needs the sample");
  const Transform psi =
      psi_in.kind == TransformKind::alpha ? Transform::fifthroot() : psi_in;
  const double g = fit.gamma, Td = static_cast<double>(T);
  const double mu2 = opt.kernel.mu2();
  const bool deriv = target == BandwidthTarget::derivative;
  const double kap = deriv ? opt.kernel.kappa2_deriv() : opt.kernel.kappa2();

  // squared-bias and variance integrals, with vbar^2 gamma^2 cancelled
  double B = 0.0, V = 0.0;
  double lambda = 0.0, c = 1.0;
  if (power_transform(psi, lambda, c)) {
    // bias h^2 mu2/2 c^2 (g + lambda - 1) p^{g + 2 lambda - 2}, variance kap zeta^2 psi'^r / (T h^r)
    double bc = 0.5 * mu2 * c * c * (g + lambda - 1.0);
    double bk = g + 2.0 * lambda - 2.0;
    double vk = 2.0 * g - lambda;
    double vc = kap / ((1.0 + g) * (1.0 + g) * c);
    if (deriv) {
      bc *= bk;
      bk -= 1.0;
      vk -= 2.0 * lambda;
      vc /= c * c;
    }
    double lo = (2.0 * bk > -1.0 && vk > -1.0) ? 0.0 : kTrimmedLower;
    B = bc * bc * power_integral(2.0 * bk, lo);
    V = vc * power_integral(vk, lo);
  } else {
    auto bias = [&](double p) {
      double d1 = psi.d1(p), d2 = psi.d2(p);
      return 0.5 * mu2 *
             ((g - 1.0) * std::pow(p, g - 2.0) / (d1 * d1) - std::pow(p, g - 1.0) * d2 / (d1 * d1 * d1));
    };
    auto var = [&](double p) {
      double d1 = psi.d1(p);
      return kap * std::pow(p, 2.0 * g) / ((1.0 + g) * (1.0 + g)) * (deriv ? d1 * d1 * d1 : d1);
    };
    auto bias_sq = [&](double p) {
      if (!deriv) return bias(p) * bias(p);
      double d = 1e-5 * p;
      double b1 = (bias(p + d) - bias(p - d)) / (2.0 * d);
      return b1 * b1;
    };
    B = numeric::integrate(bias_sq, kTrimmedLower, 1.0, 1e-10);
    V = numeric::integrate(var, kTrimmedLower, 1.0, 1e-10);
  }

  // zero first-order bias: cap at the range of psi on [0.05, 1]
  const double cap = psi.f(1.0) - psi.f(kTrimmedLower);
  double h;
  if (!(B > 1e-300) || !std::isfinite(V))
    h = cap;
  else if (deriv)
    h = std::pow(3.0 * V / (4.0 * B * Td), 1.0 / 7.0);
  else
    h = std::pow(V / (4.0 * B * Td), 0.2);
  h = std::min(h, cap);
  h *= opt.scale;
  if (opt.undersmooth) h *= std::pow(Td, -2.0 / 15.0);
  return h;
}

double rule_of_thumb_bandwidth(const std::vector<double>& p_atoms,
                               const std::vector<double>& values, const Transform& psi,
                               BandwidthTarget target, const BandwidthOptions& opt) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (target == BandwidthTarget::density) {
    if (!(opt.scale > 0.0)) throw std::invalid_argument("bandwidth scale must be positive");
    double h = silverman_bandwidth(values, opt.kernel) * opt.scale;
    if (opt.undersmooth) h *= std::pow(static_cast<double>(values.size()), -2.0 / 15.0);
    return h;
  }
  return rule_of_thumb_bandwidth(fit_reference_model(p_atoms, values), values.size(), psi, target,
                                 opt);
}

// ------------------------------------------------------------ IBF

namespace {

ReflectionKde make_ibf_kde(const MaxRivalSample& rivals, double h, IbfBoundary boundary,
                           Kernel kernel) {
  if (rivals.empty()) throw std::invalid_argument("empty sample");
  double hi = rivals.max();
  if (!(hi > 0.0)) hi = h;
  return ReflectionKde(rivals.values(), h, 0.0, hi, kernel, boundary == IbfBoundary::bc);
}

}  // namespace

IbfEstimate::IbfEstimate(const MaxRivalSample& rivals, double bandwidth, IbfBoundary boundary,
                         Kernel kernel)
    : rivals_(rivals), kde_(make_ibf_kde(rivals, bandwidth, boundary, kernel)) {}

double IbfEstimate::pseudo_value(double b) const {
  double G = Gc(b);
  // the reflected estimate vanishes above the largest bid; use its edge value
  double g = gc(std::clamp(b, kde_.lower(), kde_.upper()));
  if (G == 0.0) return b;
  if (!(g > 0.0)) return kNaN;
  return b + G / g;
}

double IbfEstimate::alpha(double p) const {
  return pseudo_value(empirical_quantile(rivals_, std::clamp(p, 0.0, 1.0)));
}

IbfEstimate::Applied IbfEstimate::apply(const std::vector<double>& own_bids) const {
  Applied out;
  double bs = 0.0;
  for (double b : own_bids) {
    double G = Gc(b);
    double g = gc(std::clamp(b, kde_.lower(), kde_.upper()));
    if (G == 0.0) {
      out.values.push_back(b);
      continue;
    }
    if (!(g > 0.0)) {
      ++out.trimmed;
      continue;
    }
    out.values.push_back(b + G / g);
    bs += G * G / g;
  }
  if (out.values.empty()) throw std::runtime_error("all pseudo-values trimmed");
  out.bs = bs / out.values.size();
  std::sort(out.values.begin(), out.values.end());
  return out;
}

// ------------------------------------------------------------ Monte Carlo

std::string to_string(McEstimator e) {
  switch (e) {
    case McEstimator::ls: return "ls";
    case McEstimator::mle: return "mle";
    case McEstimator::smoothed_ls: return "smoothed-ls";
    case McEstimator::smoothed_mle: return "smoothed-mle";
    case McEstimator::ibf: return "ibf";
    case McEstimator::ibf_bc: return "ibf-bc";
    case McEstimator::jackknife: return "jackknife";
  }
  return "?";
}

std::string to_string(McObject o) {
  switch (o) {
    case McObject::alpha: return "alpha";
    case McObject::alpha_half: return "alpha_half";
    case McObject::bs: return "bs";
    case McObject::mv: return "mv";
    case McObject::fv: return "fv";
    case McObject::qv: return "qv";
    case McObject::bs_symm: return "bs_symm";
  }
  return "?";
}

McEstimator estimator_from_string(const std::string& s) {
  for (auto e : {McEstimator::ls, McEstimator::mle, McEstimator::smoothed_ls,
                 McEstimator::smoothed_mle, McEstimator::ibf, McEstimator::ibf_bc,
                 McEstimator::jackknife})
    if (to_string(e) == s) return e;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}

McObject object_from_string(const std::string& s) {
  for (auto o : {McObject::alpha, McObject::alpha_half, McObject::bs, McObject::mv, McObject::fv,
                 McObject::qv, McObject::bs_symm})
    if (to_string(o) == s) return o;
  throw std::invalid_argument("unknown object '" + s + "'");
}

bool is_function_object(McObject o) {
  return o == McObject::alpha || o == McObject::fv || o == McObject::qv;
}

bool supports(McEstimator e, McObject o) {
  switch (e) {
    case McEstimator::jackknife:
      return o == McObject::alpha_half;
    case McEstimator::ibf:
    case McEstimator::ibf_bc:
      return o != McObject::bs_symm;
    default:
      return true;
  }
}

bool uses_bandwidth(McEstimator e) {
  return e == McEstimator::smoothed_ls || e == McEstimator::smoothed_mle ||
         e == McEstimator::ibf || e == McEstimator::ibf_bc;
}

void validate(const McConfig& config) {
  if (config.designs.empty()) throw std::invalid_argument("designs: no design given");
  if (config.estimators.empty()) throw std::invalid_argument("estimators: none selected");
  if (config.objects.empty()) throw std::invalid_argument("objects: none selected");
  if (config.replications < 1) throw std::invalid_argument("reps must be at least 1");
  for (double s : config.scales)
    if (!positive_finite(s)) throw std::invalid_argument("bandwidth-scale must be positive");
  bool mle = false;
  for (auto e : config.estimators)
    mle = mle || e == McEstimator::mle || e == McEstimator::smoothed_mle;
  for (const auto& d : config.designs) {
    validate(d);
    if (mle && d.T < 3) throw std::invalid_argument("T must be at least 3 for the NPMLE");
    if (d.T < 2) throw std::invalid_argument("T must be at least 2");
  }
}

unsigned default_thread_count() {
  if (const char* s = std::getenv("AUCTIONSHAPE_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<unsigned>(v);
  }
  unsigned h = std::thread::hardware_concurrency();
  return h ? h : 1;
}

namespace {

constexpr std::size_t kAlphaGrid = 2001;
constexpr std::size_t kVGrid = 512;

struct Slot {
  McEstimator estimator;
  double scale;
  std::vector<McObject> objects;
};

std::vector<Slot> make_slots(const McConfig& cfg) {
  std::vector<Slot> slots;
  for (auto e : cfg.estimators) {
    std::vector<McObject> objs;
    for (auto o : cfg.objects)
      if (supports(e, o)) objs.push_back(o);
    if (objs.empty()) continue;
    if (uses_bandwidth(e)) {
      for (double s : cfg.scales) slots.push_back({e, s, objs});
    } else {
      slots.push_back({e, 0.0, objs});
    }
  }
  return slots;
}

struct Grids {
  std::vector<double> p, v;
  Grids() {
    p = numeric::linspace(0.0, 1.0, kAlphaGrid);
    for (std::size_t i = 1; i <= kVGrid; ++i) v.push_back(static_cast<double>(i) / (kVGrid + 1));
  }
};

double ise(const std::vector<double>& x, const std::function<double(double)>& diff) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double d = diff(x[i]);
    y[i] = d * d;
  }
  return numeric::trapezoid(x, y);
}

// Errors of every object of one slot; NaN entries mark failure.
std::vector<double> evaluate_alpha_estimate(const AlphaEstimate& a, const FpModel& fp,
                                            const TruthSet& truth, const Grids& grids,
                                            const std::vector<McObject>& objs) {
  std::vector<double> out;
  for (auto o : objs) {
    switch (o) {
      case McObject::alpha:
        out.push_back(ise(grids.p, [&](double p) { return a(p) - truth.alpha(p); }));
        break;
      case McObject::alpha_half:
        out.push_back(a(0.5) - truth.alpha(0.5));
        break;
      case McObject::bs:
        out.push_back(bidder_surplus_asymmetric(a, fp).estimate - truth.bs());
        break;
      case McObject::mv:
        out.push_back(mean_valuation(a, fp).estimate - truth.mv());
        break;
      case McObject::fv:
        out.push_back(ise(grids.v, [&](double v) { return cdf_v(a, fp, v) - truth.Fv(v); }));
        break;
      case McObject::qv:
        out.push_back(
            ise(grids.v, [&](double t) { return quantile_v(a, fp, t) - truth.Qv(t); }));
        break;
      case McObject::bs_symm:
        out.push_back(bidder_surplus_symmetric(a, truth.spec().n).estimate - truth.bs_symmetric());
        break;
    }
  }
  return out;
}

std::vector<double> evaluate_ibf(const IbfEstimate& ibf, const std::vector<double>& own,
                                 const TruthSet& truth, const Grids& grids,
                                 const std::vector<McObject>& objs, std::size_t& trimmed) {
  auto applied = ibf.apply(own);
  trimmed += applied.trimmed;
  const auto& pv = applied.values;
  const double N = static_cast<double>(pv.size());
  std::vector<double> out;
  for (auto o : objs) {
    switch (o) {
      case McObject::alpha:
        out.push_back(ise(grids.p, [&](double p) { return ibf.alpha(p) - truth.alpha(p); }));
        break;
      case McObject::alpha_half:
        out.push_back(ibf.alpha(0.5) - truth.alpha(0.5));
        break;
      case McObject::bs:
        out.push_back(applied.bs - truth.bs());
        break;
      case McObject::mv:
        out.push_back(numeric::mean(pv) - truth.mv());
        break;
      case McObject::fv:
        out.push_back(ise(grids.v, [&](double v) {
          double F = (std::upper_bound(pv.begin(), pv.end(), v) - pv.begin()) / N;
          return F - truth.Fv(v);
        }));
        break;
      case McObject::qv:
        out.push_back(ise(grids.v, [&](double t) {
          auto idx = static_cast<std::size_t>(std::ceil(t * N - 1e-12));
          return pv[std::clamp<std::size_t>(idx, 1, pv.size()) - 1] - truth.Qv(t);
        }));
        break;
      case McObject::bs_symm:
        out.push_back(kNaN);
        break;
    }
  }
  return out;
}

struct RepResult {
  std::vector<std::vector<double>> errors;  // per slot, per object
  std::size_t trimmed = 0;
};

RepResult run_replication(const McConfig& cfg, std::size_t d, int r, const TruthSet& truth,
                          const std::vector<Slot>& slots, const Grids& grids) {
  const DgpSpec& spec = cfg.designs[d];
  Philox4x32 rng(spec.seed ^ static_cast<std::uint64_t>(r), d);
  DgpSample sample = dgp_sample(spec, rng);
  MaxRivalSample rivals(sample.rival_bids);
  FpModel fp = fp_empirical(sample.own_bids, rivals);

  RepResult res;
  res.errors.resize(slots.size());
  // unsmoothed fits shared by the slots that need them
  std::optional<LsFit> ls;
  std::optional<MleFit> mle;
  std::optional<ReferenceFit> ref_ls, ref_mle;
  auto reference = [&](const MonotoneStepFn& step) {
    std::vector<double> vals;
    vals.reserve(fp.atoms().size());
    for (double p : fp.atoms()) vals.push_back(step(p));
    return fit_reference_model(fp.atoms(), vals);
  };

  for (std::size_t s = 0; s < slots.size(); ++s) {
    const Slot& slot = slots[s];
    auto& out = res.errors[s];
    try {
      switch (slot.estimator) {
        case McEstimator::ls:
        case McEstimator::smoothed_ls:
        case McEstimator::mle:
        case McEstimator::smoothed_mle: {
          bool use_ls = slot.estimator == McEstimator::ls || slot.estimator == McEstimator::smoothed_ls;
          MonotoneStepFn step;
          ConvexPwlFn pay;
          if (use_ls) {
            if (!ls) ls = solve_ls(rivals);
            step = ls->alpha;
            pay = ls->payment;
          } else {
            if (!mle) mle = pava_mle(rivals);
            step = mle->alpha();
            pay = mle->payment;
          }
          if (!uses_bandwidth(slot.estimator)) {
            out = evaluate_alpha_estimate(AlphaEstimate::unsmoothed(step, pay), fp, truth, grids,
                                          slot.objects);
            break;
          }
          auto& ref = use_ls ? ref_ls : ref_mle;
          if (!ref) ref = reference(step);
          SmoothSpec sp;
          sp.transform = cfg.psi.kind == TransformKind::alpha ? Transform::alpha_pilot(step) : cfg.psi;
          sp.boundary = cfg.boundary;
          sp.bandwidth = rule_of_thumb_bandwidth(*ref, spec.T, cfg.psi, BandwidthTarget::alpha,
                                                 {Kernel{}, slot.scale, cfg.undersmooth});
          out = evaluate_alpha_estimate(AlphaEstimate::smoothed(step, sp), fp, truth, grids,
                                        slot.objects);
          break;
        }
        case McEstimator::ibf:
        case McEstimator::ibf_bc: {
          double h = silverman_bandwidth(rivals.values()) * slot.scale;
          if (cfg.undersmooth) h *= std::pow(static_cast<double>(spec.T), -2.0 / 15.0);
          IbfEstimate ibf(rivals, h,
                          slot.estimator == McEstimator::ibf_bc ? IbfBoundary::bc : IbfBoundary::none);
          out = evaluate_ibf(ibf, sample.own_bids, truth, grids, slot.objects, res.trimmed);
          break;
        }
        case McEstimator::jackknife:
          out = {jackknife_alpha(rivals, JackknifeVariant::breve, 0.5) - truth.alpha(0.5)};
          break;
      }
      for (double& x : out)
        if (!std::isfinite(x)) x = kNaN;
    } catch (const std::exception&) {
      out.assign(slot.objects.size(), kNaN);
    }
  }
  return res;
}

}  // namespace

McReport run_monte_carlo(const McConfig& cfg) {
  validate(cfg);
  const auto slots = make_slots(cfg);
  const Grids grids;
  std::vector<TruthSet> truths;
  for (const auto& d : cfg.designs) truths.emplace_back(d);

  const std::size_t R = static_cast<std::size_t>(cfg.replications);
  const std::size_t units = cfg.designs.size() * R;
  std::vector<RepResult> results(units);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t u; (u = next.fetch_add(1)) < units;) {
      std::size_t d = u / R;
      results[u] = run_replication(cfg, d, static_cast<int>(u % R), truths[d], slots, grids);
    }
  };
  unsigned nt = cfg.threads ? cfg.threads : default_thread_count();
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, units));
  if (nt <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  McReport rep;
  for (const auto& r : results) rep.trimmed += r.trimmed;
  for (std::size_t d = 0; d < cfg.designs.size(); ++d) {
    for (std::size_t s = 0; s < slots.size(); ++s) {
      for (std::size_t k = 0; k < slots[s].objects.size(); ++k) {
        McCell c;
        c.design = d;
        c.spec = cfg.designs[d];
        c.estimator = slots[s].estimator;
        c.object = slots[s].objects[k];
        c.scale = slots[s].scale;
        c.replications = cfg.replications;
        c.errors.resize(R);
        std::vector<double> ok;
        for (std::size_t r = 0; r < R; ++r) {
          double x = results[d * R + r].errors[s][k];
          c.errors[r] = x;
          if (!std::isnan(x)) ok.push_back(x);
        }
        c.failures = static_cast<int>(R - ok.size());
        c.flagged = c.failures > 0.01 * cfg.replications;
        if (!ok.empty()) {
          const double m = static_cast<double>(ok.size());
          std::vector<double> abs_err;
          double sq = 0.0, sum = 0.0;
          for (double x : ok) {
            if (is_function_object(c.object)) {
              sq += x;
              abs_err.push_back(std::sqrt(x));
            } else {
              sq += x * x;
              sum += x;
              abs_err.push_back(std::abs(x));
            }
          }
          if (is_function_object(c.object)) {
            c.rmise = std::sqrt(sq / m);
          } else {
            c.rmse = std::sqrt(sq / m);
            c.bias = sum / m;
          }
          c.median_abs_error = numeric::median(abs_err);
        }
        rep.cells.push_back(std::move(c));
      }
    }
  }
  return rep;
}

// ------------------------------------------------------------ serialization

namespace {

const std::vector<std::string> kCsvHeader = {"design", "gamma", "theta", "T", "seed",
                                             "value_dist_exponent", "n", "estimator", "object",
                                             "scale", "metric", "value"};

std::vector<std::pair<std::string, double>> cell_metrics(const McCell& c) {
  std::vector<std::pair<std::string, double>> m = {
      {"replications", c.replications}, {"failures", c.failures}, {"flagged", c.flagged ? 1.0 : 0.0}};
  if (is_function_object(c.object)) {
    m.push_back({"rmise", c.rmise});
  } else {
    m.push_back({"rmse", c.rmse});
    m.push_back({"bias", c.bias});
  }
  m.push_back({"median_abs_error", c.median_abs_error});
  return m;
}

nlohmann::json num(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

}  // namespace

std::string McReport::to_csv() const {
  std::string out = io::csv_row(kCsvHeader);
  for (const auto& c : cells) {
    for (const auto& [name, value] : cell_metrics(c)) {
      out += io::csv_row({std::to_string(c.design), io::format_double(c.spec.gamma),
                          io::format_double(c.spec.theta), std::to_string(c.spec.T),
                          std::to_string(c.spec.seed), io::format_double(c.spec.value_dist_exponent),
                          std::to_string(c.spec.n), to_string(c.estimator), to_string(c.object),
                          io::format_double(c.scale), name, io::format_double(value)});
    }
  }
  return out;
}

std::string McReport::to_json() const {
  nlohmann::json j;
  j["trimmed_pseudo_values"] = trimmed;
  j["notes"] = {{"ibf-bc", "reflection KDE stand-in for the boundary-corrected IBF"},
                {"unsmoothed_scale", "scale 0 marks estimators without a bandwidth"}};
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    nlohmann::json jc = {{"design", c.design},
                         {"gamma", c.spec.gamma},
                         {"theta", c.spec.theta},
                         {"T", c.spec.T},
                         {"seed", c.spec.seed},
                         {"value_dist_exponent", c.spec.value_dist_exponent},
                         {"n", c.spec.n},
                         {"estimator", to_string(c.estimator)},
                         {"object", to_string(c.object)},
                         {"scale", c.scale}};
    for (const auto& [name, value] : cell_metrics(c)) jc[name] = num(value);
    jc["flagged"] = c.flagged;
    j["cells"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

McReport McReport::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || io::split_csv_line(line) != kCsvHeader)
    throw std::invalid_argument("not a Monte Carlo report: bad header");
  McReport rep;
  std::map<std::string, std::size_t> index;
  std::size_t row = 1;
  auto to_d = [](const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  };
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != kCsvHeader.size())
      throw std::invalid_argument("report row " + std::to_string(row) + ": expected 12 fields");
    try {
      std::string key = f[0] + "|" + f[7] + "|" + f[8] + "|" + f[9];
      auto it = index.find(key);
      if (it == index.end()) {
        McCell c;
        c.design = std::stoul(f[0]);
        c.spec.gamma = to_d(f[1]);
        c.spec.theta = to_d(f[2]);
        c.spec.T = std::stoul(f[3]);
        c.spec.seed = std::stoull(f[4]);
        c.spec.value_dist_exponent = to_d(f[5]);
        c.spec.n = std::stoi(f[6]);
        c.estimator = estimator_from_string(f[7]);
        c.object = object_from_string(f[8]);
        c.scale = to_d(f[9]);
        it = index.emplace(key, rep.cells.size()).first;
        rep.cells.push_back(c);
      }
      McCell& c = rep.cells[it->second];
      double v = to_d(f[11]);
      const std::string& m = f[10];
      if (m == "replications") c.replications = static_cast<int>(v);
      else if (m == "failures") c.failures = static_cast<int>(v);
      else if (m == "flagged") c.flagged = v != 0.0;
      else if (m == "rmse") c.rmse = v;
      else if (m == "bias") c.bias = v;
      else if (m == "rmise") c.rmise = v;
      else if (m == "median_abs_error") c.median_abs_error = v;
      else throw std::invalid_argument("unknown metric '" + m + "'");
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("report row " + std::to_string(row) + ": " + e.what());
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("report row " + std::to_string(row) + ": number out of range");
    }
  }
  return rep;
}

std::vector<RelativeRow> relative_table(const McReport& report) {
  std::map<std::pair<std::size_t, int>, double> minimum;
  auto metric = [](const McCell& c) { return is_function_object(c.object) ? c.rmise : c.rmse; };
  for (const auto& c : report.cells) {
    double m = metric(c);
    if (!std::isfinite(m)) continue;
    auto key = std::make_pair(c.design, static_cast<int>(c.object));
    auto it = minimum.find(key);
    if (it == minimum.end() || m < it->second) minimum[key] = m;
  }
  std::vector<RelativeRow> rows;
  for (const auto& c : report.cells) {
    RelativeRow r;
    r.design = c.design;
    r.spec = c.spec;
    r.object = c.object;
    r.estimator = c.estimator;
    r.scale = c.scale;
    auto it = minimum.find({c.design, static_cast<int>(c.object)});
    r.minimum = it == minimum.end() ? kNaN : it->second;
    double m = metric(c);
    r.relative = (std::isfinite(m) && r.minimum > 0.0) ? 1000.0 * m / r.minimum
                 : (std::isfinite(m) && m == r.minimum) ? 1000.0
                                                          : kNaN;
    rows.push_back(r);
  }
  return rows;
}

std::string relative_table_csv(const std::vector<RelativeRow>& rows) {
  std::string out = io::csv_row(
      {"design", "gamma", "theta", "T", "object", "estimator", "scale", "relative", "minimum"});
  for (const auto& r : rows)
    out += io::csv_row({std::to_string(r.design), io::format_double(r.spec.gamma),
                        io::format_double(r.spec.theta), std::to_string(r.spec.T),
                        to_string(r.object), to_string(r.estimator), io::format_double(r.scale),
                        io::format_double(r.relative), io::format_double(r.minimum)});
  return out;
}

std::string relative_table_text(const std::vector<RelativeRow>& rows) {
  std::vector<std::vector<std::string>> t = {
      {"design", "gamma", "theta", "T", "object", "estimator", "scale", "relative", "minimum"}};
  for (const auto& r : rows) {
    std::ostringstream rel, mn;
    if (std::isfinite(r.relative))
      rel << std::fixed << std::setprecision(0) << r.relative;
    else
      rel << "nan";
    mn << std::setprecision(3) << r.minimum;
    t.push_back({std::to_string(r.design), io::format_double(r.spec.gamma),
                 io::format_double(r.spec.theta), std::to_string(r.spec.T), to_string(r.object),
                 to_string(r.estimator), io::format_double(r.scale), rel.str(), mn.str()});
  }
  std::vector<std::size_t> w(t[0].size(), 0);
  for (const auto& row : t)
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
  std::string out;
  for (const auto& row : t) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += "  ";
      out += std::string(w[i] - row[i].size(), ' ') + row[i];
    }
    out += '\n';
  }
  bool bc = std::any_of(rows.begin(), rows.end(),
                        [](const RelativeRow& r) { return r.estimator == McEstimator::ibf_bc; });
  if (bc) out += "ibf-bc uses a reflection KDE stand-in for the boundary correction.\n";
  return out;
}

}  // namespace auctionshape
