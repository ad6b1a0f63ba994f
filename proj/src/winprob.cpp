#include "auctionshape/winprob.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace auctionshape {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

// Composite Gauss-Legendre rule on [a, b].
void composite_rule(double a, double b, int panels, std::vector<double>& x, std::vector<double>& w) {
  x.clear();
  w.clear();
  const auto& ab = GL::abscissa();
  const auto& wt = GL::weights();
  double step = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    double c = a + (k + 0.5) * step, r = 0.5 * step;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      x.push_back(c - r * ab[i]);
      w.push_back(r * wt[i]);
      x.push_back(c + r * ab[i]);
      w.push_back(r * wt[i]);
    }
  }
}

double exponent(int n) { return (2.0 - n) / (n - 1.0); }

// Monomial coefficients (in p) of the orthonormal shifted Legendre
// polynomials L_0..L_{K-1} on [0,1]. Row k holds L_k.
std::vector<std::vector<double>> legendre_coefs(int K) {
  std::vector<std::vector<double>> P(K, std::vector<double>(K, 0.0));
  P[0][0] = 1.0;
  if (K > 1) P[1][0] = -1.0, P[1][1] = 2.0;  // x = 2p - 1
  for (int k = 1; k + 1 < K; ++k) {
    // (k+1) P_{k+1} = (2k+1)(2p-1) P_k - k P_{k-1}
    for (int j = 0; j < K; ++j) {
      double v = -(2 * k + 1.0) * P[k][j] - k * P[k - 1][j];
      if (j > 0) v += 2.0 * (2 * k + 1.0) * P[k][j - 1];
      P[k + 1][j] = v / (k + 1.0);
    }
  }
  for (int k = 0; k < K; ++k)
    for (double& c : P[k]) c *= std::sqrt(2.0 * k + 1.0);
  return P;
}

double poly_eval(const std::vector<double>& c, double p) {
  double s = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) s = s * p + c[k];
  return s;
}

void check_unit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("argument outside [0,1]");
}

}  // namespace

FpModel FpModel::symmetric(int n) {
  if (n < 2) throw std::invalid_argument("need at least 2 bidders");
  FpModel m;
  m.kind_ = FpKind::symmetric;
  m.n_ = n;
  m.mu_ = {-std::log(n - 1.0)};
  return m;
}

FpModel FpModel::empirical(std::vector<double> atoms) {
  if (atoms.empty()) throw std::invalid_argument("empty sample");
  for (double a : atoms)
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("win probability outside [0,1]");
  std::sort(atoms.begin(), atoms.end());
  FpModel m;
  m.kind_ = FpKind::empirical;
  m.n_ = 0;
  m.atoms_ = std::move(atoms);
  return m;
}

double FpModel::tilt(double p) const {
  double s = 0.0;
  for (std::size_t k = mu_.size(); k-- > 0;) s = s * p + mu_[k];
  return s;
}

double FpModel::tilt_d1(double p) const {
  double s = 0.0;
  for (std::size_t k = mu_.size(); k-- > 1;) s = s * p + k * mu_[k];
  return s;
}

double FpModel::tilt_d2(double p) const {
  double s = 0.0;
  for (std::size_t k = mu_.size(); k-- > 2;) s = s * p + k * (k - 1.0) * mu_[k];
  return s;
}

double FpModel::cdf(double p) const {
  if (kind_ == FpKind::empirical)
    return static_cast<double>(std::upper_bound(atoms_.begin(), atoms_.end(), p) - atoms_.begin()) /
           atoms_.size();
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  switch (kind_) {
    case FpKind::symmetric:
      return std::pow(p, 1.0 / (n_ - 1));
    case FpKind::empirical:
      break;
    case FpKind::min_entropy: {
      std::vector<double> x, w;
      composite_rule(0.0, std::pow(p, 1.0 / (n_ - 1)), 16, x, w);
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::exp(tilt(std::pow(x[i], n_ - 1)));
      return std::min(1.0, (n_ - 1) * s);
    }
  }
  return 0.0;
}

double FpModel::pdf(double p) const {
  check_unit(p);
  if (kind_ == FpKind::empirical) throw std::logic_error("empirical F_p has no density");
  double a = exponent(n_);
  return std::exp(tilt(p)) * (a == 0.0 ? 1.0 : std::pow(p, a));
}

double FpModel::pdf_d1(double p) const {
  double f = pdf(p), a = exponent(n_);
  return f * (tilt_d1(p) + (a == 0.0 ? 0.0 : a / p));
}

double FpModel::pdf_d2(double p) const {
  double f = pdf(p), a = exponent(n_);
  double g = tilt_d1(p) + (a == 0.0 ? 0.0 : a / p);
  return f * (g * g + tilt_d2(p) - (a == 0.0 ? 0.0 : a / (p * p)));
}

double FpModel::quantile(double tau) const {
  check_unit(tau);
  if (kind_ == FpKind::symmetric) return std::pow(tau, n_ - 1);
  if (tau <= 0.0) return 0.0;
  if (kind_ == FpKind::empirical) {
    auto idx = static_cast<std::size_t>(std::ceil(tau * atoms_.size() - 1e-12));
    return atoms_[std::clamp<std::size_t>(idx, 1, atoms_.size()) - 1];
  }
  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-14) {
    double m = 0.5 * (lo + hi);
    (cdf(m) < tau ? lo : hi) = m;
  }
  return hi;
}

double FpModel::expect(const std::function<double(double)>& g) const {
  if (kind_ == FpKind::empirical) {
    double s = 0.0;
    for (double a : atoms_) s += g(a);
    return s / atoms_.size();
  }
  std::vector<double> x, w;
  composite_rule(0.0, 1.0, 64, x, w);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = std::pow(x[i], n_ - 1);
    s += w[i] * g(p) * std::exp(tilt(p));
  }
  return (n_ - 1) * s;
}

FpModel fp_symmetric(int n) { return FpModel::symmetric(n); }

FpModel fp_empirical(const std::vector<double>& own_bids, const MaxRivalSample& rivals) {
  if (rivals.size() == 0) throw std::invalid_argument("empty sample");
  return fp_empirical(own_bids, [&](double b) { return rivals.cdf(b); });
}

FpModel fp_empirical(const std::vector<double>& own_bids,
                     const std::function<double(double)>& rival_cdf) {
  if (own_bids.empty()) throw std::invalid_argument("empty sample");
  std::vector<double> atoms;
  atoms.reserve(own_bids.size());
  for (double b : own_bids) atoms.push_back(std::clamp(rival_cdf(b), 0.0, 1.0));
  return FpModel::empirical(std::move(atoms));
}

int default_entropy_degree(std::size_t T) {
  int d = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(T)) - 1e-12));
  return std::clamp(d, 0, 8);
}

FpModel fp_min_entropy(const FpModel& empirical, int n, int degree) {
  if (empirical.kind() != FpKind::empirical)
    throw std::invalid_argument("min-entropy fit needs an empirical F_p");
  if (n < 2) throw std::invalid_argument("need at least 2 bidders");
  const auto& at = empirical.atoms();
  if (degree < 0) degree = default_entropy_degree(at.size());
  const int K = degree + 1;

  // Newton runs in an orthonormal Legendre basis; same span as the monomials.
  const auto L = legendre_coefs(K);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(K);
  for (double a : at)
    for (int k = 0; k < K; ++k) m[k] += poly_eval(L[k], a);
  m /= static_cast<double>(at.size());

  // nodes in u = p^{1/(n-1)}: p^{(2-n)/(n-1)} dp = (n-1) du
  std::vector<double> u, w;
  composite_rule(0.0, 1.0, 64, u, w);
  const std::size_t N = u.size();
  Eigen::MatrixXd P(N, K);
  for (std::size_t i = 0; i < N; ++i) {
    double p = std::pow(u[i], n - 1);
    for (int k = 0; k < K; ++k) P(i, k) = poly_eval(L[k], p);
  }
  Eigen::VectorXd W = Eigen::Map<Eigen::VectorXd>(w.data(), N) * static_cast<double>(n - 1);

  auto dual = [&](const Eigen::VectorXd& mu, Eigen::VectorXd* e) {
    Eigen::VectorXd ex = (P * mu).array().exp().matrix();
    if (e) *e = ex;
    return W.dot(ex) - mu.dot(m);
  };

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(K);
  mu[0] = -std::log(n - 1.0);
  Eigen::VectorXd e;
  double obj = dual(mu, &e);
  double res = 0.0;
  int it = 0;
  const double tol = 1e-12;
  for (; it < 200; ++it) {
    Eigen::VectorXd we = W.cwiseProduct(e);
    Eigen::VectorXd grad = P.transpose() * we - m;
    res = grad.cwiseAbs().maxCoeff();
    if (res < tol) break;
    Eigen::MatrixXd H = P.transpose() * we.asDiagonal() * P;
    Eigen::VectorXd step = -H.ldlt().solve(grad);
    double slope = grad.dot(step);
    if (!(slope < 0.0)) step = -grad, slope = -grad.squaredNorm();
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      Eigen::VectorXd cand = mu + t * step;
      Eigen::VectorXd ce;
      double co = dual(cand, &ce);
      if (!std::isfinite(co)) continue;
      bool accept = co <= obj + 1e-4 * t * slope;
      if (!accept && std::abs(co - obj) <= 1e-13 * (1.0 + std::abs(obj))) {
        // decrease below double resolution: judge by the moment residual
        double r2 = (P.transpose() * W.cwiseProduct(ce) - m).cwiseAbs().maxCoeff();
        accept = r2 < res;
      }
      if (accept) {
        mu = cand;
        e = ce;
        obj = co;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // no further decrease at machine precision
      Eigen::VectorXd g2 = P.transpose() * W.cwiseProduct(e) - m;
      res = g2.cwiseAbs().maxCoeff();
      break;
    }
  }
  if (!(res < 1e-9)) {
    std::ostringstream os;
    os << "min-entropy Newton did not converge after " << it << " iterations (moment residual " << res
       << ")";
    throw std::runtime_error(os.str());
  }
  FpModel out = FpModel::symmetric(n);
  out.kind_ = FpKind::min_entropy;
  out.mu_.assign(K, 0.0);
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) out.mu_[j] += mu[k] * L[k][j];
  out.residual_ = res;
  out.iterations_ = it;
  return out;
}

}  // namespace auctionshape
