#include "auctionshape/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>

namespace auctionshape {

LikelihoodCoefs max_rival_coefs(std::size_t T) {
  LikelihoodCoefs c;
  c.a.resize(T);
  c.c.resize(T);
  for (std::size_t i = 0; i < T; ++i) {
    double t = static_cast<double>(i + 1);
    c.a[i] = t - 2.0;
    c.c[i] = t - 1.0;
  }
  c.first_free = 2;
  return c;
}

LikelihoodCoefs pooled_coefs(std::size_t N, int n) {
  if (n < 2) throw std::invalid_argument("pooled mode requires n >= 2");
  LikelihoodCoefs c;
  c.a.resize(N);
  c.c.resize(N);
  const double nm1 = n - 1.0;
  for (std::size_t i = 0; i < N; ++i) {
    double l = static_cast<double>(i + 1);
    c.a[i] = (l - n) / nm1;
    c.c[i] = (l - 1.0) / nm1;
  }
  c.first_free = static_cast<std::size_t>(n);
  return c;
}

std::vector<double> break_ties(const std::vector<double>& b) {
  bool tied = false;
  for (std::size_t i = 1; i < b.size(); ++i)
    if (!(b[i] > b[i - 1])) tied = true;
  if (!tied) return b;
  double scale = 0.0;
  for (double x : b) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) scale = 1.0;
  std::vector<double> out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    out[i] = b[i] + static_cast<double>(i + 1) * 1e-12 * scale;
  return out;
}

namespace {

std::vector<double> init_levels(const std::vector<double>& b, const LikelihoodCoefs& coefs) {
  std::vector<double> lv(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i < coefs.first_free) {
      lv[i] = b[i];
    } else {
      double den = coefs.c[i] - coefs.a[i];
      lv[i] = (coefs.c[i] * b[i] - coefs.a[i] * b[i - 1]) / den;
    }
  }
  return lv;
}

MleFit run_pava(std::vector<double> bids, const LikelihoodCoefs& coefs) {
  const std::size_t T = bids.size();
  if (T < 3 || T <= coefs.first_free) throw std::invalid_argument("insufficient data for NPMLE");
  std::vector<double> lv = init_levels(bids, coefs);

  struct Block {
    std::size_t first, last;
    double value;
  };
  std::vector<Block> stack;
  std::size_t merges = 0;
  for (std::size_t i = coefs.first_free; i < T; ++i) {
    stack.push_back(Block{i, i, lv[i]});
    while (stack.size() > 1 && stack[stack.size() - 2].value > stack.back().value) {
      Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      prev.last = top.last;
      prev.value = pava_block_root(prev.first, prev.last, bids, coefs);
      ++merges;
    }
  }
  if (merges + coefs.first_free + 1 > T) throw std::logic_error("PAVA exceeded merge bound");
  for (const auto& blk : stack)
    for (std::size_t i = blk.first; i <= blk.last; ++i) lv[i] = blk.value;

  MleFit fit;
  fit.first_free = coefs.first_free;
  fit.merges = merges;
  fit.payment = e_from_alpha(lv, bids, &fit.knot_probs);
  fit.loglik = loglik(lv, bids, coefs);
  fit.alpha_levels = std::move(lv);
  fit.bids = std::move(bids);
  return fit;
}

}  // namespace

std::vector<double> mle_init(const MaxRivalSample& sample) {
  if (sample.size() < 3) throw std::invalid_argument("insufficient data for NPMLE");
  return init_levels(sample.values(), max_rival_coefs(sample.size()));
}

double block_foc(std::size_t first, std::size_t last, const std::vector<double>& b,
                 const LikelihoodCoefs& coefs, double level) {
  double s = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    if (coefs.a[i] != 0.0) s += coefs.a[i] / (level - b[i]);
    if (coefs.c[i] != 0.0) s -= coefs.c[i] / (level - b[i - 1]);
  }
  return s;
}

double pava_block_root(std::size_t first, std::size_t last, const std::vector<double>& b,
                       const LikelihoodCoefs& coefs) {
  if (first == 0 || last < first || last >= b.size())
    throw std::invalid_argument("invalid block");
  auto f = [&](double x) { return block_foc(first, last, b, coefs, x); };
  double scale = std::max(std::abs(b[last]), 1e-300);
  double lo = b[last] + 1e-12 * scale;
  double hi_init = lo;
  for (std::size_t i = first; i <= last; ++i) {
    double den = coefs.c[i] - coefs.a[i];
    hi_init = std::max(hi_init, (coefs.c[i] * b[i] - coefs.a[i] * b[i - 1]) / den);
  }
  double spread = std::max(b[last] - b[first - 1], 1e-12 * scale);
  double hi = hi_init + spread;
  double flo = f(lo);
  while (!(flo > 0.0)) {
    // root lies extremely close to the largest bid
    lo = b[last] + 0.5 * (lo - b[last]);
    if (lo <= b[last]) throw std::runtime_error("root bracket expansion failed");
    flo = f(lo);
  }
  double fhi = f(hi);
  for (int k = 0; k < 200 && fhi >= 0.0; ++k) {
    spread *= 2.0;
    hi = hi_init + spread;
    fhi = f(hi);
  }
  if (fhi >= 0.0) throw std::runtime_error("root bracket expansion failed");

  boost::uintmax_t iters = 300;
  auto tol = [](double x, double y) {
    return std::abs(x - y) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), std::abs(y));
  };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  double a = r.first, c = r.second;
  return std::abs(f(a)) <= std::abs(f(c)) ? a : c;
}

MleFit pava_mle(const MaxRivalSample& sample) {
  if (sample.size() < 3) throw std::invalid_argument("insufficient data for NPMLE");
  std::vector<double> b = break_ties(sample.values());
  return run_pava(std::move(b), max_rival_coefs(sample.size()));
}

MleFit pava_mle_pooled(const MaxRivalSample& pooled, int n) {
  if (n < 2) throw std::invalid_argument("pooled mode requires n >= 2");
  if (pooled.size() < static_cast<std::size_t>(n) + 1)
    throw std::invalid_argument("insufficient data for NPMLE");
  std::vector<double> b = break_ties(pooled.values());
  return run_pava(std::move(b), pooled_coefs(pooled.size(), n));
}

ConvexPwlFn e_from_alpha(const std::vector<double>& lv, const std::vector<double>& b,
                         std::vector<double>* knot_probs) {
  const std::size_t T = b.size();
  if (lv.size() != T || T < 2) throw std::invalid_argument("levels and bids differ in length");
  std::vector<double> e(T);
  e[T - 1] = b[T - 1];
  for (std::size_t s = T - 1; s >= 1; --s) {
    if (lv[s] < b[s]) throw std::invalid_argument("infeasible levels");
    double num = lv[s] - b[s];
    if (num == 0.0) {
      e[s - 1] = 0.0;
      continue;
    }
    double den = lv[s] - b[s - 1];
    if (!(den > 0.0)) throw std::invalid_argument("infeasible levels");
    e[s - 1] = e[s] * b[s - 1] * num / (b[s] * den);
  }
  std::vector<Node> nodes;
  std::vector<double> probs(T, 0.0);
  nodes.push_back(Node{0.0, 0.0});
  for (std::size_t t = 0; t < T; ++t) {
    if (e[t] == 0.0 || b[t] == 0.0) continue;
    double p = t + 1 == T ? 1.0 : e[t] / b[t];
    probs[t] = p;
    if (p <= nodes.back().p) continue;
    nodes.push_back(Node{p, e[t]});
  }
  if (knot_probs) *knot_probs = std::move(probs);
  if (nodes.size() < 2) throw std::invalid_argument("infeasible levels");
  return ConvexPwlFn(std::move(nodes), 1e-7);
}

double loglik(const std::vector<double>& lv, const std::vector<double>& b,
              const LikelihoodCoefs& coefs) {
  double s = 0.0;
  for (std::size_t i = coefs.first_free; i < b.size(); ++i) {
    if (coefs.a[i] != 0.0) {
      double x = lv[i] - b[i];
      if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
      s += coefs.a[i] * std::log(x);
    }
    if (coefs.c[i] != 0.0) {
      double x = lv[i] - b[i - 1];
      if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
      s -= coefs.c[i] * std::log(x);
    }
  }
  return s;
}

double loglik(const std::vector<double>& lv, const MaxRivalSample& sample) {
  return loglik(lv, sample.values(), max_rival_coefs(sample.size()));
}

KktReport kkt_check(const std::vector<double>& lv, const std::vector<double>& b,
                    const LikelihoodCoefs& coefs) {
  KktReport r;
  r.min_multiplier = 0.0;
  const std::size_t T = b.size();
  double lambda = 0.0;
  for (std::size_t i = coefs.first_free; i < T; ++i) {
    if (i > coefs.first_free) {
      double gap = lv[i] - lv[i - 1];
      r.max_primal_violation = std::max(r.max_primal_violation, -gap);
      if (gap != 0.0) {
        // a new block starts: the multiplier carried so far must vanish
        r.max_stationarity = std::max(r.max_stationarity, std::abs(lambda));
        r.max_slackness = std::max(r.max_slackness, std::abs(lambda * gap));
        lambda = 0.0;
      } else {
        r.min_multiplier = std::min(r.min_multiplier, lambda);
      }
    }
    lambda += block_foc(i, i, b, coefs, lv[i]);
  }
  r.max_stationarity = std::max(r.max_stationarity, std::abs(lambda));
  return r;
}

double bid_function_mle(const MaxRivalSample& sample, double v) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  const auto& b = sample.values();
  if (v <= b[0]) return 0.0;
  double s = 0.0, best = std::numeric_limits<double>::infinity(), arg = b[0];
  for (std::size_t i = 0; i < b.size() && b[i] < v; ++i) {
    double t = static_cast<double>(i + 1);
    if (i == 0)
      s = -1.0 / (v - b[0]);
    else
      s += (t - 2.0) / (v - b[i]) - (t - 1.0) / (v - b[i - 1]);
    if (s < best) {
      best = s;
      arg = b[i];
    }
  }
  return arg;
}

MonotoneStepFn MleFit::alpha() const {
  std::vector<double> knots{0.0}, levels;
  const std::size_t T = bids.size();
  std::size_t start = first_free > 0 ? first_free - 1 : 0;
  for (std::size_t t = start; t < T; ++t) {
    double p = knot_probs[t];
    if (p <= knots.back()) continue;
    knots.push_back(p);
    levels.push_back(alpha_levels[t]);
  }
  knots.back() = 1.0;
  return MonotoneStepFn(std::move(knots), std::move(levels), Continuity::left);
}

}  // namespace auctionshape
