#include "auctionshape/isotonic_ls.hpp"

#include <algorithm>
#include <stdexcept>

namespace auctionshape {

std::vector<double> weighted_pava(const IsotonicProblem& problem, double lower) {
  const auto& y = problem.targets;
  const auto& w = problem.weights;
  if (y.size() != w.size()) throw std::invalid_argument("targets and weights differ in length");
  for (double wi : w)
    if (!(wi > 0.0)) throw std::invalid_argument("weights must be positive");

  struct Block {
    double value;
    double weight;
    std::size_t count;
  };
  std::vector<Block> stack;
  stack.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    stack.push_back(Block{y[i], w[i], 1});
    while (stack.size() > 1 && stack[stack.size() - 2].value >= stack.back().value) {
      Block top = stack.back();
      stack.pop_back();
      Block& prev = stack.back();
      double tw = prev.weight + top.weight;
      prev.value = (prev.value * prev.weight + top.value * top.weight) / tw;
      prev.weight = tw;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : stack)
    for (std::size_t k = 0; k < b.count; ++k) out.push_back(std::max(b.value, lower));
  return out;
}

std::vector<double> gcm_slopes(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("gcm needs >= 2 points");
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < x.size(); ++i) {
    while (hull.size() >= 2) {
      std::size_t a = hull[hull.size() - 2], b = hull.back();
      // drop b if it lies on or above the chord a -> i
      double cross = (y[b] - y[a]) * (x[i] - x[a]) - (y[i] - y[a]) * (x[b] - x[a]);
      if (cross >= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  std::vector<double> slopes(x.size() - 1);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    std::size_t a = hull[h], b = hull[h + 1];
    double s = (y[b] - y[a]) / (x[b] - x[a]);
    for (std::size_t k = a; k < b; ++k) slopes[k] = s;
  }
  return slopes;
}

LsProblem ls_problem(const PwlFn& e_T) {
  LsProblem out;
  const auto& segs = e_T.segments();
  out.knots.push_back(0.0);
  out.values.push_back(e_T.right_limit(0.0));
  for (std::size_t j = 0; j < segs.size(); ++j) {
    double x = segs[j].hi;
    double v = e_T.left_limit(x);
    if (x < 1.0) v = std::min(v, e_T.right_limit(x));
    out.knots.push_back(x);
    out.values.push_back(v);
  }
  for (std::size_t k = 1; k < out.knots.size(); ++k) {
    double dx = out.knots[k] - out.knots[k - 1];
    out.problem.targets.push_back((out.values[k] - out.values[k - 1]) / dx);
    out.problem.weights.push_back(dx);
  }
  return out;
}

double ls_objective(const IsotonicProblem& problem, const std::vector<double>& levels) {
  double s = 0.0;
  for (std::size_t k = 0; k < levels.size(); ++k)
    s += problem.weights[k] * (0.5 * levels[k] * levels[k] - problem.targets[k] * levels[k]);
  return s * static_cast<double>(levels.size());
}

LsFit solve_ls(const PwlFn& e_T) {
  LsProblem prob = ls_problem(e_T);
  std::vector<double> levels = weighted_pava(prob.problem, 0.0);
  double obj = ls_objective(prob.problem, levels);
  MonotoneStepFn alpha(prob.knots, levels, Continuity::left);
  ConvexPwlFn payment = integrate_step(alpha);
  return LsFit{std::move(alpha), std::move(payment), obj};
}

LsFit solve_ls(const MaxRivalSample& sample) {
  return solve_ls(unconstrained_payment(sample, PaymentMode::max_rival));
}

LsFit solve_ls_pooled(const MaxRivalSample& pooled, int n) {
  if (n < 2) throw std::invalid_argument("pooled mode requires n >= 2");
  return solve_ls(unconstrained_payment(pooled, PaymentMode::pooled_symmetric, n));
}

double theta_inverse(const MonotoneStepFn& alpha, double level) {
  const auto& l = alpha.levels();
  auto it = std::lower_bound(l.begin(), l.end(), level);  // first level >= target
  std::size_t j = static_cast<std::size_t>(it - l.begin());
  if (j == 0) return 0.0;
  return alpha.knots()[j];
}

double theta_inverse(const LsFit& fit, double level) { return theta_inverse(fit.alpha, level); }

}  // namespace auctionshape
