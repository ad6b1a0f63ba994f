#pragma once

#include <limits>
#include <vector>

#include "auctionshape/core.hpp"

namespace auctionshape {

struct IsotonicProblem {
  std::vector<double> targets;
  std::vector<double> weights;
};

//! Weighted isotonic regression by pool-adjacent-violators. Levels are
//! clipped at `lower`, which is optimal for a constant lower bound.
std::vector<double> weighted_pava(const IsotonicProblem& problem,
                                  double lower = -std::numeric_limits<double>::infinity());

//! Left-derivatives of the greatest convex minorant of the points (x_k, y_k)
//! on each interval (x_{k-1}, x_k]. Monotone-stack construction.
std::vector<double> gcm_slopes(const std::vector<double>& x, const std::vector<double>& y);

//! Knots and weighted isotonic problem of a piecewise-linear payment e_T.
//! Node values at a jump take the smaller one-sided limit.
struct LsProblem {
  std::vector<double> knots;
  std::vector<double> values;
  IsotonicProblem problem;
};
LsProblem ls_problem(const PwlFn& e_T);

//! sum_k w_k (alpha_k^2 / 2 - y_k alpha_k), scaled by the number of pieces.
//! For the max-rival grid this is exactly the summed least-squares criterion.
double ls_objective(const IsotonicProblem& problem, const std::vector<double>& levels);

struct LsFit {
  MonotoneStepFn alpha;
  ConvexPwlFn payment;
  double objective = 0.0;
};

LsFit solve_ls(const PwlFn& e_T);
LsFit solve_ls(const MaxRivalSample& sample);
LsFit solve_ls_pooled(const MaxRivalSample& pooled, int n);

//! sup{p : alpha(p) < level}.
double theta_inverse(const MonotoneStepFn& alpha, double level);
double theta_inverse(const LsFit& fit, double level);

}  // namespace auctionshape
