#pragma once

#include <cstddef>
#include <vector>

#include "auctionshape/core.hpp"

namespace auctionshape {

//! Coefficients of the simplified log-likelihood
//!   sum_t a[t] log(alpha_t - b_t) - c[t] log(alpha_t - b_{t-1})
//! (0-based t). Indices below first_free are pinned at alpha_t = b_t.
struct LikelihoodCoefs {
  std::vector<double> a;
  std::vector<double> c;
  std::size_t first_free = 2;
};

LikelihoodCoefs max_rival_coefs(std::size_t T);
LikelihoodCoefs pooled_coefs(std::size_t N, int n);

//! Sorted bids with ties broken by adding t * 1e-12 * max|b|.
std::vector<double> break_ties(const std::vector<double>& sorted_bids);

//! alpha_(1) = b_(1), alpha_(t) = (t-1) b_(t) - (t-2) b_(t-1).
std::vector<double> mle_init(const MaxRivalSample& sample);

//! Derivative of the log-likelihood contributions of t in [first, last]
//! (0-based, inclusive) at a common level.
double block_foc(std::size_t first, std::size_t last, const std::vector<double>& bids,
                 const LikelihoodCoefs& coefs, double level);

//! Unique root of block_foc above the block's largest bid.
double pava_block_root(std::size_t first, std::size_t last, const std::vector<double>& bids,
                       const LikelihoodCoefs& coefs);

struct MleFit {
  std::vector<double> bids;          // sorted, tie-broken
  std::vector<double> alpha_levels;  // alpha_(t), t = 1..T
  std::vector<double> knot_probs;    // e_(t) / b_(t)
  ConvexPwlFn payment;
  double loglik = 0.0;
  std::size_t merges = 0;
  std::size_t first_free = 2;

  //! alpha as a left-continuous step function of p.
  MonotoneStepFn alpha() const;
};

MleFit pava_mle(const MaxRivalSample& sample);
MleFit pava_mle_pooled(const MaxRivalSample& pooled, int n);

//! Payment nodes (e_(t)/b_(t), e_(t)) from the backward product with e_(T) = b_(T).
//! Returns the nodes' probabilities through `knot_probs` when non-null.
ConvexPwlFn e_from_alpha(const std::vector<double>& levels, const std::vector<double>& bids,
                         std::vector<double>* knot_probs = nullptr);

double loglik(const std::vector<double>& levels, const std::vector<double>& bids,
              const LikelihoodCoefs& coefs);
double loglik(const std::vector<double>& levels, const MaxRivalSample& sample);

struct KktReport {
  double max_stationarity = 0.0;
  double min_multiplier = 0.0;
  double max_slackness = 0.0;
  double max_primal_violation = 0.0;
};
KktReport kkt_check(const std::vector<double>& levels, const std::vector<double>& bids,
                    const LikelihoodCoefs& coefs);

//! Smallest minimizer over {b_(t) < v} of the step criterion S_T(b, v); 0 if v <= b_(1).
double bid_function_mle(const MaxRivalSample& sample, double v);

}  // namespace auctionshape
