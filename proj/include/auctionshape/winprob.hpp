#pragma once

#include <functional>
#include <vector>

#include "auctionshape/core.hpp"

namespace auctionshape {

enum class FpKind { symmetric, empirical, min_entropy };

//! Distribution of equilibrium win probabilities.
class FpModel {
 public:
  FpKind kind() const { return kind_; }
  //! Number of bidders (0 for the empirical model).
  int n() const { return n_; }

  double cdf(double p) const;
  //! Density and its first two derivatives. Not available for the empirical
  //! model. For n > 2 the symmetric density is unbounded at 0.
  double pdf(double p) const;
  double pdf_d1(double p) const;
  double pdf_d2(double p) const;
  double quantile(double tau) const;

  //! \int g dF_p. Symmetric / min-entropy models integrate in u = p^{1/(n-1)};
  //! the empirical model averages over its atoms.
  double expect(const std::function<double(double)>& g) const;

  //! Sorted atoms of the empirical model.
  const std::vector<double>& atoms() const { return atoms_; }
  //! Tilt coefficients of the min-entropy model.
  const std::vector<double>& mu() const { return mu_; }
  int degree() const { return static_cast<int>(mu_.size()) - 1; }
  //! Largest absolute moment residual reached by the min-entropy solver.
  double residual() const { return residual_; }
  int newton_iterations() const { return iterations_; }

  static FpModel symmetric(int n);
  static FpModel empirical(std::vector<double> atoms);

 private:
  friend FpModel fp_min_entropy(const FpModel&, int, int);
  double tilt(double p) const;
  double tilt_d1(double p) const;
  double tilt_d2(double p) const;

  FpKind kind_ = FpKind::symmetric;
  int n_ = 2;
  std::vector<double> atoms_;
  std::vector<double> mu_;
  double residual_ = 0.0;
  int iterations_ = 0;
};

FpModel fp_symmetric(int n);
//! F_pT(p) = G_T(Q_cT(p)): atoms at the estimated win probabilities
//! G_cT(b_1t) of bidder one's bids.
FpModel fp_empirical(const std::vector<double>& own_bids, const MaxRivalSample& rivals);
//! Same with any estimate of G_c, e.g. G_T^{n-1} from pooled bids.
FpModel fp_empirical(const std::vector<double>& own_bids,
                     const std::function<double(double)>& rival_cdf);

//! Default basis degree: ceil(T^{1/3}) capped at 8.
int default_entropy_degree(std::size_t T);

//! Exponential tilt exp(mu' [1, p, ..., p^degree]) p^{(2-n)/(n-1)} matching
//! the first degree + 1 moments of an empirical model. degree < 0 selects the
//! default. Damped Newton on the convex dual, at most 200 iterations.
FpModel fp_min_entropy(const FpModel& empirical, int n, int degree = -1);

}  // namespace auctionshape
