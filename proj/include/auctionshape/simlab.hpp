#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "auctionshape/core.hpp"
#include "auctionshape/objects.hpp"
#include "auctionshape/rng.hpp"
#include "auctionshape/smooth.hpp"

namespace auctionshape {

//! Simulation design. Competitor bids have G_c(b) proportional to
//! (theta/b + gamma - theta)^{-1/theta} on [0, bbar]; bidder one's values
//! have F_v(v) = v^value_dist_exponent on [0, 1].
struct DgpSpec {
  double gamma = 1.0;
  double theta = 1.0;
  std::size_t T = 100;
  std::uint64_t seed = 0;
  double value_dist_exponent = 1.5;
  //! Bidders assumed by the symmetric-model objects.
  int n = 2;
};

//! Throws std::invalid_argument naming the offending field.
void validate(const DgpSpec& spec);

double dgp_bbar(double gamma, double theta);

//! Closed-form truths of a design.
class TruthSet {
 public:
  explicit TruthSet(const DgpSpec& spec);

  const DgpSpec& spec() const { return spec_; }
  double bbar() const { return bbar_; }
  //! Constant in Q_c(p) = theta c p^theta / (1 - c (gamma - theta) p^theta).
  double c() const { return c_; }

  double Qc(double p) const;
  double Qc_d1(double p) const;
  double Gc(double b) const;
  double gc(double b) const;
  //! beta^{-1}(b) = (1 + theta) b + (gamma - theta) b^2
  double inverse_bid(double b) const;
  //! Bidder one's bid at value v in [0,1].
  double bid(double v) const;
  double alpha(double p) const;
  double alpha_d1(double p) const;
  double e(double p) const;
  double Fv(double v) const;
  double fv(double v) const;
  double Qv(double tau) const;
  //! Bidder one's win-probability cdf, F_v(alpha(p)).
  double Fp(double p) const;

  double bs() const { return bs_; }
  double mv() const { return mv_; }
  //! e(1)/(n-1) - n/(n-1)^2 \int e p^{(2-n)/(n-1)}, with n from the design.
  double bs_symmetric() const { return bs_symm_; }

 private:
  DgpSpec spec_;
  double bbar_, c_, k_;
  double bs_ = 0.0, mv_ = 0.0, bs_symm_ = 0.0;
};

TruthSet dgp_truths(const DgpSpec& spec);

struct DgpSample {
  std::vector<double> rival_bids;  // maximum competitor bids
  std::vector<double> own_bids;    // bidder one's bids
  std::vector<double> own_values;
};

DgpSample dgp_sample(const DgpSpec& spec, Philox4x32& rng);

enum class BandwidthTarget { alpha, density, derivative };

//! Parametric reference alpha(p) = vbar p^gamma.
struct ReferenceFit {
  double vbar = 1.0;
  double gamma = 1.0;
  bool fallback = false;  // moment equation had no root; gamma = 1
};

//! Method of moments: the mean and variance of values[t] ~ vbar p_t^gamma
//! match those of vbar p^gamma with p drawn from the atoms.
ReferenceFit fit_reference_model(const std::vector<double>& p_atoms,
                                 const std::vector<double>& values);

struct BandwidthOptions {
  Kernel kernel;
  double scale = 1.0;
  bool undersmooth = false;  // multiply by T^{-2/15}
};

//! Asymptotic-MISE-optimal bandwidth for the smoothed alpha (alpha and
//! derivative targets) under the reference model, on the psi scale.
//! Integrates on [0.05, 1] when the squared error is not integrable on [0, 1].
//! psi = alpha is given the fifth-root bandwidth. The density target is the
//! Gaussian-reference rule for a KDE of `values`.
double rule_of_thumb_bandwidth(const std::vector<double>& p_atoms,
                               const std::vector<double>& values, const Transform& psi,
                               BandwidthTarget target, const BandwidthOptions& opt = {});
double rule_of_thumb_bandwidth(const ReferenceFit& fit, std::size_t T, const Transform& psi,
                               BandwidthTarget target, const BandwidthOptions& opt = {});

//! Gaussian-reference bandwidth min(sd, IQR/1.349) * C * T^{-1/5}, with C
//! 1.06 for the Gaussian and 2.345 for the Epanechnikov kernel.
double silverman_bandwidth(const std::vector<double>& x, const Kernel& kernel = {});

enum class IbfBoundary { none, bc };

//! Inverse-bid-function baseline: empirical G_c, kernel g_c, pseudo-values
//! b + G_c(b)/g_c(b). The bc variant reflects the density estimate at 0 and
//! at the largest bid.
class IbfEstimate {
 public:
  IbfEstimate(const MaxRivalSample& rivals, double bandwidth, IbfBoundary boundary,
              Kernel kernel = {});

  double Gc(double b) const { return rivals_.cdf(b); }
  double gc(double b) const { return kde_(b); }
  //! NaN where the density estimate is zero.
  double pseudo_value(double b) const;
  //! pseudo_value(Q_cT(p)).
  double alpha(double p) const;

  struct Applied {
    std::vector<double> values;  // pseudo-values of the kept bids, sorted
    double bs = 0.0;             // mean of G_c^2 / g_c over kept bids
    std::size_t trimmed = 0;
  };
  //! Applies the inverse bid function to bidder one's bids.
  Applied apply(const std::vector<double>& own_bids) const;

  const MaxRivalSample& rivals() const { return rivals_; }
  const ReflectionKde& density() const { return kde_; }

 private:
  MaxRivalSample rivals_;
  ReflectionKde kde_;
};

enum class McEstimator { ls, mle, smoothed_ls, smoothed_mle, ibf, ibf_bc, jackknife };
enum class McObject { alpha, alpha_half, bs, mv, fv, qv, bs_symm };

std::string to_string(McEstimator e);
std::string to_string(McObject o);
McEstimator estimator_from_string(const std::string& s);
McObject object_from_string(const std::string& s);
//! Function objects are scored by RMISE, the others by RMSE and bias.
bool is_function_object(McObject o);
//! Whether the estimator produces the object.
bool supports(McEstimator e, McObject o);
//! Unsmoothed estimators run once per design with bandwidth scale 0.
bool uses_bandwidth(McEstimator e);

struct McConfig {
  std::vector<DgpSpec> designs;
  std::vector<McEstimator> estimators;
  std::vector<McObject> objects;
  std::vector<double> scales = {1.0};
  int replications = 1000;
  //! Any alpha-kind transform is replaced by the pilot of each replication.
  Transform psi = Transform::fifthroot();
  BoundaryScheme boundary = BoundaryScheme::boundary_kernel;
  bool undersmooth = false;
  //! 0 reads AUCTIONSHAPE_THREADS, else the hardware concurrency.
  unsigned threads = 0;
};

//! Throws std::invalid_argument naming the offending field.
void validate(const McConfig& config);

struct McCell {
  std::size_t design = 0;
  DgpSpec spec;
  McEstimator estimator = McEstimator::ls;
  McObject object = McObject::bs;
  double scale = 0.0;
  int replications = 0;
  int failures = 0;
  bool flagged = false;  // more than 1% failed replications
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double bias = std::numeric_limits<double>::quiet_NaN();
  double rmise = std::numeric_limits<double>::quiet_NaN();
  double median_abs_error = std::numeric_limits<double>::quiet_NaN();
  //! Per replication: signed error (scalar objects) or integrated squared
  //! error (function objects); NaN for a failed replication.
  std::vector<double> errors;
};

struct McReport {
  std::vector<McCell> cells;
  std::size_t trimmed = 0;  // IBF pseudo-values dropped for a zero density

  //! Long format: design columns, estimator, object, scale, metric, value.
  std::string to_csv() const;
  std::string to_json() const;
  static McReport from_csv(const std::string& text);
};

//! Replication r of design d draws from Philox keyed by seed ^ r on stream d,
//! so the report does not depend on the thread count.
McReport run_monte_carlo(const McConfig& config);

//! Threads to use: AUCTIONSHAPE_THREADS if set and positive, else the
//! hardware concurrency.
unsigned default_thread_count();

//! Relative error table: within each (design, object) group the metric
//! (rmise for function objects, else rmse) is divided by the group minimum
//! and multiplied by 1000.
struct RelativeRow {
  std::size_t design = 0;
  DgpSpec spec;
  McObject object = McObject::bs;
  McEstimator estimator = McEstimator::ls;
  double scale = 0.0;
  double relative = 0.0;
  double minimum = 0.0;
};
std::vector<RelativeRow> relative_table(const McReport& report);
std::string relative_table_csv(const std::vector<RelativeRow>& rows);
std::string relative_table_text(const std::vector<RelativeRow>& rows);

}  // namespace auctionshape
