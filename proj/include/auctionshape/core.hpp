#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace auctionshape {

//! Thrown when bid data cannot be parsed; carries the 1-based data row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t row)
      : std::runtime_error(msg), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

struct Bid {
  std::string bidder_id;
  double bid = 0.0;
};

struct Auction {
  std::string auction_id;
  std::vector<Bid> bids;
};

//! Per-auction bid records. Every auction has the same bidder set.
class BidData {
 public:
  explicit BidData(std::vector<Auction> auctions);

  const std::vector<Auction>& auctions() const { return auctions_; }
  std::size_t size() const { return auctions_.size(); }
  std::size_t n_bidders() const { return bidders_.size(); }
  //! Bidder ids in order of first appearance.
  const std::vector<std::string>& bidder_ids() const { return bidders_; }

  //! Bids of one bidder, one per auction, in auction order.
  std::vector<double> own_bids(const std::string& bidder) const;
  //! Highest bid among the other bidders, one per auction.
  std::vector<double> max_rival_bids(const std::string& bidder) const;
  //! All bids of all bidders.
  std::vector<double> pooled_bids() const;

 private:
  std::vector<Auction> auctions_;
  std::vector<std::string> bidders_;
};

//! Reads `auction_id,bidder_id,bid` CSV. Throws ParseError.
BidData read_bid_csv(std::istream& in);
BidData read_bid_csv_file(const std::string& path);

enum class SampleSource { observed_max, product_of_marginals, pooled_symmetric };

//! Sorted sample b_(1) <= ... <= b_(T).
class MaxRivalSample {
 public:
  MaxRivalSample() = default;
  MaxRivalSample(std::vector<double> values,
                 SampleSource source = SampleSource::observed_max);

  const std::vector<double>& values() const { return values_; }
  SampleSource source() const { return source_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  //! 1-based order statistic b_(t).
  double order_stat(std::size_t t) const { return values_.at(t - 1); }
  double max() const { return values_.back(); }
  double min() const { return values_.front(); }
  //! Empirical CDF #{b <= x}/T.
  double cdf(double x) const;

 private:
  std::vector<double> values_;
  SampleSource source_ = SampleSource::observed_max;
};

enum class Continuity { left, right };

//! Nondecreasing step function on [0,1]. levels[j] holds on the piece
//! between knots[j] and knots[j+1]; the continuity flag decides which end
//! of each piece is closed.
class MonotoneStepFn {
 public:
  MonotoneStepFn() = default;
  MonotoneStepFn(std::vector<double> knots, std::vector<double> levels,
                 Continuity continuity = Continuity::left);

  double operator()(double p) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& levels() const { return levels_; }
  Continuity continuity() const { return continuity_; }
  std::size_t pieces() const { return levels_.size(); }
  //! Index of the piece containing p under the continuity convention.
  std::size_t piece(double p) const;

 private:
  std::vector<double> knots_;
  std::vector<double> levels_;
  Continuity continuity_ = Continuity::left;
};

struct Node {
  double p;
  double value;
};

//! Continuous convex piecewise-linear function through the given nodes.
class ConvexPwlFn {
 public:
  ConvexPwlFn() = default;
  //! Checks convexity up to `tol` relative to the largest slope.
  explicit ConvexPwlFn(std::vector<Node> nodes, double tol = 1e-9);

  double operator()(double p) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  //! Slope of the segment ending at p (slope of the first segment at p0).
  double left_derivative(double p) const;
  std::vector<double> slopes() const;

 private:
  std::vector<Node> nodes_;
};

struct Segment {
  double lo;
  double hi;
  double intercept;
  double slope;
};

//! Piecewise-linear function on (0,1] with possible jumps at segment ends.
//! Each segment is closed on the right: f(p) uses the segment with lo < p <= hi.
class PwlFn {
 public:
  PwlFn() = default;
  explicit PwlFn(std::vector<Segment> segments);

  double operator()(double p) const;
  double left_limit(double p) const;
  double right_limit(double p) const;
  const std::vector<Segment>& segments() const { return segments_; }

  static PwlFn from_convex(const ConvexPwlFn& f);

 private:
  std::size_t segment_index(double p) const;
  std::vector<Segment> segments_;
};

//! b_(ceil(pT)) for p > 0, b_(1) at p = 0.
double empirical_quantile(const MaxRivalSample& sample, double p);
//! Q_cT as a left-continuous step function with knots t/T.
MonotoneStepFn empirical_quantile_fn(const MaxRivalSample& sample);
//! Q_T(p^{1/(n-1)}) for a pooled sample, as a step function in p.
MonotoneStepFn pooled_quantile_fn(const MaxRivalSample& pooled, int n);

enum class PaymentMode { max_rival, pooled_symmetric };

//! e_T(p) = p Q_cT(p), or p Q_T(p^{1/(n-1)}) in pooled mode.
PwlFn unconstrained_payment(const MaxRivalSample& sample,
                            PaymentMode mode = PaymentMode::max_rival, int n = 2);

//! Exact antiderivative of a step function starting at 0.
ConvexPwlFn integrate_step(const MonotoneStepFn& alpha);

//! Exact \int_0^1 f(p) p^a dp for a > -1.
double integrate_pwl_power(const PwlFn& f, double a);
double integrate_pwl_power(const ConvexPwlFn& f, double a);
//! Same, restricted to [lo, hi].
double integrate_pwl_power(const PwlFn& f, double a, double lo, double hi);

}  // namespace auctionshape
