#include "auctionshape/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace auctionshape {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r' || s[a] == '\n')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r' || s[b - 1] == '\n')) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

void check_unit(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("argument outside [0,1]");
}

}  // namespace

// ---------------------------------------------------------------- BidData

BidData::BidData(std::vector<Auction> auctions) : auctions_(std::move(auctions)) {
  if (auctions_.empty()) throw std::invalid_argument("no auctions");
  std::set<std::string> reference;
  for (const auto& b : auctions_.front().bids) {
    if (!reference.insert(b.bidder_id).second)
      throw std::invalid_argument("duplicate bidder '" + b.bidder_id + "' in auction '" +
                                  auctions_.front().auction_id + "'");
    bidders_.push_back(b.bidder_id);
  }
  if (bidders_.size() < 2) throw std::invalid_argument("auctions need at least two bidders");
  for (const auto& a : auctions_) {
    std::set<std::string> ids;
    for (const auto& b : a.bids) {
      if (!std::isfinite(b.bid) || b.bid < 0.0)
        throw std::invalid_argument("bid must be finite and nonnegative in auction '" +
                                    a.auction_id + "'");
      if (!ids.insert(b.bidder_id).second)
        throw std::invalid_argument("duplicate bidder '" + b.bidder_id + "' in auction '" +
                                    a.auction_id + "'");
    }
    if (ids != reference)
      throw std::invalid_argument("auction '" + a.auction_id + "' has a different bidder set");
  }
}

std::vector<double> BidData::own_bids(const std::string& bidder) const {
  std::vector<double> out;
  out.reserve(auctions_.size());
  for (const auto& a : auctions_) {
    for (const auto& b : a.bids)
      if (b.bidder_id == bidder) out.push_back(b.bid);
  }
  if (out.size() != auctions_.size()) throw std::invalid_argument("unknown bidder '" + bidder + "'");
  return out;
}

std::vector<double> BidData::max_rival_bids(const std::string& bidder) const {
  std::vector<double> out;
  out.reserve(auctions_.size());
  for (const auto& a : auctions_) {
    double m = -1.0;
    bool found = false;
    for (const auto& b : a.bids) {
      if (b.bidder_id == bidder)
        found = true;
      else
        m = std::max(m, b.bid);
    }
    if (!found) throw std::invalid_argument("unknown bidder '" + bidder + "'");
    out.push_back(m);
  }
  return out;
}

std::vector<double> BidData::pooled_bids() const {
  std::vector<double> out;
  for (const auto& a : auctions_)
    for (const auto& b : a.bids) out.push_back(b.bid);
  return out;
}

BidData read_bid_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  int col_auction = -1, col_bidder = -1, col_bid = -1;
  std::vector<Auction> auctions;
  std::unordered_map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "auction_id") col_auction = static_cast<int>(i);
        if (cells[i] == "bidder_id") col_bidder = static_cast<int>(i);
        if (cells[i] == "bid") col_bid = static_cast<int>(i);
      }
      if (col_auction < 0 || col_bidder < 0 || col_bid < 0)
        throw ParseError("row " + std::to_string(lineno) +
                             ": header must contain auction_id,bidder_id,bid",
                         lineno);
      header_seen = true;
      continue;
    }
    int need = std::max({col_auction, col_bidder, col_bid});
    if (static_cast<int>(cells.size()) <= need)
      throw ParseError("row " + std::to_string(lineno) + ": expected " +
                           std::to_string(need + 1) + " fields, got " +
                           std::to_string(cells.size()),
                       lineno);
    const std::string& text = cells[col_bid];
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw ParseError("row " + std::to_string(lineno) + ": non-numeric bid '" + text + "'",
                       lineno);
    if (!std::isfinite(value) || value < 0.0)
      throw ParseError("row " + std::to_string(lineno) + ": bid must be finite and nonnegative",
                       lineno);
    const std::string& aid = cells[col_auction];
    auto it = index.find(aid);
    if (it == index.end()) {
      index.emplace(aid, auctions.size());
      auctions.push_back(Auction{aid, {}});
      it = index.find(aid);
    }
    auctions[it->second].bids.push_back(Bid{cells[col_bidder], value});
  }
  if (!header_seen) throw ParseError("row 1: missing header", 1);
  if (auctions.empty()) throw ParseError("no data rows", lineno);
  try {
    return BidData(std::move(auctions));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 0);
  }
}

BidData read_bid_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return read_bid_csv(in);
}

// --------------------------------------------------------- MaxRivalSample

MaxRivalSample::MaxRivalSample(std::vector<double> values, SampleSource source)
    : values_(std::move(values)), source_(source) {
  for (double v : values_)
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("sample values must be finite and nonnegative");
  std::stable_sort(values_.begin(), values_.end());
}

double MaxRivalSample::cdf(double x) const {
  if (values_.empty()) throw std::invalid_argument("empty sample");
  auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

// --------------------------------------------------------- MonotoneStepFn

MonotoneStepFn::MonotoneStepFn(std::vector<double> knots, std::vector<double> levels,
                               Continuity continuity)
    : knots_(std::move(knots)), levels_(std::move(levels)), continuity_(continuity) {
  if (levels_.empty() || knots_.size() != levels_.size() + 1)
    throw std::invalid_argument("step function needs pieces+1 knots");
  if (knots_.front() < 0.0 || knots_.back() > 1.0)
    throw std::invalid_argument("step function knots outside [0,1]");
  for (std::size_t i = 1; i < knots_.size(); ++i)
    if (!(knots_[i] > knots_[i - 1]))
      throw std::invalid_argument("step function knots must increase strictly");
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (!std::isfinite(levels_[i])) throw std::invalid_argument("step function level not finite");
    if (i > 0 && levels_[i] < levels_[i - 1])
      throw std::invalid_argument("step function levels must be nondecreasing");
  }
}

std::size_t MonotoneStepFn::piece(double p) const {
  const std::size_t L = levels_.size();
  if (continuity_ == Continuity::left) {
    auto it = std::lower_bound(knots_.begin() + 1, knots_.end(), p);
    std::size_t j = static_cast<std::size_t>(it - (knots_.begin() + 1));
    return std::min(j, L - 1);
  }
  auto it = std::upper_bound(knots_.begin(), knots_.end(), p);
  if (it == knots_.begin()) return 0;
  std::size_t j = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(j, L - 1);
}

double MonotoneStepFn::operator()(double p) const {
  check_unit(p);
  return levels_[piece(p)];
}

// ------------------------------------------------------------ ConvexPwlFn

ConvexPwlFn::ConvexPwlFn(std::vector<Node> nodes, double tol) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw std::invalid_argument("convex function needs at least two nodes");
  double scale = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i].p) || !std::isfinite(nodes_[i].value))
      throw std::invalid_argument("convex function node not finite");
    if (i > 0 && !(nodes_[i].p > nodes_[i - 1].p))
      throw std::invalid_argument("convex function nodes must increase strictly");
    scale = std::max(scale, std::abs(nodes_[i].value));
  }
  if (nodes_.front().p < 0.0 || nodes_.back().p > 1.0)
    throw std::invalid_argument("convex function nodes outside [0,1]");
  // Chord test is stable for nearly coincident nodes.
  for (std::size_t i = 1; i + 1 < nodes_.size(); ++i) {
    const Node &a = nodes_[i - 1], &b = nodes_[i], &c = nodes_[i + 1];
    double chord = a.value + (c.value - a.value) * (b.p - a.p) / (c.p - a.p);
    if (b.value > chord + tol * std::max(scale, 1.0))
      throw std::invalid_argument("piecewise-linear function is not convex");
  }
}

double ConvexPwlFn::operator()(double p) const {
  check_unit(p);
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), p,
                             [](double x, const Node& n) { return x < n.p; });
  std::size_t j;
  if (it == nodes_.begin())
    j = 0;
  else if (it == nodes_.end())
    j = nodes_.size() - 2;
  else
    j = std::min<std::size_t>(static_cast<std::size_t>(it - nodes_.begin()) - 1, nodes_.size() - 2);
  const Node &a = nodes_[j], &b = nodes_[j + 1];
  if (p == b.p) return b.value;
  return a.value + (b.value - a.value) * (p - a.p) / (b.p - a.p);
}

double ConvexPwlFn::left_derivative(double p) const {
  check_unit(p);
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), p,
                             [](const Node& n, double x) { return n.p < x; });
  std::size_t j = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  j = std::min(j, nodes_.size() - 2);
  return (nodes_[j + 1].value - nodes_[j].value) / (nodes_[j + 1].p - nodes_[j].p);
}

std::vector<double> ConvexPwlFn::slopes() const {
  std::vector<double> s;
  for (std::size_t j = 0; j + 1 < nodes_.size(); ++j)
    s.push_back((nodes_[j + 1].value - nodes_[j].value) / (nodes_[j + 1].p - nodes_[j].p));
  return s;
}

// ------------------------------------------------------------------ PwlFn

PwlFn::PwlFn(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("piecewise-linear function has no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!(s.hi > s.lo) || !std::isfinite(s.intercept) || !std::isfinite(s.slope))
      throw std::invalid_argument("invalid segment");
    if (i > 0 && s.lo != segments_[i - 1].hi)
      throw std::invalid_argument("segments must be contiguous");
  }
  if (segments_.front().lo != 0.0 || segments_.back().hi != 1.0)
    throw std::invalid_argument("segments must partition (0,1]");
}

std::size_t PwlFn::segment_index(double p) const {
  auto it = std::lower_bound(segments_.begin(), segments_.end(), p,
                             [](const Segment& s, double x) { return s.hi < x; });
  if (it == segments_.end()) return segments_.size() - 1;
  return static_cast<std::size_t>(it - segments_.begin());
}

double PwlFn::operator()(double p) const {
  check_unit(p);
  const auto& s = segments_[segment_index(p)];
  return s.intercept + s.slope * p;
}

double PwlFn::left_limit(double p) const { return (*this)(p); }

double PwlFn::right_limit(double p) const {
  check_unit(p);
  auto it = std::upper_bound(segments_.begin(), segments_.end(), p,
                             [](double x, const Segment& s) { return x < s.hi; });
  const auto& s = it == segments_.end() ? segments_.back() : *it;
  return s.intercept + s.slope * p;
}

PwlFn PwlFn::from_convex(const ConvexPwlFn& f) {
  const auto& nd = f.nodes();
  std::vector<Segment> segs;
  for (std::size_t j = 0; j + 1 < nd.size(); ++j) {
    double slope = (nd[j + 1].value - nd[j].value) / (nd[j + 1].p - nd[j].p);
    double lo = j == 0 ? 0.0 : nd[j].p;
    double hi = j + 2 == nd.size() ? 1.0 : nd[j + 1].p;
    segs.push_back(Segment{lo, hi, nd[j].value - slope * nd[j].p, slope});
  }
  return PwlFn(std::move(segs));
}

// ------------------------------------------------------------- operations

MonotoneStepFn empirical_quantile_fn(const MaxRivalSample& sample) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  const std::size_t T = sample.size();
  std::vector<double> knots(T + 1);
  for (std::size_t t = 0; t <= T; ++t) knots[t] = static_cast<double>(t) / static_cast<double>(T);
  return MonotoneStepFn(std::move(knots), sample.values(), Continuity::left);
}

double empirical_quantile(const MaxRivalSample& sample, double p) {
  if (sample.empty()) throw std::invalid_argument("empty sample");
  check_unit(p);
  const double T = static_cast<double>(sample.size());
  // smallest t with p <= t/T, matching the knots of empirical_quantile_fn
  std::size_t t = static_cast<std::size_t>(std::ceil(p * T));
  if (t >= 1 && p <= static_cast<double>(t - 1) / T) --t;
  if (t < sample.size() && p > static_cast<double>(t) / T) ++t;
  t = std::clamp<std::size_t>(t, 1, sample.size());
  return sample.order_stat(t);
}

MonotoneStepFn pooled_quantile_fn(const MaxRivalSample& pooled, int n) {
  if (n < 2) throw std::invalid_argument("pooled mode requires n >= 2");
  if (pooled.empty()) throw std::invalid_argument("empty sample");
  const std::size_t N = pooled.size();
  std::vector<double> knots(N + 1);
  knots[0] = 0.0;
  for (std::size_t l = 1; l <= N; ++l)
    knots[l] = std::pow(static_cast<double>(l) / static_cast<double>(N), n - 1);
  knots[N] = 1.0;
  return MonotoneStepFn(std::move(knots), pooled.values(), Continuity::left);
}

PwlFn unconstrained_payment(const MaxRivalSample& sample, PaymentMode mode, int n) {
  MonotoneStepFn q = mode == PaymentMode::max_rival ? empirical_quantile_fn(sample)
                                                     : pooled_quantile_fn(sample, n);
  std::vector<Segment> segs;
  segs.reserve(q.pieces());
  for (std::size_t j = 0; j < q.pieces(); ++j)
    segs.push_back(Segment{q.knots()[j], q.knots()[j + 1], 0.0, q.levels()[j]});
  return PwlFn(std::move(segs));
}

ConvexPwlFn integrate_step(const MonotoneStepFn& alpha) {
  const auto& k = alpha.knots();
  const auto& l = alpha.levels();
  std::vector<Node> nodes;
  nodes.reserve(k.size() + 1);
  nodes.push_back(Node{0.0, 0.0});
  double acc = 0.0, prev = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) {
    double hi = j + 1 == l.size() ? 1.0 : k[j + 1];
    acc += l[j] * (hi - prev);
    prev = hi;
    nodes.push_back(Node{hi, acc});
  }
  return ConvexPwlFn(std::move(nodes));
}

double integrate_pwl_power(const PwlFn& f, double a, double lo, double hi) {
  if (!(a > -1.0)) throw std::domain_error("divergent weight");
  double total = 0.0;
  for (const auto& s : f.segments()) {
    double x0 = std::max(s.lo, lo), x1 = std::min(s.hi, hi);
    if (!(x1 > x0)) continue;
    double i0 = (std::pow(x1, a + 1.0) - std::pow(x0, a + 1.0)) / (a + 1.0);
    double i1 = (std::pow(x1, a + 2.0) - std::pow(x0, a + 2.0)) / (a + 2.0);
    total += s.intercept * i0 + s.slope * i1;
  }
  return total;
}

double integrate_pwl_power(const PwlFn& f, double a) { return integrate_pwl_power(f, a, 0.0, 1.0); }

double integrate_pwl_power(const ConvexPwlFn& f, double a) {
  return integrate_pwl_power(PwlFn::from_convex(f), a);
}

}  // namespace auctionshape
