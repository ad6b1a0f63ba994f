#include "auctionshape/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "auctionshape/io.hpp"
#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/npmle.hpp"
#include "auctionshape/numeric.hpp"
#include "auctionshape/objects.hpp"
#include "auctionshape/winprob.hpp"

namespace auctionshape::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kGrid = 2001;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_plain(const std::string& s, double& x) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  x = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno == 0;
}

BoundaryScheme boundary_from_string(const std::string& s) {
  if (s == "none") return BoundaryScheme::none;
  if (s == "kernel") return BoundaryScheme::boundary_kernel;
  if (s == "reflect") return BoundaryScheme::reflection;
  throw CliError(kUsage, "--boundary: expected none, kernel or reflect, got '" + s + "'");
}

std::string boundary_name(BoundaryScheme b) {
  switch (b) {
    case BoundaryScheme::none: return "none";
    case BoundaryScheme::boundary_kernel: return "kernel";
    case BoundaryScheme::reflection: return "reflect";
  }
  return "";
}

Transform transform_for(const std::string& psi, const MonotoneStepFn* step) {
  if (psi == "alpha") {
    if (step) return Transform::alpha_pilot(*step);
    // marker only; the simulation replaces it with each replication's pilot
    auto id = [](double p) { return p; };
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    return Transform::from_alpha(id, one, zero, zero, id);
  }
  return Transform::by_name(psi);
}

// Reads key = value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  if (!fs::exists(path)) throw CliError(kMissingInput, "--config: no such file " + path);
  std::istringstream in(io::read_file(path));
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (int row = 1; std::getline(in, line); ++row) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CliError(kUsage, path + " line " + std::to_string(row) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

}  // namespace

double parse_number(const std::string& text, const std::string& what) {
  std::string s = trim(text);
  double x = 0.0;
  auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (parse_plain(s, x)) return x;
  } else {
    double a = 0.0, b = 0.0;
    if (parse_plain(trim(s.substr(0, slash)), a) && parse_plain(trim(s.substr(slash + 1)), b) &&
        b != 0.0)
      return a / b;
  }
  throw CliError(kUsage, what + ": '" + text + "' is not a number");
}

bool parse_args(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out) {
  CLI::App app{"Shape-constrained estimation for first-price auctions", "auctionshape"};
  app.require_subcommand(1);
  auto* est = app.add_subcommand("estimate", "Estimate alpha and derived objects from bids")
                  ->fallthrough();
  auto* sim = app.add_subcommand("simulate", "Run the Monte Carlo harness")->fallthrough();
  auto* rep = app.add_subcommand("report", "Relative error tables from a Monte Carlo report")
                  ->fallthrough();

  std::string config_path, psi = cfg.psi, boundary = "kernel", vexp = "3/2";
  std::vector<std::string> estimators, scales, objects, gammas, thetas, Ts;
  int n = cfg.n, reps = cfg.reps;
  std::uint64_t seed = cfg.seed;
  app.add_option("--config", config_path, "key = value file; flags given here win");
  app.add_option("--input", cfg.input, "bids CSV (estimate) or mc_report.csv (report)");
  app.add_option("--output-dir", cfg.output_dir, "directory for the output files");
  app.add_option("--estimator", estimators,
                 "ls|mle|smoothed-ls|smoothed-mle|ibf|ibf-bc|jackknife; simulate takes a list")
      ->delimiter(',');
  app.add_option("--psi", psi, "identity|alpha|log|sqrt|fifthroot");
  app.add_option("--boundary", boundary, "none|kernel|reflect");
  app.add_option("--bandwidth-scale", scales, "rule-of-thumb multiplier(s)")->delimiter(',');
  app.add_flag("--undersmooth", cfg.undersmooth, "multiply bandwidths by T^(-2/15)");
  app.add_flag("--symmetric", cfg.symmetric, "pooled symmetric model (needs --n)");
  app.add_option("--n", n, "number of bidders");
  app.add_option("--objects", objects, "comma-separated objects")->delimiter(',');
  app.add_option("--gamma", gammas, "design gamma(s), e.g. 1/3,3/4")->delimiter(',');
  app.add_option("--theta", thetas, "design theta(s)")->delimiter(',');
  app.add_option("--T", Ts, "sample size(s)")->delimiter(',');
  app.add_option("--reps", reps, "replications");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--value-dist-exponent", vexp, "bidder one's F_v(v) = v^k");

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  // config values go in front of the subcommand's own arguments unless the
  // flag is given explicitly
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string cpath;
    if (args[i] == "--config" && i + 1 < args.size())
      cpath = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0)
      cpath = args[i].substr(9);
    if (cpath.empty()) continue;
    std::vector<std::string> extra;
    for (const auto& [key, value] : read_config(cpath)) {
      if (key == "config") throw CliError(kUsage, cpath + ": config files do not nest");
      if (!app.get_option_no_throw("--" + key))
        throw CliError(kUsage, cpath + ": unknown key '" + key + "'");
      if (given_on_command_line(args, key)) continue;
      if (key == "undersmooth" || key == "symmetric") {
        if (value == "true" || value == "1") extra.push_back("--" + key);
        else if (value != "false" && value != "0")
          throw CliError(kUsage, cpath + ": " + key + " must be true or false");
      } else {
        extra.push_back("--" + key + "=" + value);
      }
    }
    args.insert(args.end(), extra.begin(), extra.end());
    break;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return false;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return false;
  } catch (const CLI::ParseError& e) {
    throw CliError(kUsage, e.what());
  }

  if (est->parsed()) cfg.command = Command::estimate;
  else if (sim->parsed()) cfg.command = Command::simulate;
  else if (rep->parsed()) cfg.command = Command::report;

  if (!estimators.empty()) {
    cfg.estimators.clear();
    for (const auto& e : estimators) {
      try {
        cfg.estimators.push_back(estimator_from_string(trim(e)));
      } catch (const std::invalid_argument&) {
        throw CliError(kUsage, "--estimator: unknown estimator '" + e + "'");
      }
    }
  }
  if (psi != "identity" && psi != "alpha" && psi != "log" && psi != "sqrt" && psi != "fifthroot")
    throw CliError(kUsage, "--psi: unknown transform '" + psi + "'");
  cfg.psi = psi;
  cfg.boundary = boundary_from_string(boundary);
  if (!scales.empty()) {
    cfg.bandwidth_scales.clear();
    for (const auto& s : scales) cfg.bandwidth_scales.push_back(parse_number(s, "--bandwidth-scale"));
  }
  cfg.n = n;
  cfg.reps = reps;
  cfg.seed = seed;
  for (auto& o : objects) o = trim(o);
  if (!objects.empty()) cfg.objects = objects;
  if (!gammas.empty()) {
    cfg.gammas.clear();
    for (const auto& g : gammas) cfg.gammas.push_back(parse_number(g, "--gamma"));
  }
  if (!thetas.empty()) {
    cfg.thetas.clear();
    for (const auto& t : thetas) cfg.thetas.push_back(parse_number(t, "--theta"));
  }
  if (!Ts.empty()) {
    cfg.Ts.clear();
    for (const auto& t : Ts) {
      double x = parse_number(t, "--T");
      if (x != std::floor(x)) throw CliError(kUsage, "--T: '" + t + "' is not an integer");
      // negative and zero sizes are design errors, reported by validation
      cfg.Ts.push_back(x < 0 ? 0 : static_cast<std::size_t>(x));
    }
  }
  cfg.value_dist_exponent = parse_number(vexp, "--value-dist-exponent");
  return true;
}

// ------------------------------------------------------------------ input

std::vector<BidRow> read_bids(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw CliError(kBadInput, "input: empty file");
  auto header = io::split_csv_line(line);
  for (auto& h : header) h = trim(h);
  auto col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw CliError(kBadInput, "input line 1: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ca = col("auction"), cb = col("bidder"), cv = col("bid");
  std::vector<BidRow> rows;
  for (int row = 2; std::getline(in, line); ++row) {
    if (trim(line).empty()) continue;
    auto f = io::split_csv_line(line);
    if (f.size() != header.size())
      throw CliError(kBadInput, "input line " + std::to_string(row) + ": expected " +
                                    std::to_string(header.size()) + " fields, found " +
                                    std::to_string(f.size()));
    BidRow r{trim(f[ca]), trim(f[cb]), 0.0};
    std::string b = trim(f[cv]);
    if (!parse_plain(b, r.bid) || !std::isfinite(r.bid))
      throw CliError(kBadInput, "input line " + std::to_string(row) + ": bid '" + b +
                                    "' is not a number");
    if (r.bid < 0.0)
      throw CliError(kBadInput, "input line " + std::to_string(row) + ": negative bid " + b);
    if (r.auction.empty() || r.bidder.empty())
      throw CliError(kBadInput, "input line " + std::to_string(row) + ": empty auction or bidder");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw CliError(kBadInput, "input: no bids");
  return rows;
}

AsymmetricData asymmetric_data(const std::vector<BidRow>& rows) {
  std::map<std::string, std::size_t> index;
  std::vector<std::string> order;
  std::vector<std::optional<double>> own;
  std::vector<std::optional<double>> rival;
  for (const auto& r : rows) {
    auto [it, fresh] = index.emplace(r.auction, order.size());
    if (fresh) {
      order.push_back(r.auction);
      own.emplace_back();
      rival.emplace_back();
    }
    std::size_t k = it->second;
    if (r.bidder == "1") {
      if (own[k]) throw CliError(kBadInput, "auction " + r.auction + ": two bids from bidder 1");
      own[k] = r.bid;
    } else {
      rival[k] = std::max(rival[k].value_or(r.bid), r.bid);
    }
  }
  AsymmetricData d;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!own[k]) throw CliError(kBadInput, "auction " + order[k] + ": no bid from bidder 1");
    if (!rival[k]) throw CliError(kBadInput, "auction " + order[k] + ": no rival bid");
    d.own_bids.push_back(*own[k]);
    d.rival_max.push_back(*rival[k]);
  }
  return d;
}

// --------------------------------------------------------------- estimate

namespace {

json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json entry(const VarianceReport& r) {
  return json{{"estimate", num(r.estimate)}, {"variance", num(r.asymptotic_variance)}};
}

// alpha, e on the p grid and F_v, f_v on a value grid.
struct Curves {
  std::function<double(double)> alpha, payment, cdf, pdf;
  double v_lo = 0.0, v_hi = 1.0;
};

std::string alpha_csv(const Curves& c) {
  std::string out = "p,alpha,e\n";
  for (double p : numeric::linspace(0.0, 1.0, kGrid))
    out += io::csv_row({io::format_double(p), io::format_double(c.alpha(p)),
                        io::format_double(c.payment(p))});
  return out;
}

std::string values_csv(const Curves& c) {
  std::string out = "v,cdf,pdf\n";
  for (double v : numeric::linspace(c.v_lo, c.v_hi, kGrid))
    out += io::csv_row(
        {io::format_double(v), io::format_double(c.cdf(v)), io::format_double(c.pdf(v))});
  return out;
}

// Cumulative trapezoid of f on the alpha grid, interpolated linearly.
std::function<double(double)> cumulative_integral(const std::function<double(double)>& f) {
  auto xs = numeric::linspace(0.0, 1.0, kGrid);
  std::vector<double> F(kGrid, 0.0);
  double prev = f(0.0);
  for (std::size_t i = 1; i < kGrid; ++i) {
    double cur = f(xs[i]);
    F[i] = F[i - 1] + 0.5 * (prev + cur) * (xs[i] - xs[i - 1]);
    prev = cur;
  }
  return [xs, F](double p) {
    p = std::clamp(p, 0.0, 1.0);
    auto i = std::min<std::size_t>(static_cast<std::size_t>(p * (kGrid - 1)), kGrid - 2);
    double w = (p - xs[i]) / (xs[i + 1] - xs[i]);
    return F[i] + w * (F[i + 1] - F[i]);
  };
}

double ecdf(const std::vector<double>& sorted, double v) {
  return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin()) /
         static_cast<double>(sorted.size());
}

std::function<double(double)> twostep_pdf(std::vector<double> pseudo) {
  double h = silverman_bandwidth(pseudo);
  if (!(h > 0.0)) return [](double) { return kNaN; };
  auto kde = std::make_shared<ReflectionKde>(pdf_v_twostep(pseudo, h));
  return [kde](double v) { return (*kde)(v); };
}

}  // namespace

int cmd_estimate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.input.empty()) throw CliError(kUsage, "estimate needs --input");
  if (!fs::exists(cfg.input)) throw CliError(kMissingInput, "input: no such file " + cfg.input);
  if (cfg.estimators.size() != 1) throw CliError(kUsage, "estimate takes one --estimator");
  const McEstimator est = cfg.estimators.front();
  if (cfg.symmetric && cfg.n < 2) throw CliError(kUsage, "--n must be at least 2");
  if (!(cfg.bandwidth_scales.size() == 1 && cfg.bandwidth_scales[0] > 0.0))
    throw CliError(kUsage, "estimate takes one positive --bandwidth-scale");
  std::vector<std::string> objects = cfg.objects;
  if (objects.empty()) objects = {"bs", "mv", "alpha_half"};
  for (const auto& o : objects)
    if (o != "bs" && o != "mv" && o != "alpha_half")
      throw CliError(kUsage, "--objects: estimate supports bs, mv and alpha_half, not '" + o + "'");
  const bool ibf = est == McEstimator::ibf || est == McEstimator::ibf_bc;
  if (cfg.symmetric && (ibf || est == McEstimator::jackknife))
    throw CliError(kUsage, to_string(est) + " needs the bidder-one layout; drop --symmetric");

  auto rows = read_bids(io::read_file(cfg.input));
  const double scale = cfg.bandwidth_scales[0];

  json j;
  j["estimator"] = to_string(est);
  j["symmetric"] = cfg.symmetric;
  if (cfg.symmetric) j["n"] = cfg.n;
  std::optional<Curves> curves;

  try {
    if (cfg.symmetric) {
      std::vector<double> bids;
      std::map<std::string, int> auctions;
      for (const auto& r : rows) {
        bids.push_back(r.bid);
        ++auctions[r.auction];
      }
      j["auctions"] = auctions.size();
      j["bids"] = bids.size();
      MaxRivalSample pooled(bids, SampleSource::pooled_symmetric);
      if (est != McEstimator::ls && est != McEstimator::smoothed_ls && pooled.size() < 3)
        throw CliError(kBadInput, "input: the NPMLE needs at least 3 bids");
      MonotoneStepFn step;
      ConvexPwlFn pay;
      if (est == McEstimator::ls || est == McEstimator::smoothed_ls) {
        auto fit = solve_ls_pooled(pooled, cfg.n);
        step = fit.alpha;
        pay = fit.payment;
      } else {
        auto fit = pava_mle_pooled(pooled, cfg.n);
        step = fit.alpha();
        pay = fit.payment;
      }
      std::vector<double> atoms;
      for (double b : pooled.values()) atoms.push_back(std::pow(pooled.cdf(b), cfg.n - 1.0));
      auto a = std::make_shared<AlphaEstimate>(AlphaEstimate::unsmoothed(step, pay));
      const bool smoothed = uses_bandwidth(est);
      if (smoothed) {
        std::vector<double> vals;
        for (double p : atoms) vals.push_back(step(p));
        SmoothSpec sp;
        sp.transform = transform_for(cfg.psi, &step);
        sp.boundary = cfg.boundary;
        sp.bandwidth = rule_of_thumb_bandwidth(atoms, vals, sp.transform, BandwidthTarget::alpha,
                                               {Kernel{}, scale, cfg.undersmooth});
        j["bandwidth"] = num(sp.bandwidth);
        j["psi"] = cfg.psi;
        j["boundary"] = boundary_name(cfg.boundary);
        *a = AlphaEstimate::smoothed(step, sp);
      }
      auto fp = std::make_shared<FpModel>(fp_symmetric(cfg.n));
      for (const auto& o : objects) {
        if (o == "bs") j["bs"] = entry(bidder_surplus_symmetric(*a, cfg.n, &pooled));
        if (o == "mv") j["mv"] = entry(mean_valuation(*a, *fp, &pooled));
        if (o == "alpha_half") j["alpha_half"] = json{{"estimate", num((*a)(0.5))}, {"variance", nullptr}};
      }
      Curves c;
      c.alpha = [a](double p) { return (*a)(p); };
      c.payment = [a](double p) { return a->payment(p); };
      c.cdf = [a, fp](double v) { return cdf_v(*a, *fp, v); };
      if (smoothed) {
        c.pdf = [a, fp](double v) {
          try {
            return pdf_v_onestep(*a, *fp, v);
          } catch (const std::runtime_error&) {
            return kNaN;  // nonmonotone derivative estimate
          }
        };
      } else {
        std::vector<double> pseudo;
        for (double p : atoms) pseudo.push_back((*a)(p));
        c.pdf = twostep_pdf(pseudo);
      }
      c.v_lo = std::min(0.0, a->lower());
      c.v_hi = a->upper();
      curves = c;
    } else {
      auto data = asymmetric_data(rows);
      j["auctions"] = data.own_bids.size();
      MaxRivalSample rivals(data.rival_max);
      auto fp = std::make_shared<FpModel>(fp_empirical(data.own_bids, rivals));
      const bool mle = est == McEstimator::mle || est == McEstimator::smoothed_mle;
      if (mle && rivals.size() < 3)
        throw CliError(kBadInput, "input: the NPMLE needs at least 3 auctions");
      if (est == McEstimator::jackknife) {
        double v = jackknife_alpha(rivals, JackknifeVariant::breve, 0.5);
        j["alpha_half"] = json{{"estimate", num(v)}, {"variance", nullptr}};
      } else if (ibf) {
        double h = silverman_bandwidth(rivals.values()) * scale;
        if (cfg.undersmooth) h *= std::pow(static_cast<double>(rivals.size()), -2.0 / 15.0);
        if (!(h > 0.0)) throw CliError(kEstimatorFailure, "ibf: zero bandwidth (constant bids)");
        j["bandwidth"] = num(h);
        auto fit = std::make_shared<IbfEstimate>(
            rivals, h, est == McEstimator::ibf_bc ? IbfBoundary::bc : IbfBoundary::none);
        auto applied = fit->apply(data.own_bids);
        if (applied.values.empty()) throw CliError(kEstimatorFailure, "ibf: every bid was trimmed");
        j["trimmed"] = applied.trimmed;
        auto pv = std::make_shared<std::vector<double>>(applied.values);
        for (const auto& o : objects) {
          if (o == "bs") j["bs"] = json{{"estimate", num(applied.bs)}, {"variance", nullptr}};
          if (o == "mv") j["mv"] = json{{"estimate", num(numeric::mean(*pv))}, {"variance", nullptr}};
          if (o == "alpha_half") j["alpha_half"] = json{{"estimate", num(fit->alpha(0.5))}, {"variance", nullptr}};
        }
        Curves c;
        c.alpha = [fit](double p) { return fit->alpha(p); };
        c.payment = cumulative_integral(c.alpha);
        c.cdf = [pv](double v) { return ecdf(*pv, v); };
        c.pdf = twostep_pdf(*pv);
        c.v_lo = std::min(0.0, pv->front());
        c.v_hi = pv->back();
        curves = c;
      } else {
        MonotoneStepFn step;
        ConvexPwlFn pay;
        if (mle) {
          auto fit = pava_mle(rivals);
          step = fit.alpha();
          pay = fit.payment;
        } else {
          auto fit = solve_ls(rivals);
          step = fit.alpha;
          pay = fit.payment;
        }
        auto a = std::make_shared<AlphaEstimate>(AlphaEstimate::unsmoothed(step, pay));
        if (uses_bandwidth(est)) {
          std::vector<double> vals;
          for (double p : fp->atoms()) vals.push_back(step(p));
          SmoothSpec sp;
          sp.transform = transform_for(cfg.psi, &step);
          sp.boundary = cfg.boundary;
          sp.bandwidth = rule_of_thumb_bandwidth(fp->atoms(), vals, sp.transform,
                                                 BandwidthTarget::alpha,
                                                 {Kernel{}, scale, cfg.undersmooth});
          j["bandwidth"] = num(sp.bandwidth);
          j["psi"] = cfg.psi;
          j["boundary"] = boundary_name(cfg.boundary);
          *a = AlphaEstimate::smoothed(step, sp);
        }
        for (const auto& o : objects) {
          if (o == "bs") j["bs"] = entry(bidder_surplus_asymmetric(*a, *fp));
          if (o == "mv") j["mv"] = entry(mean_valuation(*a, *fp));
          if (o == "alpha_half") j["alpha_half"] = json{{"estimate", num((*a)(0.5))}, {"variance", nullptr}};
        }
        std::vector<double> pseudo;
        for (double p : fp->atoms()) pseudo.push_back((*a)(p));
        Curves c;
        c.alpha = [a](double p) { return (*a)(p); };
        c.payment = [a](double p) { return a->payment(p); };
        c.cdf = [a, fp](double v) { return cdf_v(*a, *fp, v); };
        c.pdf = twostep_pdf(pseudo);
        c.v_lo = std::min(0.0, a->lower());
        c.v_hi = a->upper();
        curves = c;
      }
    }
  } catch (const CliError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(kEstimatorFailure, to_string(est) + " failed: " + e.what());
  }

  // everything is computed before the first file is written
  std::vector<std::pair<fs::path, std::string>> files;
  try {
    if (curves) {
      if (!(curves->v_hi > curves->v_lo)) curves->v_hi = curves->v_lo + 1.0;
      files.emplace_back(fs::path(cfg.output_dir) / "alpha.csv", alpha_csv(*curves));
      files.emplace_back(fs::path(cfg.output_dir) / "values.csv", values_csv(*curves));
    }
  } catch (const std::exception& e) {
    throw CliError(kEstimatorFailure, to_string(est) + " failed: " + e.what());
  }
  files.emplace_back(fs::path(cfg.output_dir) / "estimates.json", j.dump(2) + "\n");
  for (const auto& [path, text] : files) io::atomic_write(path, text);
  for (const auto& f : files) out << "wrote " << f.first.string() << "\n";
  return kOk;
}

// --------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  McConfig mc;
  for (double g : cfg.gammas)
    for (double t : cfg.thetas)
      for (std::size_t T : cfg.Ts) {
        DgpSpec d;
        d.gamma = g;
        d.theta = t;
        d.T = T;
        d.seed = cfg.seed;
        d.n = cfg.n;
        d.value_dist_exponent = cfg.value_dist_exponent;
        mc.designs.push_back(d);
      }
  mc.estimators = cfg.estimators;
  std::vector<std::string> objects = cfg.objects;
  if (objects.empty()) objects = {"bs"};
  for (const auto& o : objects) {
    try {
      mc.objects.push_back(object_from_string(o));
    } catch (const std::invalid_argument&) {
      throw CliError(kUsage, "--objects: unknown object '" + o + "'");
    }
  }
  mc.scales = cfg.bandwidth_scales;
  mc.replications = cfg.reps;
  mc.psi = transform_for(cfg.psi, nullptr);
  mc.boundary = cfg.boundary;
  mc.undersmooth = cfg.undersmooth;
  try {
    validate(mc);
  } catch (const std::invalid_argument& e) {
    throw CliError(kBadDesign, std::string("invalid design: ") + e.what());
  }
  McReport report = run_monte_carlo(mc);
  const fs::path dir(cfg.output_dir);
  std::string csv = report.to_csv(), js = report.to_json();
  io::atomic_write(dir / "mc_report.csv", csv);
  io::atomic_write(dir / "mc_report.json", js);
  std::size_t flagged = 0;
  for (const auto& c : report.cells) flagged += c.flagged;
  out << "wrote " << (dir / "mc_report.csv").string() << " (" << report.cells.size() << " cells, "
      << flagged << " flagged)\n";
  return kOk;
}

// ----------------------------------------------------------------- report

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  fs::path in = cfg.input.empty() ? fs::path(cfg.output_dir) / "mc_report.csv" : fs::path(cfg.input);
  if (!fs::exists(in)) throw CliError(kMissingInput, "report: no such file " + in.string());
  McReport report;
  try {
    report = McReport::from_csv(io::read_file(in));
  } catch (const std::invalid_argument& e) {
    throw CliError(kBadInput, in.string() + ": " + e.what());
  }
  auto rows = relative_table(report);
  std::string text = relative_table_text(rows);
  const fs::path dir(cfg.output_dir);
  io::atomic_write(dir / "relative_table.csv", relative_table_csv(rows));
  io::atomic_write(dir / "relative_table.txt", text);
  out << text;
  return kOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    RunConfig cfg;
    if (!parse_args(argc, argv, cfg, out)) return kOk;
    switch (cfg.command) {
      case Command::estimate: return cmd_estimate(cfg, out);
      case Command::simulate: return cmd_simulate(cfg, out);
      case Command::report: return cmd_report(cfg, out);
    }
  } catch (const CliError& e) {
    err << "auctionshape: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    err << "auctionshape: " << e.what() << "\n";
    return kEstimatorFailure;
  }
  return kOk;
}

}  // namespace auctionshape::cli
