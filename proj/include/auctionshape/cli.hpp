#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "auctionshape/simlab.hpp"
#include "auctionshape/smooth.hpp"

namespace auctionshape::cli {

//! Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kBadInput = 2,
  kEstimatorFailure = 3,
  kBadDesign = 4,
  kMissingInput = 5,
};

//! Carries an exit code with the message.
class CliError : public std::runtime_error {
 public:
  CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

enum class Command { estimate, simulate, report };

struct RunConfig {
  Command command = Command::estimate;
  std::string input;
  std::string output_dir = ".";
  //! estimate uses the first entry.
  std::vector<McEstimator> estimators = {McEstimator::ls};
  std::string psi = "fifthroot";
  BoundaryScheme boundary = BoundaryScheme::boundary_kernel;
  std::vector<double> bandwidth_scales = {1.0};
  bool undersmooth = false;
  bool symmetric = false;
  int n = 2;
  std::vector<std::string> objects;  // empty: command default
  std::vector<double> gammas = {1.0};
  std::vector<double> thetas = {1.0};
  std::vector<std::size_t> Ts = {100};
  int reps = 1000;
  std::uint64_t seed = 0;
  double value_dist_exponent = 1.5;
};

//! Reads "3/4" or any decimal. Throws CliError(kUsage) naming `what`.
double parse_number(const std::string& text, const std::string& what);

//! Parses argv (argv[0] is the program name). Throws CliError.
//! Returns false when help was printed.
bool parse_args(int argc, const char* const* argv, RunConfig& config, std::ostream& out);

//! One auction row of the estimate input.
struct BidRow {
  std::string auction;
  std::string bidder;
  double bid = 0.0;
};

//! CSV with a header naming at least `auction`, `bidder` and `bid`.
//! Throws CliError(kBadInput) with the offending row number.
std::vector<BidRow> read_bids(const std::string& text);

//! Bidder one's bids and the highest rival bid of each auction. Bidder one is
//! the bidder labelled "1".
struct AsymmetricData {
  std::vector<double> own_bids;
  std::vector<double> rival_max;
};
AsymmetricData asymmetric_data(const std::vector<BidRow>& rows);

//! Writes alpha.csv, values.csv and estimates.json into the output directory.
int cmd_estimate(const RunConfig& config, std::ostream& out);
//! Writes mc_report.csv and mc_report.json.
int cmd_simulate(const RunConfig& config, std::ostream& out);
//! Writes relative_table.csv and relative_table.txt and prints the text table.
int cmd_report(const RunConfig& config, std::ostream& out);

//! Full entry point: parses, dispatches and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace auctionshape::cli
