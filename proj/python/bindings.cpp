#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "auctionshape/cli.hpp"
#include "auctionshape/isotonic_ls.hpp"
#include "auctionshape/npmle.hpp"
#include "auctionshape/objects.hpp"
#include "auctionshape/simlab.hpp"
#include "auctionshape/smooth.hpp"
#include "auctionshape/winprob.hpp"

namespace py = pybind11;
using namespace auctionshape;

namespace {

// alpha and e of a step fit on a grid of win probabilities
py::dict step_fit(const MonotoneStepFn& alpha, const ConvexPwlFn& payment,
                  const std::vector<double>& p) {
  std::vector<double> a, e;
  for (double q : p) {
    a.push_back(alpha(q));
    e.push_back(payment(q));
  }
  py::dict d;
  d["knots"] = alpha.knots();
  d["levels"] = alpha.levels();
  d["alpha"] = a;
  d["e"] = e;
  return d;
}

}  // namespace

PYBIND11_MODULE(_auctionshape, m) {
  m.doc() = "Shape-constrained estimation of first-price auction primitives.";

  m.def(
      "solve_ls",
      [](std::vector<double> bids, const std::vector<double>& p) {
        auto fit = solve_ls(MaxRivalSample(std::move(bids)));
        auto d = step_fit(fit.alpha, fit.payment, p);
        d["objective"] = fit.objective;
        return d;
      },
      py::arg("rival_bids"), py::arg("p") = std::vector<double>{},
      "Isotonic least-squares alpha_T from maximum rival bids, evaluated at p.");

  m.def(
      "pava_mle",
      [](std::vector<double> bids, const std::vector<double>& p) {
        auto fit = pava_mle(MaxRivalSample(std::move(bids)));
        auto d = step_fit(fit.alpha(), fit.payment, p);
        d["loglik"] = fit.loglik;
        return d;
      },
      py::arg("rival_bids"), py::arg("p") = std::vector<double>{},
      "NPMLE of alpha from maximum rival bids, evaluated at p.");

  m.def(
      "smooth_alpha",
      [](std::vector<double> bids, double bandwidth, const std::string& psi,
         const std::vector<double>& p) {
        auto fit = solve_ls(MaxRivalSample(std::move(bids)));
        SmoothSpec sp;
        sp.transform = Transform::by_name(psi);
        sp.bandwidth = bandwidth;
        auto a = AlphaEstimate::smoothed(fit.alpha, sp);
        std::vector<double> out;
        for (double q : p) out.push_back(a(q));
        return out;
      },
      py::arg("rival_bids"), py::arg("bandwidth"), py::arg("psi") = "identity",
      py::arg("p") = std::vector<double>{},
      "Boundary-kernel smoothed least-squares alpha at p.");

  m.def(
      "bidder_surplus_symmetric",
      [](std::vector<double> bids, int n) {
        MaxRivalSample pooled(std::move(bids), SampleSource::pooled_symmetric);
        auto fit = solve_ls_pooled(pooled, n);
        auto r = bidder_surplus_symmetric(AlphaEstimate::unsmoothed(fit.alpha, fit.payment), n,
                                          &pooled);
        return py::make_tuple(r.estimate, r.asymptotic_variance);
      },
      py::arg("pooled_bids"), py::arg("n"),
      "(estimate, asymptotic variance) of bidder surplus from pooled symmetric bids.");

  py::class_<DgpSpec>(m, "DgpSpec")
      .def(py::init([](double gamma, double theta, std::size_t T, std::uint64_t seed,
                       double value_dist_exponent, int n) {
             DgpSpec d{gamma, theta, T, seed, value_dist_exponent, n};
             validate(d);
             return d;
           }),
           py::arg("gamma") = 1.0, py::arg("theta") = 1.0, py::arg("T") = 100,
           py::arg("seed") = 0, py::arg("value_dist_exponent") = 1.5, py::arg("n") = 2)
      .def_readonly("gamma", &DgpSpec::gamma)
      .def_readonly("theta", &DgpSpec::theta)
      .def_readonly("T", &DgpSpec::T)
      .def_readonly("seed", &DgpSpec::seed);

  py::class_<TruthSet>(m, "TruthSet")
      .def(py::init<const DgpSpec&>())
      .def_property_readonly("bbar", &TruthSet::bbar)
      .def_property_readonly("bs", &TruthSet::bs)
      .def_property_readonly("mv", &TruthSet::mv)
      .def("alpha", &TruthSet::alpha)
      .def("e", &TruthSet::e)
      .def("Qc", &TruthSet::Qc)
      .def("Fv", &TruthSet::Fv);

  m.def(
      "dgp_sample",
      [](const DgpSpec& spec, std::uint64_t key, std::uint64_t stream) {
        Philox4x32 rng(key, stream);
        auto s = dgp_sample(spec, rng);
        return py::make_tuple(s.rival_bids, s.own_bids, s.own_values);
      },
      py::arg("spec"), py::arg("key"), py::arg("stream") = 0,
      "(rival maxima, bidder-one bids, bidder-one values) from Philox(key, stream).");

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> all{"auctionshape"};
        all.insert(all.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : all) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in process: (exit code, stdout, stderr).");
}
