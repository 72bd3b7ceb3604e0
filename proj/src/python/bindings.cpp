#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mcre/constants.hpp"
#include "mcre/coupling.hpp"
#include "mcre/errors.hpp"
#include "mcre/estimate.hpp"
#include "mcre/models.hpp"
#include "mcre/parallel.hpp"
#include "mcre/stats.hpp"
#include "mcre/verify.hpp"

namespace py = pybind11;

namespace {

using namespace mcre;

State to_state(const std::vector<double>& v) {
  State s(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) s(static_cast<Eigen::Index>(i)) = v[i];
  return s;
}

ZooEntry entry(const std::string& key) { return zoo_model(key); }

py::dict report_dict(const CheckReport& r) {
  py::dict d;
  d["assumption"] = r.assumption;
  d["trials"] = r.trials;
  d["violations"] = r.violations;
  d["worst_margin"] = r.worst_margin;
  d["witness"] = r.witness ? py::cast(*r.witness) : py::none();
  return d;
}

py::dict verify(const std::string& key, const std::string& assumption, std::int64_t trials, std::uint64_t seed,
                int workers) {
  const ZooEntry e = entry(key);
  const MinorizationSpec& m = e.model.minorization();
  const State y1 = e.model.chain().reference_point;
  State step = State::Zero(y1.size());
  step(0) = 1.0;
  const State y2 = y1 + step * (m.pair_radius / m.metric.distance(State::Zero(y1.size()), step));
  const CheckOptions options{seed, workers};
  CheckReport r;
  {
    py::gil_scoped_release release;
    if (assumption == "contractivity") {
      InputSampler sampler;
      sampler.environment = e.environment;
      r = check_contractivity(e.model.chain(), sampler, trials, options);
    } else if (assumption == "minorization") {
      r = check_minorization(e.model.chain(), m, EnvState{}, y1, y2, trials, options);
    } else if (assumption == "support") {
      r = check_support(m, EnvState{}, y1, y2, trials, options);
    } else {
      throw InputError("assumption must be contractivity, minorization or support");
    }
  }
  return report_dict(r);
}

py::dict coupling_campaign(const std::string& key, std::int64_t n, std::int64_t replications,
                           const std::vector<double>& y, const std::vector<double>& yp, std::uint64_t seed,
                           int workers, bool backward) {
  const ZooEntry e = entry(key);
  const State s = to_state(y);
  const State sp = to_state(yp);
  std::vector<std::pair<bool, double>> outcomes;
  {
    py::gil_scoped_release release;
    outcomes = parallel_map(replications, workers, [&](std::int64_t r) {
      RngStream rng = RngStream(seed, static_cast<std::uint64_t>(r)).child(static_cast<std::uint64_t>(n));
      const CouplingRun run = run_coupling(e.model, e.environment, s, sp, n, rng,
                                           backward ? Direction::backward : Direction::forward);
      return std::make_pair(!run.coupled_at_end(), run.analytic_bound);
    });
  }
  std::int64_t failures = 0;
  std::vector<double> bounds;
  for (const auto& [failed, bound] : outcomes) {
    failures += failed ? 1 : 0;
    bounds.push_back(bound);
  }
  const auto b = stats::mean_se(bounds);
  py::dict d;
  d["n"] = n;
  d["replications"] = replications;
  d["failures"] = failures;
  d["failure_rate"] = static_cast<double>(failures) / static_cast<double>(replications);
  d["mean_bound"] = b.mean;
  d["bound_se"] = b.se;
  return d;
}

py::array_t<double> simulate(const std::string& key, const std::vector<double>& y0, std::int64_t n,
                             std::uint64_t seed) {
  const ZooEntry e = entry(key);
  RngStream rng(seed, 0);
  const Trajectory t = simulate_forward(e.model.chain(), e.environment, to_state(y0), n, rng);
  const auto dim = static_cast<py::ssize_t>(e.model.dim());
  py::array_t<double> out({static_cast<py::ssize_t>(t.states.size()), dim});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    for (py::ssize_t j = 0; j < dim; ++j) view(static_cast<py::ssize_t>(i), j) = t.states[i](j);
  }
  return out;
}

py::tuple alpha_mixing(py::array_t<double, py::array::c_style | py::array::forcecast> ensemble, std::int64_t lag,
                       int quantiles) {
  if (ensemble.ndim() != 2) throw InputError("ensemble must be a 2-D array (paths x time)");
  auto view = ensemble.unchecked<2>();
  std::vector<std::vector<double>> paths(static_cast<std::size_t>(view.shape(0)));
  for (py::ssize_t i = 0; i < view.shape(0); ++i) {
    paths[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(view.shape(1)));
    for (py::ssize_t t = 0; t < view.shape(1); ++t) paths[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] = view(i, t);
  }
  EventClass events;
  events.quantiles = quantiles;
  const MixingEstimate m = alpha_mixing_estimate(paths, lag, events);
  return py::make_tuple(m.alpha_hat, m.std_error);
}

py::list rank(const std::vector<double>& index, const std::vector<double>& estimate) {
  if (index.size() != estimate.size()) throw InputError("index and estimate differ in length");
  DecayCurve curve;
  for (std::size_t i = 0; i < index.size(); ++i) curve.points.push_back({index[i], estimate[i], 0.0});
  py::list out;
  for (const auto& f : rank_templates(curve)) {
    py::dict d;
    d["template"] = to_string(f.shape);
    d["rate"] = f.rate;
    d["gamma"] = f.gamma;
    d["intercept"] = f.intercept;
    d["residual_norm"] = f.residual_norm;
    d["bic"] = f.bic;
    d["rank"] = f.rank;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_mcre, m) {
  m.doc() = "Markov chains in random environments: coupling constants, checks, coupling runs and estimators";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<InvalidPair>(m, "InvalidPair", PyExc_ValueError);
  py::register_exception<NumericOverflow>(m, "NumericOverflow", PyExc_ArithmeticError);
  py::register_exception<InconsistentSpec>(m, "InconsistentSpec", PyExc_RuntimeError);
  py::register_exception<DegenerateDecomposition>(m, "DegenerateDecomposition", PyExc_RuntimeError);
  py::register_exception<DegenerateFit>(m, "DegenerateFit", PyExc_RuntimeError);

  py::class_<CouplingConstants>(m, "CouplingConstants")
      .def_readonly("rho", &CouplingConstants::rho)
      .def_readonly("R", &CouplingConstants::R)
      .def_readonly("rho_prime", &CouplingConstants::rho_prime)
      .def_readonly("R_prime", &CouplingConstants::R_prime)
      .def_readonly("K", &CouplingConstants::K)
      .def_readonly("N", &CouplingConstants::N)
      .def_property_readonly("attempts_possible", &CouplingConstants::attempts_possible)
      .def("k_star", &CouplingConstants::k_star, py::arg("n"))
      .def("start_radius", &CouplingConstants::start_radius, py::arg("n"))
      .def("__repr__", [](const CouplingConstants& c) { return describe(c); });

  m.def(
      "derive_constants",
      [](double rho, double R, double K) { return derive_constants(ContractionParams{rho, R}, K); },
      py::arg("rho"), py::arg("R"), py::arg("K"));

  m.def(
      "normalize_assumption",
      [](const std::string& form, double rho, double R, double L) {
        AssumptionStatement s;
        if (form == "drift") {
          s.form = AssumptionForm::drift;
        } else if (form == "unilip") {
          s.form = AssumptionForm::unilip;
        } else if (form == "con_lip") {
          s.form = AssumptionForm::con_lip;
        } else {
          throw InputError("form must be drift, unilip or con_lip");
        }
        s.rho = rho;
        s.R = R;
        s.L = L;
        const ContractionParams p = normalize_assumption(s);
        return py::make_tuple(p.rho, p.R);
      },
      py::arg("form"), py::arg("rho"), py::arg("R"), py::arg("L") = 1.0);

  m.def("zoo_keys", [] {
    std::vector<std::string> keys;
    for (const auto& e : model_zoo()) keys.push_back(e.key);
    return keys;
  });

  m.def(
      "model_info",
      [](const std::string& key) {
        const ZooEntry e = entry(key);
        const MinorizationSpec& mi = e.model.minorization();
        py::dict d;
        d["key"] = e.key;
        d["dim"] = e.model.dim();
        d["rho"] = e.model.chain().contraction.rho;
        d["R"] = e.model.chain().contraction.R;
        d["K"] = mi.K;
        d["pair_radius"] = mi.pair_radius;
        d["eta"] = mi.eta(EnvState{});
        d["constants"] = derive_constants(e.model.chain().contraction, mi.K);
        return d;
      },
      py::arg("key"));

  m.def("simulate", &simulate, py::arg("key"), py::arg("y0"), py::arg("n"), py::arg("seed") = 0);
  m.def("verify", &verify, py::arg("key"), py::arg("assumption"), py::arg("trials"), py::arg("seed") = 0,
        py::arg("workers") = 0);
  m.def("coupling_campaign", &coupling_campaign, py::arg("key"), py::arg("n"), py::arg("replications"),
        py::arg("y"), py::arg("yp"), py::arg("seed") = 0, py::arg("workers") = 0, py::arg("backward") = false);

  m.def(
      "tv_estimate",
      [](const std::vector<double>& a, const std::vector<double>& b, int bins, int bootstrap, std::uint64_t seed) {
        TvOptions o;
        o.bins_per_dim = bins;
        o.bootstrap = bootstrap;
        o.seed = seed;
        const Estimate e = tv_estimate(a, b, o);
        return py::make_tuple(e.estimate, e.std_error);
      },
      py::arg("a"), py::arg("b"), py::arg("bins") = 64, py::arg("bootstrap") = 200, py::arg("seed") = 0);

  m.def("alpha_mixing", &alpha_mixing, py::arg("ensemble"), py::arg("lag"), py::arg("quantiles") = 9);
  m.def("rank_templates", &rank, py::arg("index"), py::arg("estimate"));

  m.def(
      "var_cvar",
      [](const std::vector<double>& losses, double alpha, double a, double h, std::int64_t steps,
         std::uint64_t seed) {
        RngStream rng(seed, 0);
        const auto path = sgld_risk_path({a, h, alpha}, losses, {steps}, 0.0, rng);
        return py::make_tuple(path.back().var_estimate, path.back().cvar_estimate);
      },
      py::arg("losses"), py::arg("alpha"), py::arg("a") = 1e-3, py::arg("h") = 1e-2, py::arg("steps") = 100000,
      py::arg("seed") = 0);

  m.def(
      "subordinate_norm",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> A) {
        if (A.ndim() != 2 || A.shape(0) != A.shape(1)) throw InputError("A must be a square matrix");
        auto view = A.unchecked<2>();
        Matrix M(A.shape(0), A.shape(1));
        for (py::ssize_t i = 0; i < A.shape(0); ++i) {
          for (py::ssize_t j = 0; j < A.shape(1); ++j) M(i, j) = view(i, j);
        }
        const SubordinateNorm n = subordinate_norm(M);
        py::dict d;
        d["value"] = n.value;
        d["theta"] = n.theta;
        d["delta"] = n.delta;
        d["spectral_radius"] = n.spectral_radius;
        return d;
      },
      py::arg("A"));
}
