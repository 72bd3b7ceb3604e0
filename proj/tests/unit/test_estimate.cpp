#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mcre/coupling.hpp"
#include "mcre/errors.hpp"
#include "mcre/estimate.hpp"
#include "mcre/stats.hpp"

using namespace mcre;

namespace {

std::vector<double> normals(std::size_t n, double shift, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& v : out) v = shift + rng.normal();
  return out;
}

std::vector<std::vector<double>> ar1_ensemble(double phi, std::size_t paths, std::size_t length,
                                              std::uint64_t seed) {
  RngStream rng(seed, 0);
  const double innovation = std::sqrt(1.0 - phi * phi);
  std::vector<std::vector<double>> out(paths, std::vector<double>(length));
  for (auto& path : out) {
    double z = rng.normal();
    for (auto& v : path) {
      v = z;
      z = phi * z + innovation * rng.normal();
    }
  }
  return out;
}

DecayCurve synthetic(RateTemplate shape, int first, int last, int stride) {
  TemplateFit f;
  f.shape = shape;
  switch (shape) {
    case RateTemplate::geometric:
      f.rate = 0.99;
      break;
    case RateTemplate::bernstein:
      f.rate = 0.1;
      break;
    case RateTemplate::stretched:
      f.rate = 0.5;
      f.gamma = 0.5;
      break;
    case RateTemplate::polynomial:
      f.gamma = 1.0;
      break;
  }
  DecayCurve curve;
  curve.kind = CurveKind::mixing;
  for (int n = first; n <= last; n += stride) curve.points.push_back({double(n), f.evaluate(n), 0.0});
  return curve;
}

}  // namespace

TEST_SUITE("estimate") {
  TEST_CASE("tv of identical and separated samples") {
    const auto a = normals(5000, 0.0, 1);
    CHECK(tv_estimate(a, a).estimate == 0.0);
    const auto far = normals(5000, 1000.0, 2);
    CHECK(tv_estimate(a, far).estimate == 1.0);
    CHECK_THROWS_AS(tv_estimate(std::vector<double>{}, a), InputError);
  }

  TEST_CASE("tv between unit-shifted normals") {
    const auto a = normals(1000000, 0.0, 3);
    const auto b = normals(1000000, 1.0, 4);
    const Estimate e = tv_estimate(a, b);
    // Gaussian TV oracle: 2 Phi(1/2) - 1.
    const double oracle = 2.0 * 0.5 * std::erfc(-0.5 / std::sqrt(2.0)) - 1.0;
    CHECK(oracle == doctest::Approx(0.3829).epsilon(1e-3));
    CHECK(std::abs(e.estimate - oracle) <= 0.01);
    CHECK(e.std_error > 0.0);
    CHECK(e.std_error < 0.01);
  }

  TEST_CASE("tv is symmetric and ignores a common permutation") {
    auto a = normals(20000, 0.0, 5);
    auto b = normals(20000, 0.4, 6);
    const Estimate ab = tv_estimate(a, b);
    const Estimate ba = tv_estimate(b, a);
    CHECK(ab.estimate == doctest::Approx(ba.estimate).epsilon(1e-12));
    std::vector<std::size_t> order(a.size());
    std::iota(order.begin(), order.end(), 0);
    RngStream rng(7, 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    std::vector<double> pa;
    std::vector<double> pb;
    for (auto i : order) {
      pa.push_back(a[i]);
      pb.push_back(b[i]);
    }
    const Estimate p = tv_estimate(pa, pb);
    CHECK(p.estimate == ab.estimate);
    CHECK(p.std_error == ab.std_error);
  }

  TEST_CASE("tv of coupled marginals is dominated by the failure frequency") {
    const ZooEntry e = zoo_model("additive");
    for (std::int64_t n : {16, 64, 200}) {
      CAPTURE(n);
      const int reps = 5000;
      std::vector<double> first;
      std::vector<double> second;
      int failures = 0;
      for (int r = 0; r < reps; ++r) {
        RngStream rng = RngStream(30, static_cast<std::uint64_t>(r)).child(static_cast<std::uint64_t>(n));
        const auto run = run_coupling(e.model, e.environment, scalar_state(0.0), scalar_state(3.0), n, rng);
        first.push_back(run.final_y(0));
        second.push_back(run.final_yp(0));
        failures += !run.coupled_at_end();
      }
      const Estimate tv = tv_estimate(first, second);
      const double p = static_cast<double>(failures) / reps;
      const double se = std::sqrt(tv.std_error * tv.std_error + p * (1.0 - p) / reps);
      CHECK(tv.estimate <= p + 4.0 * se);
    }
  }

  TEST_CASE("alpha of an i.i.d. sequence is within 4 standard errors of zero") {
    RngStream rng(9, 0);
    std::vector<std::vector<double>> paths(20000, std::vector<double>(13));
    for (auto& path : paths) {
      for (auto& v : path) v = rng.normal();
    }
    for (std::int64_t lag = 1; lag <= 10; ++lag) {
      CAPTURE(lag);
      const MixingEstimate m = alpha_mixing_estimate(paths, lag);
      CHECK(m.alpha_hat >= 0.0);
      CHECK(m.alpha_hat <= 4.0 * m.std_error);
    }
  }

  TEST_CASE("alpha of a frozen sequence is one quarter") {
    RngStream rng(10, 0);
    std::vector<std::vector<double>> paths(20000);
    for (auto& path : paths) path.assign(8, rng.normal());
    const MixingEstimate m = alpha_mixing_estimate(paths, 3);
    CHECK(m.alpha_hat == doctest::Approx(0.25).epsilon(0.02));
    CHECK(m.alpha_hat <= 0.25);
  }

  TEST_CASE("alpha preconditions") {
    const auto paths = ar1_ensemble(0.5, 100, 10, 11);
    CHECK_THROWS_AS(alpha_mixing_estimate(paths, 0), InputError);
    CHECK_THROWS_AS(alpha_mixing_estimate(paths, 10), InputError);
    EventClass wide;
    wide.past_coords = 3;
    CHECK_THROWS_AS(alpha_mixing_estimate(paths, 1, wide), InputError);
  }

  TEST_CASE("a richer event class does not lower alpha") {
    const auto paths = ar1_ensemble(0.8, 20000, 12, 12);
    EventClass small;
    small.past_coords = 1;
    small.future_coords = 1;
    small.quantiles = 1;  // the median only
    const EventClass full;
    for (std::int64_t lag : {1, 3, 6}) {
      CAPTURE(lag);
      const MixingEstimate a = alpha_mixing_estimate(paths, lag, small);
      const MixingEstimate b = alpha_mixing_estimate(paths, lag, full);
      CHECK(b.alpha_hat >= a.alpha_hat - 2.0 * std::hypot(a.std_error, b.std_error));
    }
  }

  TEST_CASE("AR(1) mixing decays at a rate reproducible across ensembles") {
    std::vector<double> rates;
    for (std::uint64_t seed : {101, 202}) {
      const auto paths = ar1_ensemble(0.9, 20000, 53, seed);
      DecayCurve curve;
      curve.kind = CurveKind::mixing;
      for (std::int64_t lag = 1; lag <= 50; ++lag) {
        const auto m = alpha_mixing_estimate(paths, lag);
        curve.points.push_back({double(lag), m.alpha_hat, m.std_error});
      }
      curve.validate();
      rates.push_back(std::log(rate_fit(curve, RateTemplate::geometric).rate));
    }
    CHECK(rates[0] < 0.0);
    CHECK(rates[1] < 0.0);
    CHECK(std::abs(rates[0] - rates[1]) <= 0.25 * std::max(std::abs(rates[0]), std::abs(rates[1])));
  }

  TEST_CASE("theta-moment plateau of the additive AR(1)") {
    const ZooEntry e = zoo_model("additive");
    RngStream rng(13, 0);
    std::vector<std::vector<State>> ensemble;
    for (int r = 0; r < 40000; ++r) {
      ensemble.push_back(simulate_forward(e.model.chain(), e.environment, scalar_state(0.0), 30, rng).states);
    }
    const DecayCurve curve = theta_moment(ensemble, e.model.metric(), scalar_state(0.0), 1.0);
    REQUIRE(curve.points.size() == 31);
    CHECK(curve.points.front().estimate == 0.0);
    // E|Z| for Z ~ N(0, 4/3).
    const double oracle = std::sqrt(8.0 / (3.0 * M_PI));
    CHECK(oracle == doctest::Approx(0.921).epsilon(1e-3));
    const auto& last = curve.points.back();
    CHECK(std::abs(last.estimate - oracle) <= 4.0 * last.std_error);

    RngStream bound_rng(14, 0);
    const Estimate bound = theta_moment_bound(e.model.chain(), e.environment, 1.0, 100000, bound_rng);
    CHECK(bound.estimate >= last.estimate);
    // (R + E|eps|) / (1 - rho) with E|eps| = sqrt(2/pi).
    CHECK(bound.estimate == doctest::Approx((1.0 + std::sqrt(2.0 / M_PI)) / 0.5).epsilon(0.01));
    CHECK_THROWS_AS(theta_moment(ensemble, e.model.metric(), scalar_state(0.0), 1.5), InputError);
  }

  TEST_CASE("theta-moment of a deterministic contraction decays to zero") {
    std::vector<std::vector<State>> ensemble(10);
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
      double y = 1.0 + double(r);
      for (int t = 0; t <= 60; ++t, y *= 0.5) ensemble[r].push_back(scalar_state(y));
    }
    const DecayCurve curve = theta_moment(ensemble, Metric::euclidean(1), scalar_state(0.0), 0.5);
    CHECK(curve.points.back().estimate < 1e-8);
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
      CHECK(curve.points[i].estimate < curve.points[i - 1].estimate);
    }
  }

  TEST_CASE("geometric fit recovers lambda on exact data") {
    DecayCurve curve;
    for (int n = 1; n <= 60; ++n) curve.points.push_back({double(n), std::pow(0.9, n), 0.0});
    const TemplateFit f = rate_fit(curve, RateTemplate::geometric);
    CHECK(std::abs(f.rate - 0.9) <= 1e-6);
    CHECK(f.residual_norm < 1e-9);
    CHECK(f.evaluate(10.0) == doctest::Approx(std::pow(0.9, 10)));
  }

  TEST_CASE("bernstein shape beats geometric on its own curve") {
    DecayCurve curve;
    for (int n = 8; n <= 4096; n *= 2) {
      const double l = std::log2(double(n));
      curve.points.push_back({double(n), std::exp(-n / (l * std::log2(l))), 0.0});
    }
    CHECK(rate_fit(curve, RateTemplate::bernstein).residual_norm <
          rate_fit(curve, RateTemplate::geometric).residual_norm);
  }

  TEST_CASE("polynomial fit recovers the exponent of log(n)/n") {
    DecayCurve curve;
    for (int n = 8; n <= 4096; n += 8) curve.points.push_back({double(n), std::log(double(n)) / n, 0.0});
    const TemplateFit f = rate_fit(curve, RateTemplate::polynomial);
    CHECK(std::abs(f.gamma - 1.0) <= 0.1);
  }

  TEST_CASE("each template wins on its own noise-free curve") {
    for (RateTemplate truth : kAllTemplates) {
      CAPTURE(to_string(truth));
      const auto ranking = rank_templates(synthetic(truth, 8, 1024, 8));
      REQUIRE(ranking.size() == 4);
      CHECK(ranking.front().shape == truth);
      CHECK(ranking.front().rank == 1);
      for (std::size_t i = 1; i < ranking.size(); ++i) CHECK(ranking[i].bic >= ranking[i - 1].bic);
    }
  }

  TEST_CASE("degenerate curves") {
    DecayCurve zeros;
    for (int n = 1; n <= 20; ++n) zeros.points.push_back({double(n), 0.0, 0.0});
    CHECK_THROWS_AS(rate_fit(zeros, RateTemplate::geometric), DegenerateFit);
    DecayCurve short_curve;
    for (int n = 1; n <= 10; ++n) short_curve.points.push_back({double(n), std::pow(0.5, n), 0.0});
    // Only indices 8..10 survive the n >= 8 cut.
    CHECK_THROWS_AS(rate_fit(short_curve, RateTemplate::bernstein), DegenerateFit);
    CHECK_NOTHROW(rate_fit(short_curve, RateTemplate::geometric));
  }

  TEST_CASE("curve invariants") {
    DecayCurve c;
    c.points = {{1, 0.5, 0}, {2, 0.3, 0}};
    CHECK_NOTHROW(c.validate());
    c.points = {{2, 0.5, 0}, {1, 0.3, 0}};
    CHECK_THROWS_AS(c.validate(), InputError);
    c.points = {{1, 1.5, 0}};
    CHECK_THROWS_AS(c.validate(), InputError);
    c.kind = CurveKind::mixing;
    c.points = {{1, 0.3, 0}};
    CHECK_THROWS_AS(c.validate(), InputError);
    c.kind = CurveKind::moment;
    c.points = {{1, 3.0, 0}};
    CHECK_NOTHROW(c.validate());
    CHECK(parse_template("stretched") == RateTemplate::stretched);
    CHECK_THROWS_AS(parse_template("cubic"), InputError);
  }
}
