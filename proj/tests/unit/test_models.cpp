#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"
#include "mcre/stats.hpp"

using namespace mcre;

namespace {

double phi_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI); }

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.normal();
  return out;
}

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "mcre_test_" + name + ".csv";
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("additive Gaussian AR constants") {
    const AdditiveModel m = linear_additive(0.5, {0.5, 1.0});
    const auto& mi = m.minorization();
    CHECK(mi.K == doctest::Approx(2.5));
    CHECK(mi.pair_radius == doctest::Approx(4.0));
    // inf of 2 phi(u) over |u| <= R~/2 + nu radius.
    CHECK(mi.eta(EnvState{}) == doctest::Approx(2.0 * phi_pdf(2.5)).epsilon(1e-9));
    CHECK(mi.eta(EnvState{}) == doctest::Approx(0.035056).epsilon(1e-4));

    const AdditiveModel pure = linear_additive(0.5, {0.5, 0.0});
    CHECK(pure.minorization().K == doctest::Approx(1.0));
    CHECK(pure.minorization().pair_radius == 0.0);
  }

  TEST_CASE("additive models reject singular sigma") {
    AdditiveSpec spec;
    spec.mu = [](const State& y, const EnvState&) { return State(0.5 * y); };
    spec.sigma = [](const EnvState&) { return Matrix(Matrix::Zero(1, 1)); };
    spec.contraction = {0.5, 0.0};
    CHECK_THROWS_AS(
        {
          const AdditiveModel m = make_additive(spec);
          m.kernel_density(scalar_state(0.0), EnvState{}, scalar_state(0.0));
        },
        SpecError);
  }

  TEST_CASE("SGLD constants") {
    const SgldVarModel s = make_sgld({1.0, 0.1, 0.5});
    CHECK(s.rho == doctest::Approx(0.8));
    CHECK(s.J == 1.0);
    CHECK(s.R == doctest::Approx(0.2));
    CHECK(s.model.chain().contraction.rho == doctest::Approx(0.8));
    const double eta = 2.0 / std::sqrt(2.0 * M_PI) * std::exp(-0.5 * std::pow(1.0 + 1.0 / std::sqrt(0.2), 2));
    CHECK(eta == doctest::Approx(4.25e-3).epsilon(1e-3));
    CHECK(s.model.minorization().eta(EnvState{}) == doctest::Approx(eta).epsilon(1e-9));

    CHECK(make_sgld({1.0, 0.1, 0.95}).J == doctest::Approx(19.0));
    CHECK_THROWS_AS(make_sgld({1.0, 0.5, 0.5}), SpecError);
    CHECK_THROWS_AS(make_sgld({1.0, 0.0, 0.5}), SpecError);
    CHECK_THROWS_AS(make_sgld({1.0, 0.1, 1.0}), SpecError);
  }

  TEST_CASE("SGLD eta does not depend on the environment") {
    const SgldVarModel s = make_sgld({1e-3, 1e-2, 0.95});
    const auto& mi = s.model.minorization();
    RngStream rng(1, 0);
    const double base = mi.eta(EnvState{});
    for (int i = 0; i < 1000; ++i) {
      EnvState x;
      x.value = 100.0 * rng.normal();
      REQUIRE(mi.eta(x) == base);
    }
  }

  TEST_CASE("threshold AR declarations") {
    ThresholdParams p;
    p.thresholds = {0.0};
    p.slopes = {0.5, -0.5};
    p.intercepts = {1.0, -1.0};
    const ThresholdARModel t = make_threshold(p);
    CHECK(t.r == 0.0);
    CHECK(t.a == 0.5);
    CHECK(t.b == 1.0);
    CHECK(t.model.chain().contraction.rho == 0.5);
    CHECK(t.model.chain().contraction.R == 2.0);

    // Exhaustive grid oracle on [-100, 100] at step 0.01.
    const int cells = 20001;
    std::vector<double> y(cells);
    std::vector<double> mu(cells);
    for (int i = 0; i < cells; ++i) {
      y[i] = -100.0 + 0.01 * i;
      mu[i] = t.model.drift_image(scalar_state(y[i]), EnvState{})(0);
    }
    double worst = -INFINITY;
    for (int i = 0; i < cells; ++i) {
      for (int j = i + 1; j < cells; ++j) worst = std::max(worst, std::abs(mu[i] - mu[j]) - 0.5 * (y[j] - y[i]));
    }
    CHECK(worst <= 2.0 + 1e-9);
    CHECK(worst >= 1.99);

    ThresholdParams single;
    single.slopes = {0.6};
    single.intercepts = {0.7};
    const ThresholdARModel s = make_threshold(single);
    CHECK(s.model.chain().contraction.rho == doctest::Approx(0.6));
    CHECK(s.model.chain().contraction.R == doctest::Approx(1.4));

    ThresholdParams bad = p;
    bad.slopes = {1.2, 0.5};
    try {
      make_threshold(bad);
      FAIL("expected SpecError");
    } catch (const SpecError& e) {
      CHECK(std::string(e.what()).find("1.2") != std::string::npos);
    }
  }

  TEST_CASE("subordinate norm of a Jordan block") {
    Matrix A(2, 2);
    A << 0.9, 1.0, 0.0, 0.9;
    CHECK(A.norm() > 1.0);
    const SubordinateNorm n = subordinate_norm(A);
    CHECK(n.spectral_radius == doctest::Approx(0.9));
    CHECK(n.value <= 0.95 + 1e-12);
    CHECK(n.value < 1.0);
  }

  TEST_CASE("subordinate norm of a diagonal matrix") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 0.3;
    A(1, 1) = 0.7;
    const SubordinateNorm n = subordinate_norm(A);
    CHECK(n.value == doctest::Approx(0.7));
    CHECK(n.delta == 1.0);
  }

  TEST_CASE("subordinate norm certificate on random matrices") {
    RngStream rng(5, 0);
    for (int trial = 0; trial < 5; ++trial) {
      Matrix A(5, 5);
      for (Eigen::Index i = 0; i < 5; ++i) {
        for (Eigen::Index j = 0; j < 5; ++j) A(i, j) = rng.normal();
      }
      A *= 0.8 / spectral_radius(A);
      const SubordinateNorm n = subordinate_norm(A);
      CHECK(n.spectral_radius == doctest::Approx(0.8));
      CHECK(n.value < 1.0);
      const Metric metric = n.metric();
      const State zero = State::Zero(5);
      for (int k = 0; k < 10000; ++k) {
        State w(5);
        for (Eigen::Index i = 0; i < 5; ++i) w(i) = rng.normal();
        const State Aw = A * w;
        REQUIRE(metric.distance(Aw, zero) <= n.theta * metric.distance(w, zero) * (1.0 + 1e-9));
      }
    }
    Matrix unstable = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(subordinate_norm(unstable), SpecError);
  }

  TEST_CASE("VaR and CVaR of standard normal losses") {
    const auto losses = normals(1000000, 7);
    const std::vector<double> grid = {-4.0, 4.0};
    const RiskEstimate r = extract_var_cvar(grid, losses, 0.0, 0.95);
    CHECK(std::abs(r.var_estimate - 1.6449) <= 0.01);
    // Gaussian expected shortfall phi(z)/(1 - alpha).
    CHECK(std::abs(r.cvar_estimate - phi_pdf(1.6449) / 0.05) <= 0.01);
    CHECK(r.regularization_bias == 0.0);
    CHECK_FALSE(r.degenerate);

    const RiskEstimate median = extract_var_cvar(grid, losses, 0.0, 0.5);
    CHECK(std::abs(median.var_estimate) <= 0.01);

    const RiskEstimate reg = extract_var_cvar(grid, losses, 0.1, 0.95);
    CHECK(reg.var_estimate < r.var_estimate);
    CHECK(reg.regularization_bias < 0.0);
  }

  TEST_CASE("VaR is nondecreasing in the confidence level") {
    const auto losses = normals(50000, 8);
    const auto samples = normals(2000, 9);
    double previous = -INFINITY;
    for (double level : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99}) {
      const double v = extract_var_cvar(samples, losses, 1e-3, level).var_estimate;
      CHECK(v >= previous);
      previous = v;
    }
  }

  TEST_CASE("degenerate losses are flagged") {
    const RiskEstimate r = extract_var_cvar({-1.0, 1.0}, std::vector<double>(100, 2.0), 0.0, 0.9);
    CHECK(r.degenerate);
    CHECK_THROWS_AS(extract_var_cvar({}, {1.0}, 0.0, 0.9), InputError);
    CHECK_THROWS_AS(extract_var_cvar({0.0}, {1.0}, 0.0, 1.0), InputError);
  }

  TEST_CASE("SGLD risk path reports every checkpoint") {
    const auto losses = normals(5000, 10);
    RngStream rng(11, 0);
    const auto path = sgld_risk_path({1e-3, 1e-2, 0.95}, losses, {1000, 5000, 20000}, 0.0, rng);
    REQUIRE(path.size() == 3);
    CHECK(path[0].step == 1000);
    CHECK(path[2].step == 20000);
    CHECK(std::abs(path[2].var_estimate - 1.645) <= 0.3);
    CHECK(path[2].cvar_estimate >= path[2].var_estimate);
  }

  TEST_CASE("loss CSV parsing") {
    const std::string good = write_temp("good", "loss\n0.5\n-1.25\n3\n");
    CHECK(load_loss_csv(good) == std::vector<double>{0.5, -1.25, 3.0});
    std::remove(good.c_str());

    const std::string header = write_temp("header", "value\n1\n");
    CHECK_THROWS_WITH_AS(load_loss_csv(header), doctest::Contains(":1:"), InputError);
    std::remove(header.c_str());

    const std::string bad = write_temp("bad", "loss\n1.0\nabc\n");
    CHECK_THROWS_WITH_AS(load_loss_csv(bad), doctest::Contains(":3:"), InputError);
    std::remove(bad.c_str());

    const std::string empty = write_temp("empty", "loss\n");
    CHECK_THROWS_AS(load_loss_csv(empty), InputError);
    std::remove(empty.c_str());

    CHECK_THROWS_AS(load_loss_csv("does/not/exist.csv"), InputError);
  }

  TEST_CASE("stochastic volatility environment") {
    StochVolParams p;
    p.b_coeffs = {1.0, 0.0, 0.0};
    p.corr = 0.0;
    const StochVolModel m = make_stochvol(p);
    RngStream rng(12, 0);
    std::vector<double> moment;
    for (int i = 0; i < 1000000; ++i) {
      const EnvState x = sample_marginal(m.environment, rng);
      REQUIRE(m.model.spec().ell(x)(0) == 0.0);
      moment.push_back(std::exp(2.0 * x.value));
    }
    // E exp(2 Z) = e^2 for Z ~ N(0, 1).
    const auto ms = stats::mean_se(moment);
    CHECK(std::abs(ms.mean - std::exp(2.0)) <= 4.0 * ms.se);
    CHECK_THROWS_AS(make_stochvol({{1.0}, 1.0, 1.0}), SpecError);
  }

  TEST_CASE("a linear drift certifies whatever the volatility") {
    StochVolParams p;
    p.drift_amplitude = 0.0;
    p.corr = 0.6;
    const StochVolModel m = make_stochvol(p);
    CHECK(m.model.chain().contraction.R == 0.0);
    RngStream rng(13, 0);
    for (int i = 0; i < 1000; ++i) {
      const EnvState x = sample_marginal(m.environment, rng);
      const double y1 = 10.0 * rng.normal();
      const double y2 = 10.0 * rng.normal();
      const State e = m.model.noise().sample(rng);
      const double d = std::abs(m.model.apply(scalar_state(y1), x, e)(0) - m.model.apply(scalar_state(y2), x, e)(0));
      REQUIRE(d <= 0.5 * std::abs(y1 - y2) * (1.0 + 1e-9) + 1e-9 * std::exp(std::abs(x.value)));
    }
  }

  TEST_CASE("zoo lookup") {
    CHECK(model_zoo().size() == 5);
    CHECK(zoo_model("sgld").model.minorization().K == doctest::Approx(1.447).epsilon(1e-3));
    CHECK_THROWS_AS(zoo_model("nope"), SpecError);
  }
}
