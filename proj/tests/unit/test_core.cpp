#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "mcre/chain.hpp"
#include "mcre/constants.hpp"
#include "mcre/environment.hpp"
#include "mcre/errors.hpp"
#include "mcre/models.hpp"
#include "mcre/rng.hpp"
#include "mcre/stats.hpp"

using namespace mcre;

namespace {

ChainSpec linear_chain(double slope, NoiseLaw noise) {
  ChainSpec c;
  c.name = "linear";
  c.dim_state = 1;
  c.update = [slope](const State& y, const EnvState&, const State& e) { return State(slope * y + e); };
  c.noise = std::move(noise);
  c.metric = Metric::euclidean(1);
  c.reference_point = scalar_state(0.0);
  c.contraction = {std::abs(slope) > 0.0 ? std::abs(slope) : 0.5, 0.0};
  return c;
}

// Smallest N >= 1 with q^(N-1) <= t, by direct search.
std::int64_t smallest_n(double q, double t) {
  std::int64_t n = 1;
  while (std::pow(q, static_cast<double>(n - 1)) > t) ++n;
  return n;
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("same seed and index reproduce the stream bit for bit") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("distinct indices and child tags give different streams") {
    RngStream a(42, 0);
    RngStream b(42, 1);
    RngStream c = RngStream(42, 0).child(1);
    int same_ab = 0;
    int same_ac = 0;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      same_ab += x == b.next_u64();
      same_ac += x == c.next_u64();
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
  }

  TEST_CASE("streams with distinct indices are uncorrelated") {
    const int n = 100000;
    RngStream a(3, 10);
    RngStream b(3, 11);
    double sxy = 0.0;
    for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
    CHECK(std::abs(sxy / n) < 4.0 / std::sqrt(n));
  }
}

TEST_SUITE("constants") {
  TEST_CASE("primed constants for rho = 0.5, R = 1, K = 2.5") {
    const auto c = derive_constants({0.5, 1.0}, 2.5);
    CHECK(c.rho_prime == 0.75);
    CHECK(c.R_prime == 4.0);
    // 0.75^6 = 0.178 > 4/26 = 0.1538 >= 0.75^7 = 0.1335
    CHECK(c.N == 8);
    CHECK(c.k_star(100) == 6);
    CHECK(c.k_star(16) == 1);
    CHECK(c.k_star(15) == 1);
    CHECK(c.k_star(14) == 0);
  }

  TEST_CASE("constant exactness over random draws") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double rho = 0.01 + 0.98 * u(gen);
      const double R = 10.0 * u(gen) + 1e-3;
      const double K = 20.0 * u(gen) + 1e-3;
      const auto c = derive_constants({rho, R}, K);
      REQUIRE(c.rho_prime == (1.0 + rho) / 2.0);
      REQUIRE(c.R_prime == 2.0 * R / (1.0 - rho));
      const double target = c.R_prime / (4.0 * c.R_prime + 4.0 * K);
      REQUIRE(c.N == smallest_n(c.rho_prime, target));
      REQUIRE(std::pow(c.rho_prime, static_cast<double>(c.N - 1)) <= target);
      if (c.N >= 2) REQUIRE(std::pow(c.rho_prime, static_cast<double>(c.N - 2)) > target);
      for (std::int64_t n : {0, 1, 2, 17, 100, 1001}) {
        REQUIRE(c.k_star(n) == ((n + 1) / 2) / c.N);
      }
    }
  }

  TEST_CASE("R = 0 leaves no coupling attempts") {
    const auto c = derive_constants({0.5, 0.0}, 1.0);
    CHECK_FALSE(c.attempts_possible());
    CHECK(c.k_star(1000000) == 0);
  }

  TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(derive_constants({1.0, 1.0}, 1.0), SpecError);
    CHECK_THROWS_AS(derive_constants({0.5, -1.0}, 1.0), SpecError);
    CHECK_THROWS_AS(derive_constants({0.5, 1.0}, 0.0), SpecError);
  }

  TEST_CASE("assumption forms") {
    const auto unilip = to_unilip({0.5, 1.0});
    CHECK(unilip.rho == 0.75);
    CHECK(unilip.R == doctest::Approx(4.0));

    const auto from_con = normalize_assumption({AssumptionForm::con_lip, 0.5, 1.0, 2.0});
    CHECK(from_con.rho == 0.5);
    CHECK(from_con.R == doctest::Approx(4.0));

    const auto from_unilip = normalize_assumption({AssumptionForm::unilip, 0.3, 2.0, 1.0});
    CHECK(from_unilip.rho == 0.3);
    CHECK(from_unilip.R == 2.0);

    CHECK_THROWS_AS(normalize_assumption({AssumptionForm::drift, 1.0, 1.0, 1.0}), SpecError);
    CHECK_THROWS_AS(normalize_assumption({AssumptionForm::con_lip, 0.5, 1.0, 0.5}), SpecError);
  }

  TEST_CASE("unilip bound implies the drift bound it was derived from") {
    // rho' max(R', d) >= rho d + R for every d when R' = R / (rho' - rho).
    const ContractionParams drift{0.6, 1.5};
    const auto u = to_unilip(drift);
    for (double d = 0.0; d < 100.0; d += 0.01) {
      REQUIRE(u.rho * std::max(u.R, d) >= drift.rho * d + drift.R - 1e-12);
    }
  }
}

TEST_SUITE("chain") {
  TEST_CASE("step with the noise pinned to zero is the drift") {
    const ChainSpec c = linear_chain(0.5, NoiseLaw::zero(1));
    RngStream rng(1, 0);
    CHECK(step(c, scalar_state(2.0), EnvState{}, rng)(0) == 1.0);
  }

  TEST_CASE("SGLD drift contracts by 1 - 2ah") {
    const SgldVarModel m = make_sgld({1.0, 0.1, 0.5});
    CHECK(m.rho == doctest::Approx(0.8));
    // With the same indicator on both sides H cancels and only the contraction remains.
    const EnvState x{-10.0, 0.0};
    const State zero = scalar_state(0.0);
    const double f1 = apply_update(m.model.chain(), scalar_state(1.0), x, zero)(0);
    const double f2 = apply_update(m.model.chain(), scalar_state(0.5), x, zero)(0);
    CHECK(f1 - f2 == doctest::Approx(0.8 * 0.5));
    // H(1, x) = 1 here, so f = 0.8 - 0.1.
    CHECK(f1 == doctest::Approx(0.7));
  }

  TEST_CASE("sample mean of one Gaussian step from zero") {
    const ChainSpec c = linear_chain(0.0, NoiseLaw::gaussian(1));
    RngStream rng(5, 0);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += step(c, scalar_state(0.0), EnvState{}, rng)(0);
    CHECK(std::abs(sum / n) <= 3.0 / std::sqrt(n));
  }

  TEST_CASE("non-finite output raises NumericOverflow") {
    ChainSpec c = linear_chain(0.5, NoiseLaw::zero(1));
    c.update = [](const State&, const EnvState&, const State&) { return scalar_state(INFINITY); };
    RngStream rng(1, 0);
    CHECK_THROWS_AS(step(c, scalar_state(0.0), EnvState{}, rng), NumericOverflow);
  }

  TEST_CASE("forward simulation lengths and deterministic contraction") {
    const ChainSpec c = linear_chain(0.5, NoiseLaw::zero(1));
    RngStream rng(1, 0);
    const auto t0 = simulate_forward(c, EnvironmentSpec::iid_gaussian(), scalar_state(3.0), 0, rng);
    REQUIRE(t0.states.size() == 1);
    CHECK(t0.states[0](0) == 3.0);

    const auto t = simulate_forward(c, EnvironmentSpec::iid_gaussian(), scalar_state(3.0), 20, rng);
    REQUIRE(t.states.size() == t.env_window.size() + 1);
    for (std::size_t n = 0; n < t.states.size(); ++n) {
      CHECK(t.states[n](0) == doctest::Approx(3.0 * std::pow(0.5, static_cast<double>(n))));
    }
  }

  TEST_CASE("stationary variance of the additive AR(1) model") {
    const ZooEntry e = zoo_model("additive");
    const int reps = 10000;
    std::vector<double> sq(reps);
    std::vector<double> values(reps);
    for (int r = 0; r < reps; ++r) {
      RngStream rng(17, static_cast<std::uint64_t>(r));
      const auto t = simulate_forward(e.model.chain(), e.environment, scalar_state(0.0), 50, rng);
      values[static_cast<std::size_t>(r)] = t.states.back()(0);
    }
    const double mean = stats::mean_se(values).mean;
    for (int r = 0; r < reps; ++r) sq[static_cast<std::size_t>(r)] = std::pow(values[static_cast<std::size_t>(r)] - mean, 2);
    const auto v = stats::mean_se(sq);
    CHECK(std::abs(v.mean - 1.0 / (1.0 - 0.25)) < 4.0 * v.se);
  }

  TEST_CASE("backward window and synchronous contraction") {
    const ChainSpec c = linear_chain(0.5, NoiseLaw::zero(1));
    RngStream a(9, 0);
    RngStream b(9, 0);
    const auto t1 = simulate_backward(c, EnvironmentSpec::iid_gaussian(), scalar_state(1.0), 12, a);
    const auto t2 = simulate_backward(c, EnvironmentSpec::iid_gaussian(), scalar_state(-3.0), 12, b);
    CHECK(t1.env_window.first_index() == -12);
    CHECK(t1.env_window.end_index() == 0);
    CHECK(std::abs(t1.states.back()(0) - t2.states.back()(0)) == doctest::Approx(4.0 * std::pow(0.5, 12)));
    CHECK_THROWS_AS(t1.env_window.at(0), std::out_of_range);
    CHECK_THROWS_AS(simulate_backward(c, EnvironmentSpec::iid_gaussian(), scalar_state(0.0), 0, a), InputError);
  }

  TEST_CASE("identical seeds give bit-identical trajectories") {
    const ZooEntry e = zoo_model("stochvol");
    RngStream a(99, 4);
    RngStream b(99, 4);
    const auto t1 = simulate_forward(e.model.chain(), e.environment, scalar_state(0.0), 200, a);
    const auto t2 = simulate_forward(e.model.chain(), e.environment, scalar_state(0.0), 200, b);
    for (std::size_t i = 0; i < t1.states.size(); ++i) REQUIRE(t1.states[i](0) == t2.states[i](0));
  }

  TEST_CASE("synchronous steps respect the declared contraction on every zoo model") {
    for (const auto& e : model_zoo()) {
      CAPTURE(e.key);
      const ChainSpec& c = e.model.chain();
      RngStream rng(31, 0);
      for (int i = 0; i < 20000; ++i) {
        State y(c.dim_state);
        State yp(c.dim_state);
        for (int k = 0; k < c.dim_state; ++k) {
          y(k) = 40.0 * (rng.uniform() - 0.5);
          yp(k) = 40.0 * (rng.uniform() - 0.5);
        }
        const EnvState x = sample_marginal(e.environment, rng);
        const State noise = c.noise.sample(rng);
        const double lhs = c.distance(apply_update(c, y, x, noise), apply_update(c, yp, x, noise));
        const double rhs = c.contraction.rho * c.distance(y, yp) + c.contraction.R;
        REQUIRE(lhs <= rhs + 1e-10 * (1.0 + rhs));
      }
    }
  }
}

TEST_SUITE("environment") {
  void check_stationary(const EnvironmentSpec& env) {
    const int reps = 10000;
    const std::int64_t n = 40;
    std::vector<std::vector<double>> at(3, std::vector<double>(reps));
    for (int r = 0; r < reps; ++r) {
      RngStream rng(123, static_cast<std::uint64_t>(r));
      const auto w = generate_window(env, -n, n + 1, rng);
      at[0][static_cast<std::size_t>(r)] = w.at(-n).value;
      at[1][static_cast<std::size_t>(r)] = w.at(0).value;
      at[2][static_cast<std::size_t>(r)] = w.at(n).value;
    }
    const double mean = env.marginal_mean();
    const double var = env.marginal_variance();
    for (const auto& v : at) {
      const auto m = stats::mean_se(v);
      CHECK(std::abs(m.mean - mean) < 4.0 * m.se);
      std::vector<double> sq(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
      const auto s = stats::mean_se(sq);
      CHECK(std::abs(s.mean - var) < 4.0 * s.se);
    }
  }

  TEST_CASE("gaussian AR(1) marginals at -n, 0, n") { check_stationary(EnvironmentSpec::gaussian_ar1(0.9)); }

  TEST_CASE("truncated linear process marginals at -n, 0, n") {
    check_stationary(EnvironmentSpec::power_law_linear(1.5, 64, 0.5));
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(EnvironmentSpec::gaussian_ar1(1.0).validate(), SpecError);
    CHECK_THROWS_AS(EnvironmentSpec::linear_process({}).validate(), SpecError);
  }
}
