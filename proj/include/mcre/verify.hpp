#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "mcre/chain.hpp"
#include "mcre/environment.hpp"
#include "mcre/minorization.hpp"

namespace mcre {

struct CheckReport {
  std::string assumption;
  std::int64_t trials = 0;
  std::int64_t violations = 0;
  // Largest observed lhs - rhs (negative when every trial had slack).
  double worst_margin = -INFINITY;
  // Offending input of the first violation; empty iff violations == 0.
  std::optional<std::string> witness;

  // Merges a report over a disjoint set of trials. Witnesses keep the
  // earliest shard, so merging in shard order is deterministic.
  void merge(const CheckReport& other);
};

// Distribution of (y1, y2) pairs for the sampled inequality checks: a
// fraction `shell_fraction` of pairs is drawn on the sphere of radius
// `shell_radius`, the rest uniformly in the box [-box, box]^dim.
struct InputSampler {
  double box_half_width = 50.0;
  double shell_radius = 1000.0;
  double shell_fraction = 0.1;
  EnvironmentSpec environment;

  State sample_state(int dim, RngStream& rng) const;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int workers = 1;
};

// Samples (y1, y2, x, e) and tests d(f(y1,x,e), f(y2,x,e)) <= rho d(y1,y2) + R.
CheckReport check_contractivity(const ChainSpec& spec, const InputSampler& sampler, std::int64_t trials,
                                const CheckOptions& options = {});

// Compares the empirical kernels P_x(y_i, A) with eta(x) nu(A) over a cell
// partition of the region around the two anchor balls; a cell violates
// dominance when eta nu-hat exceeds P-hat by more than 5 binomial standard
// errors. Cells are a 32^dim grid for dim <= 2 and random half-spaces above.
CheckReport check_minorization(const ChainSpec& spec, const MinorizationSpec& minor, const EnvState& x,
                               const State& y1, const State& y2, std::int64_t samples,
                               const CheckOptions& options = {});

// Every nu draw must lie within K of both anchors.
CheckReport check_support(const MinorizationSpec& minor, const EnvState& x, const State& y1, const State& y2,
                          std::int64_t samples, const CheckOptions& options = {});

using StateMap = std::function<State(const State&)>;

// f = g + h with g rho-Lipschitz and |h| <= J: tests the contraction with R = 2J.
CheckReport check_bounded_perturbation(const StateMap& g, const StateMap& h, double rho, double J, int dim,
                                       std::int64_t trials, const CheckOptions& options = {});

}  // namespace mcre
