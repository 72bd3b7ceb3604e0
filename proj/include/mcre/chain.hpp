#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mcre/environment.hpp"
#include "mcre/linalg.hpp"
#include "mcre/noise.hpp"
#include "mcre/rng.hpp"

namespace mcre {

// d(f(y1,x,e), f(y2,x,e)) <= rho d(y1,y2) + R for all y1, y2, x, e.
struct ContractionParams {
  double rho = 0.5;
  double R = 0.0;

  void validate() const;
};

using UpdateFn = std::function<State(const State& y, const EnvState& x, const State& e)>;

// A Markov chain in random environment Y_{n+1} = f(Y_n, X_n, eps_{n+1}).
struct ChainSpec {
  std::string name;
  int dim_state = 1;
  UpdateFn update;
  NoiseLaw noise;
  Metric metric;
  double theta = 1.0;      // metric exponent in (0, 1]
  State reference_point;   // y-tilde
  ContractionParams contraction;

  void validate() const;
  double distance(const State& a, const State& b) const { return metric.distance(a, b); }
};

// f(y, x, e) for a given noise value; throws NumericOverflow on non-finite output.
State apply_update(const ChainSpec& spec, const State& y, const EnvState& x, const State& e);

// One transition: draws e from the noise law and applies the update.
State step(const ChainSpec& spec, const State& y, const EnvState& x, RngStream& rng);

struct Trajectory {
  std::vector<State> states;
  EnvironmentWindow env_window;
};

// Y_0 = y0, Y_{k+1} = f(Y_k, X_k, eps_{k+1}) for k = 0..n-1 with X drawn on [0, n).
Trajectory simulate_forward(const ChainSpec& spec, const EnvironmentSpec& env, const State& y0,
                            std::int64_t n, RngStream& rng);

// Runs the chain from y0 along a window X_{-n}..X_{-1}; the final state has
// law delta_y0 P_{X_{-n}} ... P_{X_{-1}} given the window.
Trajectory simulate_backward(const ChainSpec& spec, const EnvironmentSpec& env, const State& y0,
                             std::int64_t n, RngStream& rng);

// Iterates the chain along an existing window, starting at index `start`.
std::vector<State> run_along(const ChainSpec& spec, const EnvironmentWindow& window, std::int64_t start,
                             const State& y0, std::int64_t n, RngStream& rng);

}  // namespace mcre
