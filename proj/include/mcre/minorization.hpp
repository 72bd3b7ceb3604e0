#pragma once

#include <functional>
#include <string>

#include "mcre/environment.hpp"
#include "mcre/linalg.hpp"
#include "mcre/rng.hpp"

namespace mcre {

// Local minorization of a kernel: for d(y1, y2) <= pair_radius,
//   P_x(y_i, A) >= eta(x) nu(x, y1, y2, A),  i = 1, 2,
// with nu(x, y1, y2, .) carried by the balls of radius K around anchor(y_i, x).
//
// The anchor is where the K-ball is centred. With anchor(y, x) = y this is
// the textbook form; the shipped additive models centre the balls at the
// drift image mu(y, x) + ell(x), which is where their nu actually lives.
struct MinorizationSpec {
  using EtaFn = std::function<double(const EnvState& x)>;
  using NuSampler = std::function<State(const EnvState& x, const State& y1, const State& y2, RngStream& rng)>;
  using NuDensity = std::function<double(const EnvState& x, const State& y1, const State& y2, const State& z)>;
  using AnchorFn = std::function<State(const State& y, const EnvState& x)>;

  enum class Anchor { identity, drift_image };

  EtaFn eta;
  NuSampler nu_sampler;
  NuDensity nu_density;
  AnchorFn anchor;
  Anchor anchor_kind = Anchor::drift_image;
  Metric metric;
  double K = 1.0;
  double pair_radius = 0.0;
  double R_tilde = 0.0;
  bool constant_eta = false;

  // Copies with one ingredient changed; used to probe the checks.
  MinorizationSpec with_eta_scale(double factor) const;
  MinorizationSpec with_K(double k) const;
  MinorizationSpec with_identity_anchor() const;

  std::string describe() const;
};

// Uniform law on a Euclidean ball.
State sample_uniform_ball(const State& center, double radius, RngStream& rng);
double uniform_ball_density(const State& center, double radius, const State& z);

}  // namespace mcre
