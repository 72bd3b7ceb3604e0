#include "mcre/minorization.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace mcre {

MinorizationSpec MinorizationSpec::with_eta_scale(double factor) const {
  MinorizationSpec out = *this;
  out.eta = [base = eta, factor](const EnvState& x) { return factor * base(x); };
  return out;
}

MinorizationSpec MinorizationSpec::with_K(double k) const {
  MinorizationSpec out = *this;
  out.K = k;
  return out;
}

MinorizationSpec MinorizationSpec::with_identity_anchor() const {
  MinorizationSpec out = *this;
  out.anchor = [](const State& y, const EnvState&) { return y; };
  out.anchor_kind = Anchor::identity;
  return out;
}

std::string MinorizationSpec::describe() const {
  return fmt::format("K={} pair_radius={} R_tilde={} anchor={}", K, pair_radius, R_tilde,
                     anchor_kind == Anchor::identity ? "identity" : "drift_image");
}

State sample_uniform_ball(const State& center, double radius, RngStream& rng) {
  const auto dim = static_cast<int>(center.size());
  State u(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) u(i) = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  return center + (r / norm) * u;
}

double uniform_ball_density(const State& center, double radius, const State& z) {
  if ((z - center).norm() > radius) return 0.0;
  return 1.0 / (unit_ball_volume(static_cast<int>(center.size())) * std::pow(radius, center.size()));
}

}  // namespace mcre
