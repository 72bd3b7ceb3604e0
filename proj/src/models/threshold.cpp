#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

ThresholdARModel make_threshold(const ThresholdParams& p) {
  const std::size_t m = p.slopes.size();
  if (m == 0) throw SpecError("threshold: at least one regime is required");
  if (p.intercepts.size() != m) throw SpecError("threshold: need one intercept per regime");
  if (p.thresholds.size() + 1 != m) throw SpecError("threshold: need m-1 thresholds for m regimes");
  if (!std::is_sorted(p.thresholds.begin(), p.thresholds.end()) ||
      std::adjacent_find(p.thresholds.begin(), p.thresholds.end()) != p.thresholds.end()) {
    throw SpecError("threshold: thresholds must be strictly increasing");
  }
  if (!(std::abs(p.slopes.front()) < 1.0)) {
    throw SpecError(fmt::format("threshold: outer slope a_1={} must satisfy |a_1| < 1", p.slopes.front()));
  }
  if (!(std::abs(p.slopes.back()) < 1.0)) {
    throw SpecError(fmt::format("threshold: outer slope a_m={} must satisfy |a_m| < 1", p.slopes.back()));
  }
  if (!(p.sigma != 0.0)) throw SpecError("threshold: sigma must be nonzero");

  ThresholdARModel out;
  out.params = p;
  for (double r : p.thresholds) out.r = std::max(out.r, std::abs(r));
  for (double a : p.slopes) out.a = std::max(out.a, std::abs(a));
  for (double b : p.intercepts) out.b = std::max(out.b, std::abs(b));
  const double rho = std::max(std::abs(p.slopes.front()), std::abs(p.slopes.back()));

  AdditiveSpec spec;
  spec.name = "threshold";
  spec.dim = 1;
  spec.mu = [p](const State& y, const EnvState&) {
    // First regime whose upper threshold is >= y.
    const auto i = static_cast<std::size_t>(
        std::lower_bound(p.thresholds.begin(), p.thresholds.end(), y(0)) - p.thresholds.begin());
    return scalar_state(p.slopes[i] * y(0) + p.intercepts[i]);
  };
  spec.sigma = [s = p.sigma](const EnvState&) { return Matrix(Matrix::Constant(1, 1, s)); };
  spec.ell = [l = p.ell](const EnvState&) { return scalar_state(l); };
  spec.noise = p.noise;
  spec.metric = Metric::euclidean(1);
  spec.contraction = {rho, 2.0 * out.a * out.r + 2.0 * out.b};
  out.model = make_additive(std::move(spec));
  return out;
}

}  // namespace mcre
