#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

StochVolModel make_stochvol(const StochVolParams& p) {
  if (!(std::abs(p.corr) < 1.0)) throw SpecError(fmt::format("stochvol: corr={} must satisfy |corr| < 1", p.corr));
  if (p.noise.dim() != 1) throw SpecError("stochvol: noise must be one-dimensional");

  StochVolModel out;
  out.params = p;
  out.environment = p.b_coeffs.empty() ? EnvironmentSpec::power_law_linear(1.5, 256, p.innovation_sd)
                                       : EnvironmentSpec::linear_process(p.b_coeffs, p.innovation_sd);

  AdditiveSpec spec;
  spec.name = "stochvol";
  spec.dim = 1;
  spec.mu = [slope = p.drift_slope, amp = p.drift_amplitude](const State& y, const EnvState&) {
    return scalar_state(slope * y(0) + amp * std::sin(y(0)));
  };
  const double idio = std::sqrt(1.0 - p.corr * p.corr);
  spec.sigma = [idio](const EnvState& x) { return Matrix(Matrix::Constant(1, 1, idio * std::exp(x.value))); };
  spec.ell = [corr = p.corr](const EnvState& x) {
    return scalar_state(corr * std::exp(x.value) * x.next_innovation);
  };
  spec.noise = p.noise;
  spec.metric = Metric::euclidean(1);
  spec.contraction = {std::abs(p.drift_slope), 2.0 * std::abs(p.drift_amplitude)};
  out.model = make_additive(std::move(spec));
  return out;
}

}  // namespace mcre
