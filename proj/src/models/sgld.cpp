#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

double sgld_gradient(const SgldParams& p, double y, double loss) {
  return 1.0 - (loss >= y ? 1.0 : 0.0) / (1.0 - p.alpha_level);
}

SgldVarModel make_sgld(const SgldParams& p) {
  if (!(p.a > 0.0)) throw SpecError(fmt::format("sgld: a={} must be > 0", p.a));
  if (!(p.h > 0.0 && p.h < 1.0 / (2.0 * p.a))) {
    throw SpecError(fmt::format("sgld: step size h={} must lie in (0, 1/(2a))", p.h));
  }
  if (!(p.alpha_level > 0.0 && p.alpha_level < 1.0)) {
    throw SpecError(fmt::format("sgld: alpha_level={} must lie in (0,1)", p.alpha_level));
  }

  SgldVarModel out;
  out.params = p;
  out.J = std::max(p.alpha_level / (1.0 - p.alpha_level), 1.0);
  out.rho = 1.0 - 2.0 * p.a * p.h;
  out.R = 2.0 * p.h * out.J;

  AdditiveSpec spec;
  spec.name = "sgld";
  spec.dim = 1;
  spec.mu = [p](const State& y, const EnvState& x) {
    return scalar_state(y(0) - 2.0 * p.a * p.h * y(0) - p.h * sgld_gradient(p, y(0), x.value));
  };
  const double noise_scale = std::sqrt(2.0 * p.h);
  spec.sigma = [noise_scale](const EnvState&) { return Matrix(Matrix::Constant(1, 1, noise_scale)); };
  spec.noise = NoiseLaw::gaussian(1);
  spec.metric = Metric::euclidean(1);
  spec.contraction = {out.rho, out.R};
  // nu is uniform on the sqrt(2h) ball and the drift images of an admissible
  // pair are at most 2J/a apart, giving K = J/a + sqrt(2h) and the constant
  // eta = Vol(B_1) phi(1 + J / (sqrt(2h) a)).
  spec.nu_radius = noise_scale;
  spec.half_gap = out.J / p.a;
  out.model = make_additive(std::move(spec));

  MinorizationSpec m = out.model.minorization();
  const double eta = m.eta(EnvState{});
  m.eta = [eta](const EnvState&) { return eta; };
  m.constant_eta = true;
  out.model = out.model.with_minorization(std::move(m));
  return out;
}

}  // namespace mcre
