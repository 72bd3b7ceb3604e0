#include "mcre/constants.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

std::int64_t CouplingConstants::k_star(std::int64_t n) const {
  if (n < 0) throw InputError("k_star needs n >= 0");
  if (!attempts_possible()) return 0;
  return ((n + 1) / 2) / N;
}

double CouplingConstants::start_radius(std::int64_t n) const {
  return R_prime / std::pow(rho_prime, static_cast<double>(n / 2));
}

CouplingConstants derive_constants(const ContractionParams& contraction, double K) {
  contraction.validate();
  if (!(K > 0.0) || !std::isfinite(K)) throw SpecError(fmt::format("coupling radius K={} must be > 0", K));

  CouplingConstants c;
  c.rho = contraction.rho;
  c.R = contraction.R;
  c.K = K;
  c.rho_prime = (1.0 + c.rho) / 2.0;
  c.R_prime = 2.0 * c.R / (1.0 - c.rho);
  if (c.R_prime == 0.0) {
    c.N = CouplingConstants::kNoAttempts;
    return c;
  }

  const double target = c.R_prime / (4.0 * c.R_prime + 4.0 * K);
  // Start just below the logarithmic estimate and walk up; the comparison
  // itself uses pow so the result is the exact minimizer in floating point.
  const double guess = 1.0 + std::log(target) / std::log(c.rho_prime);
  auto n = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(guess)) - 2);
  while (n > 1 && std::pow(c.rho_prime, static_cast<double>(n - 2)) <= target) --n;
  while (std::pow(c.rho_prime, static_cast<double>(n - 1)) > target) ++n;
  c.N = n;
  return c;
}

ContractionParams normalize_assumption(const AssumptionStatement& s) {
  if (!(s.rho > 0.0 && s.rho < 1.0)) throw SpecError(fmt::format("assumption rho={} not in (0,1)", s.rho));
  if (!(s.R >= 0.0)) throw SpecError(fmt::format("assumption R={} must be >= 0", s.R));
  switch (s.form) {
    case AssumptionForm::drift:
      return {s.rho, s.R};
    case AssumptionForm::unilip:
      // rho max(R, d) <= rho d + rho R <= rho d + R
      return {s.rho, s.R};
    case AssumptionForm::con_lip:
      if (!(s.L >= 1.0)) throw SpecError(fmt::format("Lipschitz constant L={} must be >= 1", s.L));
      return {s.rho, s.R * s.L / s.rho};
  }
  throw SpecError("unknown assumption form");
}

AssumptionStatement to_unilip(const ContractionParams& drift) {
  drift.validate();
  AssumptionStatement out;
  out.form = AssumptionForm::unilip;
  out.rho = (1.0 + drift.rho) / 2.0;
  out.R = drift.R / (out.rho - drift.rho);
  return out;
}

std::string describe(const CouplingConstants& c) {
  if (!c.attempts_possible()) {
    return fmt::format("rho'={} R'={} K={} N=none", c.rho_prime, c.R_prime, c.K);
  }
  return fmt::format("rho'={} R'={} K={} N={}", c.rho_prime, c.R_prime, c.K, c.N);
}

}  // namespace mcre
