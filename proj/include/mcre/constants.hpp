#pragma once

#include <cstdint>
#include <string>

#include "mcre/chain.hpp"

namespace mcre {

// Schedule constants of the two-phase coupling. All fields are in the
// primed (unilip) form: rho_prime = (1 + rho) / 2, R_prime = 2R / (1 - rho).
struct CouplingConstants {
  double rho = 0.0;
  double R = 0.0;
  double rho_prime = 0.0;
  double R_prime = 0.0;
  double K = 0.0;
  // Smallest N >= 1 with rho_prime^(N-1) <= R_prime / (4 R_prime + 4 K).
  // When R = 0 no N exists; N is then kNoAttempts and k_star is always 0.
  std::int64_t N = 0;

  static constexpr std::int64_t kNoAttempts = INT64_MAX;

  bool attempts_possible() const { return N != kNoAttempts; }
  // floor(ceil(n / 2) / N)
  std::int64_t k_star(std::int64_t n) const;
  // R_prime / rho_prime^floor(n/2): starting distances below this are
  // contracted into the R_prime ball by time floor(n/2).
  double start_radius(std::int64_t n) const;
};

CouplingConstants derive_constants(const ContractionParams& contraction, double K);

enum class AssumptionForm { drift, unilip, con_lip };

// A contractivity statement in one of three equivalent-up-to-constants forms:
//   drift    d(f(y1), f(y2)) <= rho d(y1, y2) + R
//   unilip   d(f(y1), f(y2)) <= rho max(R, d(y1, y2))
//   con_lip  contraction by rho beyond distance R, plus global Lipschitz L >= 1
struct AssumptionStatement {
  AssumptionForm form = AssumptionForm::drift;
  double rho = 0.5;
  double R = 0.0;
  double L = 1.0;
};

// Converts any statement into drift-form parameters.
ContractionParams normalize_assumption(const AssumptionStatement& statement);

// Drift form to unilip form with rho' = (1 + rho) / 2 and R' = R / (rho' - rho).
AssumptionStatement to_unilip(const ContractionParams& drift);

std::string describe(const CouplingConstants& c);

}  // namespace mcre
