#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mcre/constants.hpp"
#include "mcre/environment.hpp"
#include "mcre/models.hpp"

namespace mcre {

// One-step kernel split for a pair (q, q') at environment x:
//   P_x(q, .) = eta nu + c_bar chi_q + residual_q.
// The far set N holds the noise values that move both states more than K
// from their anchors; chi_q is the law of f(q, x, eps) given eps in N.
struct CouplingDecomposition {
  double eta_x = 0.0;
  double c_bar = 0.0;
  double c_bar_se = 0.0;  // zero when computed exactly
  bool exact = false;
  std::function<bool(const State& e)> far_set_indicator;
  // Smallest residual density p - eta nu - c_bar chi found on a spot-check grid.
  double min_residual_density = 0.0;
};

// Requires 0 < d(q, q') <= pair radius. c_bar is exact for one-dimensional
// noise (interval arithmetic on the noise CDF) and Monte Carlo with standard
// error <= 1e-3 otherwise; Monte Carlo values depend only on the rounded
// inputs, so they are cached and reproducible.
CouplingDecomposition decompose(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp);

enum class CouplingCase { identical_start, far_start_synchronous, nu_coupled, far_excursion_synchronous, residual };

std::string to_string(CouplingCase c);

struct CouplingOutcome {
  CouplingCase case_taken = CouplingCase::identical_start;
  State next_q;
  State next_qp;
  // The pair is coupled after this step: a nu draw, or an identical start.
  bool coupled = false;
};

inline constexpr std::int64_t kRejectionCap = 1'000'000;

// One coupled transition. Each output has exactly the law P_x(q, .) and
// P_x(q', .) respectively.
CouplingOutcome couple_step(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp,
                            RngStream& rng);

struct AttemptRecord {
  std::int64_t time = 0;        // step index t of the attempt X_t, t = floor(n/2) + kN - 1
  double distance_before = 0.0;
  double distance_after = 0.0;
  double eta = 0.0;
  CouplingCase case_taken = CouplingCase::identical_start;
  bool coupled = false;
};

struct CouplingRun {
  CouplingConstants schedule;
  std::int64_t n = 0;
  std::int64_t first_index = 0;  // environment index of step 0 (-n for backward runs)
  // First time the pair is coupled. Floating-point coincidence of two
  // synchronously contracted states does not count as meeting.
  std::optional<std::int64_t> meeting_time;
  std::vector<AttemptRecord> per_attempt;
  std::vector<double> distances;  // d(Y_t, Y'_t), t = 0..n
  State final_y;
  State final_yp;
  double analytic_bound = 1.0;
  EnvironmentWindow env_path;

  bool coupled_at_end() const { return meeting_time.has_value(); }
};

enum class Direction { forward, backward };

// Two-phase schedule: synchronous steps up to floor(n/2), then coupling
// attempts at steps floor(n/2) + kN - 1, k = 1..k*(n), synchronous elsewhere.
CouplingRun run_coupling(const AdditiveModel& model, const EnvironmentSpec& env, const State& y, const State& yp,
                         std::int64_t n, RngStream& rng, Direction direction = Direction::forward);

// 1{d0 >= R'/rho'^floor(n/2)} + prod_{k=1}^{k*(n)} (1 - eta_path[floor(n/2) + kN - 1]),
// clamped to [0, 1]. eta_path[t] is eta(X_t) relative to the run's first step.
double analytic_bound(const CouplingConstants& constants, const std::vector<double>& eta_path, double d0,
                      std::int64_t n);

}  // namespace mcre
