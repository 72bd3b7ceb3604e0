#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mcre/rng.hpp"

namespace mcre {

// One environment value X_n. `value` is the process itself; for processes
// driven by innovations, `next_innovation` is the innovation that enters
// X_{n+1} (the stochastic volatility model reads X_n = (zeta_{n+1}, Z_n)).
struct EnvState {
  double value = 0.0;
  double next_innovation = 0.0;
};

// Declared decay family of the environment's alpha-mixing coefficients.
enum class DecayFamily { none, geometric, stretched_exponential, polynomial };

struct MixingProfile {
  DecayFamily family = DecayFamily::none;
  double rate = 0.0;   // lambda (geometric) or c (stretched)
  double gamma = 0.0;  // exponent for stretched / polynomial families
};

struct EnvironmentSpec {
  enum class Kind { iid, gaussian_ar1, linear_process, series };

  Kind kind = Kind::iid;
  double ar_coefficient = 0.0;      // phi, gaussian_ar1 only
  double innovation_sd = 1.0;       // sd of the Gaussian innovations / iid draws
  std::vector<double> coefficients; // b_0..b_L, linear_process only
  std::shared_ptr<const std::vector<double>> series;  // series only
  bool resample = false;            // series: i.i.d. resampling instead of a contiguous block
  MixingProfile mixing;

  static EnvironmentSpec iid_gaussian(double sd = 1.0);
  static EnvironmentSpec gaussian_ar1(double phi, double sd = 1.0);
  static EnvironmentSpec linear_process(std::vector<double> coefficients, double sd = 1.0);
  // b_k = (1 + k)^(-decay), truncated at lag L (default 256).
  static EnvironmentSpec power_law_linear(double decay, int lag = 256, double sd = 1.0);
  static EnvironmentSpec from_series(std::vector<double> values, bool resample);

  void validate() const;
  double marginal_mean() const;
  double marginal_variance() const;
  std::string describe() const;
};

// Environment realized on the finite index range [first, end). Indices may
// be negative; access outside the range is an error.
class EnvironmentWindow {
 public:
  EnvironmentWindow() = default;
  EnvironmentWindow(std::int64_t first, std::vector<EnvState> values)
      : first_(first), values_(std::move(values)) {}

  std::int64_t first_index() const { return first_; }
  std::int64_t end_index() const { return first_ + static_cast<std::int64_t>(values_.size()); }
  std::size_t size() const { return values_.size(); }
  const EnvState& at(std::int64_t t) const;
  const std::vector<EnvState>& values() const { return values_; }

 private:
  std::int64_t first_ = 0;
  std::vector<EnvState> values_;
};

// Draws a window from the stationary law of the environment in one pass.
EnvironmentWindow generate_window(const EnvironmentSpec& spec, std::int64_t first, std::int64_t end,
                                  RngStream& rng);

// A single draw from the stationary marginal law of X_0.
EnvState sample_marginal(const EnvironmentSpec& spec, RngStream& rng);

}  // namespace mcre
