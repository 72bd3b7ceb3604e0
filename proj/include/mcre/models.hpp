#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcre/chain.hpp"
#include "mcre/environment.hpp"
#include "mcre/minorization.hpp"

namespace mcre {

// Y_{n+1} = mu(Y_n, X_n) + sigma(X_n) eps_{n+1} + ell(X_n)
struct AdditiveSpec {
  using DriftFn = std::function<State(const State& y, const EnvState& x)>;
  using SigmaFn = std::function<Matrix(const EnvState& x)>;
  using ShiftFn = std::function<State(const EnvState& x)>;

  std::string name = "additive";
  int dim = 1;
  DriftFn mu;
  SigmaFn sigma;  // defaults to the identity
  ShiftFn ell;    // defaults to zero
  NoiseLaw noise = NoiseLaw::gaussian(1);
  Metric metric = Metric::euclidean(1);
  ContractionParams contraction;
  double theta = 1.0;
  std::optional<State> reference_point;
  // Radius of the nu ball in metric units.
  double nu_radius = 1.0;
  // Bound on |mu(y1,x) - mu(y2,x)| / 2 over admissible pairs. Defaults to
  // R_tilde / 2 with R_tilde = (1 + rho) R / (1 - rho).
  std::optional<double> half_gap;
};

class AdditiveModel {
 public:
  const std::string& name() const { return spec_->name; }
  int dim() const { return spec_->dim; }
  std::uint64_t id() const { return id_; }
  const AdditiveSpec& spec() const { return *spec_; }
  const ChainSpec& chain() const { return chain_; }
  const MinorizationSpec& minorization() const { return minor_; }
  const NoiseLaw& noise() const { return spec_->noise; }
  const Metric& metric() const { return spec_->metric; }

  State drift_image(const State& y, const EnvState& x) const;
  Matrix sigma(const EnvState& x) const;
  // f(y, x, e)
  State apply(const State& y, const EnvState& x, const State& e) const;
  // The e with f(y, x, e) = z.
  State noise_preimage(const State& y, const EnvState& x, const State& z) const;
  // Density of f(y, x, eps) at z.
  double kernel_density(const State& y, const EnvState& x, const State& z) const;

  // Replaces the minorization (for probes such as inflated eta).
  AdditiveModel with_minorization(MinorizationSpec m) const;

 private:
  friend AdditiveModel make_additive(AdditiveSpec spec);
  std::shared_ptr<const AdditiveSpec> spec_;
  ChainSpec chain_;
  MinorizationSpec minor_;
  std::uint64_t id_ = 0;
};

AdditiveModel make_additive(AdditiveSpec spec);

// Stochastic gradient Langevin dynamics for the regularized VaR/CVaR
// objective a y^2 + y + E(X - y)_+ / (1 - alpha):
//   Y_{n+1} = Y_n - 2 a h Y_n - h H(Y_n, X_n) + sqrt(2h) eps_{n+1},
//   H(y, x) = 1 - 1{x >= y} / (1 - alpha).
struct SgldParams {
  double a = 1.0;
  double h = 0.1;
  double alpha_level = 0.5;
};

struct SgldVarModel {
  SgldParams params;
  double J = 1.0;
  double rho = 0.0;
  double R = 0.0;
  AdditiveModel model;
};

SgldVarModel make_sgld(const SgldParams& params);
double sgld_gradient(const SgldParams& params, double y, double loss);

struct ThresholdParams {
  std::vector<double> thresholds;  // r_1 < ... < r_{m-1}
  std::vector<double> slopes;      // a_1..a_m
  std::vector<double> intercepts;  // b_1..b_m
  double sigma = 1.0;
  double ell = 0.0;
  NoiseLaw noise = NoiseLaw::gaussian(1);
};

struct ThresholdARModel {
  ThresholdParams params;
  double r = 0.0;
  double a = 0.0;
  double b = 0.0;
  AdditiveModel model;
};

// Regime i covers (r_{i-1}, r_i] with r_0 = -inf and r_m = +inf.
ThresholdARModel make_threshold(const ThresholdParams& params);

struct StochVolParams {
  std::vector<double> b_coeffs;  // linear-process coefficients b_0..b_L
  double innovation_sd = 1.0;    // sd of zeta
  double corr = 0.0;
  double drift_slope = 0.5;      // mu(y) = slope y + amplitude sin(y)
  double drift_amplitude = 0.5;
  NoiseLaw noise = NoiseLaw::gaussian(1);
};

struct StochVolModel {
  StochVolParams params;
  EnvironmentSpec environment;
  AdditiveModel model;
};

// X_n = (zeta_{n+1}, Z_n) with Z the truncated linear process; volatility e^{Z_n}.
StochVolModel make_stochvol(const StochVolParams& params);

// |v| = max_i |(S v)_i| with ||S A S^-1||_inf <= theta.
struct SubordinateNorm {
  ComplexMatrix S;
  double theta = 0.0;
  double spectral_radius = 0.0;
  double value = 0.0;  // ||S A S^-1|| in the max-row-sum norm
  double delta = 1.0;  // diagonal scaling ratio
  Metric metric() const { return Metric::scaled_max(S); }
};

SubordinateNorm subordinate_norm(const Matrix& A);
double spectral_radius(const Matrix& A);

// mu(y) = A y + r(y), r(y) = b + ((B - A) y + c - b) 1{y in box}; inside the
// box the drift is B y + c, outside it is A y + b.
struct MultivarParams {
  Matrix A;
  Matrix B;
  State b;
  State c;
  double box_half_width = 1.0;
  NoiseLaw noise = NoiseLaw::gaussian(2);
};

struct MultivarARModel {
  MultivarParams params;
  SubordinateNorm norm;
  double sup_perturbation = 0.0;
  AdditiveModel model;
};

MultivarARModel make_multivar(const MultivarParams& params);

struct RiskEstimate {
  double var_estimate = 0.0;
  double cvar_estimate = 0.0;
  // VaR of the regularized minus VaR of the unregularized empirical objective.
  double regularization_bias = 0.0;
  bool degenerate = false;
};

// Minimizes a y^2 + b(y) over a 10^4-point grid spanning the chain samples,
// where b(y) = y + mean((X - y)_+) / (1 - alpha) is built from the losses.
RiskEstimate extract_var_cvar(const std::vector<double>& chain_samples, const std::vector<double>& losses,
                              double a, double alpha_level, int grid_points = 10000);

struct RiskCheckpoint {
  std::int64_t step = 0;
  double var_estimate = 0.0;
  double cvar_estimate = 0.0;
};

// Runs the SGLD recursion from y0 and extracts VaR/CVaR from the chain
// samples Y_1..Y_step at each checkpoint. The losses are read as the
// environment stream X_n = losses[n mod L], or drawn i.i.d. from the sample
// when `resample` is set.
std::vector<RiskCheckpoint> sgld_risk_path(const SgldParams& params, const std::vector<double>& losses,
                                           const std::vector<std::int64_t>& checkpoints, double y0,
                                           RngStream& rng, bool resample = false);

// Reads a one-column CSV with header `loss`.
std::vector<double> load_loss_csv(const std::string& path);

struct ZooEntry {
  std::string key;
  AdditiveModel model;
  EnvironmentSpec environment;
};

// Y_{n+1} = slope Y_n + eps_{n+1} with Gaussian noise and the declared
// contraction constants. A slope above one makes the declaration false,
// which the contractivity check is expected to catch.
AdditiveModel linear_additive(double slope, const ContractionParams& declared);

// The five reference models: additive Gaussian AR, SGLD, threshold AR,
// stochastic volatility, multivariate AR.
std::vector<ZooEntry> model_zoo();
ZooEntry zoo_model(const std::string& key);

}  // namespace mcre
