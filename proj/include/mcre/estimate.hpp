#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcre/chain.hpp"
#include "mcre/environment.hpp"
#include "mcre/linalg.hpp"

namespace mcre {

enum class RateTemplate { geometric, bernstein, stretched, polynomial };

std::string to_string(RateTemplate t);
RateTemplate parse_template(const std::string& name);
inline constexpr RateTemplate kAllTemplates[] = {RateTemplate::geometric, RateTemplate::bernstein,
                                                 RateTemplate::stretched, RateTemplate::polynomial};

// Fitted on ln(estimate) with log base 2 inside the shapes:
//   geometric   c0 + n ln(rate)                        (rate = lambda)
//   bernstein   c0 - rate n / (log2 n log2 log2 n)
//   stretched   c0 - rate n^gamma,  gamma in [0.01, 0.99]
//   polynomial  c0 + gamma (ln log2 n - ln n)          (rate = gamma)
struct TemplateFit {
  RateTemplate shape = RateTemplate::geometric;
  double rate = 0.0;
  double gamma = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;  // sqrt of the residual sum of squares
  double bic = 0.0;
  int rank = 0;                // 1 = best in a comparison, 0 when not ranked
  std::size_t points_used = 0;

  // Template value at index n (on the estimate scale).
  double evaluate(double n) const;
};

struct CurvePoint {
  double index = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

enum class CurveKind { tv, mixing, moment, failure };

struct DecayCurve {
  CurveKind kind = CurveKind::tv;
  std::vector<CurvePoint> points;
  std::optional<TemplateFit> fit;

  // Indices strictly increasing; TV and failure estimates in [0, 1],
  // mixing estimates in [0, 1/4].
  void validate() const;
};

struct Estimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

struct TvOptions {
  int bins_per_dim = 64;
  std::vector<int> coords = {0, 1};  // projected coordinates (at most two are used)
  int bootstrap = 200;
  std::uint64_t seed = 0;
};

// Half-L1 distance between the two histograms on a common grid spanning
// the pooled sample range; the standard error comes from multinomial
// resampling of the bin counts.
Estimate tv_estimate(const std::vector<State>& a, const std::vector<State>& b, const TvOptions& options = {});
Estimate tv_estimate(const std::vector<double>& a, const std::vector<double>& b, const TvOptions& options = {});

// Half-line events at the empirical quantiles of up to two coordinates on
// each side: past (Z_j, Z_{j-1}) and future (Z_{j+lag}, Z_{j+lag+1}).
struct EventClass {
  int past_coords = 2;
  int future_coords = 2;
  int quantiles = 9;  // deciles
  std::string describe() const;
};

struct MixingEstimate {
  std::int64_t lag = 0;
  double alpha_hat = 0.0;
  double std_error = 0.0;  // null standard error of the held-out deviation
  std::string event_class;
};

// `ensemble` holds independent scalar paths of equal length; j is the
// anchor time (defaults to the earliest admissible index). The event pair
// is chosen on one half of the ensemble and measured on the other, both ways,
// and the two held-out deviations are averaged.
MixingEstimate alpha_mixing_estimate(const std::vector<std::vector<double>>& ensemble, std::int64_t lag,
                                     const EventClass& events = {}, std::optional<std::int64_t> j = std::nullopt);

// Mean of d^theta(y_tilde, Y_n) across trajectories for every n.
DecayCurve theta_moment(const std::vector<std::vector<State>>& ensemble, const Metric& metric,
                        const State& y_tilde, double theta);

// s / (1 - rho^theta) with s = R^theta + E d^theta(f(y_tilde, X, eps), y_tilde),
// the expectation estimated from `samples` draws.
Estimate theta_moment_bound(const ChainSpec& chain, const EnvironmentSpec& env, double theta,
                            std::int64_t samples, RngStream& rng);

TemplateFit rate_fit(const DecayCurve& curve, RateTemplate shape);

// Fits the templates on the points with index >= 8 and ranks them by BIC.
std::vector<TemplateFit> rank_templates(const DecayCurve& curve);
std::vector<TemplateFit> rank_templates(const DecayCurve& curve, const std::vector<RateTemplate>& templates);

}  // namespace mcre
