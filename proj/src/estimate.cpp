#include "mcre/estimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/stats.hpp"

namespace mcre {

std::string to_string(RateTemplate t) {
  switch (t) {
    case RateTemplate::geometric:
      return "geometric";
    case RateTemplate::bernstein:
      return "bernstein";
    case RateTemplate::stretched:
      return "stretched";
    case RateTemplate::polynomial:
      return "polynomial";
  }
  return "unknown";
}

RateTemplate parse_template(const std::string& name) {
  for (RateTemplate t : kAllTemplates) {
    if (to_string(t) == name) return t;
  }
  throw InputError(fmt::format("unknown rate template '{}'", name));
}

void DecayCurve::validate() const {
  const double upper = kind == CurveKind::mixing ? 0.25 : 1.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (i > 0 && !(p.index > points[i - 1].index)) throw InputError("curve indices must be strictly increasing");
    if (kind == CurveKind::moment) continue;
    if (!(p.estimate >= 0.0 && p.estimate <= upper + 1e-12)) {
      throw InputError(fmt::format("curve estimate {} at index {} outside [0, {}]", p.estimate, p.index, upper));
    }
  }
}

// ---------------------------------------------------------------- TV

namespace {

std::vector<double> tv_histogram_fractions(const std::vector<std::int64_t>& counts, double n) {
  std::vector<double> out(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / n;
  return out;
}

double half_l1(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

std::vector<double> multinomial_fractions(const std::vector<std::int64_t>& counts, std::int64_t n,
                                          std::mt19937_64& engine) {
  std::vector<double> out(counts.size(), 0.0);
  std::int64_t remaining = n;
  std::int64_t mass_left = n;
  for (std::size_t i = 0; i < counts.size() && remaining > 0; ++i) {
    if (counts[i] == 0) continue;
    const double p = std::min(1.0, static_cast<double>(counts[i]) / static_cast<double>(mass_left));
    const std::int64_t k = std::binomial_distribution<std::int64_t>(remaining, p)(engine);
    out[i] = static_cast<double>(k) / static_cast<double>(n);
    remaining -= k;
    mass_left -= counts[i];
  }
  return out;
}

}  // namespace

Estimate tv_estimate(const std::vector<State>& a, const std::vector<State>& b, const TvOptions& options) {
  if (a.empty() || b.empty()) throw InputError("tv_estimate needs two nonempty samples");
  if (options.bins_per_dim < 1) throw InputError("tv_estimate needs at least one bin");
  const auto dim = static_cast<int>(a.front().size());
  std::vector<int> coords;
  for (int c : options.coords) {
    if (c >= 0 && c < dim && coords.size() < 2) coords.push_back(c);
  }
  if (coords.empty()) throw InputError("tv_estimate: no valid projection coordinate");

  std::array<double, 2> lo{INFINITY, INFINITY};
  std::array<double, 2> hi{-INFINITY, -INFINITY};
  for (const auto* set : {&a, &b}) {
    for (const State& s : *set) {
      if (s.size() != dim) throw InputError("tv_estimate: samples have mixed dimensions");
      for (std::size_t k = 0; k < coords.size(); ++k) {
        lo[k] = std::min(lo[k], s(coords[k]));
        hi[k] = std::max(hi[k], s(coords[k]));
      }
    }
  }
  const int bins = options.bins_per_dim;
  std::size_t cells = 1;
  for (std::size_t k = 0; k < coords.size(); ++k) cells *= static_cast<std::size_t>(bins);
  auto cell_of = [&](const State& s) {
    std::size_t index = 0;
    for (std::size_t k = 0; k < coords.size(); ++k) {
      const double width = hi[k] - lo[k];
      int bin = width > 0.0 ? static_cast<int>((s(coords[k]) - lo[k]) / width * bins) : 0;
      bin = std::clamp(bin, 0, bins - 1);
      index = index * static_cast<std::size_t>(bins) + static_cast<std::size_t>(bin);
    }
    return index;
  };
  std::vector<std::int64_t> ca(cells, 0);
  std::vector<std::int64_t> cb(cells, 0);
  for (const State& s : a) ++ca[cell_of(s)];
  for (const State& s : b) ++cb[cell_of(s)];

  const auto na = static_cast<std::int64_t>(a.size());
  const auto nb = static_cast<std::int64_t>(b.size());
  Estimate out;
  out.estimate = half_l1(tv_histogram_fractions(ca, static_cast<double>(na)),
                         tv_histogram_fractions(cb, static_cast<double>(nb)));
  if (options.bootstrap >= 2) {
    RngStream rng(options.seed, 0);
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(options.bootstrap));
    for (int r = 0; r < options.bootstrap; ++r) {
      reps.push_back(half_l1(multinomial_fractions(ca, na, rng.engine()), multinomial_fractions(cb, nb, rng.engine())));
    }
    const auto ms = stats::mean_se(reps);
    out.std_error = ms.se * std::sqrt(static_cast<double>(reps.size()));
  }
  return out;
}

Estimate tv_estimate(const std::vector<double>& a, const std::vector<double>& b, const TvOptions& options) {
  std::vector<State> sa;
  std::vector<State> sb;
  sa.reserve(a.size());
  sb.reserve(b.size());
  for (double v : a) sa.push_back(scalar_state(v));
  for (double v : b) sb.push_back(scalar_state(v));
  return tv_estimate(sa, sb, options);
}

// ---------------------------------------------------------------- alpha mixing

std::string EventClass::describe() const {
  return fmt::format("half-lines at {} quantiles; past coords {}, future coords {}", quantiles, past_coords,
                     future_coords);
}

namespace {

// Counts over a D-dimensional table of bins with inclusive prefix sums, so
// the count of any axis-aligned box is an inclusion-exclusion of 2^D terms.
class BoxCounter {
 public:
  BoxCounter(int dims, int bins) : dims_(dims), bins_(bins) {
    std::size_t size = 1;
    for (int d = 0; d < dims; ++d) size *= static_cast<std::size_t>(bins);
    table_.assign(size, 0);
  }

  void add(const std::array<int, 4>& bin) { ++table_[offset(bin)]; }

  void finalize() {
    for (int d = 0; d < dims_; ++d) {
      std::size_t stride = 1;
      for (int e = dims_ - 1; e > d; --e) stride *= static_cast<std::size_t>(bins_);
      for (std::size_t i = 0; i < table_.size(); ++i) {
        if ((i / stride) % static_cast<std::size_t>(bins_) != 0) table_[i] += table_[i - stride];
      }
    }
  }

  // Count of points with lo[d] <= bin[d] <= hi[d] for every d.
  std::int64_t count(const std::array<int, 4>& lo, const std::array<int, 4>& hi) const {
    std::int64_t total = 0;
    for (int mask = 0; mask < (1 << dims_); ++mask) {
      std::array<int, 4> corner{};
      int sign = 1;
      bool empty = false;
      for (int d = 0; d < dims_; ++d) {
        if (mask >> d & 1) {
          corner[static_cast<std::size_t>(d)] = lo[static_cast<std::size_t>(d)] - 1;
          sign = -sign;
          if (corner[static_cast<std::size_t>(d)] < 0) empty = true;
        } else {
          corner[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)];
        }
      }
      if (!empty) total += sign * table_[offset(corner)];
    }
    return total;
  }

 private:
  std::size_t offset(const std::array<int, 4>& bin) const {
    std::size_t o = 0;
    for (int d = 0; d < dims_; ++d) o = o * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(bin[static_cast<std::size_t>(d)]);
    return o;
  }

  int dims_;
  int bins_;
  std::vector<std::int64_t> table_;
};

// All products of half-lines over `coords` bin axes, as inclusive bin ranges.
// Each axis is unconstrained, below the k-th quantile, or above it.
std::vector<std::vector<std::pair<int, int>>> half_line_events(int coords, int bins) {
  std::vector<std::pair<int, int>> axis{{0, bins - 1}};
  for (int k = 1; k < bins; ++k) {
    axis.emplace_back(0, k - 1);
    axis.emplace_back(k, bins - 1);
  }
  std::vector<std::vector<std::pair<int, int>>> events{{}};
  for (int c = 0; c < coords; ++c) {
    std::vector<std::vector<std::pair<int, int>>> next;
    for (const auto& e : events) {
      for (const auto& range : axis) {
        auto ext = e;
        ext.push_back(range);
        next.push_back(std::move(ext));
      }
    }
    events = std::move(next);
  }
  return events;
}

}  // namespace

MixingEstimate alpha_mixing_estimate(const std::vector<std::vector<double>>& ensemble, std::int64_t lag,
                                     const EventClass& events, std::optional<std::int64_t> j_opt) {
  if (ensemble.empty()) throw InputError("alpha_mixing_estimate needs a nonempty ensemble");
  if (lag < 1) throw InputError("alpha_mixing_estimate needs lag >= 1");
  if (events.past_coords < 1 || events.past_coords > 2 || events.future_coords < 1 || events.future_coords > 2) {
    throw InputError("event class uses one or two coordinates on each side");
  }
  if (events.quantiles < 1) throw InputError("event class needs at least one quantile");
  const auto length = static_cast<std::int64_t>(ensemble.front().size());
  for (const auto& path : ensemble) {
    if (static_cast<std::int64_t>(path.size()) != length) throw InputError("ensemble paths differ in length");
  }
  const std::int64_t j = j_opt.value_or(events.past_coords - 1);
  if (j - (events.past_coords - 1) < 0) throw InputError("anchor index leaves no room for the past coordinates");
  if (j + lag + events.future_coords - 1 >= length) {
    throw InputError(fmt::format("lag {} exceeds trajectory length {}", lag, length));
  }

  std::vector<std::int64_t> times;
  for (int c = 0; c < events.past_coords; ++c) times.push_back(j - c);
  for (int c = 0; c < events.future_coords; ++c) times.push_back(j + lag + c);
  const int dims = static_cast<int>(times.size());
  const int bins = events.quantiles + 1;
  const auto M = static_cast<std::int64_t>(ensemble.size());

  // Empirical quantiles per coordinate; bin(z) = #{quantiles < z}.
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(dims));
  for (int d = 0; d < dims; ++d) {
    std::vector<double> column;
    column.reserve(ensemble.size());
    for (const auto& path : ensemble) column.push_back(path[static_cast<std::size_t>(times[static_cast<std::size_t>(d)])]);
    std::sort(column.begin(), column.end());
    for (int k = 1; k <= events.quantiles; ++k) {
      const auto pos = static_cast<std::size_t>(
          std::max<std::int64_t>(0, (k * M + bins - 1) / bins - 1));
      cuts[static_cast<std::size_t>(d)].push_back(column[pos]);
    }
  }
  // Two folds (even and odd paths). Each fold picks the maximizing event
  // pair and the other fold measures it, so the in-sample maximum over many
  // events does not bias the estimate upward.
  std::array<BoxCounter, 2> folds{BoxCounter(dims, bins), BoxCounter(dims, bins)};
  std::array<double, 2> fold_size{0.0, 0.0};
  for (std::size_t r = 0; r < ensemble.size(); ++r) {
    std::array<int, 4> bin{};
    for (int d = 0; d < dims; ++d) {
      const auto& c = cuts[static_cast<std::size_t>(d)];
      const double z = ensemble[r][static_cast<std::size_t>(times[static_cast<std::size_t>(d)])];
      bin[static_cast<std::size_t>(d)] = static_cast<int>(std::lower_bound(c.begin(), c.end(), z) - c.begin());
    }
    folds[r % 2].add(bin);
    fold_size[r % 2] += 1.0;
  }
  if (fold_size[1] < 1.0) throw InputError("alpha_mixing_estimate needs at least two paths");
  for (auto& f : folds) f.finalize();

  const auto past = half_line_events(events.past_coords, bins);
  const auto future = half_line_events(events.future_coords, bins);
  using Event = std::vector<std::pair<int, int>>;
  const auto offset = static_cast<std::size_t>(events.past_coords);

  auto prob = [&](int fold, const Event* a, const Event* b) {
    std::array<int, 4> lo{};
    std::array<int, 4> hi{};
    hi.fill(bins - 1);
    if (a) {
      for (std::size_t d = 0; d < a->size(); ++d) std::tie(lo[d], hi[d]) = (*a)[d];
    }
    if (b) {
      for (std::size_t d = 0; d < b->size(); ++d) std::tie(lo[d + offset], hi[d + offset]) = (*b)[d];
    }
    return static_cast<double>(folds[static_cast<std::size_t>(fold)].count(lo, hi)) / fold_size[static_cast<std::size_t>(fold)];
  };

  double alpha_sum = 0.0;
  double var_sum = 0.0;
  for (int select = 0; select < 2; ++select) {
    const int measure = 1 - select;
    std::vector<double> p_future;
    p_future.reserve(future.size());
    for (const auto& b : future) p_future.push_back(prob(select, nullptr, &b));
    double best = -1.0;
    const Event* best_a = nullptr;
    const Event* best_b = nullptr;
    for (const auto& a : past) {
      const double pa = prob(select, &a, nullptr);
      if (pa <= 0.0 || pa >= 1.0) continue;
      for (std::size_t k = 0; k < future.size(); ++k) {
        const double pb = p_future[k];
        if (pb <= 0.0 || pb >= 1.0) continue;
        const double dev = std::abs(prob(select, &a, &future[k]) - pa * pb);
        if (dev > best) {
          best = dev;
          best_a = &a;
          best_b = &future[k];
        }
      }
    }
    const double m = fold_size[static_cast<std::size_t>(measure)];
    if (!best_a) {
      var_sum += 1.0 / (16.0 * m);
      continue;
    }
    const double pa = prob(measure, best_a, nullptr);
    const double pb = prob(measure, nullptr, best_b);
    alpha_sum += std::abs(prob(measure, best_a, best_b) - pa * pb);
    var_sum += std::max(pa * (1.0 - pa) * pb * (1.0 - pb), 1.0 / (16.0 * m * m)) / m;
  }

  MixingEstimate out;
  out.lag = lag;
  out.event_class = events.describe();
  out.alpha_hat = std::min(0.25, alpha_sum / 2.0);
  out.std_error = std::sqrt(var_sum) / 2.0;
  return out;
}

// ---------------------------------------------------------------- moments

DecayCurve theta_moment(const std::vector<std::vector<State>>& ensemble, const Metric& metric, const State& y_tilde,
                        double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
  if (ensemble.empty()) throw InputError("theta_moment needs a nonempty ensemble");
  const std::size_t length = ensemble.front().size();
  for (const auto& path : ensemble) {
    if (path.size() != length) throw InputError("ensemble paths differ in length");
  }
  DecayCurve curve;
  curve.kind = CurveKind::moment;
  std::vector<double> values(ensemble.size());
  for (std::size_t n = 0; n < length; ++n) {
    for (std::size_t r = 0; r < ensemble.size(); ++r) {
      values[r] = std::pow(metric.distance(ensemble[r][n], y_tilde), theta);
    }
    const auto ms = stats::mean_se(values);
    curve.points.push_back({static_cast<double>(n), ms.mean, ms.se});
  }
  return curve;
}

Estimate theta_moment_bound(const ChainSpec& chain, const EnvironmentSpec& env, double theta, std::int64_t samples,
                            RngStream& rng) {
  if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
  if (samples < 2) throw InputError("theta_moment_bound needs at least two samples");
  std::vector<double> values(static_cast<std::size_t>(samples));
  for (auto& v : values) {
    const EnvState x = sample_marginal(env, rng);
    const State z = apply_update(chain, chain.reference_point, x, chain.noise.sample(rng));
    v = std::pow(chain.distance(z, chain.reference_point), theta);
  }
  const auto ms = stats::mean_se(values);
  const double denom = 1.0 - std::pow(chain.contraction.rho, theta);
  return {(std::pow(chain.contraction.R, theta) + ms.mean) / denom, ms.se / denom};
}

// ---------------------------------------------------------------- rate fitting

namespace {

constexpr double kMinIndex = 8.0;

double bernstein_shape(double n) { return n / (std::log2(n) * std::log2(std::log2(n))); }
double polynomial_shape(double n) { return std::log(std::log2(n)) - std::log(n); }

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double rss = 0.0;
};

LinearFit fit_line(const std::vector<double>& s, const std::vector<double>& y) {
  std::vector<double> X;
  X.reserve(2 * s.size());
  for (double v : s) {
    X.push_back(1.0);
    X.push_back(v);
  }
  LinearFit f;
  const auto beta = stats::least_squares(X, 2, y, &f.rss);
  f.intercept = beta[0];
  f.slope = beta[1];
  return f;
}

}  // namespace

double TemplateFit::evaluate(double n) const {
  switch (shape) {
    case RateTemplate::geometric:
      return std::exp(intercept + n * std::log(rate));
    case RateTemplate::bernstein:
      return std::exp(intercept - rate * bernstein_shape(n));
    case RateTemplate::stretched:
      return std::exp(intercept - rate * std::pow(n, gamma));
    case RateTemplate::polynomial:
      return std::exp(intercept + gamma * polynomial_shape(n));
  }
  return NAN;
}

TemplateFit rate_fit(const DecayCurve& curve, RateTemplate shape) {
  const bool needs_large_index = shape == RateTemplate::bernstein || shape == RateTemplate::polynomial;
  std::vector<double> n;
  std::vector<double> y;
  for (const auto& p : curve.points) {
    if (!(p.estimate > 0.0) || !std::isfinite(p.estimate)) continue;
    if (needs_large_index && p.index < kMinIndex) continue;
    n.push_back(p.index);
    y.push_back(std::log(p.estimate));
  }
  if (n.size() < 5) {
    throw DegenerateFit(fmt::format("{} fit needs at least 5 usable points, found {}", to_string(shape), n.size()));
  }

  TemplateFit fit;
  fit.shape = shape;
  fit.points_used = n.size();
  double rss = 0.0;
  int params = 2;
  std::vector<double> s(n.size());
  switch (shape) {
    case RateTemplate::geometric: {
      const auto f = fit_line(n, y);
      fit.intercept = f.intercept;
      fit.rate = std::exp(f.slope);
      rss = f.rss;
      break;
    }
    case RateTemplate::bernstein: {
      for (std::size_t i = 0; i < n.size(); ++i) s[i] = -bernstein_shape(n[i]);
      const auto f = fit_line(s, y);
      fit.intercept = f.intercept;
      fit.rate = f.slope;
      rss = f.rss;
      break;
    }
    case RateTemplate::polynomial: {
      for (std::size_t i = 0; i < n.size(); ++i) s[i] = polynomial_shape(n[i]);
      const auto f = fit_line(s, y);
      fit.intercept = f.intercept;
      fit.gamma = f.slope;
      fit.rate = f.slope;
      rss = f.rss;
      break;
    }
    case RateTemplate::stretched: {
      params = 3;
      auto profile = [&](double gamma) {
        for (std::size_t i = 0; i < n.size(); ++i) s[i] = -std::pow(n[i], gamma);
        return fit_line(s, y);
      };
      // Coarse scan, then golden-section refinement inside the best bracket.
      constexpr double lo = 0.01;
      constexpr double hi = 0.99;
      constexpr int steps = 98;
      int best = 0;
      double best_rss = INFINITY;
      for (int k = 0; k <= steps; ++k) {
        const double r = profile(lo + (hi - lo) * k / steps).rss;
        if (r < best_rss) {
          best_rss = r;
          best = k;
        }
      }
      const double a = lo + (hi - lo) * std::max(0, best - 1) / steps;
      const double b = lo + (hi - lo) * std::min(steps, best + 1) / steps;
      const double gamma = stats::golden_section_min([&](double g) { return profile(g).rss; }, a, b, 1e-12);
      const auto f = profile(gamma);
      fit.gamma = gamma;
      fit.intercept = f.intercept;
      fit.rate = f.slope;
      rss = f.rss;
      break;
    }
  }
  const double m = static_cast<double>(n.size());
  fit.residual_norm = std::sqrt(rss);
  fit.bic = m * std::log(std::max(rss / m, 1e-300)) + params * std::log(m);
  return fit;
}

std::vector<TemplateFit> rank_templates(const DecayCurve& curve) {
  return rank_templates(curve, std::vector<RateTemplate>(std::begin(kAllTemplates), std::end(kAllTemplates)));
}

std::vector<TemplateFit> rank_templates(const DecayCurve& curve, const std::vector<RateTemplate>& templates) {
  if (templates.empty()) throw InputError("rank_templates needs at least one template");
  DecayCurve usable = curve;
  usable.points.clear();
  for (const auto& p : curve.points) {
    if (p.index >= kMinIndex) usable.points.push_back(p);
  }
  std::vector<TemplateFit> fits;
  for (RateTemplate t : templates) fits.push_back(rate_fit(usable, t));
  std::stable_sort(fits.begin(), fits.end(), [](const TemplateFit& a, const TemplateFit& b) { return a.bic < b.bic; });
  for (std::size_t i = 0; i < fits.size(); ++i) fits[i].rank = static_cast<int>(i) + 1;
  return fits;
}

}  // namespace mcre
