#include "mcre/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

namespace {

constexpr std::int64_t kFarSetDraws = 250'000;

// Everything couple_step needs about one state of the pair.
struct Side {
  State drift;
  State anchor;
};

struct PairFrame {
  const AdditiveModel& model;
  const MinorizationSpec& minor;
  const EnvState& x;
  const State& q;
  const State& qp;
  Matrix sigma;
  double abs_det = 1.0;
  Side a;
  Side b;

  PairFrame(const AdditiveModel& m, const EnvState& x_, const State& q_, const State& qp_)
      : model(m), minor(m.minorization()), x(x_), q(q_), qp(qp_), sigma(m.sigma(x_)) {
    abs_det = std::abs(sigma.rows() == 1 ? sigma(0, 0) : sigma.determinant());
    a = {m.drift_image(q, x), minor.anchor(q, x)};
    b = {m.drift_image(qp, x), minor.anchor(qp, x)};
  }

  State image(const Side& s, const State& e) const { return s.drift + sigma * e; }

  bool far(const State& e) const {
    return minor.metric.distance(image(a, e), a.anchor) > minor.K &&
           minor.metric.distance(image(b, e), b.anchor) > minor.K;
  }

  // Density of f(y, x, eps) at the image of e.
  double kernel_density(const State& e) const { return model.noise().density(e) / abs_det; }

  double nu_density(const State& z) const { return minor.nu_density(x, q, qp, z); }
};

void require_pair(const AdditiveModel& model, const State& q, const State& qp) {
  const double d = model.metric().distance(q, qp);
  const double radius = model.minorization().pair_radius;
  if (!(d > 0.0)) throw InvalidPair("decompose needs d(q, q') > 0");
  if (d > radius * (1.0 + 1e-12)) {
    throw InvalidPair(fmt::format("pair distance {} exceeds pair radius {}", d, radius));
  }
}

// Probability of the far set for scalar noise: the complement of the union
// of the two "near" intervals |s e + delta| <= K.
double far_probability_1d(const PairFrame& f) {
  const double s = f.sigma(0, 0);
  const double K = f.minor.K;
  const NoiseLaw& noise = f.model.noise();
  auto interval = [&](const Side& side) {
    const double delta = side.drift(0) - side.anchor(0);
    double lo = (-K - delta) / s;
    double hi = (K - delta) / s;
    if (lo > hi) std::swap(lo, hi);
    return std::pair{lo, hi};
  };
  auto mass = [&](double lo, double hi) { return hi > lo ? noise.cdf_1d(hi) - noise.cdf_1d(lo) : 0.0; };
  const auto [l1, h1] = interval(f.a);
  const auto [l2, h2] = interval(f.b);
  const double near = mass(l1, h1) + mass(l2, h2) - mass(std::max(l1, l2), std::min(h1, h2));
  return std::clamp(1.0 - near, 0.0, 1.0);
}

struct CacheEntry {
  double c_bar;
  double se;
};

std::mutex cache_mutex;
std::map<std::vector<std::int64_t>, CacheEntry> far_cache;

std::int64_t round_key(double v) { return std::llround(v * 1e6); }

CacheEntry far_probability_mc(const PairFrame& f) {
  std::vector<std::int64_t> key{static_cast<std::int64_t>(f.model.id()), round_key(f.x.value),
                                round_key(f.x.next_innovation)};
  for (Eigen::Index i = 0; i < f.q.size(); ++i) key.push_back(round_key(f.q(i)));
  for (Eigen::Index i = 0; i < f.qp.size(); ++i) key.push_back(round_key(f.qp(i)));
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    if (auto it = far_cache.find(key); it != far_cache.end()) return it->second;
  }
  // The stream depends only on the key, so a cache miss recomputes the same value.
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
  for (auto k : key) seed = (seed ^ static_cast<std::uint64_t>(k)) * 0x100000001b3ULL;
  RngStream rng(seed, 0);
  std::int64_t hits = 0;
  for (std::int64_t i = 0; i < kFarSetDraws; ++i) hits += f.far(f.model.noise().sample(rng)) ? 1 : 0;
  const double p = static_cast<double>(hits) / kFarSetDraws;
  const CacheEntry entry{p, std::sqrt(std::max(p * (1.0 - p), 0.25 / kFarSetDraws) / kFarSetDraws)};
  std::lock_guard<std::mutex> lock(cache_mutex);
  far_cache.emplace(std::move(key), entry);
  return entry;
}

// min over a grid of p(z) 1{e(z) not in N} - eta nu(z) for both states.
double residual_spot_check(const PairFrame& f, double eta) {
  const int dim = static_cast<int>(f.q.size());
  if (dim > 2) return 0.0;
  const int points = 41;
  const double reach = f.minor.metric.outer_factor() * f.minor.K;
  const State lo = f.a.drift.cwiseMin(f.b.drift).array() - reach;
  const State hi = f.a.drift.cwiseMax(f.b.drift).array() + reach;
  const Matrix sigma_inv = f.sigma.inverse();
  double worst = INFINITY;
  const int total = dim == 1 ? points : points * points;
  for (int k = 0; k < total; ++k) {
    State z(dim);
    int rest = k;
    for (int i = 0; i < dim; ++i) {
      z(i) = lo(i) + (hi(i) - lo(i)) * (rest % points) / (points - 1);
      rest /= points;
    }
    const double nu = f.nu_density(z);
    for (const Side* side : {&f.a, &f.b}) {
      const State e = sigma_inv * (z - side->drift);
      const double p = f.far(e) ? 0.0 : f.kernel_density(e);
      worst = std::min(worst, p - eta * nu);
    }
  }
  return worst;
}

// Draws from (p 1{not far} - eta nu) / mass, or from (p - eta nu) / mass when
// `allow_far`, by rejection from the noise law. Returns the noise value.
State sample_residual(const PairFrame& f, const Side& side, double eta, bool allow_far, RngStream& rng) {
  const NoiseLaw& noise = f.model.noise();
  for (std::int64_t i = 0; i < kRejectionCap; ++i) {
    State e = noise.sample(rng);
    if (!allow_far && f.far(e)) continue;
    const double p = f.kernel_density(e);
    const double nu = f.nu_density(f.image(side, e));
    if (p <= 0.0 || rng.uniform() * p >= eta * nu) return e;
  }
  throw DegenerateDecomposition(
      fmt::format("{}: residual sampler exceeded {} proposals (eta={})", f.model.name(), kRejectionCap, eta));
}

CouplingOutcome synchronous(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp,
                            RngStream& rng, CouplingCase c) {
  const State e = model.noise().sample(rng);
  CouplingOutcome out;
  out.case_taken = c;
  out.next_q = model.apply(q, x, e);
  out.next_qp = model.apply(qp, x, e);
  return out;
}

}  // namespace

std::string to_string(CouplingCase c) {
  switch (c) {
    case CouplingCase::identical_start:
      return "identical-start";
    case CouplingCase::far_start_synchronous:
      return "far-start-synchronous";
    case CouplingCase::nu_coupled:
      return "nu-coupled";
    case CouplingCase::far_excursion_synchronous:
      return "far-excursion-synchronous";
    case CouplingCase::residual:
      return "residual";
  }
  return "unknown";
}

CouplingDecomposition decompose(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp) {
  require_pair(model, q, qp);
  if (!model.noise().has_density()) throw SpecError(fmt::format("{}: noise has no density", model.name()));
  const PairFrame frame(model, x, q, qp);

  CouplingDecomposition out;
  out.eta_x = model.minorization().eta(x);
  if (model.dim() == 1) {
    out.c_bar = far_probability_1d(frame);
    out.exact = true;
  } else {
    const CacheEntry mc = far_probability_mc(frame);
    out.c_bar = mc.c_bar;
    out.c_bar_se = mc.se;
  }
  if (out.eta_x + out.c_bar > 1.0) {
    throw InconsistentSpec(fmt::format("{}: eta(x)={} plus c_bar={} exceeds 1", model.name(), out.eta_x, out.c_bar));
  }
  out.far_set_indicator = [model, x, q, qp](const State& e) { return PairFrame(model, x, q, qp).far(e); };
  out.min_residual_density = residual_spot_check(frame, out.eta_x);
  return out;
}

namespace {

// The coupling construction for 0 < d(q, q') <= pair radius. It is also used
// for pairs that agree only numerically (synchronous contraction rounds the
// distance to zero long before it is mathematically zero).
CouplingOutcome attempt(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp,
                        RngStream& rng) {
  const MinorizationSpec& minor = model.minorization();
  const PairFrame f(model, x, q, qp);
  const double eta = minor.eta(x);
  CouplingOutcome out;
  if (rng.uniform() < eta) {
    const State z = minor.nu_sampler(x, q, qp, rng);
    out.case_taken = CouplingCase::nu_coupled;
    out.next_q = z;
    out.next_qp = z;
    out.coupled = true;
    return out;
  }

  // Given no nu draw, q follows (P(q) - eta nu) / (1 - eta). Its noise lands
  // in the far set with probability c_bar / (1 - eta), and then q' reuses it;
  // otherwise q' draws independently from (P(q') 1{not far} - eta nu) / (1 - eta - c_bar).
  const State e = sample_residual(f, f.a, eta, true, rng);
  out.next_q = f.image(f.a, e);
  if (f.far(e)) {
    out.case_taken = CouplingCase::far_excursion_synchronous;
    out.next_qp = f.image(f.b, e);
  } else {
    out.case_taken = CouplingCase::residual;
    out.next_qp = f.image(f.b, sample_residual(f, f.b, eta, false, rng));
  }
  out.coupled = false;
  return out;
}

}  // namespace

CouplingOutcome couple_step(const AdditiveModel& model, const EnvState& x, const State& q, const State& qp,
                            RngStream& rng) {
  if (q == qp) {
    CouplingOutcome out = synchronous(model, x, q, qp, rng, CouplingCase::identical_start);
    out.coupled = true;
    return out;
  }
  const double d = model.metric().distance(q, qp);
  if (d > model.minorization().pair_radius * (1.0 + 1e-12) || !model.noise().has_density()) {
    return synchronous(model, x, q, qp, rng, CouplingCase::far_start_synchronous);
  }
  return attempt(model, x, q, qp, rng);
}

double analytic_bound(const CouplingConstants& c, const std::vector<double>& eta_path, double d0, std::int64_t n) {
  if (n < 0) throw InputError("analytic_bound needs n >= 0");
  double bound = d0 >= c.start_radius(n) ? 1.0 : 0.0;
  double product = 1.0;
  const std::int64_t half = n / 2;
  for (std::int64_t k = 1; k <= c.k_star(n); ++k) {
    const std::int64_t t = half + k * c.N - 1;
    if (t >= static_cast<std::int64_t>(eta_path.size()) || !std::isfinite(eta_path[static_cast<std::size_t>(t)])) {
      throw InputError(fmt::format("eta path has no value at attempt index {}", t));
    }
    product *= 1.0 - eta_path[static_cast<std::size_t>(t)];
  }
  bound += product;
  return std::clamp(bound, 0.0, 1.0);
}

CouplingRun run_coupling(const AdditiveModel& model, const EnvironmentSpec& env, const State& y, const State& yp,
                         std::int64_t n, RngStream& rng, Direction direction) {
  if (n < 2) throw InputError("run_coupling needs n >= 2");
  const MinorizationSpec& minor = model.minorization();
  CouplingRun run;
  run.schedule = derive_constants(model.chain().contraction, minor.K);
  run.n = n;
  run.first_index = direction == Direction::forward ? 0 : -n;
  run.env_path = generate_window(env, run.first_index, run.first_index + n, rng);

  const CouplingConstants& c = run.schedule;
  const std::int64_t half = n / 2;
  const std::int64_t attempts = c.k_star(n);
  std::vector<double> eta_path(static_cast<std::size_t>(n), NAN);
  for (std::int64_t k = 1; k <= attempts; ++k) {
    const std::int64_t t = half + k * c.N - 1;
    eta_path[static_cast<std::size_t>(t)] = minor.eta(run.env_path.at(run.first_index + t));
  }

  // `coupled` tracks the coupling event itself. Synchronous contraction can
  // make the two states equal in floating point without any coupling having
  // happened; such pairs are still treated as distinct.
  const Metric& metric = model.metric();
  State Y = y;
  State Yp = yp;
  bool coupled = Y == Yp;
  run.distances.reserve(static_cast<std::size_t>(n) + 1);
  run.distances.push_back(metric.distance(Y, Yp));
  if (coupled) run.meeting_time = 0;
  std::int64_t next_attempt = attempts >= 1 ? half + c.N - 1 : -1;
  const std::int64_t last_attempt = half + attempts * c.N - 1;

  for (std::int64_t t = 0; t < n; ++t) {
    const EnvState& x = run.env_path.at(run.first_index + t);
    if (t == next_attempt && !coupled) {
      AttemptRecord rec;
      rec.time = t;
      rec.distance_before = metric.distance(Y, Yp);
      rec.eta = eta_path[static_cast<std::size_t>(t)];
      const bool near = rec.distance_before <= minor.pair_radius * (1.0 + 1e-12) && model.noise().has_density();
      const CouplingOutcome out = near ? attempt(model, x, Y, Yp, rng) : couple_step(model, x, Y, Yp, rng);
      Y = out.next_q;
      Yp = out.next_qp;
      rec.distance_after = metric.distance(Y, Yp);
      rec.case_taken = out.case_taken;
      rec.coupled = out.coupled;
      run.per_attempt.push_back(rec);
      coupled = out.coupled;
    } else {
      const State e = model.noise().sample(rng);
      Y = model.apply(Y, x, e);
      Yp = coupled ? Y : model.apply(Yp, x, e);
    }
    if (t == next_attempt) next_attempt = t + c.N <= last_attempt ? t + c.N : -1;
    run.distances.push_back(metric.distance(Y, Yp));
    if (coupled && !run.meeting_time) run.meeting_time = t + 1;
  }
  run.final_y = Y;
  run.final_yp = Yp;
  run.analytic_bound = analytic_bound(c, eta_path, run.distances.front(), n);
  return run;
}

}  // namespace mcre
