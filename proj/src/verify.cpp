#include "mcre/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/parallel.hpp"

namespace mcre {

namespace {

constexpr std::int64_t kShardSize = 1 << 15;

std::string format_state(const State& s) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (Eigen::Index i = 0; i < s.size(); ++i) out << (i ? "," : "") << s(i);
  out << ')';
  return out.str();
}

std::int64_t shard_count(std::int64_t trials) { return (trials + kShardSize - 1) / kShardSize; }

std::int64_t shard_length(std::int64_t shard, std::int64_t trials) {
  return std::min(kShardSize, trials - shard * kShardSize);
}

// Runs `body(rng, n)` over fixed-size shards with per-shard streams and merges
// the reports in shard order.
template <typename Body>
CheckReport sharded_check(const std::string& name, std::int64_t trials, const CheckOptions& options,
                          std::uint64_t tag, Body&& body) {
  if (trials < 1) throw InputError(fmt::format("{}: trials must be >= 1", name));
  auto reports = parallel_map(shard_count(trials), options.workers, [&](std::int64_t shard) {
    RngStream rng = RngStream(options.seed, static_cast<std::uint64_t>(shard)).child(tag);
    CheckReport r;
    r.assumption = name;
    r.trials = shard_length(shard, trials);
    body(rng, r.trials, r);
    return r;
  });
  CheckReport total;
  total.assumption = name;
  for (const auto& r : reports) total.merge(r);
  return total;
}

void record(CheckReport& r, double margin, double tolerance, const std::function<std::string()>& witness) {
  r.worst_margin = std::max(r.worst_margin, margin);
  if (margin > tolerance) {
    ++r.violations;
    if (!r.witness) r.witness = witness();
  }
}

void require_pair(const Metric& metric, const MinorizationSpec& minor, const State& y1, const State& y2) {
  const double d = metric.distance(y1, y2);
  if (!(d > 0.0)) throw InvalidPair("minorization pair must satisfy d(y1, y2) > 0");
  if (d > minor.pair_radius * (1.0 + 1e-12)) {
    throw InvalidPair(fmt::format("pair distance {} exceeds pair radius {}", d, minor.pair_radius));
  }
}

}  // namespace

void CheckReport::merge(const CheckReport& other) {
  trials += other.trials;
  violations += other.violations;
  worst_margin = std::max(worst_margin, other.worst_margin);
  if (!witness && other.witness) witness = other.witness;
}

State InputSampler::sample_state(int dim, RngStream& rng) const {
  State y(dim);
  if (rng.uniform() < shell_fraction) {
    double norm = 0.0;
    do {
      for (int i = 0; i < dim; ++i) y(i) = rng.normal();
      norm = y.norm();
    } while (norm == 0.0);
    y *= shell_radius / norm;
  } else {
    for (int i = 0; i < dim; ++i) y(i) = box_half_width * (2.0 * rng.uniform() - 1.0);
  }
  return y;
}

CheckReport check_contractivity(const ChainSpec& spec, const InputSampler& sampler, std::int64_t trials,
                                const CheckOptions& options) {
  spec.validate();
  const double rho = spec.contraction.rho;
  const double R = spec.contraction.R;
  return sharded_check("contractivity", trials, options, 1, [&](RngStream& rng, std::int64_t n, CheckReport& r) {
    for (std::int64_t t = 0; t < n; ++t) {
      const State y1 = sampler.sample_state(spec.dim_state, rng);
      const State y2 = sampler.sample_state(spec.dim_state, rng);
      const EnvState x = sample_marginal(sampler.environment, rng);
      const State e = spec.noise.sample(rng);
      const double lhs = spec.distance(apply_update(spec, y1, x, e), apply_update(spec, y2, x, e));
      const double rhs = rho * spec.distance(y1, y2) + R;
      record(r, lhs - rhs, 1e-10 * (1.0 + std::abs(rhs)), [&] {
        return fmt::format("y1={} y2={} x=({},{}) e={} lhs={} rhs={}", format_state(y1), format_state(y2), x.value,
                           x.next_innovation, format_state(e), lhs, rhs);
      });
    }
  });
}

namespace {

// Assigns points to cells. For dim <= 2 a point maps to one grid cell (or
// none when outside the box); otherwise it belongs to every half-space
// {z : u_j . z <= t_j} that contains it.
class CellPartition {
 public:
  CellPartition(const State& lo, const State& hi, int grid, RngStream& rng, int halfspaces)
      : lo_(lo), hi_(hi), grid_(grid), dim_(static_cast<int>(lo.size())) {
    if (dim_ <= 2) {
      cells_ = 1;
      for (int i = 0; i < dim_; ++i) cells_ *= grid_;
      return;
    }
    const State center = 0.5 * (lo + hi);
    const double half_diag = 0.5 * (hi - lo).norm();
    for (int j = 0; j < halfspaces; ++j) {
      State u(dim_);
      for (int i = 0; i < dim_; ++i) u(i) = rng.normal();
      u.normalize();
      normals_.push_back(u);
      offsets_.push_back(u.dot(center) + half_diag * (2.0 * rng.uniform() - 1.0));
    }
    cells_ = halfspaces;
  }

  int cells() const { return cells_; }

  void count(const State& z, std::vector<std::int64_t>& counts) const {
    if (dim_ <= 2) {
      int index = 0;
      for (int i = dim_ - 1; i >= 0; --i) {
        const double u = (z(i) - lo_(i)) / (hi_(i) - lo_(i));
        if (!(u >= 0.0 && u < 1.0)) return;
        index = index * grid_ + std::min(grid_ - 1, static_cast<int>(u * grid_));
      }
      ++counts[static_cast<std::size_t>(index)];
      return;
    }
    for (std::size_t j = 0; j < normals_.size(); ++j) {
      if (normals_[j].dot(z) <= offsets_[j]) ++counts[j];
    }
  }

 private:
  State lo_;
  State hi_;
  int grid_;
  int dim_;
  int cells_ = 0;
  std::vector<State> normals_;
  std::vector<double> offsets_;
};

}  // namespace

CheckReport check_minorization(const ChainSpec& spec, const MinorizationSpec& minor, const EnvState& x,
                               const State& y1, const State& y2, std::int64_t samples,
                               const CheckOptions& options) {
  require_pair(spec.metric, minor, y1, y2);
  if (samples < 1) throw InputError("check_minorization: samples must be >= 1");
  const double eta = minor.eta(x);
  const State a1 = minor.anchor(y1, x);
  const State a2 = minor.anchor(y2, x);
  const double reach = minor.metric.outer_factor() * minor.K;
  const State lo = a1.cwiseMin(a2).array() - reach;
  const State hi = a1.cwiseMax(a2).array() + reach;
  RngStream layout_rng = RngStream(options.seed, 0).child(7);
  const CellPartition cells(lo, hi, 32, layout_rng, 256);
  const auto ncells = static_cast<std::size_t>(cells.cells());

  // counts[k][c]: k = 0 for nu, 1 and 2 for the two kernels.
  using Counts = std::array<std::vector<std::int64_t>, 3>;
  auto shards = parallel_map(shard_count(samples), options.workers, [&](std::int64_t shard) {
    RngStream rng = RngStream(options.seed, static_cast<std::uint64_t>(shard)).child(2);
    Counts c;
    for (auto& v : c) v.assign(ncells, 0);
    const std::int64_t n = shard_length(shard, samples);
    for (std::int64_t t = 0; t < n; ++t) {
      cells.count(minor.nu_sampler(x, y1, y2, rng), c[0]);
      cells.count(apply_update(spec, y1, x, spec.noise.sample(rng)), c[1]);
      cells.count(apply_update(spec, y2, x, spec.noise.sample(rng)), c[2]);
    }
    return c;
  });
  Counts total;
  for (auto& v : total) v.assign(ncells, 0);
  for (const auto& s : shards) {
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t c = 0; c < ncells; ++c) total[k][c] += s[k][c];
    }
  }

  CheckReport r;
  r.assumption = "minorization";
  r.trials = samples;
  const double n = static_cast<double>(samples);
  for (std::size_t c = 0; c < ncells; ++c) {
    const double nu_hat = static_cast<double>(total[0][c]) / n;
    const double lower = eta * nu_hat;
    const double tol = 5.0 * std::sqrt(lower * (1.0 - lower) / n + eta * eta * nu_hat * (1.0 - nu_hat) / n);
    for (std::size_t i = 1; i <= 2; ++i) {
      const double p_hat = static_cast<double>(total[i][c]) / n;
      record(r, lower - p_hat - tol, 0.0, [&] {
        return fmt::format("cell={} kernel={} eta_nu={} p={} tol={} y1={} y2={} x=({},{})", c, i, lower, p_hat,
                           tol, format_state(y1), format_state(y2), x.value, x.next_innovation);
      });
    }
  }
  return r;
}

CheckReport check_support(const MinorizationSpec& minor, const EnvState& x, const State& y1, const State& y2,
                          std::int64_t samples, const CheckOptions& options) {
  require_pair(minor.metric, minor, y1, y2);
  const State a1 = minor.anchor(y1, x);
  const State a2 = minor.anchor(y2, x);
  return sharded_check("support", samples, options, 3, [&](RngStream& rng, std::int64_t n, CheckReport& r) {
    for (std::int64_t t = 0; t < n; ++t) {
      const State z = minor.nu_sampler(x, y1, y2, rng);
      const double d = std::max(minor.metric.distance(z, a1), minor.metric.distance(z, a2));
      record(r, d - minor.K, 1e-12 * (1.0 + minor.K), [&] {
        return fmt::format("z={} K={} farthest={} y1={} y2={}", format_state(z), minor.K, d, format_state(y1),
                           format_state(y2));
      });
    }
  });
}

CheckReport check_bounded_perturbation(const StateMap& g, const StateMap& h, double rho, double J, int dim,
                                       std::int64_t trials, const CheckOptions& options) {
  if (!(rho < 1.0)) throw SpecError("bounded perturbation check needs rho < 1");
  if (!(J >= 0.0)) throw SpecError("bounded perturbation check needs J >= 0");
  const InputSampler sampler;
  return sharded_check("bounded_perturbation", trials, options, 4,
                       [&](RngStream& rng, std::int64_t n, CheckReport& r) {
                         for (std::int64_t t = 0; t < n; ++t) {
                           const State y1 = sampler.sample_state(dim, rng);
                           const State y2 = sampler.sample_state(dim, rng);
                           const double lhs = ((g(y1) + h(y1)) - (g(y2) + h(y2))).norm();
                           const double rhs = rho * (y1 - y2).norm() + 2.0 * J;
                           record(r, lhs - rhs, 1e-10 * (1.0 + rhs), [&] {
                             return fmt::format("y1={} y2={} lhs={} rhs={}", format_state(y1), format_state(y2),
                                                lhs, rhs);
                           });
                         }
                       });
}

}  // namespace mcre
