#include <atomic>
#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

namespace {

std::atomic<std::uint64_t> next_model_id{1};

struct SigmaInfo {
  Matrix sigma;
  double abs_det = 1.0;
  double min_singular = 1.0;
};

SigmaInfo analyze_sigma(const Matrix& sigma, const std::string& name) {
  SigmaInfo info;
  info.sigma = sigma;
  if (sigma.rows() == 1) {
    info.abs_det = std::abs(sigma(0, 0));
    info.min_singular = info.abs_det;
  } else {
    Eigen::JacobiSVD<Matrix> svd(sigma);
    const auto& sv = svd.singularValues();
    info.min_singular = sv(sv.size() - 1);
    info.abs_det = sv.prod();
  }
  if (!(info.min_singular > 0.0) || !std::isfinite(info.abs_det)) {
    throw SpecError(fmt::format("{}: sigma(x) is not invertible", name));
  }
  return info;
}

}  // namespace

State AdditiveModel::drift_image(const State& y, const EnvState& x) const {
  return spec_->mu(y, x) + spec_->ell(x);
}

Matrix AdditiveModel::sigma(const EnvState& x) const { return spec_->sigma(x); }

State AdditiveModel::apply(const State& y, const EnvState& x, const State& e) const {
  return apply_update(chain_, y, x, e);
}

State AdditiveModel::noise_preimage(const State& y, const EnvState& x, const State& z) const {
  const Matrix s = spec_->sigma(x);
  const State u = z - drift_image(y, x);
  if (s.rows() == 1) return u / s(0, 0);
  return s.partialPivLu().solve(u);
}

double AdditiveModel::kernel_density(const State& y, const EnvState& x, const State& z) const {
  const SigmaInfo info = analyze_sigma(spec_->sigma(x), spec_->name);
  const State u = z - drift_image(y, x);
  const State e = info.sigma.rows() == 1 ? State(u / info.sigma(0, 0)) : State(info.sigma.partialPivLu().solve(u));
  return spec_->noise.density(e) / info.abs_det;
}

AdditiveModel AdditiveModel::with_minorization(MinorizationSpec m) const {
  AdditiveModel out = *this;
  out.minor_ = std::move(m);
  out.id_ = next_model_id.fetch_add(1);
  return out;
}

AdditiveModel make_additive(AdditiveSpec spec) {
  const int d = spec.dim;
  if (d < 1 || d > kMaxDim) throw SpecError(fmt::format("{}: state dimension {} out of range", spec.name, d));
  if (!spec.mu) throw SpecError(fmt::format("{}: missing drift", spec.name));
  if (spec.noise.dim() != d) throw SpecError(fmt::format("{}: noise dimension mismatch", spec.name));
  if (spec.metric.dim() != d) throw SpecError(fmt::format("{}: metric dimension mismatch", spec.name));
  if (!(spec.nu_radius > 0.0)) throw SpecError(fmt::format("{}: nu radius must be > 0", spec.name));
  spec.contraction.validate();
  if (!spec.sigma) spec.sigma = [d](const EnvState&) { return Matrix(Matrix::Identity(d, d)); };
  if (!spec.ell) spec.ell = [d](const EnvState&) { return zero_state(d); };

  const double rho = spec.contraction.rho;
  const double R = spec.contraction.R;
  const double half_gap = spec.half_gap.value_or((1.0 + rho) * R / (1.0 - rho) / 2.0);
  if (!(half_gap >= 0.0)) throw SpecError(fmt::format("{}: drift half gap must be >= 0", spec.name));

  AdditiveModel model;
  model.id_ = next_model_id.fetch_add(1);
  auto shared = std::make_shared<const AdditiveSpec>(std::move(spec));
  model.spec_ = shared;

  ChainSpec& chain = model.chain_;
  chain.name = shared->name;
  chain.dim_state = d;
  chain.update = [s = shared](const State& y, const EnvState& x, const State& e) -> State {
    return s->mu(y, x) + s->sigma(x) * e + s->ell(x);
  };
  chain.noise = shared->noise;
  chain.metric = shared->metric;
  chain.theta = shared->theta;
  chain.reference_point = shared->reference_point.value_or(zero_state(d));
  chain.contraction = shared->contraction;
  chain.validate();

  // nu is uniform on the Euclidean ball of radius nu_radius * inner_radius at
  // the midpoint of the drift images; that ball sits inside the metric ball
  // of radius nu_radius, so its support is within half_gap + nu_radius of
  // each drift image.
  const double ball_radius = shared->nu_radius * shared->metric.inner_radius();
  const double reach = ball_radius + shared->metric.outer_factor() * half_gap;
  const double ball_volume = unit_ball_volume(d) * std::pow(ball_radius, d);

  MinorizationSpec& m = model.minor_;
  auto drift = [s = shared](const State& y, const EnvState& x) -> State { return s->mu(y, x) + s->ell(x); };
  auto center = [drift](const EnvState& x, const State& y1, const State& y2) -> State {
    return 0.5 * (drift(y1, x) + drift(y2, x));
  };
  m.anchor = drift;
  m.anchor_kind = MinorizationSpec::Anchor::drift_image;
  m.metric = shared->metric;
  m.K = half_gap + shared->nu_radius;
  m.R_tilde = 2.0 * half_gap;
  m.pair_radius = 2.0 * R / (1.0 - rho);
  m.nu_sampler = [center, ball_radius](const EnvState& x, const State& y1, const State& y2, RngStream& rng) {
    return sample_uniform_ball(center(x, y1, y2), ball_radius, rng);
  };
  m.nu_density = [center, ball_radius](const EnvState& x, const State& y1, const State& y2, const State& z) {
    return uniform_ball_density(center(x, y1, y2), ball_radius, z);
  };
  // eta nu <= kernel density on the nu support: the density of sigma(x) eps is
  // g(sigma^-1 u) / |det sigma| and |sigma^-1 u| <= reach / s_min(sigma).
  m.eta = [s = shared, ball_volume, reach](const EnvState& x) {
    if (!s->noise.has_density()) return 0.0;
    const SigmaInfo info = analyze_sigma(s->sigma(x), s->name);
    const double g = s->noise.radial_density(reach / info.min_singular) / info.abs_det;
    return std::min(1.0, ball_volume * g);
  };
  return model;
}

}  // namespace mcre
