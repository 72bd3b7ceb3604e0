#include "mcre/environment.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

EnvironmentSpec EnvironmentSpec::iid_gaussian(double sd) {
  EnvironmentSpec s;
  s.kind = Kind::iid;
  s.innovation_sd = sd;
  s.validate();
  return s;
}

EnvironmentSpec EnvironmentSpec::gaussian_ar1(double phi, double sd) {
  EnvironmentSpec s;
  s.kind = Kind::gaussian_ar1;
  s.ar_coefficient = phi;
  s.innovation_sd = sd;
  s.mixing = {DecayFamily::geometric, std::abs(phi), 0.0};
  s.validate();
  return s;
}

EnvironmentSpec EnvironmentSpec::linear_process(std::vector<double> coefficients, double sd) {
  EnvironmentSpec s;
  s.kind = Kind::linear_process;
  s.coefficients = std::move(coefficients);
  s.innovation_sd = sd;
  s.validate();
  return s;
}

EnvironmentSpec EnvironmentSpec::power_law_linear(double decay, int lag, double sd) {
  if (lag < 0) throw SpecError("linear process lag must be >= 0");
  std::vector<double> b(static_cast<std::size_t>(lag) + 1);
  for (int k = 0; k <= lag; ++k) b[static_cast<std::size_t>(k)] = std::pow(1.0 + k, -decay);
  auto s = linear_process(std::move(b), sd);
  s.mixing = {DecayFamily::polynomial, 0.0, decay};
  return s;
}

EnvironmentSpec EnvironmentSpec::from_series(std::vector<double> values, bool resample) {
  EnvironmentSpec s;
  s.kind = Kind::series;
  s.series = std::make_shared<const std::vector<double>>(std::move(values));
  s.resample = resample;
  s.validate();
  return s;
}

void EnvironmentSpec::validate() const {
  if (!(innovation_sd > 0.0) || !std::isfinite(innovation_sd)) {
    throw SpecError("environment innovation sd must be positive");
  }
  switch (kind) {
    case Kind::gaussian_ar1:
      if (!(std::abs(ar_coefficient) < 1.0)) throw SpecError("AR(1) coefficient must satisfy |phi| < 1");
      break;
    case Kind::linear_process: {
      if (coefficients.empty()) throw SpecError("linear process needs at least one coefficient");
      for (double b : coefficients) {
        if (!std::isfinite(b)) throw SpecError("linear process coefficient is not finite");
      }
      break;
    }
    case Kind::series:
      if (!series || series->empty()) throw SpecError("series environment is empty");
      break;
    case Kind::iid:
      break;
  }
}

double EnvironmentSpec::marginal_mean() const {
  if (kind != Kind::series) return 0.0;
  double m = 0.0;
  for (double v : *series) m += v;
  return m / static_cast<double>(series->size());
}

double EnvironmentSpec::marginal_variance() const {
  const double s2 = innovation_sd * innovation_sd;
  switch (kind) {
    case Kind::iid:
      return s2;
    case Kind::gaussian_ar1:
      return s2 / (1.0 - ar_coefficient * ar_coefficient);
    case Kind::linear_process: {
      double sum = 0.0;
      for (double b : coefficients) sum += b * b;
      return s2 * sum;
    }
    case Kind::series: {
      const double m = marginal_mean();
      double v = 0.0;
      for (double x : *series) v += (x - m) * (x - m);
      return v / static_cast<double>(series->size());
    }
  }
  return 0.0;
}

std::string EnvironmentSpec::describe() const {
  switch (kind) {
    case Kind::iid:
      return fmt::format("iid(sd={})", innovation_sd);
    case Kind::gaussian_ar1:
      return fmt::format("ar1(phi={},sd={})", ar_coefficient, innovation_sd);
    case Kind::linear_process:
      return fmt::format("linear(L={},sd={})", coefficients.size() - 1, innovation_sd);
    case Kind::series:
      return fmt::format("series(n={},resample={})", series->size(), resample);
  }
  return "unknown";
}

const EnvState& EnvironmentWindow::at(std::int64_t t) const {
  if (t < first_ || t >= end_index()) {
    throw std::out_of_range(
        fmt::format("environment index {} outside window [{}, {})", t, first_, end_index()));
  }
  return values_[static_cast<std::size_t>(t - first_)];
}

EnvironmentWindow generate_window(const EnvironmentSpec& spec, std::int64_t first, std::int64_t end,
                                  RngStream& rng) {
  if (end < first) throw InputError("environment window end precedes its start");
  spec.validate();
  const auto n = static_cast<std::size_t>(end - first);
  std::vector<EnvState> values(n);
  const double sd = spec.innovation_sd;

  switch (spec.kind) {
    case EnvironmentSpec::Kind::iid:
      for (auto& v : values) v.value = sd * rng.normal();
      break;

    case EnvironmentSpec::Kind::gaussian_ar1: {
      const double phi = spec.ar_coefficient;
      double x = std::sqrt(spec.marginal_variance()) * rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        const double innovation = sd * rng.normal();
        values[i] = {x, innovation};
        x = phi * x + innovation;
      }
      break;
    }

    case EnvironmentSpec::Kind::linear_process: {
      // zeta[j] holds zeta_{first - L + j}; Z_t = sum_k b_k zeta_{t-k}.
      const auto lag = spec.coefficients.size() - 1;
      std::vector<double> zeta(n + lag + 1);
      for (auto& z : zeta) z = sd * rng.normal();
      for (std::size_t i = 0; i < n; ++i) {
        double z = 0.0;
        for (std::size_t k = 0; k <= lag; ++k) z += spec.coefficients[k] * zeta[i + lag - k];
        values[i] = {z, zeta[i + lag + 1]};
      }
      break;
    }

    case EnvironmentSpec::Kind::series: {
      const auto& s = *spec.series;
      if (spec.resample) {
        for (auto& v : values) v.value = s[rng.below(s.size())];
      } else {
        const auto offset = rng.below(s.size());
        for (std::size_t i = 0; i < n; ++i) values[i].value = s[(offset + i) % s.size()];
      }
      break;
    }
  }
  return EnvironmentWindow(first, std::move(values));
}

EnvState sample_marginal(const EnvironmentSpec& spec, RngStream& rng) {
  switch (spec.kind) {
    case EnvironmentSpec::Kind::gaussian_ar1:
    case EnvironmentSpec::Kind::linear_process: {
      // Gaussian marginal; the next innovation is independent of X_0.
      EnvState x;
      x.value = std::sqrt(spec.marginal_variance()) * rng.normal();
      x.next_innovation = spec.innovation_sd * rng.normal();
      return x;
    }
    default:
      return generate_window(spec, 0, 1, rng).at(0);
  }
}

}  // namespace mcre
