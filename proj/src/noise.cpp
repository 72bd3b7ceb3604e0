#include "mcre/noise.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

namespace {

void check_dim(int dim) {
  if (dim < 1 || dim > kMaxDim) throw SpecError(fmt::format("noise dimension {} out of range", dim));
}

}  // namespace

NoiseLaw NoiseLaw::gaussian(int dim) {
  check_dim(dim);
  NoiseLaw n;
  n.kind_ = Kind::gaussian;
  n.dim_ = dim;
  return n;
}

NoiseLaw NoiseLaw::student_t(int dim, double dof) {
  check_dim(dim);
  if (!(dof > 0.0)) throw SpecError("student-t noise needs dof > 0");
  NoiseLaw n;
  n.kind_ = Kind::student_t;
  n.dim_ = dim;
  n.dof_ = dof;
  return n;
}

NoiseLaw NoiseLaw::zero(int dim) {
  check_dim(dim);
  NoiseLaw n;
  n.kind_ = Kind::zero;
  n.dim_ = dim;
  return n;
}

State NoiseLaw::sample(RngStream& rng) const {
  State e(dim_);
  switch (kind_) {
    case Kind::gaussian:
      for (int i = 0; i < dim_; ++i) e(i) = rng.normal();
      break;
    case Kind::student_t: {
      for (int i = 0; i < dim_; ++i) e(i) = rng.normal();
      std::chi_squared_distribution<double> chi2(dof_);
      e /= std::sqrt(chi2(rng.engine()) / dof_);
      break;
    }
    case Kind::zero:
      e.setZero();
      break;
  }
  return e;
}

double NoiseLaw::radial_density(double r) const {
  const double d = dim_;
  switch (kind_) {
    case Kind::gaussian:
      return std::exp(-0.5 * r * r) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
    case Kind::student_t: {
      const double log_c = std::lgamma(0.5 * (dof_ + d)) - std::lgamma(0.5 * dof_) -
                           0.5 * d * std::log(dof_ * std::numbers::pi);
      return std::exp(log_c - 0.5 * (dof_ + d) * std::log1p(r * r / dof_));
    }
    case Kind::zero:
      return 0.0;
  }
  return 0.0;
}

double NoiseLaw::density(const State& e) const { return radial_density(e.norm()); }

double NoiseLaw::cdf_1d(double t) const {
  switch (kind_) {
    case Kind::gaussian:
      return 0.5 * std::erfc(-t / std::numbers::sqrt2);
    case Kind::student_t:
      return boost::math::cdf(boost::math::students_t_distribution<double>(dof_), t);
    case Kind::zero:
      return t >= 0.0 ? 1.0 : 0.0;
  }
  return 0.0;
}

double NoiseLaw::tail_1d(double t) const { return 2.0 * cdf_1d(-std::abs(t)); }

std::string NoiseLaw::describe() const {
  switch (kind_) {
    case Kind::gaussian:
      return fmt::format("gaussian(d={})", dim_);
    case Kind::student_t:
      return fmt::format("student_t(d={},dof={})", dim_, dof_);
    case Kind::zero:
      return fmt::format("zero(d={})", dim_);
  }
  return "unknown";
}

}  // namespace mcre
