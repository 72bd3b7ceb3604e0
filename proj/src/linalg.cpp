#include "mcre/linalg.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "mcre/errors.hpp"

namespace mcre {

double unit_ball_volume(int dim) {
  const double half = 0.5 * dim;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

Metric Metric::euclidean(int dim) {
  if (dim < 1 || dim > kMaxDim) throw SpecError(fmt::format("metric dimension {} out of range", dim));
  Metric m;
  m.kind_ = Kind::euclidean;
  m.dim_ = dim;
  m.transform_ = ComplexMatrix::Identity(dim, dim);
  m.inner_radius_ = 1.0;
  m.outer_factor_ = 1.0;
  return m;
}

Metric Metric::scaled_max(const ComplexMatrix& transform) {
  const auto dim = static_cast<int>(transform.rows());
  if (dim < 1 || dim > kMaxDim || transform.cols() != dim) {
    throw SpecError("scaled-max metric needs a square transform");
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(transform);
  const auto& sv = svd.singularValues();
  if (sv(dim - 1) <= 1e-14 * sv(0)) throw SpecError("scaled-max metric transform is singular");

  Metric m;
  m.kind_ = Kind::scaled_max;
  m.dim_ = dim;
  m.transform_ = transform;
  // |(S v)_i| <= |S_i|_2 |v|_2, so the Euclidean ball of radius 1 / max_i |S_i|_2
  // lies inside the unit ball.
  double max_row = 0.0;
  for (int i = 0; i < dim; ++i) max_row = std::max(max_row, transform.row(i).norm());
  m.inner_radius_ = 1.0 / max_row;
  // |v|_2 <= |S^-1|_2 |S v|_2 <= |S^-1|_2 sqrt(dim) |S v|_inf
  m.outer_factor_ = std::sqrt(static_cast<double>(dim)) / sv(dim - 1);
  return m;
}

double Metric::norm(const State& v) const {
  if (kind_ == Kind::euclidean) return v.norm();
  const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1, 0, kMaxDim, 1> w =
      transform_ * v.cast<std::complex<double>>();
  return w.cwiseAbs().maxCoeff();
}

std::string Metric::describe() const {
  if (kind_ == Kind::euclidean) return fmt::format("euclidean(d={})", dim_);
  return fmt::format("scaled-max(d={})", dim_);
}

}  // namespace mcre
