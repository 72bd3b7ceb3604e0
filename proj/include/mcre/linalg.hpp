#pragma once

#include <complex>
#include <string>

#include <Eigen/Dense>

namespace mcre {

// Upper bound on the state/noise dimension. States live in fixed-capacity
// storage so that stepping a chain never touches the heap.
inline constexpr int kMaxDim = 8;

using State = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline State zero_state(int dim) { return State::Zero(dim); }
inline State scalar_state(double v) {
  State s(1);
  s(0) = v;
  return s;
}

// Volume of the Euclidean unit ball in R^dim.
double unit_ball_volume(int dim);

// Norm on R^dim used as the state metric. Either the Euclidean norm or
// |v| = max_i |(S v)_i| for an invertible (possibly complex) transform S.
class Metric {
 public:
  enum class Kind { euclidean, scaled_max };

  Metric() : transform_(ComplexMatrix::Identity(1, 1)) {}
  static Metric euclidean(int dim);
  static Metric scaled_max(const ComplexMatrix& transform);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const ComplexMatrix& transform() const { return transform_; }

  double norm(const State& v) const;
  double distance(const State& a, const State& b) const { return norm(a - b); }

  // Radius of the largest Euclidean ball inside the unit ball of this norm.
  double inner_radius() const { return inner_radius_; }
  // Constant c with |v|_2 <= c * |v| for all v.
  double outer_factor() const { return outer_factor_; }

  std::string describe() const;

 private:
  Kind kind_ = Kind::euclidean;
  int dim_ = 1;
  ComplexMatrix transform_;
  double inner_radius_ = 1.0;
  double outer_factor_ = 1.0;
};

}  // namespace mcre
