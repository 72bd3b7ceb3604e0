#pragma once

#include <string>

#include "mcre/linalg.hpp"
#include "mcre/rng.hpp"

namespace mcre {

// Law of the i.i.d. innovations. All supported laws are spherically
// symmetric with a density that is nonincreasing in |e|, except `zero`,
// the point mass at the origin, which exists for deterministic tests.
class NoiseLaw {
 public:
  enum class Kind { gaussian, student_t, zero };

  NoiseLaw() = default;
  static NoiseLaw gaussian(int dim);
  static NoiseLaw student_t(int dim, double dof);
  static NoiseLaw zero(int dim);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double dof() const { return dof_; }
  bool has_density() const { return kind_ != Kind::zero; }

  State sample(RngStream& rng) const;
  double density(const State& e) const;
  // Density at any point with Euclidean norm r.
  double radial_density(double r) const;
  // P(|e_1| > t) for the first coordinate; used for exact 1-D computations.
  double tail_1d(double t) const;
  double cdf_1d(double t) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::gaussian;
  int dim_ = 1;
  double dof_ = 0.0;
};

}  // namespace mcre
