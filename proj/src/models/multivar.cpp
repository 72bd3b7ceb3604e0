#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "mcre/errors.hpp"
#include "mcre/models.hpp"

namespace mcre {

namespace {

double max_row_sum(const ComplexMatrix& M) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) worst = std::max(worst, M.row(i).cwiseAbs().sum());
  return worst;
}

void check_square(const Matrix& A) {
  if (A.rows() < 1 || A.rows() != A.cols()) throw SpecError("matrix must be square and nonempty");
  if (!A.allFinite()) throw SpecError("matrix has non-finite entries");
}

}  // namespace

double spectral_radius(const Matrix& A) {
  check_square(A);
  const Eigen::MatrixXd dense = A;
  return Eigen::EigenSolver<Eigen::MatrixXd>(dense, false).eigenvalues().cwiseAbs().maxCoeff();
}

SubordinateNorm subordinate_norm(const Matrix& A) {
  check_square(A);
  const auto d = A.rows();
  const Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
  // A = U T U*, T upper triangular.
  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(Ac);
  const Eigen::MatrixXcd& T = schur.matrixT();
  const Eigen::MatrixXcd& U = schur.matrixU();

  SubordinateNorm out;
  out.spectral_radius = T.diagonal().cwiseAbs().maxCoeff();
  if (out.spectral_radius >= 1.0 - 1e-8) {
    throw SpecError(fmt::format("spectral radius {} is not below 1", out.spectral_radius));
  }
  out.theta = 0.5 * (1.0 + out.spectral_radius);

  // With D = diag(1, delta, delta^2, ...), D^-1 T D has entries T_ij delta^(j-i),
  // so off-diagonal mass vanishes as delta -> 0 while the diagonal stays below theta.
  for (int k = 0; k <= 1000; ++k) {
    const double delta = std::ldexp(1.0, -k);
    Eigen::MatrixXcd D_inv = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      D(i, i) = std::pow(delta, static_cast<double>(i));
      D_inv(i, i) = std::pow(delta, -static_cast<double>(i));
    }
    Eigen::MatrixXcd S = D_inv * U.adjoint();
    // Rescaling S leaves the operator norm unchanged; unit largest row norm
    // makes |v|_S <= |v|_2.
    double max_row = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) max_row = std::max(max_row, S.row(i).norm());
    S /= max_row;
    const Eigen::MatrixXcd S_inv = S.inverse();
    const ComplexMatrix scaled = S * Ac * S_inv;
    const double value = max_row_sum(scaled);
    if (value <= out.theta * (1.0 + 1e-12)) {
      out.S = S;
      out.value = value;
      out.delta = delta;
      return out;
    }
  }
  throw SpecError("subordinate norm scaling did not reach the target");
}

MultivarARModel make_multivar(const MultivarParams& p) {
  check_square(p.A);
  const auto d = static_cast<int>(p.A.rows());
  if (p.B.rows() != d || p.B.cols() != d || p.b.size() != d || p.c.size() != d) {
    throw SpecError("multivar: A, B, b, c dimensions disagree");
  }
  if (p.noise.dim() != d) throw SpecError("multivar: noise dimension mismatch");
  if (!(p.box_half_width >= 0.0)) throw SpecError("multivar: box half width must be >= 0");

  MultivarARModel out;
  out.params = p;
  out.norm = subordinate_norm(p.A);
  const Metric metric = out.norm.metric();

  // r is affine on the box and constant outside, so its sup norm is attained
  // at b or at a box vertex.
  out.sup_perturbation = metric.norm(p.b);
  const Matrix diff = p.B - p.A;
  for (int mask = 0; mask < (1 << d); ++mask) {
    State v(d);
    for (int i = 0; i < d; ++i) v(i) = (mask >> i & 1) ? p.box_half_width : -p.box_half_width;
    out.sup_perturbation = std::max(out.sup_perturbation, metric.norm(State(diff * v + p.c)));
  }

  AdditiveSpec spec;
  spec.name = "multivar";
  spec.dim = d;
  spec.mu = [p](const State& y, const EnvState&) -> State {
    const bool inside = y.cwiseAbs().maxCoeff() <= p.box_half_width;
    return inside ? State(p.B * y + p.c) : State(p.A * y + p.b);
  };
  spec.noise = p.noise;
  spec.metric = metric;
  spec.contraction = {out.norm.theta, 2.0 * out.sup_perturbation};
  out.model = make_additive(std::move(spec));
  return out;
}

}  // namespace mcre
