#include "mcre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "mcre/errors.hpp"

namespace mcre::stats {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

MeanSe mean_se(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

MeanSe proportion(std::int64_t successes, std::int64_t trials) {
  if (trials <= 0) throw InputError("proportion needs trials >= 1");
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

double kolmogorov_tail(double t) {
  if (t <= 0.0) return 1.0;
  // The alternating series converges slowly for small t, where the tail is 1
  // to double precision anyway.
  if (t < 0.18) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InputError("KS test needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d)};
}

double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> least_squares(const std::vector<double>& X, int cols, const std::vector<double>& y,
                                  double* rss) {
  const auto rows = static_cast<Eigen::Index>(y.size());
  if (cols < 1 || X.size() != y.size() * static_cast<std::size_t>(cols)) {
    throw InputError("least squares design matrix has the wrong shape");
  }
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd v(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    v(r) = y[static_cast<std::size_t>(r)];
    for (int c = 0; c < cols; ++c) A(r, c) = X[static_cast<std::size_t>(r) * cols + c];
  }
  const Eigen::VectorXd beta = A.colPivHouseholderQr().solve(v);
  if (rss) *rss = (A * beta - v).squaredNorm();
  return {beta.data(), beta.data() + beta.size()};
}

}  // namespace mcre::stats
