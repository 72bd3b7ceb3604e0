#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mcre::stats {

double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& values);

// Binomial proportion with its plug-in standard error.
MeanSe proportion(std::int64_t successes, std::int64_t trials);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Kolmogorov distribution tail P(K > t).
double kolmogorov_tail(double t);

// Minimizer of a unimodal function on [lo, hi].
double golden_section_min(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-10);

// Ordinary least squares y ~ X beta; X is row-major with `cols` columns.
// Returns beta and sets *rss to the residual sum of squares.
std::vector<double> least_squares(const std::vector<double>& X, int cols, const std::vector<double>& y,
                                  double* rss);

}  // namespace mcre::stats
