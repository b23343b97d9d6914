#pragma once

#include <span>

namespace evo {

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);  // n - 1 denominator
double sem(std::span<const double> x);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  double p_greater = 0.5;  // H1: mean(a) > mean(b)
};

// Throws InsufficientData when either sample has fewer than two values.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

double pearson(std::span<const double> x, std::span<const double> y);
double pearson_p(double r, int n);  // two-sided, t with n - 2 df

struct KsResult {
  double statistic = 0.0;
  double p = 1.0;  // asymptotic
};
KsResult ks_2samp(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit ols(std::span<const double> x, std::span<const double> y);

}  // namespace evo
