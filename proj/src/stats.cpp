#include "evo/stats.hpp"

#include "evo/types.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace evo {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(Errc::InsufficientData, "mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw Error(Errc::InsufficientData, "standard deviation needs two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double sem(std::span<const double> x) { return sample_sd(x) / std::sqrt(static_cast<double>(x.size())); }

namespace {

double t_sf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  boost::math::students_t dist(df);
  return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(Errc::InsufficientData, "Welch test needs two values per group");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = std::pow(sample_sd(a), 2) / na;
  const double vb = std::pow(sample_sd(b), 2) / nb;
  const double diff = mean(a) - mean(b);
  WelchResult r;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    r.t = diff / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  }
  r.p_greater = t_sf(r.t, r.df);
  r.p_two_sided = std::min(1.0, 2.0 * t_sf(std::abs(r.t), r.df));
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::ShapeMismatch, "pearson needs equal-length samples");
  if (x.size() < 2) throw Error(Errc::InsufficientData, "pearson needs two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double pearson_p(double r, int n) {
  if (n < 3) return 1.0;
  const double df = n - 2.0;
  if (std::abs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return std::min(1.0, 2.0 * t_sf(std::abs(t), df));
}

KsResult ks_2samp(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(Errc::InsufficientData, "KS test needs non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  KsResult r;
  r.statistic = d;
  // Kolmogorov limiting distribution with the usual small-sample correction.
  const double ne = nx * ny / (nx + ny);
  const double lam = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double q = 0.0;
  if (lam < 1e-3) {
    q = 1.0;
  } else {
    for (int k = 1; k <= 100; ++k) {
      const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
      q += term;
      if (std::abs(term) < 1e-12) break;
    }
  }
  r.p = std::clamp(q, 0.0, 1.0);
  return r;
}

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(Errc::ShapeMismatch, "ols needs equal-length samples");
  if (x.size() < 2) throw Error(Errc::InsufficientData, "ols needs two points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::InsufficientData, "ols needs distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace evo
