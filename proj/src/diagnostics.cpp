#include "evo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace evo {

// ------------------------------------------------------------ covariance

namespace {

CovMetrics from_eigenvalues(const Vector& ev) {
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) throw Error(Errc::NotPositiveDefinite, "covariance has a non-positive eigenvalue");
  CovMetrics m;
  m.kappa = hi / lo;
  m.delta = (ev.array() - 1.0).square().sum() / ev.array().square().sum();
  return m;
}

}  // namespace

CovMetrics cov_metrics_dense(const Matrix& C) {
  if (C.rows() != C.cols() || C.rows() == 0) throw Error(Errc::DimensionMismatch, "covariance must be square");
  const double asym = (C - C.transpose()).norm();
  if (asym > 1e-10 * std::max(1.0, C.norm())) throw Error(Errc::InvalidArgument, "covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(C, Eigen::EigenvaluesOnly);
  return from_eigenvalues(es.eigenvalues());
}

CovMetrics cov_metrics_cholesky(const Matrix& A) {
  if (A.rows() != A.cols() || A.rows() == 0) throw Error(Errc::DimensionMismatch, "factor must be square");
  // Only the lower triangle of A A^T is formed; the solver reads nothing else.
  Matrix G = Matrix::Zero(A.rows(), A.rows());
  G.selfadjointView<Eigen::Lower>().rankUpdate(A);
  Eigen::SelfAdjointEigenSolver<Matrix> es(G, Eigen::EigenvaluesOnly);
  return from_eigenvalues(es.eigenvalues());
}

CovMetrics cov_metrics_diagonal(const Vector& c) {
  if (c.size() == 0) throw Error(Errc::DimensionMismatch, "empty diagonal");
  return from_eigenvalues(c);
}

CovMetrics cov_metrics(const Matrix& m, CovRepr repr) {
  switch (repr) {
    case CovRepr::Dense: return cov_metrics_dense(m);
    case CovRepr::Cholesky: return cov_metrics_cholesky(m);
    case CovRepr::Diagonal:
      if (m.cols() != 1) throw Error(Errc::DimensionMismatch, "diagonal representation must be one column");
      return cov_metrics_diagonal(m.col(0));
  }
  throw Error(Errc::InvalidArgument, "unknown representation");
}

// ------------------------------------------------------------ PCA

PCADecomposition pca_mean_trajectory(const MeanTrajectory& traj, int max_components) {
  const Eigen::Index T = traj.means.rows();
  if (T < 3) throw Error(Errc::InvalidArgument, "PCA needs at least 3 generations");
  if (!traj.means.allFinite()) throw Error(Errc::InvalidArgument, "trajectory has non-finite entries");
  const Matrix X = traj.means.rowwise() - traj.means.colwise().mean();

  // T x T Gram route: memory stays O(T d).
  const Matrix G = X * X.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(G);
  Vector ev = es.eigenvalues().reverse().cwiseMax(0.0);
  const Matrix U = es.eigenvectors().rowwise().reverse();
  const Eigen::Index ncomp = std::min<Eigen::Index>(T - 1, X.cols());
  const double total = ev.head(ncomp).sum();
  if (!(total > 0.0)) throw Error(Errc::DegenerateTrajectory, "all mean codes are identical");

  PCADecomposition out;
  out.ratios = ev.head(ncomp) / total;
  out.singular_values = ev.head(ncomp).cwiseSqrt();
  const double s1 = out.singular_values[0];
  Eigen::Index n = 0;
  while (n < std::min<Eigen::Index>(ncomp, max_components) && out.singular_values[n] > 1e-12 * s1) ++n;
  out.axes.resize(n, X.cols());
  out.projections.resize(T, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = out.singular_values[k];
    out.axes.row(k) = (X.transpose() * U.col(k)).transpose() / s;
    out.projections.col(k) = U.col(k) * s;
  }
  return out;
}

double theoretical_expvar(int k, int T) {
  if (T < 2 || k < 1 || k > T - 1) throw Error(Errc::OutOfRange, "need 1 <= k <= T - 1");
  const double Td = T;
  return 0.5 / (1.0 - std::cos(std::numbers::pi * k / Td)) / ((Td * Td - 1.0) / 6.0);
}

// ------------------------------------------------------------ cosine fit

namespace {

struct FitAtOmega {
  double a = 0, b = 0, sse = 0;
};

FitAtOmega fit_fixed_omega(std::span<const double> y, double omega) {
  const double T = static_cast<double>(y.size());
  double cc = 0, ss = 0, cs = 0, yc = 0, ys = 0, yy = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double ang = 2.0 * std::numbers::pi * omega * t / T;
    const double c = std::cos(ang);
    const double s = std::sin(ang);
    cc += c * c;
    ss += s * s;
    cs += c * s;
    yc += y[t] * c;
    ys += y[t] * s;
    yy += y[t] * y[t];
  }
  FitAtOmega f;
  const double det = cc * ss - cs * cs;
  if (std::abs(det) < 1e-12 * std::max(1.0, cc * ss)) {
    f.a = cc > 0 ? yc / cc : 0.0;
    f.b = 0.0;
  } else {
    f.a = (yc * ss - ys * cs) / det;
    f.b = (ys * cc - yc * cs) / det;
  }
  f.sse = std::max(0.0, yy - f.a * yc - f.b * ys);
  return f;
}

}  // namespace

CosineFit cosine_fit(std::span<const double> y, int k) {
  if (y.size() < 8) throw Error(Errc::InvalidArgument, "cosine fit needs at least 8 points");
  if (k < 1) throw Error(Errc::OutOfRange, "PC index must be positive");
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sst = 0.0;
  for (double v : y) sst += (v - my) * (v - my);
  if (!(sst > 0.0) || !std::isfinite(sst)) throw Error(Errc::FitDiverged, "projection has no variance");

  const double lo = std::max(0.05, k / 2.0 - 1.0);
  const double hi = k / 2.0 + 1.0;
  constexpr int kGrid = 800;
  double best_w = k / 2.0;
  double best = fit_fixed_omega(y, best_w).sse;
  for (int i = 0; i <= kGrid; ++i) {
    const double w = lo + (hi - lo) * i / kGrid;
    const double e = fit_fixed_omega(y, w).sse;
    if (e < best) {
      best = e;
      best_w = w;
    }
  }
  // Golden-section refinement inside the bracketing grid cell.
  const double step = (hi - lo) / kGrid;
  double a = std::max(lo, best_w - step);
  double b = std::min(hi, best_w + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double d = a + g * (b - a);
  double fc = fit_fixed_omega(y, c).sse;
  double fd = fit_fixed_omega(y, d).sse;
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = fit_fixed_omega(y, c).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = fit_fixed_omega(y, d).sse;
    }
  }
  const double w_ref = 0.5 * (a + b);
  if (fit_fixed_omega(y, w_ref).sse < best) best_w = w_ref;

  const FitAtOmega f = fit_fixed_omega(y, best_w);
  CosineFit out;
  out.omega = best_w;
  out.amplitude = std::hypot(f.a, f.b);
  out.phase = std::atan2(-f.b, f.a) / (2.0 * std::numbers::pi * best_w);
  out.r2 = 1.0 - f.sse / sst;
  if (!std::isfinite(out.r2) || !std::isfinite(out.amplitude)) throw Error(Errc::FitDiverged, "non-finite fit");
  return out;
}

// ------------------------------------------------------------ norm growth etc.

LinearFit norm_growth_fit(const MeanTrajectory& traj) {
  const Eigen::Index T = traj.means.rows();
  if (T < 10) throw Error(Errc::InvalidArgument, "norm growth fit needs at least 10 generations");
  std::vector<double> t(T), n2(T);
  for (Eigen::Index i = 0; i < T; ++i) {
    t[i] = static_cast<double>(i);
    n2[i] = traj.means.row(i).squaredNorm();
  }
  return ols(t, n2);
}

std::vector<std::pair<double, double>> lissajous_project(const PCADecomposition& pca, int i, int j) {
  const auto n = pca.projections.cols();
  if (i < 1 || j < 1 || i > n || j > n) throw Error(Errc::OutOfRange, "PC index out of range");
  std::vector<std::pair<double, double>> out;
  out.reserve(pca.projections.rows());
  for (Eigen::Index t = 0; t < pca.projections.rows(); ++t)
    out.emplace_back(pca.projections(t, i - 1), pca.projections(t, j - 1));
  return out;
}

AngularStats angular_stats(const Batch& codes) {
  const Eigen::Index B = codes.rows();
  if (B < 2) throw Error(Errc::InvalidArgument, "angular statistics need at least two codes");
  Vector norms = codes.rowwise().norm();
  AngularStats s;
  double sum_angle = 0.0, sum_l2 = 0.0;
  long n_angle = 0, n_l2 = 0;
  for (Eigen::Index i = 0; i < B; ++i) {
    for (Eigen::Index j = i + 1; j < B; ++j) {
      sum_l2 += (codes.row(i) - codes.row(j)).norm();
      ++n_l2;
      if (norms[i] == 0.0 || norms[j] == 0.0) {
        ++s.excluded_pairs;
        continue;
      }
      const double c = std::clamp(codes.row(i).dot(codes.row(j)) / (norms[i] * norms[j]), -1.0, 1.0);
      sum_angle += std::acos(c);
      ++n_angle;
    }
  }
  s.mean_angle = n_angle ? sum_angle / n_angle : 0.0;
  s.mean_l2 = sum_l2 / n_l2;
  const Eigen::RowVectorXd mu = codes.colwise().mean();
  const Eigen::RowVectorXd var = (codes.rowwise() - mu).colwise().squaredNorm() / static_cast<double>(B - 1);
  s.mean_dim_std = var.cwiseSqrt().mean();
  return s;
}

}  // namespace evo
