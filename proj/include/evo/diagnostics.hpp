#pragma once

#include "evo/rng.hpp"
#include "evo/stats.hpp"
#include "evo/types.hpp"

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace evo {

// ------------------------------------------------------------ covariance

struct CovMetrics {
  double kappa = 1.0;  // lambda_max / lambda_min
  double delta = 0.0;  // ||C - I||_F^2 / ||C||_F^2
};

enum class CovRepr { Dense, Cholesky, Diagonal };

// `m` is C itself (Dense), a factor A with C = A A^T (Cholesky), or a
// d x 1 column of variances (Diagonal).
CovMetrics cov_metrics(const Matrix& m, CovRepr repr);
CovMetrics cov_metrics_dense(const Matrix& C);
CovMetrics cov_metrics_cholesky(const Matrix& A);
CovMetrics cov_metrics_diagonal(const Vector& c);

// ------------------------------------------------------------ trajectories

struct MeanTrajectory {
  Matrix means;        // T x d
  Vector step_sizes;   // may be empty
};

struct PCADecomposition {
  Matrix axes;         // n x d, orthonormal rows
  Vector ratios;       // explained-variance ratios of all components, sum 1
  Matrix projections;  // T x n
  Vector singular_values;
};

PCADecomposition pca_mean_trajectory(const MeanTrajectory& traj, int max_components = 30);

// Explained-variance ratio of the k-th PC of a T-step random walk.
double theoretical_expvar(int k, int T);

struct CosineFit {
  double amplitude = 0.0;
  double omega = 0.0;
  double phase = 0.0;
  double r2 = 0.0;
};

// Fits A cos(2 pi omega (t/T + phi)), t = 0..T-1, with omega searched in
// [k/2 - 1, k/2 + 1] (floored at 0.05).
CosineFit cosine_fit(std::span<const double> projection, int k);

// OLS of squared mean-code norm against generation index.
LinearFit norm_growth_fit(const MeanTrajectory& traj);

// Pairs PC i and PC j projections (1-based) per generation.
std::vector<std::pair<double, double>> lissajous_project(const PCADecomposition& pca, int i, int j);

struct AngularStats {
  double mean_angle = 0.0;
  double mean_l2 = 0.0;
  double mean_dim_std = 0.0;
  int excluded_pairs = 0;  // pairs involving a zero code
};

AngularStats angular_stats(const Batch& codes);

// ------------------------------------------------------------ eigenframes

struct EigenFrame {
  Matrix basis;        // k x d, row k is u_k
  Vector eigenvalues;  // descending
  int cutoff = 800;

  int dim() const { return static_cast<int>(basis.cols()); }
  int size() const { return static_cast<int>(basis.rows()); }
  void validate(double tol = 1e-8) const;
};

// Random orthonormal k x d frame with log-linear spectrum from 1 down to 1/kappa.
EigenFrame make_synthetic_frame(int d, int k, double kappa, Rng& rng);

void write_eigenframe(const std::filesystem::path& path, const EigenFrame& frame);
EigenFrame read_eigenframe(const std::filesystem::path& path);

struct AlignmentResult {
  Vector amplitudes;  // a_k = mean_i |u_k^T zeta_i|
  int cutoff = 0;
  double pearson_r = 0.0;  // a_k vs log lambda_k, k <= cutoff
  double pearson_p = 1.0;
  double ks_statistic = 0.0;  // top group vs the rest; 0 when the rest is empty
  double ks_p = 1.0;
};

// `directions` holds one zeta per row. cutoff <= 0 uses frame.cutoff.
AlignmentResult eigenframe_projection(const Matrix& directions, const EigenFrame& frame, int cutoff = 0);

// Permutes the entries of every row independently.
Matrix shuffle_directions(const Matrix& directions, Rng& rng);

struct ShuffleControl {
  double observed = 0.0;
  std::vector<double> null;
  double p = 1.0;  // (1 + #{null >= observed}) / (1 + n)
};

ShuffleControl alignment_shuffle_test(const Matrix& directions, const EigenFrame& frame, int cutoff,
                                      int n_shuffles, Rng& rng);

struct SingularValueNull {
  Vector observed;          // top singular values of the direction matrix
  Matrix null;              // n_shuffles x top
  Vector p;                 // per component
};

SingularValueNull shuffle_singular_values(const Matrix& directions, int top, int n_shuffles, Rng& rng);

}  // namespace evo
