#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace evo {

namespace {

std::vector<int> ranking(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

CmaRates cholesky_default_rates(int dim, int population) {
  CmaRates r;
  const double N = dim;
  r.mu = std::max(1, population / 2);
  r.weights.resize(r.mu);
  for (int i = 0; i < r.mu; ++i) r.weights[i] = std::log(r.mu + 0.5) - std::log(i + 1.0);
  r.weights /= r.weights.sum();
  r.mueff = 1.0 / r.weights.squaredNorm();
  r.cc = 4.0 / (N + 4.0);
  r.cs = std::sqrt(r.mueff) / (std::sqrt(r.mueff) + std::sqrt(N));
  r.c1 = 2.0 / ((N + std::sqrt(2.0)) * (N + std::sqrt(2.0)));
  r.cmu = 0.0;
  r.damps = 1.0 + r.cs + 2.0 * std::max(0.0, std::sqrt((r.mueff - 1.0) / (N + 1.0)) - 1.0);
  r.chi_n = std::sqrt(N) * (1.0 - 1.0 / (4.0 * N) + 1.0 / (21.0 * N * N));
  return r;
}

CholeskyCMA::CholeskyCMA(const CholeskyConfig& cfg, std::uint64_t seed)
    : Optimizer(cfg.dim, cfg.population, seed), freq_(cfg.a_update_freq), sigma_(cfg.sigma0) {
  if (!(cfg.sigma0 >= 0.0)) throw Error(Errc::InvalidArgument, "sigma0 must be non-negative");
  if (freq_ < 1) throw Error(Errc::InvalidArgument, "A_update_freq must be at least 1");
  rates_ = cholesky_default_rates(dim_, population_);
  if (cfg.c1) rates_.c1 = *cfg.c1;
  if (cfg.cmu) rates_.cmu = *cfg.cmu;
  if (cfg.cc) rates_.cc = *cfg.cc;
  if (cfg.cs) rates_.cs = *cfg.cs;
  if (cfg.damps) rates_.damps = *cfg.damps;
  if (rates_.c1 < 0 || rates_.cmu < 0 || rates_.c1 + rates_.cmu >= 1.0)
    throw Error(Errc::InvalidArgument, "need c1, cmu >= 0 and c1 + cmu < 1");
  m_ = cfg.init_mean.value_or(Vector::Zero(dim_));
  if (m_.size() != dim_) throw Error(Errc::DimensionMismatch, "initial mean has wrong length");
  pc_ = Vector::Zero(dim_);
  ps_ = Vector::Zero(dim_);
  A_ = Matrix::Identity(dim_, dim_);
  Ainv_ = Matrix::Identity(dim_, dim_);
}

Batch CholeskyCMA::do_ask() {
  z_.resize(population_, dim_);
  for (Eigen::Index i = 0; i < z_.size(); ++i) z_.data()[i] = rng_.normal();
  Batch x = sigma_ * (z_ * A_.transpose());
  x.rowwise() += m_.transpose();
  return x;
}

void CholeskyCMA::rank_one(double alpha, double beta, const Vector& u) {
  const double a = std::sqrt(alpha);
  const Vector v = Ainv_ * u;
  const double vv = v.squaredNorm();
  if (vv == 0.0 || beta == 0.0) {
    A_ *= a;
    Ainv_ /= a;
    return;
  }
  const double s = std::sqrt(1.0 + beta * vv / alpha);
  const Eigen::RowVectorXd vtAinv = v.transpose() * Ainv_;
  A_ *= a;
  A_.noalias() += (a / vv * (s - 1.0)) * u * v.transpose();
  Ainv_ /= a;
  Ainv_.noalias() -= (1.0 / (a * vv) * (1.0 - 1.0 / s)) * v * vtAinv;
}

void CholeskyCMA::do_tell(const Batch&, std::span<const double> scores) {
  const auto& r = rates_;
  const std::vector<int> order = ranking(scores);
  Vector zw = Vector::Zero(dim_);
  for (int i = 0; i < r.mu; ++i) zw += r.weights[i] * z_.row(order[i]).transpose();
  const Vector yw = A_ * zw;

  m_ += sigma_ * yw;
  ps_ = (1.0 - r.cs) * ps_ + std::sqrt(r.cs * (2.0 - r.cs) * r.mueff) * zw;
  const double ps_norm = ps_.norm();
  const double corr = std::sqrt(1.0 - std::pow(1.0 - r.cs, 2.0 * (t_ + 1)));
  const bool hsig = ps_norm / corr / r.chi_n < 1.4 + 2.0 / (dim_ + 1.0);
  pc_ = (1.0 - r.cc) * pc_;
  if (hsig) pc_ += std::sqrt(r.cc * (2.0 - r.cc) * r.mueff) * yw;

  if ((t_ + 1) % freq_ == 0 && (r.c1 > 0.0 || r.cmu > 0.0)) {
    std::vector<Vector> ys;
    if (r.cmu > 0.0)
      for (int i = 0; i < r.mu; ++i) ys.push_back(A_ * z_.row(order[i]).transpose());
    rank_one(1.0 - r.c1 - r.cmu, r.c1, pc_);
    for (int i = 0; i < static_cast<int>(ys.size()); ++i) rank_one(1.0, r.cmu * r.weights[i], ys[i]);
  }
  sigma_ *= std::exp(r.cs / r.damps * (ps_norm / r.chi_n - 1.0));
}

void CholeskyCMA::save_payload(BinaryWriter& w) const {
  const auto& r = rates_;
  w.u64(static_cast<std::uint64_t>(freq_));
  for (double x : {r.c1, r.cmu, r.cc, r.cs, r.damps, sigma_}) w.f64(x);
  w.vec(m_);
  w.vec(pc_);
  w.vec(ps_);
  w.mat(A_);
  w.mat(Ainv_);
  w.batch(z_);
}

void CholeskyCMA::load_payload(BinaryReader& rd) {
  rates_ = cholesky_default_rates(dim_, population_);
  auto& r = rates_;
  freq_ = static_cast<int>(rd.u64());
  r.c1 = rd.f64();
  r.cmu = rd.f64();
  r.cc = rd.f64();
  r.cs = rd.f64();
  r.damps = rd.f64();
  sigma_ = rd.f64();
  m_ = rd.vec();
  pc_ = rd.vec();
  ps_ = rd.vec();
  A_ = rd.mat();
  Ainv_ = rd.mat();
  z_ = rd.batch();
  if (m_.size() != dim_ || A_.rows() != dim_ || A_.cols() != dim_ || freq_ < 1)
    throw Error(Errc::CorruptData, "inconsistent CholeskyCMA snapshot");
}

}  // namespace evo
