#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace evo {

DiagonalCMA::DiagonalCMA(const DiagonalConfig& cfg, std::uint64_t seed)
    : Optimizer(cfg.dim, cfg.population, seed), sigma_(cfg.sigma0) {
  if (!(cfg.sigma0 >= 0.0)) throw Error(Errc::InvalidArgument, "sigma0 must be non-negative");
  rates_ = cholesky_default_rates(dim_, population_);
  const double N = dim_;
  const double mueff = rates_.mueff;
  const double boost = cfg.boost.value_or((N + 2.0) / 3.0);
  rates_.c1 = std::min(1.0, boost * 2.0 / ((N + 1.3) * (N + 1.3) + mueff));
  rates_.cmu = std::min(1.0 - rates_.c1, boost * 2.0 * (mueff - 2.0 + 1.0 / mueff) / ((N + 2.0) * (N + 2.0) + mueff));
  if (cfg.c1) rates_.c1 = *cfg.c1;
  if (cfg.cmu) rates_.cmu = *cfg.cmu;
  if (cfg.cc) rates_.cc = *cfg.cc;
  if (cfg.cs) rates_.cs = *cfg.cs;
  if (cfg.damps) rates_.damps = *cfg.damps;
  if (rates_.c1 < 0 || rates_.cmu < 0 || rates_.c1 + rates_.cmu > 1.0)
    throw Error(Errc::InvalidArgument, "need c1, cmu >= 0 and c1 + cmu <= 1");
  m_ = cfg.init_mean.value_or(Vector::Zero(dim_));
  if (m_.size() != dim_) throw Error(Errc::DimensionMismatch, "initial mean has wrong length");
  pc_ = Vector::Zero(dim_);
  ps_ = Vector::Zero(dim_);
  c_ = Vector::Ones(dim_);
}

Batch DiagonalCMA::do_ask() {
  z_.resize(population_, dim_);
  for (Eigen::Index i = 0; i < z_.size(); ++i) z_.data()[i] = rng_.normal();
  const Eigen::RowVectorXd scale = c_.cwiseSqrt().transpose() * sigma_;
  Batch x = z_.array().rowwise() * scale.array();
  x.rowwise() += m_.transpose();
  return x;
}

void DiagonalCMA::do_tell(const Batch&, std::span<const double> scores) {
  const auto& r = rates_;
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });

  const Vector sd = c_.cwiseSqrt();
  Vector zw = Vector::Zero(dim_);
  Vector yy = Vector::Zero(dim_);  // sum of w_i y_i^2
  for (int i = 0; i < r.mu; ++i) {
    const Vector zi = z_.row(order[i]).transpose();
    zw += r.weights[i] * zi;
    yy += r.weights[i] * (sd.cwiseProduct(zi)).cwiseAbs2();
  }
  const Vector yw = sd.cwiseProduct(zw);

  m_ += sigma_ * yw;
  ps_ = (1.0 - r.cs) * ps_ + std::sqrt(r.cs * (2.0 - r.cs) * r.mueff) * zw;
  const double ps_norm = ps_.norm();
  const double corr = std::sqrt(1.0 - std::pow(1.0 - r.cs, 2.0 * (t_ + 1)));
  const bool hsig = ps_norm / corr / r.chi_n < 1.4 + 2.0 / (dim_ + 1.0);
  pc_ = (1.0 - r.cc) * pc_;
  if (hsig) pc_ += std::sqrt(r.cc * (2.0 - r.cc) * r.mueff) * yw;

  c_ = (1.0 - r.c1 - r.cmu) * c_ + r.c1 * pc_.cwiseAbs2() + r.cmu * yy;
  c_ = c_.cwiseMax(1e-300);  // guard against underflow to zero
  sigma_ *= std::exp(r.cs / r.damps * (ps_norm / r.chi_n - 1.0));
}

void DiagonalCMA::save_payload(BinaryWriter& w) const {
  const auto& r = rates_;
  for (double x : {r.c1, r.cmu, r.cc, r.cs, r.damps, sigma_}) w.f64(x);
  w.vec(m_);
  w.vec(pc_);
  w.vec(ps_);
  w.vec(c_);
  w.batch(z_);
}

void DiagonalCMA::load_payload(BinaryReader& rd) {
  rates_ = cholesky_default_rates(dim_, population_);
  auto& r = rates_;
  r.c1 = rd.f64();
  r.cmu = rd.f64();
  r.cc = rd.f64();
  r.cs = rd.f64();
  r.damps = rd.f64();
  sigma_ = rd.f64();
  m_ = rd.vec();
  pc_ = rd.vec();
  ps_ = rd.vec();
  c_ = rd.vec();
  z_ = rd.batch();
  if (m_.size() != dim_ || c_.size() != dim_) throw Error(Errc::CorruptData, "inconsistent DiagonalCMA snapshot");
}

}  // namespace evo
