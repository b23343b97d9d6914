#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

namespace evo {

SphereConfig SphereConfig::defaults(int dim, int population, int generations, DecayKind kind) {
  SphereConfig c;
  c.params = SphereParams::defaults(dim, population);
  c.decay = kind == DecayKind::Exponential ? DecaySchedule::exponential(generations) : DecaySchedule::inverse();
  return c;
}

SphereCMA::SphereCMA(const SphereConfig& cfg, std::uint64_t seed)
    : Optimizer(cfg.params.dim, cfg.params.population, seed), cfg_(cfg) {
  cfg_.params.validate();
  cfg_.decay.validate();
  const double R = cfg_.params.radius;
  if (cfg_.init_center) {
    if (cfg_.init_center->size() != dim_) throw Error(Errc::DimensionMismatch, "initial center has wrong length");
    const double n = cfg_.init_center->norm();
    if (n == 0.0) throw Error(Errc::ZeroVector, "initial center must be non-zero");
    center_ = *cfg_.init_center * (R / n);
  } else {
    center_.resize(dim_);
    for (auto& x : center_) x = rng_.normal();
    center_ *= R / center_.norm();
  }
}

std::optional<double> SphereCMA::step_size() const {
  return t_ == 0 ? std::nullopt : std::optional<double>(decay_eval(cfg_.decay, t_));
}

Batch SphereCMA::do_ask() {
  const double R = cfg_.params.radius;
  Batch out(population_, dim_);
  out.row(0) = center_.transpose();
  Vector u(dim_);
  if (t_ == 0) {
    // Isotropic shell sample; the first row doubles as the initial center.
    for (int i = 1; i < population_; ++i) {
      for (auto& x : u) x = rng_.normal();
      out.row(i) = (u * (R / u.norm())).transpose();
    }
    return out;
  }
  const double mu = decay_eval(cfg_.decay, t_);
  for (int i = 1; i < population_; ++i) {
    for (auto& x : u) x = rng_.normal();
    out.row(i) = exp_map(center_, tangent_project(u, center_), mu).transpose();
  }
  return out;
}

void SphereCMA::do_tell(const Batch& codes, std::span<const double> scores) {
  const double R = cfg_.params.radius;
  const Vector w = rank_weight(scores, cfg_.params.effective_cutoff());
  Vector mw = codes.transpose() * w;
  const double n = mw.norm();
  if (n == 0.0) throw Error(Errc::ZeroVector, "weighted mean collapsed to the origin");
  mw *= R / n;
  center_ = slerp(center_, mw, cfg_.params.lr);
  center_ *= R / center_.norm();  // keep rounding drift off the sphere
}

void SphereCMA::save_payload(BinaryWriter& w) const {
  const auto& p = cfg_.params;
  w.f64(p.radius);
  w.f64(p.lr);
  w.u64(static_cast<std::uint64_t>(p.cutoff));
  w.u32(static_cast<std::uint32_t>(cfg_.decay.kind));
  w.f64(cfg_.decay.mu0);
  w.f64(cfg_.decay.mu_min);
  w.f64(cfg_.decay.tau);
  w.vec(center_);
}

void SphereCMA::load_payload(BinaryReader& r) {
  auto& p = cfg_.params;
  p.dim = dim_;
  p.population = population_;
  p.radius = r.f64();
  p.lr = r.f64();
  p.cutoff = static_cast<int>(r.u64());
  cfg_.decay.kind = static_cast<DecayKind>(r.u32());
  cfg_.decay.mu0 = r.f64();
  cfg_.decay.mu_min = r.f64();
  cfg_.decay.tau = r.f64();
  center_ = r.vec();
  p.validate();
  cfg_.decay.validate();
  if (center_.size() != dim_) throw Error(Errc::CorruptData, "center length mismatch");
}

}  // namespace evo
