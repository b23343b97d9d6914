#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

namespace evo {

RandomSearch::RandomSearch(const RandomSearchConfig& cfg, std::uint64_t seed)
    : Optimizer(cfg.dim, cfg.population, seed), sigma_(cfg.sigma0) {
  if (!(sigma_ >= 0.0)) throw Error(Errc::InvalidArgument, "sigma0 must be non-negative");
}

Batch RandomSearch::do_ask() {
  Batch x(population_, dim_);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = sigma_ * rng_.normal();
  return x;
}

void RandomSearch::save_payload(BinaryWriter& w) const { w.f64(sigma_); }

void RandomSearch::load_payload(BinaryReader& r) { sigma_ = r.f64(); }

}  // namespace evo
