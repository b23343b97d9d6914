#include "evo/binio.hpp"
#include "evo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace evo {

Vector ga_selection_probabilities(std::span<const double> scores, double temperature) {
  const int n = static_cast<int>(scores.size());
  if (n == 0) throw Error(Errc::EmptyScores, "no candidates to select from");
  if (!(temperature > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be positive");
  const Eigen::Map<const Vector> s(scores.data(), n);
  const double mean = s.mean();
  const double sd = std::sqrt((s.array() - mean).square().mean());
  if (sd == 0.0 || !std::isfinite(temperature * sd)) return Vector::Constant(n, 1.0 / n);
  Vector p = ((s.array() - s.maxCoeff()) / (temperature * sd)).exp();
  return p / p.sum();
}

GeneticAlgorithm::GeneticAlgorithm(const GAConfig& cfg, std::uint64_t seed)
    : Optimizer(cfg.dim, cfg.population, seed), cfg_(cfg) {
  if (cfg.elite < 0 || cfg.elite >= cfg.population) throw Error(Errc::InvalidArgument, "elite count must lie in [0, B)");
  if (!(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
    throw Error(Errc::InvalidArgument, "mutation rate must lie in [0, 1]");
  if (!(cfg.mutation_scale >= 0.0)) throw Error(Errc::InvalidArgument, "mutation scale must be non-negative");
  if (!(cfg.temperature > 0.0)) throw Error(Errc::InvalidArgument, "temperature must be positive");
  if (cfg.parent_count < 0 || cfg.parent_count > cfg.population)
    throw Error(Errc::InvalidArgument, "parent count must lie in [0, B]");
  if (cfg.init_codes) {
    if (cfg.init_codes->rows() != population_ || cfg.init_codes->cols() != dim_)
      throw Error(Errc::DimensionMismatch, "initial codes must be B x d");
    pop_ = *cfg.init_codes;
  } else {
    pop_ = Batch::Zero(population_, dim_);
    for (Eigen::Index i = 0; i < pop_.size(); ++i)
      if (rng_.uniform() < cfg_.mutation_rate) pop_.data()[i] = cfg_.mutation_scale * rng_.normal();
  }
  cfg_.init_codes.reset();
}

Vector GeneticAlgorithm::mean() const { return pop_.colwise().mean().transpose(); }

Batch GeneticAlgorithm::do_ask() { return pop_; }

void GeneticAlgorithm::do_tell(const Batch& codes, std::span<const double> scores) {
  const int B = population_;
  std::vector<int> order(B);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });

  const int pool = cfg_.parent_count > 0 ? cfg_.parent_count : B;
  std::vector<double> pool_scores(pool);
  for (int i = 0; i < pool; ++i) pool_scores[i] = scores[order[i]];
  const Vector prob = ga_selection_probabilities(pool_scores, cfg_.temperature);
  std::discrete_distribution<int> pick(prob.data(), prob.data() + prob.size());

  Batch next(B, dim_);
  for (int i = 0; i < cfg_.elite; ++i) next.row(i) = codes.row(order[i]);
  for (int i = cfg_.elite; i < B; ++i) {
    const int a = order[pick(rng_)];
    const int b = order[pick(rng_)];
    for (int j = 0; j < dim_; ++j) {
      double g = rng_.uniform() < 0.5 ? codes(a, j) : codes(b, j);
      if (rng_.uniform() < cfg_.mutation_rate) g += cfg_.mutation_scale * rng_.normal();
      next(i, j) = g;
    }
  }
  pop_ = std::move(next);
}

void GeneticAlgorithm::save_payload(BinaryWriter& w) const {
  w.u64(static_cast<std::uint64_t>(cfg_.elite));
  w.u64(static_cast<std::uint64_t>(cfg_.parent_count));
  w.f64(cfg_.temperature);
  w.f64(cfg_.mutation_rate);
  w.f64(cfg_.mutation_scale);
  w.batch(pop_);
}

void GeneticAlgorithm::load_payload(BinaryReader& r) {
  cfg_.dim = dim_;
  cfg_.population = population_;
  cfg_.elite = static_cast<int>(r.u64());
  cfg_.parent_count = static_cast<int>(r.u64());
  cfg_.temperature = r.f64();
  cfg_.mutation_rate = r.f64();
  cfg_.mutation_scale = r.f64();
  pop_ = r.batch();
  if (pop_.rows() != population_ || pop_.cols() != dim_ || cfg_.elite >= population_)
    throw Error(Errc::CorruptData, "inconsistent GA snapshot");
}

}  // namespace evo
