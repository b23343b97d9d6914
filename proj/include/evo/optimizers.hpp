#pragma once

#include "evo/diagnostics.hpp"
#include "evo/geometry.hpp"
#include "evo/rng.hpp"
#include "evo/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evo {

class BinaryWriter;
class BinaryReader;

enum class OptimizerKind : std::uint32_t {
  SphereCMA = 1,
  CholeskyCMA = 2,
  DiagonalCMA = 3,
  GA = 4,
  RandomSearch = 5,
};

std::string kind_name(OptimizerKind k);

// Ask/tell base. ask() and tell() must alternate; tell() must receive the
// batch shape handed out by the preceding ask().
class Optimizer {
 public:
  virtual ~Optimizer() = default;

  Batch ask();
  void tell(const Batch& codes, std::span<const double> scores);

  int generation() const { return t_; }
  int dim() const { return dim_; }
  int population() const { return population_; }
  bool awaiting_tell() const { return pending_; }

  // Centre of the current proposal distribution.
  virtual Vector mean() const = 0;
  virtual std::optional<double> step_size() const = 0;
  virtual OptimizerKind kind() const = 0;

  // Versioned little-endian snapshot ("EVOS").
  void save(std::ostream& os) const;

 protected:
  Optimizer(int dim, int population, std::uint64_t seed);

  virtual Batch do_ask() = 0;
  virtual void do_tell(const Batch& codes, std::span<const double> scores) = 0;
  virtual void save_payload(BinaryWriter& w) const = 0;
  virtual void load_payload(BinaryReader& r) = 0;

  Rng rng_;
  int dim_;
  int population_;
  int t_ = 0;
  bool pending_ = false;
  Batch last_;

  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);
};

std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

// ---------------------------------------------------------------- SphereCMA

struct SphereConfig {
  SphereParams params;
  DecaySchedule decay;
  std::optional<Vector> init_center;  // rescaled to the sphere

  static SphereConfig defaults(int dim, int population = 40, int generations = 75,
                               DecayKind kind = DecayKind::Exponential);
};

class SphereCMA final : public Optimizer {
 public:
  SphereCMA(const SphereConfig& cfg, std::uint64_t seed);

  Vector mean() const override { return center_; }
  std::optional<double> step_size() const override;  // current angular step
  OptimizerKind kind() const override { return OptimizerKind::SphereCMA; }

  const SphereConfig& config() const { return cfg_; }

 protected:
  Batch do_ask() override;
  void do_tell(const Batch& codes, std::span<const double> scores) override;
  void save_payload(BinaryWriter& w) const override;
  void load_payload(BinaryReader& r) override;

 private:
  SphereCMA() : Optimizer(1, 1, 0) {}
  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

  SphereConfig cfg_;
  Vector center_;
};

// -------------------------------------------------------------- CholeskyCMA

// Rates left empty take the reference defaults for (dim, population).
struct CholeskyConfig {
  int dim = 0;
  int population = 40;
  double sigma0 = 3.0;
  int a_update_freq = 10;
  std::optional<double> c1, cmu, cc, cs, damps;
  std::optional<Vector> init_mean;
};

struct CmaRates {
  int mu = 0;
  Vector weights;
  double mueff = 0, cc = 0, cs = 0, c1 = 0, cmu = 0, damps = 0, chi_n = 0;
};

CmaRates cholesky_default_rates(int dim, int population);

class CholeskyCMA final : public Optimizer {
 public:
  CholeskyCMA(const CholeskyConfig& cfg, std::uint64_t seed);

  Vector mean() const override { return m_; }
  std::optional<double> step_size() const override { return sigma_; }
  OptimizerKind kind() const override { return OptimizerKind::CholeskyCMA; }

  const Matrix& factor() const { return A_; }
  const Matrix& inverse_factor() const { return Ainv_; }
  const Vector& path_c() const { return pc_; }
  const Vector& path_sigma() const { return ps_; }
  const CmaRates& rates() const { return rates_; }
  int a_update_freq() const { return freq_; }

 protected:
  Batch do_ask() override;
  void do_tell(const Batch& codes, std::span<const double> scores) override;
  void save_payload(BinaryWriter& w) const override;
  void load_payload(BinaryReader& r) override;

 private:
  CholeskyCMA() : Optimizer(1, 1, 0) {}
  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

  // C <- alpha C + beta u u^T applied to A and its inverse.
  void rank_one(double alpha, double beta, const Vector& u);

  CmaRates rates_;
  int freq_ = 10;
  Vector m_, pc_, ps_;
  double sigma_ = 3.0;
  Matrix A_, Ainv_;
  Batch z_;  // standard-normal draws behind the last batch
};

// -------------------------------------------------------------- DiagonalCMA

struct DiagonalConfig {
  int dim = 0;
  int population = 40;
  double sigma0 = 3.0;
  std::optional<double> boost;  // default (d + 2) / 3
  std::optional<double> c1, cmu, cc, cs, damps;
  std::optional<Vector> init_mean;
};

class DiagonalCMA final : public Optimizer {
 public:
  DiagonalCMA(const DiagonalConfig& cfg, std::uint64_t seed);

  Vector mean() const override { return m_; }
  std::optional<double> step_size() const override { return sigma_; }
  OptimizerKind kind() const override { return OptimizerKind::DiagonalCMA; }

  const Vector& diagonal() const { return c_; }
  const CmaRates& rates() const { return rates_; }

 protected:
  Batch do_ask() override;
  void do_tell(const Batch& codes, std::span<const double> scores) override;
  void save_payload(BinaryWriter& w) const override;
  void load_payload(BinaryReader& r) override;

 private:
  DiagonalCMA() : Optimizer(1, 1, 0) {}
  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

  CmaRates rates_;
  Vector m_, pc_, ps_, c_;
  double sigma_ = 3.0;
  Batch z_;
};

// ----------------------------------------------------------------------- GA

struct GAConfig {
  int dim = 0;
  int population = 40;
  int elite = 10;
  int parent_count = 0;  // candidates eligible as parents; 0 means all
  double temperature = 0.7;
  double mutation_rate = 0.25;
  double mutation_scale = 0.75;
  std::optional<Batch> init_codes;  // default: mutants of the origin
};

// Softmax of standardized scores; temperature is in units of the score spread.
Vector ga_selection_probabilities(std::span<const double> scores, double temperature);

class GeneticAlgorithm final : public Optimizer {
 public:
  GeneticAlgorithm(const GAConfig& cfg, std::uint64_t seed);

  Vector mean() const override;
  std::optional<double> step_size() const override { return std::nullopt; }
  OptimizerKind kind() const override { return OptimizerKind::GA; }

  const Batch& population_codes() const { return pop_; }

 protected:
  Batch do_ask() override;
  void do_tell(const Batch& codes, std::span<const double> scores) override;
  void save_payload(BinaryWriter& w) const override;
  void load_payload(BinaryReader& r) override;

 private:
  GeneticAlgorithm() : Optimizer(1, 1, 0) {}
  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

  GAConfig cfg_;
  Batch pop_;
};

// ------------------------------------------------------------- RandomSearch

struct RandomSearchConfig {
  int dim = 0;
  int population = 40;
  double sigma0 = 1.0;
};

class RandomSearch final : public Optimizer {
 public:
  RandomSearch(const RandomSearchConfig& cfg, std::uint64_t seed);

  Vector mean() const override { return Vector::Zero(dim_); }
  std::optional<double> step_size() const override { return sigma_; }
  OptimizerKind kind() const override { return OptimizerKind::RandomSearch; }

 protected:
  Batch do_ask() override;
  void do_tell(const Batch&, std::span<const double>) override {}
  void save_payload(BinaryWriter& w) const override;
  void load_payload(BinaryReader& r) override;

 private:
  RandomSearch() : Optimizer(1, 1, 0) {}
  friend std::unique_ptr<Optimizer> load_optimizer(std::istream& is);

  double sigma_ = 1.0;
};

// ----------------------------------------------------------------- isotropy

// Kappa and Delta of the adapted exploration covariance.
CovMetrics isotropy_check(const Optimizer& opt);

}  // namespace evo
