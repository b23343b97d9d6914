#pragma once

#include "evo/rng.hpp"
#include "evo/types.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace evo {

// ------------------------------------------------------------ noise

struct NoiseSpec {
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

// max(0, (1 + alpha eps) r)
double noisy_wrap(double r, double alpha, double eps);
double noisy_wrap(double r, const NoiseSpec& spec, Rng& rng);

// Independent stream for evaluation `index` of generation `gen`.
Rng evaluation_stream(std::uint64_t seed, std::uint64_t gen, std::uint64_t index);

// ------------------------------------------------------------ quadrics

enum class DepthProfile { Shallow, Mid, Deep };

std::string profile_name(DepthProfile p);
DepthProfile parse_profile(const std::string& s);

struct QuadricLandscape {
  std::string id;
  Vector optimum;      // z*
  Vector spectrum;     // d values, descending, zero past `active`
  Matrix frame;        // d x active, orthonormal columns u_k
  double f_max = 0.0;
  int active = 0;

  int dim() const { return static_cast<int>(optimum.size()); }
};

double quadric_eval(const VecRef& z, const QuadricLandscape& L);

struct SuiteOptions {
  int count = 1;                 // landscapes per call
  double optimum_norm = 0.0;     // 0: the default sphere radius for d
  double baseline_fraction = 0.3;  // f(0) / f_max
  double f_max = 100.0;
  const Matrix* frame = nullptr;   // optional d x k basis (columns) to draw u_k from
};

// Condition numbers 1e9 / 1e6.5 / 1e4 and 2% / 10% / 50% active dims for
// shallow / mid / deep. Optima are drawn with curvature-weighted components.
std::vector<QuadricLandscape> make_landscape_suite(int d, DepthProfile profile, Rng& rng,
                                                   const SuiteOptions& opt = {});

// ------------------------------------------------------------ objectives

struct ScoreRecord {
  double raw = 0.0;
  double noisy = 0.0;
  double clean = 0.0;
};

class Objective {
 public:
  virtual ~Objective() = default;
  virtual int dim() const = 0;
  virtual std::vector<ScoreRecord> evaluate(const Batch& codes, int gen) = 0;
  virtual std::string id() const = 0;
};

class QuadricObjective final : public Objective {
 public:
  QuadricObjective(QuadricLandscape L, NoiseSpec noise);
  int dim() const override { return L_.dim(); }
  std::vector<ScoreRecord> evaluate(const Batch& codes, int gen) override;
  std::string id() const override { return L_.id; }
  const QuadricLandscape& landscape() const { return L_; }

 private:
  QuadricLandscape L_;
  NoiseSpec noise_;
};

// Scores are iid N(0, 1), independent of the code.
class NoiseOnlyObjective final : public Objective {
 public:
  NoiseOnlyObjective(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}
  int dim() const override { return dim_; }
  std::vector<ScoreRecord> evaluate(const Batch& codes, int gen) override;
  std::string id() const override { return "noise"; }

 private:
  int dim_;
  std::uint64_t seed_;
};

std::unique_ptr<Objective> noise_only_objective(int dim, std::uint64_t seed);

// ------------------------------------------------------------ normalization

struct NormalizedScores {
  std::map<std::string, std::vector<double>> scores;
  std::vector<std::string> excluded;  // units that never scored above 0
};

NormalizedScores normalize_scores(const std::map<std::string, std::vector<double>>& per_unit);

// ------------------------------------------------------------ external peer

// Line transport to an external scorer. receive() throws PeerTimeout or
// PeerCrash; it never returns a partial line.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(const std::string& line) = 0;
  virtual std::string receive(std::chrono::milliseconds timeout) = 0;
  virtual void close() {}
};

// Spawns argv[0] with pipes on stdin/stdout.
class SubprocessTransport final : public Transport {
 public:
  explicit SubprocessTransport(const std::vector<std::string>& argv);
  ~SubprocessTransport() override;
  void send(const std::string& line) override;
  std::string receive(std::chrono::milliseconds timeout) override;
  void close() override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

// In-process peer: each sent line is handed to `peer`, whose return value
// (if any) becomes the next received line. A throwing peer counts as a crash.
class LoopbackTransport final : public Transport {
 public:
  using Peer = std::function<std::optional<std::string>(const std::string&)>;
  explicit LoopbackTransport(Peer peer) : peer_(std::move(peer)) {}
  void send(const std::string& line) override;
  std::string receive(std::chrono::milliseconds timeout) override;

  int sent_count() const { return sent_; }

 private:
  Peer peer_;
  std::vector<std::string> inbox_;
  bool crashed_ = false;
  int sent_ = 0;
};

class ExternalObjective final : public Objective {
 public:
  ExternalObjective(std::unique_ptr<Transport> transport, int dim,
                    std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalObjective() override;
  int dim() const override { return dim_; }
  std::vector<ScoreRecord> evaluate(const Batch& codes, int gen) override;
  std::string id() const override { return "external"; }

  int requests_sent() const { return requests_; }
  void shutdown();

 private:
  std::unique_ptr<Transport> transport_;
  int dim_;
  std::chrono::milliseconds timeout_;
  int requests_ = 0;
  bool open_ = false;
};

std::unique_ptr<Objective> external_objective(std::unique_ptr<Transport> transport, int dim);

// Message encoding with 17 significant digits.
std::string encode_eval_request(int gen, const Batch& codes);
std::string encode_scores(int gen, const std::vector<double>& scores);

// Reference peer: replies to hello / eval / bye with score = z[0].
// Returns false once "bye" has been handled.
bool sample_peer_step(const std::string& line, std::string& reply);
int run_sample_peer(std::istream& in, std::ostream& out);

}  // namespace evo
