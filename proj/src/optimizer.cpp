#include "evo/optimizers.hpp"

#include <cmath>

namespace evo {

std::string kind_name(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::SphereCMA: return "SphereCMA";
    case OptimizerKind::CholeskyCMA: return "CholeskyCMA";
    case OptimizerKind::DiagonalCMA: return "DiagonalCMA";
    case OptimizerKind::GA: return "GA";
    case OptimizerKind::RandomSearch: return "RandomSearch";
  }
  return "Unknown";
}

Optimizer::Optimizer(int dim, int population, std::uint64_t seed)
    : rng_(seed), dim_(dim), population_(population) {
  if (dim < 1) throw Error(Errc::InvalidArgument, "dimension must be positive");
  if (population < 1) throw Error(Errc::InvalidArgument, "population must be positive");
}

Batch Optimizer::ask() {
  if (pending_) throw Error(Errc::ProtocolViolation, "ask() called twice without tell()");
  last_ = do_ask();
  pending_ = true;
  return last_;
}

void Optimizer::tell(const Batch& codes, std::span<const double> scores) {
  if (!pending_) throw Error(Errc::ProtocolViolation, "tell() without a preceding ask()");
  if (codes.rows() != static_cast<Eigen::Index>(scores.size()))
    throw Error(Errc::ShapeMismatch, "number of codes and scores differ");
  if (codes.rows() != last_.rows() || codes.cols() != last_.cols())
    throw Error(Errc::ShapeMismatch, "codes do not match the asked batch");
  for (double s : scores)
    if (!std::isfinite(s)) throw Error(Errc::NonFiniteScore, "scores must be finite");
  do_tell(codes, scores);
  pending_ = false;
  ++t_;
}

CovMetrics isotropy_check(const Optimizer& opt) {
  if (auto* c = dynamic_cast<const CholeskyCMA*>(&opt)) return cov_metrics_cholesky(c->factor());
  if (auto* d = dynamic_cast<const DiagonalCMA*>(&opt)) return cov_metrics_diagonal(d->diagonal());
  throw Error(Errc::Unsupported, kind_name(opt.kind()) + " has no adapted covariance");
}

}  // namespace evo
