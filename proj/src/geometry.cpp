#include "evo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace evo {

std::string_view errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::NotTangent: return "NotTangent";
    case Errc::NormMismatch: return "NormMismatch";
    case Errc::DegenerateArc: return "DegenerateArc";
    case Errc::EmptyScores: return "EmptyScores";
    case Errc::ProtocolViolation: return "ProtocolViolation";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NonFiniteScore: return "NonFiniteScore";
    case Errc::Unsupported: return "Unsupported";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::AllZeroUnit: return "AllZeroUnit";
    case Errc::PeerTimeout: return "PeerTimeout";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::PeerCrash: return "PeerCrash";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::DegenerateTrajectory: return "DegenerateTrajectory";
    case Errc::FitDiverged: return "FitDiverged";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::EmptyDirectionSet: return "EmptyDirectionSet";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::IoError: return "IoError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::CorruptData: return "CorruptData";
  }
  return "Unknown";
}

double default_radius(int dim) { return 4.6875 * std::sqrt(static_cast<double>(dim)); }

SphereParams SphereParams::defaults(int dim, int population) {
  SphereParams p;
  p.dim = dim;
  p.radius = default_radius(dim);
  p.population = population;
  return p;
}

int SphereParams::effective_cutoff() const {
  return cutoff > 0 ? cutoff : std::max(1, population / 2);
}

void SphereParams::validate() const {
  if (!(radius > 0.0)) throw Error(Errc::InvalidArgument, "sphere radius must be positive");
  if (dim < 1) throw Error(Errc::InvalidArgument, "dimension must be positive");
  if (!(lr > 0.0)) throw Error(Errc::InvalidArgument, "learning ratio must be positive");
  if (population < 1) throw Error(Errc::InvalidArgument, "population must be positive");
  const int k = effective_cutoff();
  if (k < 1 || k > population) throw Error(Errc::InvalidArgument, "cutoff must lie in [1, B]");
}

DecaySchedule DecaySchedule::exponential(int generations) {
  return {DecayKind::Exponential, 0.4, 0.05, std::max(1.0, generations / 3.0)};
}

DecaySchedule DecaySchedule::inverse() { return {DecayKind::Inverse, 0.4, 0.0, 10.0}; }

void DecaySchedule::validate() const {
  if (!(tau > 0.0)) throw Error(Errc::InvalidArgument, "decay tau must be positive");
  if (!(mu_min >= 0.0) || !(mu0 > mu_min)) throw Error(Errc::InvalidArgument, "need mu0 > mu_min >= 0");
  if (!(mu0 < std::numbers::pi)) throw Error(Errc::InvalidArgument, "mu0 must be below pi");
}

double decay_eval(const DecaySchedule& s, int t) {
  if (t < 0) throw Error(Errc::OutOfRange, "generation must be non-negative");
  if (s.kind == DecayKind::Exponential) return s.mu_min + (s.mu0 - s.mu_min) * std::exp(-t / s.tau);
  return s.mu0 / (1.0 + t / s.tau);
}

Vector exp_map(const VecRef& m, const VecRef& v, double mu) {
  if (m.size() != v.size()) throw Error(Errc::DimensionMismatch, "exp_map operands differ in length");
  const double nm = m.norm();
  const double nv = v.norm();
  if (nm == 0.0 || nv == 0.0) throw Error(Errc::ZeroVector, "exp_map needs non-zero m and v");
  if (std::abs(m.dot(v)) > 1e-8 * nm * nv) throw Error(Errc::NotTangent, "v is not tangent at m");
  return nm * (std::cos(mu) / nm * m + std::sin(mu) / nv * v);
}

Vector slerp(const VecRef& m, const VecRef& p, double t) {
  if (m.size() != p.size()) throw Error(Errc::DimensionMismatch, "slerp operands differ in length");
  const double nm = m.norm();
  const double np = p.norm();
  if (nm == 0.0 || np == 0.0) throw Error(Errc::ZeroVector, "slerp endpoints must be non-zero");
  if (std::abs(nm - np) > 1e-8 * std::max(nm, np)) throw Error(Errc::NormMismatch, "slerp endpoints differ in norm");
  const double theta = angle_between(m, p);
  if (theta < 1e-9) return m;  // no arc to follow
  if (theta > std::numbers::pi - 1e-6) throw Error(Errc::DegenerateArc, "antipodal endpoints");
  const double s = std::sin(theta);
  return (std::sin((1.0 - t) * theta) / s) * m + (std::sin(t * theta) / s) * p;
}

Vector tangent_project(const VecRef& u, const VecRef& m) {
  if (u.size() != m.size()) throw Error(Errc::DimensionMismatch, "tangent_project operands differ in length");
  const double mm = m.squaredNorm();
  if (mm == 0.0) throw Error(Errc::ZeroVector, "cannot project onto the tangent space of 0");
  Vector v = u - (m.dot(u) / mm) * m;
  // One correction pass removes the residual left by cancellation.
  v -= (m.dot(v) / mm) * m;
  return v;
}

Vector rank_weight(std::span<const double> scores, int K) {
  const int B = static_cast<int>(scores.size());
  if (B == 0) throw Error(Errc::EmptyScores, "rank_weight needs at least one score");
  if (K < 1 || K > B) throw Error(Errc::InvalidArgument, "K must lie in [1, B]");
  std::vector<int> order(B);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
  Vector w = Vector::Zero(B);
  double total = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double raw = std::log(K + 0.5) - std::log(static_cast<double>(k));
    w[order[k - 1]] = raw;
    total += raw;
  }
  return w / total;
}

double angle_between(const VecRef& a, const VecRef& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "angle undefined for a zero vector");
  // atan2 form stays accurate near 0 and pi.
  const double c = a.dot(b) / (na * nb);
  const double s = (a / na - c * (b / nb)).norm();
  return std::atan2(s, c);
}

}  // namespace evo
