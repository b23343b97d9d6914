#include "evo/objectives.hpp"

#include "evo/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace evo {

double noisy_wrap(double r, double alpha, double eps) { return std::max(0.0, (1.0 + alpha * eps) * r); }

double noisy_wrap(double r, const NoiseSpec& spec, Rng& rng) {
  if (spec.alpha < 0.0) throw Error(Errc::InvalidArgument, "noise level must be non-negative");
  return noisy_wrap(r, spec.alpha, rng.normal());
}

Rng evaluation_stream(std::uint64_t seed, std::uint64_t gen, std::uint64_t index) {
  return Rng(derive_seed(seed, {gen, index}));
}

std::string profile_name(DepthProfile p) {
  switch (p) {
    case DepthProfile::Shallow: return "shallow";
    case DepthProfile::Mid: return "mid";
    case DepthProfile::Deep: return "deep";
  }
  return "unknown";
}

DepthProfile parse_profile(const std::string& s) {
  if (s == "shallow") return DepthProfile::Shallow;
  if (s == "mid") return DepthProfile::Mid;
  if (s == "deep") return DepthProfile::Deep;
  throw Error(Errc::ConfigError, "unknown depth profile '" + s + "'");
}

double quadric_eval(const VecRef& z, const QuadricLandscape& L) {
  if (z.size() != L.optimum.size()) throw Error(Errc::DimensionMismatch, "code length differs from landscape dimension");
  const Vector p = L.frame.transpose() * (z - L.optimum);
  const double q = (L.spectrum.head(L.active).array() * p.array().square()).sum();
  return std::max(0.0, L.f_max - q);
}

std::vector<QuadricLandscape> make_landscape_suite(int d, DepthProfile profile, Rng& rng, const SuiteOptions& opt) {
  if (d < 16) throw Error(Errc::InvalidArgument, "landscape suites need d >= 16");
  if (opt.count < 1) throw Error(Errc::InvalidArgument, "count must be positive");
  if (!(opt.baseline_fraction >= 0.0 && opt.baseline_fraction < 1.0))
    throw Error(Errc::InvalidArgument, "baseline fraction must lie in [0, 1)");
  double frac = 0.0, kappa = 0.0;
  switch (profile) {
    case DepthProfile::Shallow: frac = 0.02; kappa = 1e9; break;
    case DepthProfile::Mid: frac = 0.10; kappa = std::pow(10.0, 6.5); break;
    case DepthProfile::Deep: frac = 0.50; kappa = 1e4; break;
  }
  const int a = std::max(2, static_cast<int>(std::lround(frac * d)));
  if (opt.frame && (opt.frame->rows() != d || opt.frame->cols() < a))
    throw Error(Errc::DimensionMismatch, "supplied frame must be d x k with k >= active dims");
  const double rho = opt.optimum_norm > 0.0 ? opt.optimum_norm : default_radius(d);

  std::vector<QuadricLandscape> out;
  for (int n = 0; n < opt.count; ++n) {
    QuadricLandscape L;
    L.id = profile_name(profile) + "-" + std::to_string(n);
    L.active = a;
    Vector lam(a);
    for (int k = 0; k < a; ++k) lam[k] = std::pow(kappa, -static_cast<double>(k) / (a - 1));

    if (opt.frame) {
      L.frame = opt.frame->leftCols(a);
    } else {
      Matrix g(d, a);
      for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
      Eigen::HouseholderQR<Matrix> qr(g);
      L.frame = qr.householderQ() * Matrix::Identity(d, a);
    }
    // Optimum coordinates scale with the curvature they sit in.
    Vector c(a);
    for (int k = 0; k < a; ++k) c[k] = std::sqrt(lam[k]) * rng.normal();
    c *= rho / c.norm();
    L.optimum = L.frame * c;

    const double q = (lam.array() * c.array().square()).sum();
    const double scale = opt.f_max * (1.0 - opt.baseline_fraction) / q;
    L.spectrum = Vector::Zero(d);
    L.spectrum.head(a) = lam * scale;
    L.f_max = opt.f_max;
    out.push_back(std::move(L));
  }
  return out;
}

QuadricObjective::QuadricObjective(QuadricLandscape L, NoiseSpec noise) : L_(std::move(L)), noise_(noise) {
  if (noise_.alpha < 0.0) throw Error(Errc::InvalidArgument, "noise level must be non-negative");
}

std::vector<ScoreRecord> QuadricObjective::evaluate(const Batch& codes, int gen) {
  if (codes.cols() != L_.dim()) throw Error(Errc::DimensionMismatch, "code length differs from landscape dimension");
  const Batch diff = codes.rowwise() - L_.optimum.transpose();
  const Matrix p = diff * L_.frame;
  const Vector lam = L_.spectrum.head(L_.active);
  std::vector<ScoreRecord> out(codes.rows());
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    const double q = (p.row(i).array().square() * lam.transpose().array()).sum();
    const double r = std::max(0.0, L_.f_max - q);
    Rng s = evaluation_stream(noise_.seed, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i));
    out[i] = {r, noisy_wrap(r, noise_, s), r};
  }
  return out;
}

std::vector<ScoreRecord> NoiseOnlyObjective::evaluate(const Batch& codes, int gen) {
  if (codes.cols() != dim_) throw Error(Errc::DimensionMismatch, "code length differs from objective dimension");
  std::vector<ScoreRecord> out(codes.rows());
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    Rng s = evaluation_stream(seed_, static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i));
    const double e = s.normal();
    out[i] = {e, e, e};
  }
  return out;
}

std::unique_ptr<Objective> noise_only_objective(int dim, std::uint64_t seed) {
  return std::make_unique<NoiseOnlyObjective>(dim, seed);
}

NormalizedScores normalize_scores(const std::map<std::string, std::vector<double>>& per_unit) {
  NormalizedScores out;
  for (const auto& [unit, scores] : per_unit) {
    double mx = 0.0;
    for (double s : scores) mx = std::max(mx, s);
    if (!(mx > 0.0)) {
      out.excluded.push_back(unit);
      continue;
    }
    std::vector<double> norm(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) norm[i] = scores[i] == mx ? 1.0 : scores[i] / mx;
    out.scores.emplace(unit, std::move(norm));
  }
  return out;
}

}  // namespace evo
