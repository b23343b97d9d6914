#include "evo/binio.hpp"
#include "evo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace evo {

void EigenFrame::validate(double tol) const {
  if (basis.rows() == 0 || basis.cols() == 0) throw Error(Errc::InvalidArgument, "empty eigenframe");
  if (eigenvalues.size() != basis.rows()) throw Error(Errc::DimensionMismatch, "one eigenvalue per basis row required");
  if (basis.rows() > basis.cols()) throw Error(Errc::InvalidArgument, "more basis vectors than dimensions");
  const Matrix gram = basis * basis.transpose();
  const double err = (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (err > tol) throw Error(Errc::InvalidArgument, "basis rows are not orthonormal");
  for (Eigen::Index i = 1; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] > eigenvalues[i - 1]) throw Error(Errc::InvalidArgument, "eigenvalues must be descending");
}

EigenFrame make_synthetic_frame(int d, int k, double kappa, Rng& rng) {
  if (d < 1 || k < 1 || k > d) throw Error(Errc::InvalidArgument, "need 1 <= k <= d");
  if (!(kappa >= 1.0)) throw Error(Errc::InvalidArgument, "kappa must be >= 1");
  Matrix g(d, k);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, k);
  EigenFrame f;
  f.basis = q.transpose();
  f.eigenvalues.resize(k);
  for (int i = 0; i < k; ++i) f.eigenvalues[i] = k == 1 ? 1.0 : std::pow(kappa, -static_cast<double>(i) / (k - 1));
  f.cutoff = std::min(800, k);
  return f;
}

void write_eigenframe(const std::filesystem::path& path, const EigenFrame& frame) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::IoError, "cannot open " + path.string());
  os << "EIGENFRAME v1 d=" << frame.dim() << " k=" << frame.size() << "\n";
  BinaryWriter w(os);
  for (Eigen::Index i = 0; i < frame.eigenvalues.size(); ++i) w.f64(frame.eigenvalues[i]);
  for (Eigen::Index r = 0; r < frame.basis.rows(); ++r)
    for (Eigen::Index c = 0; c < frame.basis.cols(); ++c) w.f64(frame.basis(r, c));
  if (!os) throw Error(Errc::IoError, "write failed for " + path.string());
}

EigenFrame read_eigenframe(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string tag, version, dtok, ktok;
  hs >> tag >> version >> dtok >> ktok;
  if (tag != "EIGENFRAME" || version != "v1" || dtok.rfind("d=", 0) != 0 || ktok.rfind("k=", 0) != 0)
    throw Error(Errc::CorruptData, "bad eigenframe header: " + header);
  long d = 0, k = 0;
  try {
    d = std::stol(dtok.substr(2));
    k = std::stol(ktok.substr(2));
  } catch (const std::exception&) {
    throw Error(Errc::CorruptData, "bad eigenframe header: " + header);
  }
  if (d < 1 || k < 1 || k > d || d > (1L << 20)) throw Error(Errc::CorruptData, "bad eigenframe dimensions");
  BinaryReader r(is);
  EigenFrame f;
  f.eigenvalues.resize(k);
  for (long i = 0; i < k; ++i) f.eigenvalues[i] = r.f64();
  f.basis.resize(k, d);
  for (long i = 0; i < k; ++i)
    for (long j = 0; j < d; ++j) f.basis(i, j) = r.f64();
  f.cutoff = static_cast<int>(std::min<long>(800, k));
  return f;
}

AlignmentResult eigenframe_projection(const Matrix& directions, const EigenFrame& frame, int cutoff) {
  if (directions.rows() == 0) throw Error(Errc::EmptyDirectionSet, "no directions supplied");
  if (directions.cols() != frame.dim()) throw Error(Errc::DimensionMismatch, "direction length differs from frame dimension");
  AlignmentResult r;
  r.amplitudes = (frame.basis * directions.transpose()).cwiseAbs().rowwise().mean();
  const int k = frame.size();
  r.cutoff = std::clamp(cutoff > 0 ? cutoff : frame.cutoff, 1, k);

  std::vector<double> a, loglam;
  for (int i = 0; i < r.cutoff; ++i) {
    if (frame.eigenvalues[i] <= 0.0) continue;
    a.push_back(r.amplitudes[i]);
    loglam.push_back(std::log(frame.eigenvalues[i]));
  }
  if (a.size() >= 3) {
    r.pearson_r = pearson(a, loglam);
    r.pearson_p = pearson_p(r.pearson_r, static_cast<int>(a.size()));
  }
  if (r.cutoff < k) {
    std::vector<double> top(r.amplitudes.data(), r.amplitudes.data() + r.cutoff);
    std::vector<double> rest(r.amplitudes.data() + r.cutoff, r.amplitudes.data() + k);
    const KsResult ks = ks_2samp(top, rest);
    r.ks_statistic = ks.statistic;
    r.ks_p = ks.p;
  }
  return r;
}

Matrix shuffle_directions(const Matrix& directions, Rng& rng) {
  Matrix out = directions;
  std::vector<double> row(directions.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) row[j] = out(i, j);
    std::shuffle(row.begin(), row.end(), rng);
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = row[j];
  }
  return out;
}

ShuffleControl alignment_shuffle_test(const Matrix& directions, const EigenFrame& frame, int cutoff,
                                      int n_shuffles, Rng& rng) {
  if (n_shuffles < 1) throw Error(Errc::InvalidArgument, "need at least one shuffle");
  ShuffleControl s;
  s.observed = eigenframe_projection(directions, frame, cutoff).pearson_r;
  int exceed = 0;
  for (int i = 0; i < n_shuffles; ++i) {
    const double r = eigenframe_projection(shuffle_directions(directions, rng), frame, cutoff).pearson_r;
    s.null.push_back(r);
    if (r >= s.observed) ++exceed;
  }
  s.p = (1.0 + exceed) / (1.0 + n_shuffles);
  return s;
}

SingularValueNull shuffle_singular_values(const Matrix& directions, int top, int n_shuffles, Rng& rng) {
  if (directions.rows() == 0) throw Error(Errc::EmptyDirectionSet, "no directions supplied");
  const int n = static_cast<int>(std::min<Eigen::Index>(top, std::min(directions.rows(), directions.cols())));
  if (n < 1 || n_shuffles < 1) throw Error(Errc::InvalidArgument, "need top >= 1 and n_shuffles >= 1");
  auto svals = [&](const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return Vector(svd.singularValues().head(n));
  };
  SingularValueNull out;
  out.observed = svals(directions);
  out.null.resize(n_shuffles, n);
  Vector exceed = Vector::Zero(n);
  for (int i = 0; i < n_shuffles; ++i) {
    out.null.row(i) = svals(shuffle_directions(directions, rng)).transpose();
    for (int c = 0; c < n; ++c)
      if (out.null(i, c) >= out.observed[c]) exceed[c] += 1.0;
  }
  out.p = (exceed.array() + 1.0) / (n_shuffles + 1.0);
  return out;
}

}  // namespace evo
