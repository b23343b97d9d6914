#include "evo/diagnostics.hpp"
#include "evo/stats.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>

using namespace evo;
using testing::errc_of;
using testing::vec;

namespace {

MeanTrajectory random_walk(int T, int d, std::uint64_t seed) {
  Rng rng(seed);
  MeanTrajectory tr;
  tr.means = Matrix::Zero(T, d);
  for (int t = 1; t < T; ++t) tr.means.row(t) = tr.means.row(t - 1) + testing::gaussian(d, rng).transpose();
  return tr;
}

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("covariance metrics") {
    const auto id = cov_metrics_dense(Matrix::Identity(4, 4));
    CHECK(id.kappa == 1.0);
    CHECK(id.delta == 0.0);
    Matrix C = Matrix::Identity(3, 3);
    C(0, 0) = 4;
    CHECK(cov_metrics_dense(C).kappa == doctest::Approx(4.0));
    CHECK(cov_metrics_dense(C).delta == doctest::Approx(0.5));
    CHECK(cov_metrics(vec({4, 1, 1}), CovRepr::Diagonal).delta == doctest::Approx(0.5));
    Matrix S = Matrix::Zero(2, 2);
    S(0, 0) = 1;
    CHECK(errc_of([&] { cov_metrics_dense(S); }) == Errc::NotPositiveDefinite);
    CHECK(errc_of([] { cov_metrics_diagonal(vec({1, -1})); }) == Errc::NotPositiveDefinite);
  }

  TEST_CASE("covariance metrics are invariant under orthogonal conjugation") {
    Rng rng(17);
    for (int d : {2, 5, 16, 64}) {
      Matrix G(d, d);
      for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = rng.normal();
      const Matrix C = G * G.transpose() / d + Matrix::Identity(d, d);
      const Matrix Q = testing::random_orthogonal(d, rng);
      const auto a = cov_metrics_dense(C), b = cov_metrics_dense(Q * C * Q.transpose());
      CHECK(std::abs(a.kappa - b.kappa) < 1e-8 * a.kappa);
      CHECK(std::abs(a.delta - b.delta) < 1e-8);
      const auto f = cov_metrics_cholesky(G / std::sqrt(d) + Matrix::Identity(d, d));
      const Matrix A = G / std::sqrt(d) + Matrix::Identity(d, d);
      const auto g = cov_metrics_dense(A * A.transpose());
      CHECK(f.kappa == doctest::Approx(g.kappa).epsilon(1e-8));
      CHECK(f.delta == doctest::Approx(g.delta).epsilon(1e-8));
    }
  }

  TEST_CASE("theoretical explained variance") {
    CHECK(theoretical_expvar(1, 75) == doctest::Approx(0.608124).epsilon(1e-6));
    CHECK(theoretical_expvar(1, 100000) == doctest::Approx(6 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-6));
    for (int T : {2, 10, 75, 300, 1001}) {
      double s = 0;
      for (int k = 1; k < T; ++k) s += theoretical_expvar(k, T);
      CHECK(std::abs(s - 1) < 1e-9);
    }
    CHECK(errc_of([] { theoretical_expvar(0, 10); }) == Errc::OutOfRange);
    CHECK(errc_of([] { theoretical_expvar(10, 10); }) == Errc::OutOfRange);
  }

  TEST_CASE("PCA of a trajectory") {
    const MeanTrajectory tr = random_walk(40, 30, 5);
    const auto p = pca_mean_trajectory(tr);
    CHECK(p.ratios.sum() == doctest::Approx(1.0));
    for (int k = 1; k < p.ratios.size(); ++k) CHECK(p.ratios[k] <= p.ratios[k - 1] + 1e-15);
    CHECK((p.axes * p.axes.transpose() - Matrix::Identity(p.axes.rows(), p.axes.rows())).norm() < 1e-9);
    CHECK(p.projections.rows() == 40);

    // relabelling dimensions does not change the spectrum
    std::vector<int> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[3], perm[17]);
    MeanTrajectory shuffled;
    shuffled.means.resize(40, 30);
    for (int j = 0; j < 30; ++j) shuffled.means.col(j) = tr.means.col(perm[j]);
    const auto q = pca_mean_trajectory(shuffled);
    CHECK((p.ratios - q.ratios).norm() < 1e-10);

    MeanTrajectory flat;
    flat.means = Matrix::Ones(12, 4);
    CHECK(errc_of([&] { pca_mean_trajectory(flat); }) == Errc::DegenerateTrajectory);
  }

  TEST_CASE("random-walk PCA approaches the theoretical ratio") {
    double acc = 0;
    for (int s = 0; s < 30; ++s) acc += pca_mean_trajectory(random_walk(75, 400, 100 + s)).ratios[0];
    CHECK(acc / 30 == doctest::Approx(theoretical_expvar(1, 75)).epsilon(0.08));
  }

  TEST_CASE("cosine fit recovers an exact cosine") {
    const int T = 75;
    for (int k = 1; k <= 6; ++k) {
      std::vector<double> y(T);
      for (int t = 0; t < T; ++t) y[t] = 3.0 * std::cos(k * std::numbers::pi * t / T);
      const CosineFit f = cosine_fit(y, k);
      CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::abs(f.omega - k / 2.0) < 1e-6);
      CHECK(std::abs(f.amplitude) == doctest::Approx(3.0).epsilon(1e-6));
    }
    CHECK(errc_of([] { cosine_fit(std::vector<double>(20, 1.0), 1); }) == Errc::FitDiverged);
    CHECK(errc_of([] { cosine_fit(std::vector<double>(5, 1.0), 1); }) == Errc::InvalidArgument);
  }

  TEST_CASE("norm growth fit") {
    MeanTrajectory still;
    still.means = Matrix::Ones(20, 3);
    CHECK(norm_growth_fit(still).slope == doctest::Approx(0.0));
    MeanTrajectory line;
    line.means = Matrix::Zero(15, 2);
    for (int t = 0; t < 15; ++t) line.means(t, 0) = std::sqrt(2.0 * t);
    const auto f = norm_growth_fit(line);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.r2 == doctest::Approx(1.0));
    MeanTrajectory shortt;
    shortt.means = Matrix::Zero(9, 2);
    CHECK(errc_of([&] { norm_growth_fit(shortt); }) == Errc::InvalidArgument);
  }

  TEST_CASE("lissajous projection") {
    const auto p = pca_mean_trajectory(random_walk(30, 20, 8));
    const auto pts = lissajous_project(p, 1, 2);
    REQUIRE(pts.size() == 30);
    for (int t = 0; t < 30; ++t) {
      CHECK(pts[t].first == p.projections(t, 0));
      CHECK(pts[t].second == p.projections(t, 1));
    }
    CHECK(errc_of([&] { lissajous_project(p, 0, 1); }) == Errc::OutOfRange);
    CHECK(errc_of([&] { lissajous_project(p, 1, 999); }) == Errc::OutOfRange);
  }

  TEST_CASE("angular statistics") {
    Batch anti(2, 3);
    anti << 1, 0, 0, -1, 0, 0;
    CHECK(angular_stats(anti).mean_angle == doctest::Approx(std::numbers::pi));
    CHECK(angular_stats(anti).mean_l2 == doctest::Approx(2.0));
    const Batch same = Batch::Constant(4, 5, 2.0);
    CHECK(angular_stats(same).mean_angle == doctest::Approx(0.0));
    CHECK(angular_stats(same).mean_l2 == 0.0);
    Batch withzero(3, 2);
    withzero << 1, 0, 0, 0, 0, 1;
    const auto s = angular_stats(withzero);
    CHECK(s.excluded_pairs == 2);
    CHECK(s.mean_angle == doctest::Approx(std::numbers::pi / 2));
  }

  TEST_CASE("eigenframe projection") {
    Rng rng(21);
    const EigenFrame fr = make_synthetic_frame(24, 24, 1e3, rng);
    CHECK_NOTHROW(fr.validate());
    Matrix dirs(3, 24);
    for (int i = 0; i < 3; ++i) dirs.row(i) = (i + 1.0) * fr.basis.row(0);
    const auto a = eigenframe_projection(dirs, fr, 10);
    CHECK(a.amplitudes[0] == doctest::Approx(2.0));
    CHECK(a.amplitudes.tail(23).cwiseAbs().maxCoeff() < 1e-12);

    Matrix rnd(50, 24);
    for (int i = 0; i < 50; ++i) rnd.row(i) = testing::gaussian(24, rng).transpose();
    EigenFrame flipped = fr;
    for (int k = 0; k < 24; k += 3) flipped.basis.row(k) *= -1;
    const auto x = eigenframe_projection(rnd, fr, 10), y = eigenframe_projection(rnd, flipped, 10);
    CHECK((x.amplitudes - y.amplitudes).norm() < 1e-12);
    CHECK(x.pearson_r == doctest::Approx(y.pearson_r));

    CHECK(errc_of([&] { eigenframe_projection(Matrix(0, 24), fr); }) == Errc::EmptyDirectionSet);
    CHECK(errc_of([&] { eigenframe_projection(Matrix::Ones(2, 5), fr); }) == Errc::DimensionMismatch);
  }

  TEST_CASE("eigenframe file round trip") {
    Rng rng(2);
    EigenFrame fr = make_synthetic_frame(10, 4, 50.0, rng);
    const auto path = std::filesystem::temp_directory_path() / "evo_frame_test.bin";
    write_eigenframe(path, fr);
    {
      std::ifstream is(path, std::ios::binary);
      std::string header;
      std::getline(is, header);
      CHECK(header == "EIGENFRAME v1 d=10 k=4");
    }
    const EigenFrame back = read_eigenframe(path);
    CHECK(back.basis == fr.basis);
    CHECK(back.eigenvalues == fr.eigenvalues);
    {
      std::ofstream os(path, std::ios::binary);
      os << "EIGENFRAME v2 d=10 k=4\n";
    }
    CHECK(errc_of([&] { read_eigenframe(path); }) == Errc::CorruptData);
    std::filesystem::remove(path);
    CHECK(errc_of([&] { read_eigenframe(path); }) == Errc::IoError);
  }

  TEST_CASE("shuffled directions keep norms and entries") {
    Rng rng(4);
    Matrix d(5, 30);
    for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = rng.normal();
    const Matrix s = shuffle_directions(d, rng);
    for (int i = 0; i < 5; ++i) {
      CHECK(s.row(i).norm() == doctest::Approx(d.row(i).norm()).epsilon(1e-15));
      Vector x = d.row(i).transpose(), y = s.row(i).transpose();
      std::sort(x.data(), x.data() + 30);
      std::sort(y.data(), y.data() + 30);
      CHECK(x == y);
    }
    CHECK(s != d);
    const auto null = shuffle_singular_values(d, 3, 20, rng);
    CHECK(null.null.rows() == 20);
    CHECK(null.p.size() == 3);
  }

  TEST_CASE("statistics helpers") {
    const std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    const auto w = welch_t(a, b);
    CHECK(w.t == doctest::Approx(-3.674).epsilon(1e-3));
    CHECK(w.df == doctest::Approx(4.0));
    CHECK(w.p_two_sided == doctest::Approx(0.02131).epsilon(1e-3));
    CHECK(welch_t(a, a).t == 0.0);
    CHECK(pearson(a, b) == doctest::Approx(1.0));
    CHECK(errc_of([] { welch_t(std::vector<double>{1}, std::vector<double>{1, 2}); }) == Errc::InsufficientData);
    const auto fit = ols(std::vector<double>{0, 1, 2, 3}, std::vector<double>{1, 3, 5, 7});
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.r2 == doctest::Approx(1.0));
    const auto ks = ks_2samp(std::vector<double>{1, 2, 3, 4}, std::vector<double>{11, 12, 13, 14});
    CHECK(ks.statistic == 1.0);
    CHECK(sem(std::vector<double>{1, 3}) == doctest::Approx(1.0));
  }
}
