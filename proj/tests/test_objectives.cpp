#include "evo/objectives.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace evo;
using testing::errc_of;
using testing::vec;

namespace {

QuadricLandscape hand_landscape() {
  QuadricLandscape L;
  L.id = "hand";
  L.optimum = vec({0.5, -1, 2});
  L.spectrum = vec({1.0, 0.1, 0.0});
  L.frame = Matrix::Identity(3, 2);
  L.f_max = 10.0;
  L.active = 2;
  return L;
}

}  // namespace

TEST_SUITE("objectives") {
  TEST_CASE("noisy_wrap") {
    CHECK(noisy_wrap(5.3, 0.0, 1.7) == 5.3);
    CHECK(noisy_wrap(10.0, 0.5, -3.0) == 0.0);
    CHECK(noisy_wrap(10.0, 0.2, 1.0) == doctest::Approx(12.0));
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) CHECK(noisy_wrap(3.0, NoiseSpec{0.5, 0}, rng) >= 0.0);
    CHECK(noisy_wrap(-2.0, 0.0, 0.0) == 0.0);
  }

  TEST_CASE("evaluation streams are reproducible and distinct") {
    Rng a = evaluation_stream(5, 2, 7), b = evaluation_stream(5, 2, 7), c = evaluation_stream(5, 2, 8);
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
  }

  TEST_CASE("quadric_eval") {
    const QuadricLandscape L = hand_landscape();
    CHECK(quadric_eval(L.optimum, L) == 10.0);
    CHECK(quadric_eval(L.optimum + vec({0, 0, 40}), L) == 10.0);
    CHECK(quadric_eval(L.optimum + vec({1, 2, 0}), L) == doctest::Approx(8.6));
    CHECK(quadric_eval(L.optimum + vec({100, 0, 0}), L) == 0.0);
    CHECK(errc_of([&] { quadric_eval(vec({1, 2}), L); }) == Errc::DimensionMismatch);
  }

  TEST_CASE("landscape suite construction") {
    Rng r1(9), r2(9);
    const auto a = make_landscape_suite(256, DepthProfile::Shallow, r1, {.count = 2});
    const auto b = make_landscape_suite(256, DepthProfile::Shallow, r2, {.count = 2});
    REQUIRE(a.size() == 2);
    CHECK(a[0].active == 5);
    CHECK(a[0].optimum == b[0].optimum);
    CHECK(a[1].spectrum == b[1].spectrum);
    for (DepthProfile p : {DepthProfile::Shallow, DepthProfile::Mid, DepthProfile::Deep}) {
      Rng r(3);
      const auto L = make_landscape_suite(256, p, r).front();
      const Vector nz = L.spectrum.head(L.active);
      CHECK(nz.maxCoeff() / nz.minCoeff() >= 1e4 * (1 - 1e-9));
      CHECK(L.spectrum.tail(256 - L.active).isZero());
      for (int k = 1; k < 256; ++k) CHECK(L.spectrum[k] <= L.spectrum[k - 1]);
      CHECK((L.frame.transpose() * L.frame - Matrix::Identity(L.active, L.active)).norm() < 1e-10);
      CHECK(quadric_eval(L.optimum, L) == doctest::Approx(L.f_max));
      CHECK(quadric_eval(Vector::Zero(256), L) == doctest::Approx(0.3 * L.f_max));
    }
    Rng r(3);
    CHECK(make_landscape_suite(256, DepthProfile::Mid, r).front().active == 26);
    CHECK(make_landscape_suite(256, DepthProfile::Deep, r).front().active == 128);
    CHECK(errc_of([&] { make_landscape_suite(8, DepthProfile::Deep, r); }) == Errc::InvalidArgument);
    CHECK(parse_profile(profile_name(DepthProfile::Mid)) == DepthProfile::Mid);
    CHECK(errc_of([] { parse_profile("abyssal"); }) == Errc::ConfigError);
  }

  TEST_CASE("QuadricObjective score channels") {
    Rng r(4);
    const auto L = make_landscape_suite(32, DepthProfile::Mid, r).front();
    QuadricObjective clean(L, {0.0, 1}), noisy(L, {0.5, 1});
    Batch b(6, 32);
    for (int i = 0; i < 6; ++i) b.row(i) = testing::gaussian(32, r).transpose();
    const auto c = clean.evaluate(b, 0);
    const auto n1 = noisy.evaluate(b, 0), n2 = noisy.evaluate(b, 0), n3 = noisy.evaluate(b, 1);
    bool differs = false;
    for (int i = 0; i < 6; ++i) {
      CHECK(c[i].raw == doctest::Approx(quadric_eval(b.row(i).transpose(), L)).epsilon(1e-12));
      CHECK(c[i].noisy == c[i].raw);
      CHECK(n1[i].clean == c[i].raw);
      CHECK(n1[i].noisy == n2[i].noisy);
      CHECK(n1[i].noisy >= 0.0);
      differs = differs || n1[i].noisy != n3[i].noisy;
    }
    CHECK(differs);
  }

  TEST_CASE("noise-only objective is deterministic and ignores the code") {
    NoiseOnlyObjective a(4, 10), b(4, 10);
    Batch x = Batch::Zero(5, 4), y = Batch::Constant(5, 4, 100.0);
    const auto s1 = a.evaluate(x, 3), s2 = b.evaluate(y, 3);
    for (int i = 0; i < 5; ++i) CHECK(s1[i].raw == s2[i].raw);
  }

  TEST_CASE("normalize_scores") {
    const auto n = normalize_scores({{"u1", {10, 20, 40}}, {"u2", {50}}, {"dead", {0, 0}}});
    CHECK(n.scores.at("u1") == std::vector<double>{0.25, 0.5, 1.0});
    CHECK(n.scores.at("u2") == std::vector<double>{1.0});
    REQUIRE(n.excluded.size() == 1);
    CHECK(n.excluded[0] == "dead");
    CHECK(n.scores.count("dead") == 0);
  }
}
