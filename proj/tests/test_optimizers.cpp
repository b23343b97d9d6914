#include "evo/objectives.hpp"
#include "evo/optimizers.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <vector>

using namespace evo;
using testing::errc_of;

namespace {

std::vector<double> scores_of(const Batch& b, const std::function<double(const Vector&)>& f) {
  std::vector<double> s(b.rows());
  for (int i = 0; i < b.rows(); ++i) s[i] = f(b.row(i).transpose());
  return s;
}

double first_coord(const Vector& x) { return x[0]; }

std::vector<std::unique_ptr<Optimizer>> one_of_each(int d, std::uint64_t seed) {
  std::vector<std::unique_ptr<Optimizer>> v;
  v.push_back(std::make_unique<SphereCMA>(SphereConfig::defaults(d, 12), seed));
  CholeskyConfig c;
  c.dim = d;
  c.population = 12;
  c.a_update_freq = 2;
  v.push_back(std::make_unique<CholeskyCMA>(c, seed));
  DiagonalConfig dc;
  dc.dim = d;
  dc.population = 12;
  v.push_back(std::make_unique<DiagonalCMA>(dc, seed));
  GAConfig g;
  g.dim = d;
  g.population = 12;
  g.elite = 3;
  v.push_back(std::make_unique<GeneticAlgorithm>(g, seed));
  RandomSearchConfig r;
  r.dim = d;
  r.population = 12;
  v.push_back(std::make_unique<RandomSearch>(r, seed));
  return v;
}

}  // namespace

TEST_SUITE("optimizers") {
  TEST_CASE("ask/tell protocol checks") {
    for (auto& opt : one_of_each(6, 1)) {
      CAPTURE(kind_name(opt->kind()));
      CHECK(errc_of([&] { opt->tell(Batch::Zero(12, 6), std::vector<double>(12, 0.0)); }) == Errc::ProtocolViolation);
      const Batch b = opt->ask();
      CHECK(b.rows() == 12);
      CHECK(b.cols() == 6);
      CHECK(errc_of([&] { opt->ask(); }) == Errc::ProtocolViolation);
      CHECK(errc_of([&] { opt->tell(b, std::vector<double>(11, 0.0)); }) == Errc::ShapeMismatch);
      std::vector<double> bad(12, 0.0);
      bad[3] = std::nan("");
      CHECK(errc_of([&] { opt->tell(b, bad); }) == Errc::NonFiniteScore);
      CHECK_FALSE(errc_of([&] { opt->tell(b, std::vector<double>(12, 1.0)); }).has_value());
      CHECK(opt->generation() == 1);
    }
  }

  TEST_CASE("identical seeds give bitwise-identical runs") {
    auto a = one_of_each(10, 42), b = one_of_each(10, 42);
    for (std::size_t k = 0; k < a.size(); ++k) {
      for (int g = 0; g < 6; ++g) {
        const Batch x = a[k]->ask(), y = b[k]->ask();
        REQUIRE(x == y);
        a[k]->tell(x, scores_of(x, first_coord));
        b[k]->tell(y, scores_of(y, first_coord));
      }
      CHECK(a[k]->mean() == b[k]->mean());
    }
  }

  TEST_CASE("snapshot round trip resumes the identical sequence") {
    auto opts = one_of_each(7, 9);
    for (auto& opt : opts) {
      CAPTURE(kind_name(opt->kind()));
      for (int g = 0; g < 3; ++g) {
        const Batch x = opt->ask();
        opt->tell(x, scores_of(x, first_coord));
      }
      std::stringstream ss;
      opt->save(ss);
      auto copy = load_optimizer(ss);
      REQUIRE(copy->kind() == opt->kind());
      CHECK(copy->generation() == 3);
      for (int g = 0; g < 3; ++g) {
        const Batch x = opt->ask(), y = copy->ask();
        REQUIRE(x == y);
        opt->tell(x, scores_of(x, first_coord));
        copy->tell(y, scores_of(y, first_coord));
      }
      CHECK(copy->mean() == opt->mean());
    }
    // snapshot taken between ask and tell keeps the pending batch
    SphereCMA s(SphereConfig::defaults(5, 6), 3);
    const Batch pending = s.ask();
    std::stringstream ss;
    s.save(ss);
    auto copy = load_optimizer(ss);
    CHECK(copy->awaiting_tell());
    CHECK_FALSE(errc_of([&] { copy->tell(pending, std::vector<double>(6, 0.0)); }).has_value());
  }

  TEST_CASE("corrupt snapshots are rejected") {
    std::stringstream bad("NOPE and then some bytes");
    CHECK(errc_of([&] { load_optimizer(bad); }) == Errc::CorruptData);
    RandomSearchConfig r;
    r.dim = 3;
    RandomSearch rs(r, 1);
    std::stringstream ss;
    rs.save(ss);
    std::string bytes = ss.str();
    bytes.resize(bytes.size() / 2);
    std::stringstream cut(bytes);
    CHECK(errc_of([&] { load_optimizer(cut); }).has_value());
  }

  TEST_CASE("SphereCMA stays on the sphere and steps by the scheduled angle") {
    SphereConfig cfg = SphereConfig::defaults(32, 10, 30);
    SphereCMA opt(cfg, 5);
    const double R = cfg.params.radius;
    for (int t = 0; t < 30; ++t) {
      const Vector center = opt.mean();
      CHECK(std::abs(center.norm() - R) < 1e-9 * R);
      const Batch b = opt.ask();
      for (int i = 0; i < b.rows(); ++i) CHECK(std::abs(b.row(i).norm() - R) < 1e-9 * R);
      if (t > 0) {
        CHECK((b.row(0).transpose() - center).norm() == 0.0);
        for (int i = 1; i < b.rows(); ++i)
          CHECK(std::abs(angle_between(b.row(i).transpose(), center) - decay_eval(cfg.decay, t)) < 1e-8);
      }
      opt.tell(b, scores_of(b, first_coord));
    }
  }

  TEST_CASE("SphereCMA tell: endpoint and overshoot") {
    SphereConfig cfg = SphereConfig::defaults(12, 8);
    cfg.params.cutoff = 1;
    cfg.params.lr = 1.0;
    SphereCMA exact(cfg, 2);
    Batch b = exact.ask();
    std::vector<double> s(8, 0.0);
    s[5] = 1.0;
    exact.tell(b, s);
    CHECK((exact.mean() - b.row(5).transpose()).norm() < 1e-9 * cfg.params.radius);

    cfg.params.lr = 1.5;
    SphereCMA over(cfg, 2);
    b = over.ask();
    const Vector m0 = over.mean();
    over.tell(b, s);
    CHECK(angle_between(m0, over.mean()) == doctest::Approx(1.5 * angle_between(m0, b.row(5).transpose())).epsilon(1e-9));
  }

  TEST_CASE("CholeskyCMA with zero learning rates keeps A = I") {
    CholeskyConfig c;
    c.dim = 8;
    c.population = 10;
    c.c1 = 0.0;
    c.cmu = 0.0;
    c.a_update_freq = 1;
    CholeskyCMA opt(c, 4);
    const auto fresh = isotropy_check(opt);
    CHECK(fresh.kappa == 1.0);
    CHECK(fresh.delta == 0.0);
    for (int g = 0; g < 20; ++g) {
      const Batch b = opt.ask();
      opt.tell(b, scores_of(b, first_coord));
    }
    CHECK(opt.factor() == Matrix::Identity(8, 8));
    const auto m = isotropy_check(opt);
    CHECK(m.kappa == doctest::Approx(1.0));
    CHECK(m.delta == doctest::Approx(0.0));
  }

  TEST_CASE("CholeskyCMA keeps the inverse factor consistent") {
    CholeskyConfig c;
    c.dim = 12;
    c.population = 10;
    c.a_update_freq = 1;
    c.cmu = 0.05;
    CholeskyCMA opt(c, 8);
    for (int g = 0; g < 30; ++g) {
      const Batch b = opt.ask();
      opt.tell(b, scores_of(b, [](const Vector& x) { return -(x.array() * x.array() * Eigen::ArrayXd::LinSpaced(12, 1, 100)).sum(); }));
    }
    CHECK((opt.inverse_factor() * opt.factor() - Matrix::Identity(12, 12)).norm() < 1e-9);
  }

  TEST_CASE("deferred factor update tracks the every-generation variant") {
    const int d = 16;
    Vector target = Vector::LinSpaced(d, 1.0, 6.0);
    auto f = [&](const Vector& x) { return -(x - target).squaredNorm(); };
    auto run = [&](int freq) {
      CholeskyConfig c;
      c.dim = d;
      c.a_update_freq = freq;
      CholeskyCMA opt(c, 77);
      for (int g = 0; g < 75; ++g) {
        const Batch b = opt.ask();
        opt.tell(b, scores_of(b, f));
      }
      return opt.mean();
    };
    const Vector every = run(1), deferred = run(10);
    CHECK((every - deferred).norm() < 0.01 * deferred.norm());
  }

  TEST_CASE("doubling sigma0 doubles the first mean step") {
    const int d = 64;
    double s1 = 0.0, s2 = 0.0;
    for (int seed = 0; seed < 500; ++seed) {
      for (double sig : {3.0, 6.0}) {
        CholeskyConfig c;
        c.dim = d;
        c.sigma0 = sig;
        CholeskyCMA opt(c, derive_seed(123, {static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(sig)}));
        NoiseOnlyObjective obj(d, derive_seed(321, {static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(sig)}));
        const Vector m0 = opt.mean();
        const Batch b = opt.ask();
        std::vector<double> s;
        for (const auto& r : obj.evaluate(b, 0)) s.push_back(r.raw);
        opt.tell(b, s);
        (sig == 3.0 ? s1 : s2) += (opt.mean() - m0).norm();
      }
    }
    CHECK(s2 / s1 == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("DiagonalCMA with zero learning rates keeps unit variances") {
    DiagonalConfig c;
    c.dim = 9;
    c.c1 = 0.0;
    c.cmu = 0.0;
    DiagonalCMA opt(c, 6);
    for (int g = 0; g < 15; ++g) {
      const Batch b = opt.ask();
      opt.tell(b, scores_of(b, first_coord));
    }
    CHECK(opt.diagonal() == Vector::Ones(9));
  }

  TEST_CASE("DiagonalCMA variances stay positive") {
    DiagonalConfig c;
    c.dim = 20;
    DiagonalCMA opt(c, 6);
    for (int g = 0; g < 60; ++g) {
      const Batch b = opt.ask();
      opt.tell(b, scores_of(b, [](const Vector& x) { return -(x.array().square() * Eigen::ArrayXd::LinSpaced(20, 1, 1e4)).sum(); }));
    }
    CHECK(opt.diagonal().minCoeff() > 0.0);
    CHECK(isotropy_check(opt).kappa > 1.0);
  }

  TEST_CASE("GA degenerate reproduction and elitism") {
    GAConfig g;
    g.dim = 5;
    g.population = 8;
    g.elite = 2;
    g.mutation_rate = 0.0;
    Batch init(8, 5);
    for (int i = 0; i < 8; ++i) init.row(i) << 1, 2, 3, 4, 5;
    g.init_codes = init;
    GeneticAlgorithm same(g, 1);
    Batch b = same.ask();
    same.tell(b, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    b = same.ask();
    for (int i = 0; i < 8; ++i) CHECK((b.row(i) - init.row(0)).norm() == 0.0);

    g.init_codes.reset();
    g.mutation_rate = 0.25;
    GeneticAlgorithm ga(g, 2);
    for (int t = 0; t < 10; ++t) {
      b = ga.ask();
      std::vector<double> s = scores_of(b, first_coord);
      const int best = static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
      const Vector elite = b.row(best).transpose();
      ga.tell(b, s);
      const Batch next = ga.ask();
      bool found = false;
      for (int i = 0; i < next.rows(); ++i) found = found || (next.row(i).transpose() - elite).norm() == 0.0;
      CHECK(found);
      ga.tell(next, scores_of(next, first_coord));
    }
  }

  TEST_CASE("GA selection probabilities") {
    const Vector p = ga_selection_probabilities(std::vector<double>{0, 1, 2, 3}, 0.7);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p[3] > p[2]);
    CHECK(p[2] > p[1]);
    const Vector flat = ga_selection_probabilities(std::vector<double>{2, 2, 2}, 0.7);
    CHECK(flat[0] == doctest::Approx(1.0 / 3));
    CHECK(errc_of([] { ga_selection_probabilities(std::vector<double>{1, 2}, 0.0); }) == Errc::InvalidArgument);
  }

  TEST_CASE("RandomSearch") {
    RandomSearchConfig r;
    r.dim = 6;
    r.sigma0 = 0.0;
    RandomSearch zero(r, 3);
    CHECK(zero.ask().norm() == 0.0);

    r.sigma0 = 1.0;
    RandomSearch a(r, 3), b(r, 3);
    const Batch x = a.ask(), y = b.ask();
    a.tell(x, std::vector<double>(40, 1.0));
    b.tell(y, scores_of(y, first_coord));
    CHECK(a.ask() == b.ask());
    CHECK(a.mean() == Vector::Zero(6));
  }

  TEST_CASE("isotropy_check is unsupported without an adapted covariance") {
    auto opts = one_of_each(4, 1);
    CHECK(errc_of([&] { isotropy_check(*opts[0]); }) == Errc::Unsupported);
    CHECK(errc_of([&] { isotropy_check(*opts[3]); }) == Errc::Unsupported);
    CHECK(errc_of([&] { isotropy_check(*opts[4]); }) == Errc::Unsupported);
    CHECK_FALSE(errc_of([&] { isotropy_check(*opts[2]); }).has_value());
  }
}
