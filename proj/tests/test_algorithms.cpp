#include <cmath>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "pfo/algorithms.hpp"

using namespace pfo;
using pfo::test::vec;

namespace {

LearnerConfig config(Algorithm algo, double alpha = 1.0) {
  LearnerConfig cfg;
  cfg.algo = algo;
  cfg.schedule = ScheduleSpec::inverse_power(alpha);
  cfg.seed = 5;
  return cfg;
}

// A small stochastic logistic stream with distinct rounds.
struct LogisticStream {
  DatasetPtr data;
  std::vector<RoundLoss> rounds;
  FeasibleSet set = FeasibleSet::column_l1_ball(2.0, 3, 2);
};

LogisticStream logistic_stream(int T) {
  std::vector<Sample> samples;
  for (int i = 0; i < 2 * T; ++i) {
    const double s = (i % 2 == 0) ? 1.0 : -1.0;
    samples.push_back(Sample{vec({s + 0.1 * i, 0.5 * s, 0.01 * i}), 1 + i % 2});
  }
  LogisticStream out;
  out.data = test::dataset_of(2, samples);
  for (int t = 0; t < T; ++t) {
    out.rounds.emplace_back(out.data, MulticlassLogistic{},
                            std::vector<Index>{2 * t, 2 * t + 1});
  }
  return out;
}

}  // namespace

TEST_CASE("ORGFW hand-executed steps on a fixed quadratic") {
  const auto rl = test::identity_quadratic(2);
  const auto set = FeasibleSet::column_l1_ball(1.0, 2, 1);
  const auto cfg = config(Algorithm::ORGFW);
  auto st = init_learner(cfg, set, 4, vec({1, 0}));
  auto r1 = orgfw_step(std::move(st), rl, set, cfg);
  CHECK(r1.state.est->d == vec({1, 0}));
  CHECK(r1.state.x == vec({0, 0}));
  CHECK(r1.record.t == 1);
  CHECK(r1.record.loss_value == doctest::Approx(0.5));
  auto r2 = orgfw_step(std::move(r1.state), rl, set, cfg);
  // d_2 = grad(x_2) + (1/3)(d_1 - grad(x_1)) = 0, so the tie-break vertex (1, 0) is chosen.
  CHECK(r2.state.est->d.norm() == 0.0);
  CHECK(r2.state.x(0, 0) == doctest::Approx(1.0 / 3.0));
  CHECK(r2.state.x(1, 0) == 0.0);
}

TEST_CASE("OSFW differs from ORGFW at t = 2 on the same quadratic") {
  const auto rl = test::identity_quadratic(2);
  const auto set = FeasibleSet::column_l1_ball(1.0, 2, 1);
  const auto cfg = config(Algorithm::OSFW);
  auto r1 = osfw_step(init_learner(cfg, set, 4, vec({1, 0})), rl, set, cfg);
  CHECK(r1.state.x == vec({0, 0}));
  auto r2 = osfw_step(std::move(r1.state), rl, set, cfg);
  // d_2 = (2/3)(1, 0) + (1/3) grad(x_2) = (2/3, 0), v = (-1, 0), x_3 = -(1/3, 0).
  CHECK(r2.state.est->d(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(r2.state.x(0, 0) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("OSFW with rho = 1 is plain stochastic FW") {
  auto s = logistic_stream(20);
  auto osfw = config(Algorithm::OSFW);
  auto fw = config(Algorithm::FW);
  osfw.schedule = ScheduleSpec{0.0};
  fw.schedule = ScheduleSpec{0.0};
  osfw.noise = fw.noise = NoiseSpec::minibatch(1, 3);
  const auto a = run(osfw, s.rounds, s.set, 20, {}, true);
  const auto b = run(fw, s.rounds, s.set, 20, {}, true);
  for (std::size_t t = 0; t < a.played.size(); ++t) CHECK(a.played[t] == b.played[t]);
}

TEST_CASE("same seed gives bitwise identical records") {
  auto s = logistic_stream(30);
  for (auto algo : {Algorithm::ORGFW, Algorithm::OSFW, Algorithm::MORGFW}) {
    auto cfg = config(algo);
    cfg.noise = NoiseSpec::minibatch(1, 8);
    const auto a = run(cfg, s.rounds, s.set, 30);
    const auto b = run(cfg, s.rounds, s.set, 30);
    REQUIRE(a.records.size() == 30);
    for (std::size_t t = 0; t < 30; ++t) {
      CHECK(a.records[t].t == static_cast<std::int64_t>(t + 1));
      CHECK(a.records[t].loss_value == b.records[t].loss_value);
    }
  }
}

TEST_CASE("OFW at t = 1 is one exact-gradient FW step") {
  auto s = logistic_stream(3);
  const auto cfg = config(Algorithm::OFW);
  auto r = ofw_step(init_learner(cfg, s.set, 3), s.rounds[0], s.set, cfg);
  const Point x1 = initial_point(s.set);
  const Point v = lmo(s.set, grad_exact(s.rounds[0], x1));
  CHECK(r.state.x == x1 + 0.5 * (v - x1));
}

TEST_CASE("OFW on a fixed loss follows exact-gradient ORGFW") {
  auto s = logistic_stream(1);
  std::vector<RoundLoss> fixed(40, s.rounds[0]);
  const auto a = run(config(Algorithm::OFW), fixed, s.set, 40, {}, true);
  const auto b = run(config(Algorithm::ORGFW), fixed, s.set, 40, {}, true);
  for (std::size_t t = 0; t < 40; ++t) {
    CHECK((a.played[t] - b.played[t]).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("FTPL prediction and feedback") {
  const auto set = FeasibleSet::column_l1_ball(1.0, 2, 1);
  FtplState f{Point::Zero(2, 1), Point::Zero(2, 1), 1};
  CHECK(ftpl_predict(f, set) == vec({1, 0}));
  f.accumulated = vec({10, 0});
  f.perturbation = vec({0.1, 0.2});
  CHECK(ftpl_predict(f, set) == vec({-1, 0}));

  FtplState g{vec({1, 2}), vec({0.5, 0.5}), 1};
  CHECK(ftpl_feedback(g, vec({0, 0})).accumulated == g.accumulated);
  const Point a = vec({1, -1});
  const Point b = vec({0.25, 3});
  CHECK(ftpl_feedback(ftpl_feedback(g, a), b).accumulated ==
        ftpl_feedback(ftpl_feedback(g, b), a).accumulated);
  FtplState h{Point::Zero(2, 1), Point::Zero(2, 1), 1};
  for (int i = 0; i < 7; ++i) h = ftpl_feedback(h, a);
  CHECK(h.accumulated == 7.0 * a);
  CHECK_THROWS_AS(ftpl_feedback(h, vec({1, 2, 3})), Error);
}

TEST_CASE("FTPL perturbations lie in [0, scale sqrt(T)]") {
  const auto set = FeasibleSet::column_l1_ball(1.0, 4, 3);
  const auto f = make_ftpl(set, 2, 16, 0.5, 1);
  CHECK(f.perturbation.minCoeff() >= 0.0);
  CHECK(f.perturbation.maxCoeff() <= 2.0);
  CHECK(make_ftpl(set, 2, 16, 0.5, 1).perturbation == f.perturbation);
  CHECK(make_ftpl(set, 3, 16, 0.5, 1).perturbation != f.perturbation);
  CHECK_THROWS_AS(make_ftpl(set, 1, 16, 0.0, 1), Error);
}

TEST_CASE("inner step counts") {
  CHECK(resolve_inner_steps(config(Algorithm::MORGFW), 64) == 64);
  CHECK(resolve_inner_steps(config(Algorithm::MetaFW), 4) == 8);
  CHECK(resolve_inner_steps(config(Algorithm::MetaFW), 10) == 32);
  CHECK(resolve_inner_steps(config(Algorithm::ORGFW), 10) == 1);
  auto cfg = config(Algorithm::MORGFW);
  cfg.K = 5;
  CHECK(resolve_inner_steps(cfg, 64) == 5);
}

TEST_CASE("MORGFW with K = 1 plays the midpoint of x_1 and the learner's vertex") {
  auto s = logistic_stream(2);
  auto cfg = config(Algorithm::MORGFW);
  cfg.K = 1;
  auto st = init_learner(cfg, s.set, 2);
  const Point v = ftpl_predict(st.ftpl[0], s.set);
  auto r = morgfw_round(std::move(st), s.rounds[0], s.set, cfg);
  CHECK(r.state.x == 0.5 * initial_point(s.set) + 0.5 * v);
  CHECK(r.inner_iterates.size() == 2);
}

TEST_CASE("MORGFW inner estimator telescopes on a fixed loss with K = T = 8") {
  auto s = logistic_stream(1);
  std::vector<RoundLoss> fixed(8, s.rounds[0]);
  const auto cfg = config(Algorithm::MORGFW);
  auto st = init_learner(cfg, s.set, 8);
  REQUIRE(st.ftpl.size() == 8);
  for (int t = 0; t < 8; ++t) {
    auto r = morgfw_round(std::move(st), fixed[static_cast<std::size_t>(t)], s.set, cfg);
    REQUIRE(r.inner_estimates.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(contains(s.set, r.inner_iterates[k]));
      const Point g = grad_exact(fixed[0], r.inner_iterates[k]);
      CHECK((r.inner_estimates[k] - g).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(contains(s.set, r.inner_iterates[8]));
    st = std::move(r.state);
  }
}

TEST_CASE("run: T = 1 plays x_1, exhaustion names the round") {
  auto s = logistic_stream(2);
  const auto r = run(config(Algorithm::ORGFW), s.rounds, s.set, 1, {}, true);
  REQUIRE(r.records.size() == 1);
  CHECK(r.played[0] == initial_point(s.set));
  try {
    run(config(Algorithm::ORGFW), s.rounds, s.set, 3);
    FAIL("expected an exhaustion error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::StreamExhausted);
    CHECK(std::string(e.what()).find("round 3") != std::string::npos);
  }
  CHECK_THROWS_AS(run(config(Algorithm::ORGFW), s.rounds, s.set, 0), Error);
}

TEST_CASE("iterates stay feasible") {
  auto s = logistic_stream(50);
  for (auto algo : {Algorithm::ORGFW, Algorithm::OSFW, Algorithm::OFW, Algorithm::FW,
                    Algorithm::MetaFW}) {
    auto cfg = config(algo);
    cfg.noise = NoiseSpec::additive_gaussian(1.0, 2);
    const auto r = run(cfg, s.rounds, s.set, algo == Algorithm::MetaFW ? 10 : 50, {}, true);
    for (const Point& x : r.played) CHECK(contains(s.set, x));
  }
}

TEST_CASE("algorithm names round-trip") {
  for (auto algo : {Algorithm::ORGFW, Algorithm::OSFW, Algorithm::OFW, Algorithm::MetaFW,
                    Algorithm::MORGFW, Algorithm::FW}) {
    CHECK(parse_algorithm(to_string(algo)) == algo);
  }
  CHECK_THROWS_AS(parse_algorithm("SGD"), Error);
}
