#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pfo/oracles.hpp"

using namespace pfo;
using pfo::test::vec;

TEST_CASE("logistic loss at zero weights is log C per sample") {
  auto two = test::dataset_of(2, {Sample{vec({0.3, -1.0}), 2}});
  CHECK(loss(test::logistic_all(two), Point::Zero(2, 2)) == doctest::Approx(std::log(2.0)));
  auto ten = test::dataset_of(10, {Sample{vec({1.0, 2.0, 3.0}), 7}});
  CHECK(loss(test::logistic_all(ten), Point::Zero(3, 10)) == doctest::Approx(std::log(10.0)));
  // Sum form: three samples give three times the per-sample loss.
  auto three = test::dataset_of(
      2, {Sample{vec({1, 0}), 1}, Sample{vec({0, 1}), 2}, Sample{vec({1, 1}), 1}});
  CHECK(loss(test::logistic_all(three), Point::Zero(2, 2)) ==
        doctest::Approx(3.0 * std::log(2.0)));
}

TEST_CASE("logistic gradient at zero weights") {
  auto ds = test::dataset_of(2, {Sample{vec({1, 0}), 1}});
  const Point g = grad_exact(test::logistic_all(ds), Point::Zero(2, 2));
  Point expected(2, 2);
  expected << -0.5, 0.5, 0.0, 0.0;
  CHECK((g - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("quadratic loss and gradient") {
  CHECK(loss(test::identity_quadratic(2), vec({1, 1})) == doctest::Approx(1.0));
  const auto rl = test::quadratic(Eigen::MatrixXd::Identity(2, 2), vec({1, 0}));
  CHECK(grad_exact(rl, vec({0, 0})) == vec({1, 0}));
  CHECK_THROWS_AS(loss(rl, vec({1, 2, 3})), Error);
  CHECK_THROWS_AS(grad_exact(rl, Point::Zero(2, 2)), Error);
}

TEST_CASE("zero-sigma Gaussian oracle is the exact gradient") {
  auto ds = test::dataset_of(3, {Sample{vec({1, -2}), 1}, Sample{vec({0.5, 0.5}), 3}});
  const auto rl = test::logistic_all(ds);
  const Point w = Point::Constant(2, 3, 0.1);
  CHECK(grad_stochastic(rl, w, NoiseSpec::additive_gaussian(0.0, 5), 3, 0) == grad_exact(rl, w));
}

TEST_CASE("stochastic oracle is deterministic in (seed, round, draw)") {
  auto ds = test::dataset_of(
      2, {Sample{vec({1, 0}), 1}, Sample{vec({0, 1}), 2}, Sample{vec({1, 1}), 1}});
  const auto rl = test::logistic_all(ds);
  const Point w = Point::Constant(2, 2, 0.2);
  for (const auto& noise : {NoiseSpec::minibatch(1, 9), NoiseSpec::additive_gaussian(0.5, 9)}) {
    const Point a = grad_stochastic(rl, w, noise, 4, 1);
    const Point b = grad_stochastic(rl, w, noise, 4, 1);
    CHECK(a == b);
    CHECK(a != grad_stochastic(rl, w, noise, 5, 1));
  }
}

TEST_CASE("minibatch subsampling is unbiased") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::vector<Sample> samples;
  for (int i = 0; i < 12; ++i) {
    samples.push_back(Sample{vec({n01(rng), n01(rng), n01(rng)}), 1 + i % 3});
  }
  const auto rl = test::logistic_all(test::dataset_of(3, samples));
  const Point w = Point::NullaryExpr(3, 3, [&] { return 0.3 * n01(rng); });
  const Point exact = grad_exact(rl, w);
  Point mean = Point::Zero(3, 3);
  const int draws = 10000;
  const auto noise = NoiseSpec::minibatch(2, 17);
  for (int k = 0; k < draws; ++k) mean += grad_stochastic(rl, w, noise, k + 1, 0);
  mean /= draws;
  CHECK((mean - exact).norm() <= 0.03 * exact.norm());
}

TEST_CASE("average and population losses") {
  auto ds = test::dataset_of(2, {Sample{vec({1, 0}), 1}, Sample{vec({0, 1}), 2}});
  const Point w = Point::Constant(2, 2, 0.4);
  std::vector<RoundLoss> rounds{RoundLoss(ds, MulticlassLogistic{}, {0}),
                                RoundLoss(ds, MulticlassLogistic{}, {1}),
                                RoundLoss(ds, MulticlassLogistic{}, {1})};
  const double mean = (loss(rounds[0], w) + loss(rounds[1], w) + loss(rounds[2], w)) / 3.0;
  CHECK(loss(average_loss(rounds), w) == doctest::Approx(mean));
  const auto pop = population_loss(ds, MulticlassLogistic{}, 1);
  CHECK(loss(pop, w) ==
        doctest::Approx(0.5 * (loss(rounds[0], w) + loss(rounds[1], w))));
}

TEST_CASE("network parameter layout") {
  const auto [rows, cols] = model_point_dims(OneHiddenNN{4}, 5, 3);
  CHECK(rows == 5 * 4 + 4 + 4 * 3 + 3);
  CHECK(cols == 1);
  const auto set = nn_feasible_set(5, 4, 3, 2.0, 1.0);
  CHECK(set.rows() == rows);
  CHECK(set.blocks().size() == 4);
  CHECK_FALSE(model_is_convex(OneHiddenNN{4}));
  CHECK(model_is_convex(MulticlassLogistic{}));
}
