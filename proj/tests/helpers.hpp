#pragma once

#include <memory>
#include <vector>

#include "pfo/data.hpp"
#include "pfo/oracles.hpp"

namespace pfo::test {

inline Point vec(std::initializer_list<double> xs) {
  Point p(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  return p;
}

/// Single-sample quadratic 0.5 x^T A x + b^T x (the sample's features are zero).
inline RoundLoss quadratic(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  const Index d = A.rows();
  auto ds = std::make_shared<Dataset>(
      make_dataset("quad", 1, {Sample{Eigen::VectorXd::Zero(d), 1}}));
  return RoundLoss(ds, SyntheticQuadratic{std::make_shared<Eigen::MatrixXd>(A), b}, {0});
}

inline RoundLoss identity_quadratic(Index d) {
  return quadratic(Eigen::MatrixXd::Identity(d, d), Eigen::VectorXd::Zero(d));
}

inline DatasetPtr dataset_of(int classes, std::vector<Sample> samples) {
  return std::make_shared<Dataset>(make_dataset("test", classes, samples));
}

inline RoundLoss logistic_all(const DatasetPtr& ds) {
  std::vector<Index> idx(static_cast<std::size_t>(ds->size()));
  for (Index i = 0; i < ds->size(); ++i) idx[static_cast<std::size_t>(i)] = i;
  return RoundLoss(ds, MulticlassLogistic{}, idx);
}

}  // namespace pfo::test
