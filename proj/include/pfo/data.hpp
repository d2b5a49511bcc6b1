#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pfo/point.hpp"

namespace pfo {

struct Sample {
  Eigen::VectorXd features;
  int label = 1;  // 1..C
};

/// Immutable labelled dataset; features are stored row-major in single precision.
struct Dataset {
  using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  std::string name;
  Index d = 0;
  int num_classes = 0;
  FeatureMatrix features;  // n x d
  std::vector<int> labels;  // 1..C

  Index size() const { return static_cast<Index>(labels.size()); }
  Sample sample(Index i) const;
  /// Throws unless shapes agree, features are finite and labels lie in 1..C.
  void validate() const;
};

using DatasetPtr = std::shared_ptr<const Dataset>;

Dataset make_dataset(std::string name, int num_classes, const std::vector<Sample>& samples);

}  // namespace pfo
