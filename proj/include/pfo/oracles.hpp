#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "pfo/data.hpp"
#include "pfo/geometry.hpp"

namespace pfo {

/// Sum over the batch of the softmax cross-entropy of W^T a, W of shape d x C.
struct MulticlassLogistic {};

/// Mean cross-entropy of softmax(W2^T sigmoid(W1^T a + b1) + b2). Parameters are packed
/// into a single column in the order W1 (d x m), b1 (m), W2 (m x C), b2 (C).
struct OneHiddenNN {
  Index hidden = 10;
};

/// 0.5 x^T A x + (b + mean_batch a)^T x; the batch features act as linear perturbations.
struct SyntheticQuadratic {
  std::shared_ptr<const Eigen::MatrixXd> A;
  Eigen::VectorXd b;
};

using Model = std::variant<MulticlassLogistic, OneHiddenNN, SyntheticQuadratic>;

const char* model_name(const Model& model);
bool model_is_convex(const Model& model);

/// Parameter shape for a model on d features and C classes.
std::pair<Index, Index> model_point_dims(const Model& model, Index d, int num_classes);

/// Per-block column-l1 constraint of the packed network parameters.
FeasibleSet nn_feasible_set(Index d, Index hidden, int num_classes, double r_w, double r_b);

/// The round loss f_t: a model evaluated on a weighted batch of dataset rows.
class RoundLoss {
 public:
  RoundLoss(DatasetPtr data, Model model, std::vector<Index> indices,
            std::vector<double> weights = {});

  const Dataset& data() const { return *data_; }
  const DatasetPtr& data_ptr() const { return data_; }
  const Model& model() const { return model_; }
  std::span<const Index> indices() const { return indices_; }
  std::span<const double> weights() const { return weights_; }
  Index batch_size() const { return static_cast<Index>(indices_.size()); }
  double total_weight() const { return total_weight_; }
  Index point_rows() const { return dims_.first; }
  Index point_cols() const { return dims_.second; }

 private:
  DatasetPtr data_;
  Model model_;
  std::vector<Index> indices_;
  std::vector<double> weights_;
  double total_weight_ = 0.0;
  std::pair<Index, Index> dims_;
};

enum class NoiseKind { MinibatchSubsample, AdditiveGaussian };

/// Distribution of the gradient realization xi. AdditiveGaussian with sigma 0 is the
/// exact-gradient oracle.
class NoiseSpec {
 public:
  static NoiseSpec exact(std::uint64_t seed = 0) { return additive_gaussian(0.0, seed); }
  static NoiseSpec minibatch(Index size, std::uint64_t seed);
  static NoiseSpec additive_gaussian(double sigma, std::uint64_t seed);

  NoiseKind kind() const { return kind_; }
  Index subsample_size() const { return subsample_; }
  double sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  bool is_exact() const { return kind_ == NoiseKind::AdditiveGaussian && sigma_ == 0.0; }
  NoiseSpec with_seed(std::uint64_t seed) const;

 private:
  NoiseSpec(NoiseKind kind, Index subsample, double sigma, std::uint64_t seed)
      : kind_(kind), subsample_(subsample), sigma_(sigma), seed_(seed) {}

  NoiseKind kind_;
  Index subsample_;
  double sigma_;
  std::uint64_t seed_;
};

double loss(const RoundLoss& rl, const Point& w);
Point grad_exact(const RoundLoss& rl, const Point& w);

/// Gradient under realization xi = xi(seed, round, draw). Evaluating two points with the
/// same (round, draw) uses the same xi.
Point grad_stochastic(const RoundLoss& rl, const Point& w, const NoiseSpec& noise,
                      std::int64_t round, std::int64_t draw);

/// Loss of the whole dataset under the sampling distribution of a stream with batch size
/// `batch`: the expected round loss f-bar. Sum-form models are scaled by batch / n.
RoundLoss population_loss(DatasetPtr data, const Model& model, Index batch);

/// Concatenation of rounds scaled so that its loss equals (1/T) sum_t f_t.
/// Repeated dataset rows are merged into one weighted entry.
RoundLoss average_loss(std::span<const RoundLoss> rounds);

}  // namespace pfo
