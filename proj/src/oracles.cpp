#include "pfo/oracles.hpp"

#include <cmath>
#include <map>

#include "pfo/rng.hpp"

namespace pfo {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Batch {
  std::span<const Index> indices;
  std::span<const double> weights;
  double total_weight;
};

RowMatrix gather(const Dataset& ds, std::span<const Index> idx) {
  RowMatrix X(static_cast<Index>(idx.size()), ds.d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    X.row(static_cast<Index>(i)) = ds.features.row(idx[i]).cast<double>();
  }
  return X;
}

void check_point(const RoundLoss& rl, const Point& w, const char* what) {
  if (w.rows() != rl.point_rows() || w.cols() != rl.point_cols()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": parameter " + dims_string(w.rows(), w.cols()) + " but " +
             model_name(rl.model()) + " expects " + dims_string(rl.point_rows(), rl.point_cols()));
  }
}

// Row-wise log-sum-exp and softmax, computed with the row max subtracted.
Eigen::VectorXd softmax_rows(RowMatrix& Z) {
  Eigen::VectorXd lse(Z.rows());
  for (Index i = 0; i < Z.rows(); ++i) {
    const double m = Z.row(i).maxCoeff();
    auto row = Z.row(i).array();
    const double s = (row - m).exp().sum();
    lse(i) = m + std::log(s);
    Z.row(i) = (row - lse(i)).exp().matrix();
  }
  return lse;
}

double logistic_eval(const Dataset& ds, const Batch& b, const Point& W, Point* grad) {
  const RowMatrix X = gather(ds, b.indices);
  RowMatrix Z = X * W;
  double value = 0.0;
  for (Index i = 0; i < Z.rows(); ++i) {
    value -= b.weights[static_cast<std::size_t>(i)] * Z(i, ds.labels[static_cast<std::size_t>(b.indices[i])] - 1);
  }
  const Eigen::VectorXd lse = softmax_rows(Z);  // Z now holds softmax probabilities
  for (Index i = 0; i < Z.rows(); ++i) value += b.weights[static_cast<std::size_t>(i)] * lse(i);
  if (grad) {
    for (Index i = 0; i < Z.rows(); ++i) {
      Z(i, ds.labels[static_cast<std::size_t>(b.indices[i])] - 1) -= 1.0;
      Z.row(i) *= b.weights[static_cast<std::size_t>(i)];
    }
    *grad = X.transpose() * Z;
  }
  return value;
}

double nn_eval(const Dataset& ds, Index m, const Batch& b, const Point& w, Point* grad) {
  const Index d = ds.d;
  const Index C = ds.num_classes;
  const double* p = w.data();
  Eigen::Map<const Eigen::MatrixXd> W1(p, d, m);
  Eigen::Map<const Eigen::VectorXd> b1(p + d * m, m);
  Eigen::Map<const Eigen::MatrixXd> W2(p + d * m + m, m, C);
  Eigen::Map<const Eigen::VectorXd> b2(p + d * m + m + m * C, C);

  const RowMatrix X = gather(ds, b.indices);
  RowMatrix H = X * W1;
  H.rowwise() += b1.transpose();
  H = (1.0 / (1.0 + (-H.array()).exp())).matrix();
  RowMatrix O = H * W2;
  O.rowwise() += b2.transpose();

  double value = 0.0;
  for (Index i = 0; i < O.rows(); ++i) {
    value -= b.weights[static_cast<std::size_t>(i)] * O(i, ds.labels[static_cast<std::size_t>(b.indices[i])] - 1);
  }
  const Eigen::VectorXd lse = softmax_rows(O);
  for (Index i = 0; i < O.rows(); ++i) value += b.weights[static_cast<std::size_t>(i)] * lse(i);
  value /= b.total_weight;

  if (grad) {
    for (Index i = 0; i < O.rows(); ++i) {
      O(i, ds.labels[static_cast<std::size_t>(b.indices[i])] - 1) -= 1.0;
      O.row(i) *= b.weights[static_cast<std::size_t>(i)] / b.total_weight;
    }
    grad->resize(w.rows(), 1);
    double* g = grad->data();
    Eigen::Map<Eigen::MatrixXd> gW1(g, d, m);
    Eigen::Map<Eigen::VectorXd> gb1(g + d * m, m);
    Eigen::Map<Eigen::MatrixXd> gW2(g + d * m + m, m, C);
    Eigen::Map<Eigen::VectorXd> gb2(g + d * m + m + m * C, C);
    gW2 = H.transpose() * O;
    gb2 = O.colwise().sum().transpose();
    RowMatrix dH = O * W2.transpose();
    dH.array() *= H.array() * (1.0 - H.array());
    gW1 = X.transpose() * dH;
    gb1 = dH.colwise().sum().transpose();
  }
  return value;
}

double quadratic_eval(const Dataset& ds, const SyntheticQuadratic& q, const Batch& b,
                      const Point& x, Point* grad) {
  Eigen::VectorXd shift = q.b;
  for (std::size_t i = 0; i < b.indices.size(); ++i) {
    shift += (b.weights[i] / b.total_weight) * ds.features.row(b.indices[i]).cast<double>().transpose();
  }
  const Eigen::VectorXd Ax = (*q.A) * x.col(0);
  if (grad) *grad = Ax + shift;
  return 0.5 * x.col(0).dot(Ax) + shift.dot(x.col(0));
}

double evaluate(const RoundLoss& rl, const Batch& b, const Point& w, Point* grad) {
  return std::visit(
      [&](const auto& model) -> double {
        using M = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<M, MulticlassLogistic>) {
          return logistic_eval(rl.data(), b, w, grad);
        } else if constexpr (std::is_same_v<M, OneHiddenNN>) {
          return nn_eval(rl.data(), model.hidden, b, w, grad);
        } else {
          return quadratic_eval(rl.data(), model, b, w, grad);
        }
      },
      rl.model());
}

Batch full_batch(const RoundLoss& rl) { return Batch{rl.indices(), rl.weights(), rl.total_weight()}; }

bool sum_form(const Model& model) { return std::holds_alternative<MulticlassLogistic>(model); }

}  // namespace

const char* model_name(const Model& model) {
  switch (model.index()) {
    case 0: return "logistic";
    case 1: return "nn";
    default: return "quadratic";
  }
}

bool model_is_convex(const Model& model) { return !std::holds_alternative<OneHiddenNN>(model); }

std::pair<Index, Index> model_point_dims(const Model& model, Index d, int num_classes) {
  const Index C = num_classes;
  if (std::holds_alternative<MulticlassLogistic>(model)) return {d, C};
  if (const auto* nn = std::get_if<OneHiddenNN>(&model)) {
    const Index m = nn->hidden;
    return {d * m + m + m * C + C, 1};
  }
  return {d, 1};
}

FeasibleSet nn_feasible_set(Index d, Index hidden, int num_classes, double r_w, double r_b) {
  return FeasibleSet::product({
      SetBlock{SetKind::ColumnL1Ball, r_w, 0, d, hidden},
      SetBlock{SetKind::ColumnL1Ball, r_b, 0, hidden, 1},
      SetBlock{SetKind::ColumnL1Ball, r_w, 0, hidden, num_classes},
      SetBlock{SetKind::ColumnL1Ball, r_b, 0, num_classes, 1},
  });
}

RoundLoss::RoundLoss(DatasetPtr data, Model model, std::vector<Index> indices,
                     std::vector<double> weights)
    : data_(std::move(data)), model_(std::move(model)), indices_(std::move(indices)),
      weights_(std::move(weights)) {
  require(data_ != nullptr, ErrorCode::InvalidArgument, "round loss: no dataset");
  require(!indices_.empty(), ErrorCode::InvalidArgument, "round loss: empty batch");
  if (weights_.empty()) weights_.assign(indices_.size(), 1.0);
  require(weights_.size() == indices_.size(), ErrorCode::DimensionMismatch,
          "round loss: weights and indices differ in length");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    require(indices_[i] >= 0 && indices_[i] < data_->size(), ErrorCode::InvalidArgument,
            "round loss: sample index out of range");
    require(weights_[i] >= 0.0 && std::isfinite(weights_[i]), ErrorCode::InvalidArgument,
            "round loss: weights must be finite and nonnegative");
    total_weight_ += weights_[i];
  }
  require(total_weight_ > 0.0, ErrorCode::InvalidArgument, "round loss: zero total weight");
  if (const auto* nn = std::get_if<OneHiddenNN>(&model_)) {
    require(nn->hidden >= 1, ErrorCode::InvalidArgument, "nn: hidden width must be >= 1");
  }
  if (const auto* q = std::get_if<SyntheticQuadratic>(&model_)) {
    require(q->A && q->A->rows() == data_->d && q->A->cols() == data_->d &&
                q->b.size() == data_->d,
            ErrorCode::DimensionMismatch, "quadratic: A and b must match the feature dimension");
  }
  dims_ = model_point_dims(model_, data_->d, data_->num_classes);
}

NoiseSpec NoiseSpec::minibatch(Index size, std::uint64_t seed) {
  require(size >= 1, ErrorCode::InvalidArgument, "noise: minibatch size must be >= 1");
  return NoiseSpec(NoiseKind::MinibatchSubsample, size, 0.0, seed);
}

NoiseSpec NoiseSpec::additive_gaussian(double sigma, std::uint64_t seed) {
  require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::InvalidArgument,
          "noise: sigma must be finite and >= 0");
  return NoiseSpec(NoiseKind::AdditiveGaussian, 0, sigma, seed);
}

NoiseSpec NoiseSpec::with_seed(std::uint64_t seed) const {
  NoiseSpec copy = *this;
  copy.seed_ = seed;
  return copy;
}

double loss(const RoundLoss& rl, const Point& w) {
  check_point(rl, w, "loss");
  return evaluate(rl, full_batch(rl), w, nullptr);
}

Point grad_exact(const RoundLoss& rl, const Point& w) {
  check_point(rl, w, "grad_exact");
  Point g;
  evaluate(rl, full_batch(rl), w, &g);
  return g;
}

Point grad_stochastic(const RoundLoss& rl, const Point& w, const NoiseSpec& noise,
                      std::int64_t round, std::int64_t draw) {
  check_point(rl, w, "grad_stochastic");
  if (noise.is_exact()) return grad_exact(rl, w);
  auto engine = keyed_engine(derive_key(noise.seed(), kTagNoise), static_cast<std::uint64_t>(round),
                             static_cast<std::uint64_t>(draw));
  if (noise.kind() == NoiseKind::AdditiveGaussian) {
    Point g = grad_exact(rl, w);
    const double sd = noise.sigma() / std::sqrt(static_cast<double>(g.size()));
    std::normal_distribution<double> gauss(0.0, sd);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] += gauss(engine);
    return g;
  }
  // Uniform subsample with replacement; each pick carries weight w_i * |B| / B' and the
  // normalizer stays the full batch weight, so both sum and mean forms are unbiased.
  const auto n = static_cast<std::size_t>(noise.subsample_size());
  const auto batch = rl.indices().size();
  const double scale = static_cast<double>(batch) / static_cast<double>(n);
  std::uniform_int_distribution<std::size_t> pick(0, batch - 1);
  std::vector<Index> idx(n);
  std::vector<double> wts(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pos = pick(engine);
    idx[k] = rl.indices()[pos];
    wts[k] = rl.weights()[pos] * scale;
  }
  Point g;
  evaluate(rl, Batch{idx, wts, rl.total_weight()}, w, &g);
  return g;
}

RoundLoss population_loss(DatasetPtr data, const Model& model, Index batch) {
  require(data != nullptr && data->size() > 0, ErrorCode::InvalidArgument,
          "population loss: empty dataset");
  const Index n = data->size();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  const double w = sum_form(model) ? static_cast<double>(batch) / static_cast<double>(n) : 1.0;
  std::vector<double> wts(idx.size(), w);
  return RoundLoss(std::move(data), model, std::move(idx), std::move(wts));
}

RoundLoss average_loss(std::span<const RoundLoss> rounds) {
  require(!rounds.empty(), ErrorCode::InvalidArgument, "average loss: no rounds");
  const auto& first = rounds.front();
  const bool sums = sum_form(first.model());
  const double T = static_cast<double>(rounds.size());
  std::map<Index, double> merged;
  for (const auto& rl : rounds) {
    require(rl.data_ptr() == first.data_ptr() && rl.model().index() == first.model().index(),
            ErrorCode::InvalidArgument, "average loss: rounds must share dataset and model");
    const double scale = sums ? 1.0 / T : 1.0 / (T * rl.total_weight());
    for (std::size_t i = 0; i < rl.indices().size(); ++i) {
      merged[rl.indices()[i]] += rl.weights()[i] * scale;
    }
  }
  std::vector<Index> idx;
  std::vector<double> wts;
  idx.reserve(merged.size());
  wts.reserve(merged.size());
  for (const auto& [i, w] : merged) {
    idx.push_back(i);
    wts.push_back(w);
  }
  return RoundLoss(first.data_ptr(), first.model(), std::move(idx), std::move(wts));
}

}  // namespace pfo
