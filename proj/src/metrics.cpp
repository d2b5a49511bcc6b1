#include "pfo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pfo/rng.hpp"

namespace pfo {
namespace {

// Projection of v onto {w >= 0, sum w = s}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v, double s) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double cand = (cum - s) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) theta = cand;
  }
  return (v.array() - theta).max(0.0).matrix();
}

Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double r) {
  if (v.lpNorm<1>() <= r) return v;
  const Eigen::VectorXd mag = project_simplex(v.cwiseAbs(), r);
  return mag.cwiseProduct(v.unaryExpr([](double a) { return a < 0.0 ? -1.0 : 1.0; }));
}

bool is_scaled_identity(const Eigen::MatrixXd& A) {
  const double a = A(0, 0);
  return a > 0.0 && (A - a * Eigen::MatrixXd::Identity(A.rows(), A.cols())).cwiseAbs().maxCoeff() == 0.0;
}

Point project_block(const SetBlock& b, const Point& p) {
  Point out = p;
  switch (b.kind) {
    case SetKind::ColumnL1Ball:
      for (Index j = 0; j < p.cols(); ++j) out.col(j) = project_l1(p.col(j), b.radius);
      break;
    case SetKind::Simplex: {
      Eigen::Map<const Eigen::VectorXd> flat(p.data(), p.size());
      const Eigen::VectorXd proj = project_simplex(flat, b.radius);
      out = Eigen::Map<const Point>(proj.data(), p.rows(), p.cols());
      break;
    }
    case SetKind::L2Ball: {
      const double n = p.norm();
      if (n > b.radius) out *= b.radius / n;
      break;
    }
  }
  return out;
}

// FISTA with backtracking on the smoothness constant and gradient-based restarts.
// Stops early once the Frank-Wolfe gap certifies near-optimality.
Comparator projected_gradient_comparator(const RoundLoss& avg, const FeasibleSet& set,
                                         std::int64_t iters) {
  constexpr double kTargetGap = 1e-10;
  Point x = initial_point(set);
  Point y = x;
  double momentum = 1.0;
  double L = 1.0;
  std::int64_t k = 0;
  double gap = fw_gap(grad_exact(avg, x), x, set);
  for (; k < iters && gap > kTargetGap; ++k) {
    const Point g = grad_exact(avg, y);
    Point z;
    for (int tries = 0; tries < 60; ++tries) {
      z = euclidean_projection(set, y - g / L);
      const double dist = (z - y).norm();
      if (dist == 0.0 || (grad_exact(avg, z) - g).norm() <= L * dist) break;
      L *= 2.0;
    }
    if (inner(y - z, z - x) > 0.0) {
      // momentum points uphill: restart from the last accepted point
      y = x;
      momentum = 1.0;
      continue;
    }
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    y = z + ((momentum - 1.0) / next) * (z - x);
    x = std::move(z);
    momentum = next;
    L *= 0.95;
    if (k % 10 == 0) gap = fw_gap(grad_exact(avg, x), x, set);
  }
  gap = fw_gap(grad_exact(avg, x), x, set);
  return Comparator{x, loss(avg, x), gap,
                    "accelerated projected gradient with restarts, " + std::to_string(k) +
                        " iterations"};
}

}  // namespace

Point euclidean_projection(const FeasibleSet& set, const Point& p) {
  require(p.rows() == set.rows() && p.cols() == set.cols(), ErrorCode::DimensionMismatch,
          "projection: dimension mismatch");
  if (!set.is_product()) return project_block(set.blocks().front(), p);
  Point out = p;
  for (const SetBlock& b : set.blocks()) {
    const Point part = Eigen::Map<const Point>(p.data() + b.offset, b.rows, b.cols);
    Eigen::Map<Point>(out.data() + b.offset, b.rows, b.cols) = project_block(b, part);
  }
  return out;
}

Comparator solve_comparator(std::span<const RoundLoss> losses, const FeasibleSet& set,
                            std::int64_t iters) {
  require(iters >= 1, ErrorCode::InvalidArgument, "comparator: iters must be >= 1");
  require(!losses.empty(), ErrorCode::InvalidArgument, "comparator: no losses");
  const Model& model = losses.front().model();
  require(model_is_convex(model), ErrorCode::Unsupported,
          std::string("comparator: undefined for nonconvex model '") + model_name(model) +
              "'; report the Frank-Wolfe gap instead");
  const RoundLoss avg = average_loss(losses);
  require(avg.point_rows() == set.rows() && avg.point_cols() == set.cols(),
          ErrorCode::DimensionMismatch, "comparator: loss and set dimensions differ");

  if (const auto* q = std::get_if<SyntheticQuadratic>(&model)) {
    // Gradient at 0 is the averaged linear term; the unconstrained minimizer solves A z = -shift.
    const Point shift = grad_exact(avg, Point::Zero(set.rows(), 1));
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(*q->A);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      Point z = ldlt.solve(-shift);
      if (contains(set, z, 1e-12)) {
        return Comparator{z, loss(avg, z), fw_gap(grad_exact(avg, z), z, set),
                          "closed form: interior unconstrained minimizer"};
      }
      if (!set.is_product() && is_scaled_identity(*q->A)) {
        Point p = euclidean_projection(set, z);
        return Comparator{p, loss(avg, p), fw_gap(grad_exact(avg, p), p, set),
                          "closed form: projection of the unconstrained minimizer"};
      }
    }
  }
  return projected_gradient_comparator(avg, set, iters);
}

std::vector<double> regret_curve(std::span<const RoundRecord> records,
                                 std::span<const RoundLoss> losses, const Comparator& comparator) {
  require(records.size() <= losses.size(), ErrorCode::InvalidArgument,
          "regret_curve: more records than losses");
  std::vector<double> curve;
  curve.reserve(records.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    cum += records[i].loss_value - loss(losses[i], comparator.x_star);
    curve.push_back(cum);
  }
  return curve;
}

void attach_regret(std::span<RoundRecord> records, std::span<const RoundLoss> losses,
                   const Comparator& comparator) {
  const auto curve = regret_curve(records, losses, comparator);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].cum_regret = curve[i];
}

double fw_gap(const Point& gradient, const Point& x, const FeasibleSet& set) {
  check_same_dims(gradient, x, "fw_gap");
  const Point u = lmo(set, gradient);
  return inner(gradient, x) - inner(gradient, u);
}

double theoretical_regret_bound(const BoundParams& p, std::int64_t T) {
  require(T >= 1, ErrorCode::InvalidArgument, "regret bound: T must be >= 1");
  require(p.delta > 0.0 && p.delta < 1.0, ErrorCode::InvalidArgument,
          "regret bound: delta must lie in (0, 1)");
  const double Td = static_cast<double>(T);
  const double lg = std::log(Td) + 1.0;
  const double LD2 = p.L * p.D * p.D;
  return lg * p.Q + LD2 * lg * lg / 2.0 +
         (16.0 * LD2 + 16.0 * p.sigma * p.D + 4.0 * p.M) *
             std::sqrt(2.0 * Td * std::log(8.0 * Td / p.delta));
}

EmpiricalConstants estimate_constants(std::span<const RoundLoss> rounds, const FeasibleSet& set,
                                      const NoiseSpec& noise, const RoundLoss* mean_loss,
                                      int n_probes, std::uint64_t seed) {
  require(!rounds.empty() && n_probes >= 1, ErrorCode::InvalidArgument,
          "estimate_constants: need rounds and probes");
  auto rng = keyed_engine(seed, kTagProbe);
  std::uniform_int_distribution<std::size_t> pick(0, rounds.size() - 1);
  EmpiricalConstants out;
  for (int k = 0; k < n_probes; ++k) {
    const std::size_t r = pick(rng);
    const RoundLoss& rl = rounds[r];
    const Point x = random_feasible_point(set, rng);
    const Point y = random_feasible_point(set, rng);
    const Point gx = grad_exact(rl, x);
    const double dist = (x - y).norm();
    if (dist > 0.0) out.L = std::max(out.L, (gx - grad_exact(rl, y)).norm() / dist);
    const Point reference = mean_loss ? grad_exact(*mean_loss, x) : gx;
    const Point gs = grad_stochastic(rl, x, noise, static_cast<std::int64_t>(r) + 1, 0);
    out.sigma = std::max(out.sigma, (gs - reference).norm());
    if (mean_loss) out.M = std::max(out.M, std::abs(loss(rl, x) - loss(*mean_loss, x)));
  }
  return out;
}

}  // namespace pfo
