#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfo/geometry.hpp"
#include "pfo/oracles.hpp"

namespace pfo {

/// One row of a run: the played point's loss and the per-round measurements.
struct RoundRecord {
  std::int64_t t = 1;
  double loss_value = 0.0;            // f_t(x_t)
  std::optional<double> cum_regret;   // filled once a comparator is known
  std::optional<double> est_error;    // ||d_t - grad f-bar(x_t)|| when f-bar is known
  std::optional<double> fw_gap;
  std::int64_t wall_time_ns = 0;
};

struct Comparator {
  Point x_star;
  double objective_value = 0.0;  // (1/T) sum_t f_t(x_star)
  double fw_gap = 0.0;           // certificate of x_star on the averaged loss
  std::string method_note;
};

/// Constants of the stochastic regret bound. Q stands in for f-bar(x_1) - f-bar(x*).
struct BoundParams {
  double L = 0.0;
  double D = 0.0;
  double sigma = 0.0;
  double sigma_hat = 0.0;
  double M = 0.0;
  double Q = 0.0;
  double delta = 0.5;
};

/// Best fixed point in hindsight for the averaged loss. Quadratics use their closed-form
/// minimizer whenever it is available; other convex losses run accelerated projected
/// gradient for at most `iters` iterations, stopping once the FW gap is below 1e-10.
/// Nonconvex models are rejected.
Comparator solve_comparator(std::span<const RoundLoss> losses, const FeasibleSet& set,
                            std::int64_t iters);

/// Cumulative sums of f_t(x_t) - f_t(x*).
std::vector<double> regret_curve(std::span<const RoundRecord> records,
                                 std::span<const RoundLoss> losses, const Comparator& comparator);

/// Writes cum_regret into the records.
void attach_regret(std::span<RoundRecord> records, std::span<const RoundLoss> losses,
                   const Comparator& comparator);

/// max_{u in set} <g, x - u>.
double fw_gap(const Point& gradient, const Point& x, const FeasibleSet& set);

double theoretical_regret_bound(const BoundParams& params, std::int64_t T);

/// Measured problem constants: L from gradient differences over random feasible pairs,
/// sigma as the largest observed oracle deviation, M as the largest |f_t - f-bar|.
struct EmpiricalConstants {
  double L = 0.0;
  double sigma = 0.0;
  double M = 0.0;
};

EmpiricalConstants estimate_constants(std::span<const RoundLoss> rounds, const FeasibleSet& set,
                                      const NoiseSpec& noise, const RoundLoss* mean_loss,
                                      int n_probes, std::uint64_t seed);

/// Euclidean projection, blockwise for product sets. Used by the comparator solver;
/// the online learners never call it.
Point euclidean_projection(const FeasibleSet& set, const Point& p);

}  // namespace pfo
