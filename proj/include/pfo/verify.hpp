#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pfo/oracles.hpp"

namespace pfo {

/// Numerical probe of s_t = sum_{tau=2}^t (rho_{tau-1} prod_{k=tau}^t (1 - rho_k))^2
/// against the bound s_t <= (t + 1)^{-alpha}, with rho_k = (k + 1)^{-alpha}.
struct SequenceProbe {
  double alpha = 1.0;
  std::int64_t t_max = 2;
  double worst_ratio = 0.0;  // max_t s_t (t + 1)^alpha
  std::int64_t worst_t = 2;
};

/// s_t for t = 2..t_max via s_{t+1} = (1 - rho_{t+1})^2 (s_t + rho_t^2); index 0 is s_2.
std::vector<double> sequence_values(double alpha, std::int64_t t_max);
/// s_t straight from its definition (O(t)).
double sequence_direct(double alpha, std::int64_t t);
SequenceProbe sequence_lemma_check(double alpha, std::int64_t t_max);

/// max over 1 <= r <= K <= K_max of |prod_{j=r}^K (1 - 1/(j+1)) - r/(K+1)| / (r/(K+1)).
double product_identity_check(std::int64_t K_max);

/// Quadratic test problem with a known mean loss: 0.5 curvature ||x||^2 + b^T x with
/// b = shift * e_1, zero-mean per-sample perturbations, additive Gaussian oracle noise,
/// over an l2 ball.
struct QuadraticProbeProblem {
  Index dim = 50;
  double curvature = 1.0;
  double shift = 0.5;
  double perturbation = 0.0;
  double sigma_hat = 1.0;
  double radius = 1.0;
  Index batch = 8;
  Index pool = 2000;
};

struct ConcentrationProfile {
  std::vector<std::int64_t> grid;
  std::vector<double> median;  // of ||eps_t|| (t + 1)^{alpha/2} across seeds
  std::vector<double> p90;
};

ConcentrationProfile concentration_probe(const QuadraticProbeProblem& problem, double alpha,
                                         std::int64_t T, int n_seeds,
                                         std::vector<std::int64_t> grid, std::uint64_t base_seed = 1);

/// Central-difference gradient check at n_points random points of scale `radius`.
/// Coordinate mode: ||fd - g||_inf / ||g||_inf. Directional mode (n_directions > 0):
/// |fd_u - <g, u>| / ||g||_2 over unit directions u. Returns the worst value.
double finite_difference_check(const RoundLoss& rl, int n_points, double h, std::uint64_t seed,
                               int n_directions = 0, double radius = 1.0);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::int64_t> t_grid;  // the T values that entered the fit
};

/// Least squares of log(median value) on log T. values[i] holds one entry per seed for
/// t_grid[i]; nonpositive medians are dropped and fewer than four survivors is an error.
SlopeFit fit_regret_slope(const std::vector<std::int64_t>& t_grid,
                          const std::vector<std::vector<double>>& values);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double q);

struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  double seconds = 0.0;
};

/// Fixed battery of numerical checks behind the `verify` subcommand. `quick` trims
/// horizons and seed counts for smoke runs.
std::vector<CheckRow> run_verification(bool quick);

}  // namespace pfo
