#pragma once

#include <cstdint>

#include "pfo/point.hpp"

namespace pfo {

enum class EstimatorKind { Recursive, MomentumAverage, Plain };

/// rho_t = eta_t = 1 / (t + 1)^alpha, t >= 1.
struct ScheduleSpec {
  double alpha = 1.0;

  static ScheduleSpec inverse_power(double alpha);
};

double rho(const ScheduleSpec& s, std::int64_t t);

struct EstimatorState {
  EstimatorKind kind = EstimatorKind::Recursive;
  Point d;       // current estimate d_t
  Point prev_x;  // iterate the estimate was last evaluated at
  std::int64_t t = 1;
};

EstimatorState estimator_init(EstimatorKind kind, const Point& g1);

/// One estimator step given gradients evaluated under the same realization:
///   Recursive:       d <- g_new + (1 - rho) (d - g_old)
///   MomentumAverage: d <- (1 - rho) d + rho g_new
///   Plain:           d <- g_new
/// g_old is ignored by the last two kinds and may be empty for them.
EstimatorState estimator_update(const EstimatorState& st, const Point& g_new,
                                const Point& g_old_same_xi, double rho_t);

double estimator_error(const EstimatorState& st, const Point& true_grad);

}  // namespace pfo
