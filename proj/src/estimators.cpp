#include "pfo/estimators.hpp"

#include <cmath>

namespace pfo {

ScheduleSpec ScheduleSpec::inverse_power(double alpha) {
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::InvalidArgument,
          "schedule: alpha must lie in (0, 1], got " + std::to_string(alpha));
  return ScheduleSpec{alpha};
}

double rho(const ScheduleSpec& s, std::int64_t t) {
  require(t >= 1, ErrorCode::InvalidArgument, "rho: t must be >= 1");
  return std::pow(static_cast<double>(t) + 1.0, -s.alpha);
}

EstimatorState estimator_init(EstimatorKind kind, const Point& g1) {
  require(all_finite(g1), ErrorCode::InvalidArgument, "estimator_init: gradient not finite");
  return EstimatorState{kind, g1, Point(), 1};
}

EstimatorState estimator_update(const EstimatorState& st, const Point& g_new,
                                const Point& g_old_same_xi, double rho_t) {
  require(rho_t > 0.0 && rho_t <= 1.0, ErrorCode::InvalidArgument,
          "estimator_update: rho must lie in (0, 1]");
  check_same_dims(st.d, g_new, "estimator_update");
  EstimatorState next = st;
  switch (st.kind) {
    case EstimatorKind::Recursive:
      check_same_dims(st.d, g_old_same_xi, "estimator_update");
      if (rho_t == 1.0) {
        next.d = g_new;
      } else {
        next.d = g_new + (1.0 - rho_t) * (st.d - g_old_same_xi);
      }
      break;
    case EstimatorKind::MomentumAverage:
      next.d = (1.0 - rho_t) * st.d + rho_t * g_new;
      break;
    case EstimatorKind::Plain:
      next.d = g_new;
      break;
  }
  ++next.t;
  return next;
}

double estimator_error(const EstimatorState& st, const Point& true_grad) {
  check_same_dims(st.d, true_grad, "estimator_error");
  return (st.d - true_grad).norm();
}

}  // namespace pfo
