#include "pfo/algorithms.hpp"

#include <chrono>
#include <cmath>

#include "pfo/rng.hpp"

namespace pfo {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ns(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
}

void check_state(const LearnerState& state, const RoundLoss& rl, const FeasibleSet& set) {
  require(state.round >= 1, ErrorCode::InvalidArgument, "learner: round must be >= 1");
  require(rl.point_rows() == set.rows() && rl.point_cols() == set.cols(),
          ErrorCode::DimensionMismatch,
          "learner: loss expects " + dims_string(rl.point_rows(), rl.point_cols()) +
              " but set is " + dims_string(set.rows(), set.cols()));
}

RoundRecord make_record(const LearnerState& state, const RoundLoss& rl, const FeasibleSet& set,
                        const RecordOptions& opts, std::int64_t ns) {
  RoundRecord rec;
  rec.t = state.round;
  rec.loss_value = loss(rl, state.x);
  rec.wall_time_ns = ns;
  std::optional<Point> mean_grad;
  if (opts.mean_loss) mean_grad = grad_exact(*opts.mean_loss, state.x);
  if (mean_grad && state.est) rec.est_error = estimator_error(*state.est, *mean_grad);
  if (opts.fw_gap) {
    const Point g = mean_grad && opts.fw_gap_on_mean ? *mean_grad : grad_exact(rl, state.x);
    rec.fw_gap = fw_gap(g, state.x, set);
  }
  return rec;
}

// Shared tail of the single-step learners: v = lmo(d), x <- x + eta (v - x).
StepResult finish_fw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                          const LearnerConfig& cfg, const RecordOptions& opts,
                          Clock::time_point start) {
  const Point v = lmo(set, state.est->d);
  const double eta = rho(cfg.schedule, state.round);
  Point next = state.x + eta * (v - state.x);
  const std::int64_t ns = elapsed_ns(start);

  RoundRecord rec = make_record(state, rl, set, opts, ns);
  state.est->prev_x = state.x;
  state.x = std::move(next);
  ++state.round;
  return StepResult{std::move(state), std::move(rec), {}, {}};
}

}  // namespace

const char* to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::ORGFW: return "ORGFW";
    case Algorithm::OSFW: return "OSFW";
    case Algorithm::OFW: return "OFW";
    case Algorithm::MetaFW: return "MetaFW";
    case Algorithm::MORGFW: return "MORGFW";
    case Algorithm::FW: return "FW";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : {Algorithm::ORGFW, Algorithm::OSFW, Algorithm::OFW, Algorithm::MetaFW,
                      Algorithm::MORGFW, Algorithm::FW}) {
    if (name == to_string(a)) return a;
  }
  fail(ErrorCode::Config,
       "unknown algorithm '" + name + "' (expected ORGFW, OSFW, OFW, MetaFW, MORGFW or FW)");
}

std::int64_t resolve_inner_steps(const LearnerConfig& cfg, std::int64_t T) {
  require(T >= 1, ErrorCode::InvalidArgument, "horizon T must be >= 1");
  if (cfg.algo != Algorithm::MORGFW && cfg.algo != Algorithm::MetaFW) return 1;
  if (cfg.K > 0) return cfg.K;
  if (cfg.algo == Algorithm::MORGFW) return T;
  return static_cast<std::int64_t>(std::ceil(std::pow(static_cast<double>(T), 1.5) - 1e-9));
}

FtplState make_ftpl(const FeasibleSet& set, std::int64_t index, std::int64_t T, double scale,
                    std::uint64_t seed) {
  require(scale > 0.0, ErrorCode::InvalidArgument, "ftpl: perturbation scale must be > 0");
  auto rng = keyed_engine(derive_key(seed, kTagFtpl), static_cast<std::uint64_t>(index));
  std::uniform_real_distribution<double> unif(0.0, scale * std::sqrt(static_cast<double>(T)));
  FtplState f{Point::Zero(set.rows(), set.cols()), Point(set.rows(), set.cols()), index};
  for (Index i = 0; i < f.perturbation.size(); ++i) f.perturbation.data()[i] = unif(rng);
  return f;
}

Point ftpl_predict(const FtplState& f, const FeasibleSet& set) {
  return lmo(set, f.accumulated + f.perturbation);
}

FtplState ftpl_feedback(FtplState f, const Point& linear_loss) {
  check_same_dims(f.accumulated, linear_loss, "ftpl_feedback");
  f.accumulated += linear_loss;
  return f;
}

LearnerState init_learner(const LearnerConfig& cfg, const FeasibleSet& set, std::int64_t T,
                          std::optional<Point> x1) {
  LearnerState st;
  st.x1 = x1 ? std::move(*x1) : initial_point(set);
  require(st.x1.rows() == set.rows() && st.x1.cols() == set.cols(),
          ErrorCode::DimensionMismatch, "initial point does not match the set");
  require(contains(set, st.x1), ErrorCode::InvalidArgument, "initial point is infeasible");
  st.x = st.x1;
  if (cfg.algo == Algorithm::MORGFW || cfg.algo == Algorithm::MetaFW) {
    const std::int64_t K = resolve_inner_steps(cfg, T);
    require(K >= 1, ErrorCode::InvalidArgument, "meta learner: K must be >= 1");
    st.ftpl.reserve(static_cast<std::size_t>(K));
    for (std::int64_t k = 1; k <= K; ++k) {
      st.ftpl.push_back(make_ftpl(set, k, T, cfg.ftpl_scale, cfg.seed));
    }
  }
  return st;
}

StepResult orgfw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                      const LearnerConfig& cfg, const RecordOptions& opts) {
  check_state(state, rl, set);
  const std::int64_t t = state.round;
  const auto start = Clock::now();
  const Point g_new = grad_stochastic(rl, state.x, cfg.noise, t, 0);
  if (!state.est) {
    state.est = estimator_init(EstimatorKind::Recursive, g_new);
  } else {
    // Same realization xi_t at the previous iterate.
    const Point g_old = grad_stochastic(rl, state.est->prev_x, cfg.noise, t, 0);
    state.est = estimator_update(*state.est, g_new, g_old, rho(cfg.schedule, t));
  }
  return finish_fw_step(std::move(state), rl, set, cfg, opts, start);
}

StepResult osfw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                     const LearnerConfig& cfg, const RecordOptions& opts) {
  check_state(state, rl, set);
  const std::int64_t t = state.round;
  const auto start = Clock::now();
  const Point g = grad_stochastic(rl, state.x, cfg.noise, t, 0);
  if (!state.est) {
    state.est = estimator_init(EstimatorKind::MomentumAverage, g);
  } else {
    state.est = estimator_update(*state.est, g, Point(), rho(cfg.schedule, t));
  }
  return finish_fw_step(std::move(state), rl, set, cfg, opts, start);
}

StepResult fw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                   const LearnerConfig& cfg, const RecordOptions& opts) {
  check_state(state, rl, set);
  const std::int64_t t = state.round;
  const auto start = Clock::now();
  const Point g = grad_stochastic(rl, state.x, cfg.noise, t, 0);
  if (!state.est) {
    state.est = estimator_init(EstimatorKind::Plain, g);
  } else {
    state.est = estimator_update(*state.est, g, Point(), 1.0);
  }
  return finish_fw_step(std::move(state), rl, set, cfg, opts, start);
}

StepResult ofw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                    const LearnerConfig& cfg, const RecordOptions& opts) {
  check_state(state, rl, set);
  const auto start = Clock::now();
  state.history.push_back(rl);
  Point d = Point::Zero(set.rows(), set.cols());
  for (const auto& past : state.history) d += grad_exact(past, state.x);
  d /= static_cast<double>(state.history.size());
  if (!state.est) {
    state.est = estimator_init(EstimatorKind::Plain, d);
  } else {
    state.est = estimator_update(*state.est, d, Point(), 1.0);
  }
  return finish_fw_step(std::move(state), rl, set, cfg, opts, start);
}

StepResult morgfw_round(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                        const LearnerConfig& cfg, const RecordOptions& opts) {
  check_state(state, rl, set);
  require(cfg.algo == Algorithm::MORGFW || cfg.algo == Algorithm::MetaFW,
          ErrorCode::InvalidArgument, "morgfw_round: algorithm must be MORGFW or MetaFW");
  const auto K = static_cast<std::int64_t>(state.ftpl.size());
  require(K >= 1, ErrorCode::InvalidArgument, "morgfw_round: K must be >= 1");
  const std::int64_t t = state.round;
  const bool recursive = cfg.algo == Algorithm::MORGFW;

  const auto start = Clock::now();
  // Prediction: K FW steps from x_1 along the learners' current outputs.
  std::vector<Point> xs;
  std::vector<Point> vs;
  xs.reserve(static_cast<std::size_t>(K + 1));
  vs.reserve(static_cast<std::size_t>(K));
  xs.push_back(state.x1);
  for (std::int64_t k = 1; k <= K; ++k) {
    vs.push_back(ftpl_predict(state.ftpl[static_cast<std::size_t>(k - 1)], set));
    const double eta = rho(cfg.schedule, k);
    xs.push_back((1.0 - eta) * xs.back() + eta * vs.back());
  }
  state.x = xs.back();

  // Feedback: estimate grad f_t at every inner iterate and hand it to learner k.
  std::vector<Point> ds;
  ds.reserve(static_cast<std::size_t>(K));
  std::optional<EstimatorState> est;
  for (std::int64_t k = 1; k <= K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const Point g = grad_stochastic(rl, xs[ku - 1], cfg.noise, t, k);
    if (!est) {
      est = estimator_init(recursive ? EstimatorKind::Recursive : EstimatorKind::Plain, g);
    } else if (recursive) {
      const Point g_old = grad_stochastic(rl, xs[ku - 2], cfg.noise, t, k);
      est = estimator_update(*est, g, g_old, rho(cfg.schedule, k));
    } else {
      est = estimator_update(*est, g, Point(), 1.0);
    }
    state.ftpl[ku - 1] = ftpl_feedback(std::move(state.ftpl[ku - 1]), est->d);
    ds.push_back(est->d);
  }
  const std::int64_t ns = elapsed_ns(start);

  RoundRecord rec = make_record(state, rl, set, opts, ns);
  ++state.round;
  return StepResult{std::move(state), std::move(rec), std::move(xs), std::move(ds)};
}

StepResult step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                const LearnerConfig& cfg, const RecordOptions& opts) {
  switch (cfg.algo) {
    case Algorithm::ORGFW: return orgfw_step(std::move(state), rl, set, cfg, opts);
    case Algorithm::OSFW: return osfw_step(std::move(state), rl, set, cfg, opts);
    case Algorithm::OFW: return ofw_step(std::move(state), rl, set, cfg, opts);
    case Algorithm::FW: return fw_step(std::move(state), rl, set, cfg, opts);
    case Algorithm::MetaFW:
    case Algorithm::MORGFW: return morgfw_round(std::move(state), rl, set, cfg, opts);
  }
  fail(ErrorCode::Internal, "unhandled algorithm");
}

RunResult run(const LearnerConfig& cfg, std::span<const RoundLoss> stream, const FeasibleSet& set,
              std::int64_t T, const RecordOptions& opts, bool keep_iterates,
              std::optional<Point> x1) {
  require(T >= 1, ErrorCode::InvalidArgument, "run: T must be >= 1");
  LearnerState state = init_learner(cfg, set, T, std::move(x1));
  const bool meta = cfg.algo == Algorithm::MORGFW || cfg.algo == Algorithm::MetaFW;
  RunResult out;
  out.records.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) {
    if (static_cast<std::size_t>(t) > stream.size()) {
      fail(ErrorCode::StreamExhausted, "stream exhausted at round " + std::to_string(t) +
                                           " of " + std::to_string(T) + " (stream holds " +
                                           std::to_string(stream.size()) + " rounds)");
    }
    if (keep_iterates && !meta) out.played.push_back(state.x);
    StepResult r = step(std::move(state), stream[static_cast<std::size_t>(t - 1)], set, cfg, opts);
    if (keep_iterates && meta) out.played.push_back(r.state.x);
    state = std::move(r.state);
    out.records.push_back(std::move(r.record));
  }
  return out;
}

}  // namespace pfo
