#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pfo/estimators.hpp"
#include "pfo/geometry.hpp"
#include "pfo/metrics.hpp"
#include "pfo/oracles.hpp"

namespace pfo {

/// ORGFW: recursive estimator + one FW step per round.
/// OSFW: momentum-averaged estimator + one FW step.
/// OFW: average of all past round gradients at the current point + one FW step.
/// FW: the round's own gradient + one FW step.
/// MORGFW / MetaFW: K-step FW simulation driven by K perturbed-leader learners.
enum class Algorithm { ORGFW, OSFW, OFW, MetaFW, MORGFW, FW };

const char* to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

struct LearnerConfig {
  Algorithm algo = Algorithm::ORGFW;
  ScheduleSpec schedule{};
  std::int64_t K = 0;  // 0 selects the default for the horizon
  double ftpl_scale = 1.0;
  std::uint64_t seed = 0;
  NoiseSpec noise = NoiseSpec::exact();
};

/// K = T for MORGFW, ceil(T^{3/2}) for MetaFW, 1 for the single-step learners.
std::int64_t resolve_inner_steps(const LearnerConfig& cfg, std::int64_t T);

/// Perturbed-leader learner over linear losses.
struct FtplState {
  Point accumulated;
  Point perturbation;
  std::int64_t index = 1;
};

/// Perturbation coordinates are uniform on [0, scale * sqrt(T)], one draw per learner.
FtplState make_ftpl(const FeasibleSet& set, std::int64_t index, std::int64_t T, double scale,
                    std::uint64_t seed);
Point ftpl_predict(const FtplState& f, const FeasibleSet& set);
FtplState ftpl_feedback(FtplState f, const Point& linear_loss);

struct LearnerState {
  Point x;   // iterate played this round
  Point x1;  // initial point
  std::optional<EstimatorState> est;
  std::int64_t round = 1;
  std::vector<FtplState> ftpl;
  std::vector<RoundLoss> history;  // OFW only
};

LearnerState init_learner(const LearnerConfig& cfg, const FeasibleSet& set, std::int64_t T,
                          std::optional<Point> x1 = std::nullopt);

/// Extra per-round measurements. They are taken outside the timed region.
struct RecordOptions {
  const RoundLoss* mean_loss = nullptr;  // f-bar, enables est_error
  bool fw_gap = false;
  bool fw_gap_on_mean = true;  // gap against f-bar when given; false uses the round's own gradient
};

struct StepResult {
  LearnerState state;
  RoundRecord record;
  // Meta learners only: x_t^{(k)} for k = 1..K+1 and the estimates d_t^{(k)}, k = 1..K.
  std::vector<Point> inner_iterates;
  std::vector<Point> inner_estimates;
};

StepResult orgfw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                      const LearnerConfig& cfg, const RecordOptions& opts = {});
StepResult osfw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                     const LearnerConfig& cfg, const RecordOptions& opts = {});
StepResult ofw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                    const LearnerConfig& cfg, const RecordOptions& opts = {});
StepResult fw_step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                   const LearnerConfig& cfg, const RecordOptions& opts = {});
StepResult morgfw_round(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                        const LearnerConfig& cfg, const RecordOptions& opts = {});

/// Dispatches on cfg.algo.
StepResult step(LearnerState state, const RoundLoss& rl, const FeasibleSet& set,
                const LearnerConfig& cfg, const RecordOptions& opts = {});

struct RunResult {
  std::vector<RoundRecord> records;
  std::vector<Point> played;  // only when requested
};

/// Plays T rounds of the stream; record t is round t.
RunResult run(const LearnerConfig& cfg, std::span<const RoundLoss> stream, const FeasibleSet& set,
              std::int64_t T, const RecordOptions& opts = {}, bool keep_iterates = false,
              std::optional<Point> x1 = std::nullopt);

}  // namespace pfo
