#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfo/algorithms.hpp"
#include "pfo/metrics.hpp"
#include "pfo/stream.hpp"

namespace pfo {

enum class DataKind { Synthetic, Quadratic, Mnist, Cifar10, Csv };
enum class ModelKind { Logistic, NN, Quadratic };
enum class NoiseMode { None, Minibatch, Gaussian };
enum class Toggle { Auto, On, Off };

struct DataSource {
  DataKind kind = DataKind::Synthetic;
  // synthetic clusters / quadratic perturbation pool
  Index d = 10;
  int classes = 3;
  Index n = 1000;
  double separation = 1.0;
  std::optional<std::uint64_t> seed;  // unset: follows the run seed
  double curvature = 1.0;
  double shift = 0.0;
  double perturbation = 1.0;
  // files
  std::string images;
  std::string labels;
  std::vector<std::string> batches;
  std::string csv;
  Index limit = 0;
};

struct NoiseConfig {
  NoiseMode mode = NoiseMode::None;
  Index size = 16;
  double sigma = 0.0;
};

/// Validated experiment description with all defaults resolved.
struct RunConfig {
  std::vector<Algorithm> algorithms;
  DataSource data;
  ModelKind model = ModelKind::Logistic;
  Index hidden = 10;
  SetKind set = SetKind::ColumnL1Ball;
  StreamMode mode = StreamMode::Stochastic;
  std::int64_t T = 0;
  std::int64_t K = 0;  // 0: per-algorithm default
  Index batch = 32;
  double radius = 8.0;
  double r_w = 10.0;
  double r_b = 10.0;
  double alpha = 1.0;
  std::vector<std::uint64_t> seeds{1};
  NoiseConfig noise;
  double ftpl_scale = 1.0;
  std::string output_dir = "out";
  std::vector<std::int64_t> t_grid;
  std::int64_t comparator_iters = 10000;
  Toggle est_error = Toggle::Auto;
  Toggle fw_gap = Toggle::Auto;

  /// Canonical text of everything that determines a seed's loss sequence and comparator.
  std::string stream_fingerprint(std::uint64_t seed) const;
};

/// Keys accepted at the top level of a config document.
const std::vector<std::string>& config_keys();

/// Parses YAML (JSON is accepted too) and fills in the defaults. `overrides` are
/// "dotted.key=value" pairs applied on top of the document before validation.
RunConfig parse_config_text(const std::string& text,
                            const std::vector<std::string>& overrides = {});
RunConfig parse_config_file(const std::filesystem::path& path,
                            const std::vector<std::string>& overrides = {});

/// Everything one seed needs: data, rounds and the comparator when it exists.
struct SeedProblem {
  DatasetPtr data;
  Model model;
  FeasibleSet set;
  std::vector<RoundLoss> rounds;
  std::optional<RoundLoss> mean_loss;
  std::optional<Comparator> comparator;
  std::optional<Point> x1;  // unset: the set's default initial point
};

SeedProblem build_problem(const RunConfig& cfg, std::uint64_t seed, std::int64_t T,
                          bool with_comparator, const std::filesystem::path& cache_dir = {});

LearnerConfig learner_config(const RunConfig& cfg, Algorithm algo, std::uint64_t seed);

struct AlgorithmRun {
  Algorithm algo;
  std::uint64_t seed;
  std::vector<RoundRecord> records;
};

struct ExperimentResult {
  std::vector<AlgorithmRun> runs;
  std::filesystem::path output_dir;
};

inline constexpr const char* kCsvHeader = "seed,t,loss,cum_regret,est_error,fw_gap,wall_time_ns";

/// Runs every (algorithm, seed) pair and writes <ALGO>.csv plus summary.json.
ExperimentResult run_experiment(const RunConfig& cfg);

/// Solves and caches x* for every seed as comparator_seed<seed>.json.
std::vector<std::filesystem::path> solve_comparators(const RunConfig& cfg);

/// Runs each config and writes a joint summary with pairwise win rates to `out`.
void compare(const std::vector<RunConfig>& configs, const std::filesystem::path& out);

/// CSV row <-> record, used by tests and downstream tooling.
std::string format_csv_row(std::uint64_t seed, const RoundRecord& rec);
std::pair<std::uint64_t, RoundRecord> parse_csv_row(const std::string& line);

}  // namespace pfo
