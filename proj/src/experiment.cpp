#include "pfo/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pfo/rng.hpp"
#include "pfo/verify.hpp"

namespace pfo {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// config document handling

const std::map<std::string, std::vector<std::string>>& nested_keys() {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"synthetic", {"d", "C", "n", "separation", "seed"}},
      {"quadratic", {"d", "n", "curvature", "shift", "perturbation", "seed"}},
      {"mnist", {"images", "labels", "limit"}},
      {"cifar10", {"batches", "limit"}},
      {"csv", {"path", "classes"}},
      {"noise", {"kind", "size", "sigma"}},
      {"record", {"est_error", "fw_gap"}},
  };
  return keys;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// Flow mappings written as {d:10} parse as a single key "d:10"; split those.
YAML::Node normalize(const YAML::Node& node) {
  if (!node.IsMap()) return node;
  YAML::Node out(YAML::NodeType::Map);
  for (const auto& kv : node) {
    std::string key = kv.first.as<std::string>();
    YAML::Node value = kv.second;
    const auto colon = key.find(':');
    if (colon != std::string::npos && (!value || value.IsNull())) {
      value = YAML::Load(key.substr(colon + 1));
      key = key.substr(0, colon);
    }
    out[key] = normalize(value);
  }
  return out;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::Config, "override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  YAML::Node value = YAML::Load(assignment.substr(eq + 1));
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.size() == 1) {
    root[parts[0]] = value;
    return;
  }
  if (parts.size() != 2) fail(ErrorCode::Config, "override key '" + path + "' nests too deeply");
  YAML::Node child = root[parts[0]];
  if (!child || !child.IsMap()) {
    YAML::Node fresh(YAML::NodeType::Map);
    root[parts[0]] = fresh;
  }
  root[parts[0]][parts[1]] = value;
}

void check_keys(const YAML::Node& node, const std::vector<std::string>& valid, const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(valid.begin(), valid.end(), key) == valid.end()) {
      fail(ErrorCode::Config, "unknown key '" + key + "' in " + where + "; valid keys: " + join(valid));
    }
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& key, T fallback) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    fail(ErrorCode::Config, "field '" + key + "' has an invalid value");
  }
}

template <class T>
std::vector<T> get_list(const YAML::Node& node, const std::string& key) {
  const YAML::Node v = node[key];
  std::vector<T> out;
  if (!v || v.IsNull()) return out;
  try {
    if (v.IsSequence()) {
      for (const auto& item : v) out.push_back(item.as<T>());
    } else {
      out.push_back(v.as<T>());
    }
  } catch (const YAML::Exception&) {
    fail(ErrorCode::Config, "field '" + key + "' has an invalid value");
  }
  return out;
}

ModelKind parse_model(const std::string& s) {
  if (s == "logistic") return ModelKind::Logistic;
  if (s == "nn") return ModelKind::NN;
  if (s == "quadratic") return ModelKind::Quadratic;
  fail(ErrorCode::Config, "invalid model '" + s + "' (expected logistic, nn or quadratic)");
}

const char* model_string(ModelKind m) {
  switch (m) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::NN: return "nn";
    case ModelKind::Quadratic: return "quadratic";
  }
  return "?";
}

SetKind parse_set(const std::string& s) {
  for (SetKind k : {SetKind::ColumnL1Ball, SetKind::Simplex, SetKind::L2Ball}) {
    if (s == to_string(k)) return k;
  }
  fail(ErrorCode::Config, "invalid set '" + s + "' (expected column_l1_ball, simplex or l2_ball)");
}

Toggle parse_toggle(const YAML::Node& node, const std::string& key) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return Toggle::Auto;
  const auto s = v.as<std::string>();
  if (s == "auto") return Toggle::Auto;
  if (s == "true" || s == "on") return Toggle::On;
  if (s == "false" || s == "off") return Toggle::Off;
  fail(ErrorCode::Config, "field 'record." + key + "' must be auto, true or false");
}

const char* data_kind_key(DataKind k) {
  switch (k) {
    case DataKind::Synthetic: return "synthetic";
    case DataKind::Quadratic: return "quadratic";
    case DataKind::Mnist: return "mnist";
    case DataKind::Cifar10: return "cifar10";
    case DataKind::Csv: return "csv";
  }
  return "?";
}

RunConfig build_config(const YAML::Node& root) {
  check_keys(root, config_keys(), "config");
  for (const auto& [section, keys] : nested_keys()) {
    if (root[section] && root[section].IsMap()) check_keys(root[section], keys, "'" + section + "'");
  }

  RunConfig cfg;
  const auto algos = get_list<std::string>(root, "algorithm");
  if (algos.empty()) fail(ErrorCode::Config, "missing required field 'algorithm'");
  for (const auto& a : algos) cfg.algorithms.push_back(parse_algorithm(a));

  std::vector<DataKind> sources;
  for (DataKind k : {DataKind::Synthetic, DataKind::Quadratic, DataKind::Mnist, DataKind::Cifar10,
                     DataKind::Csv}) {
    if (root[data_kind_key(k)]) sources.push_back(k);
  }
  if (sources.empty()) {
    fail(ErrorCode::Config, "missing required field: one of synthetic, quadratic, mnist, cifar10, csv");
  }
  if (sources.size() > 1) fail(ErrorCode::Config, "config names more than one data source");
  DataSource& ds = cfg.data;
  ds.kind = sources.front();
  const YAML::Node src = root[data_kind_key(ds.kind)];
  if (!src.IsMap()) fail(ErrorCode::Config, std::string("field '") + data_kind_key(ds.kind) + "' must be a mapping");
  if (src["seed"]) ds.seed = get<std::uint64_t>(src, "seed", 0);
  ds.limit = get<Index>(src, "limit", 0);
  switch (ds.kind) {
    case DataKind::Synthetic:
      ds.d = get<Index>(src, "d", 10);
      ds.classes = get<int>(src, "C", 3);
      ds.n = get<Index>(src, "n", 1000);
      ds.separation = get<double>(src, "separation", 1.0);
      break;
    case DataKind::Quadratic:
      ds.d = get<Index>(src, "d", 10);
      ds.classes = 1;
      ds.n = get<Index>(src, "n", 1000);
      ds.curvature = get<double>(src, "curvature", 1.0);
      ds.shift = get<double>(src, "shift", 0.0);
      ds.perturbation = get<double>(src, "perturbation", 1.0);
      require(ds.curvature > 0.0, ErrorCode::Config, "quadratic.curvature must be > 0");
      break;
    case DataKind::Mnist:
      ds.images = get<std::string>(src, "images", "");
      ds.labels = get<std::string>(src, "labels", "");
      if (ds.images.empty() || ds.labels.empty()) {
        fail(ErrorCode::Config, "missing required field 'mnist.images' / 'mnist.labels'");
      }
      ds.d = 784;
      ds.classes = 10;
      break;
    case DataKind::Cifar10:
      ds.batches = get_list<std::string>(src, "batches");
      if (ds.batches.empty()) fail(ErrorCode::Config, "missing required field 'cifar10.batches'");
      ds.d = 3072;
      ds.classes = 10;
      break;
    case DataKind::Csv:
      ds.csv = get<std::string>(src, "path", "");
      if (ds.csv.empty()) fail(ErrorCode::Config, "missing required field 'csv.path'");
      ds.classes = get<int>(src, "classes", 0);
      break;
  }
  if (ds.kind == DataKind::Synthetic || ds.kind == DataKind::Quadratic) {
    require(ds.d >= 1 && ds.n >= 1 && ds.classes >= 1, ErrorCode::Config,
            "synthetic data needs d, C, n >= 1");
  }

  const ModelKind default_model =
      ds.kind == DataKind::Quadratic ? ModelKind::Quadratic : ModelKind::Logistic;
  cfg.model = root["model"] ? parse_model(get<std::string>(root, "model", "")) : default_model;
  if ((cfg.model == ModelKind::Quadratic) != (ds.kind == DataKind::Quadratic)) {
    fail(ErrorCode::Config, "model 'quadratic' requires the 'quadratic' data source and vice versa");
  }
  cfg.hidden = get<Index>(root, "hidden", 10);
  require(cfg.hidden >= 1, ErrorCode::Config, "hidden must be >= 1");
  cfg.set = parse_set(get<std::string>(root, "set", "column_l1_ball"));
  cfg.mode = parse_stream_mode(get<std::string>(root, "mode", "stochastic"));

  const std::int64_t default_T = cfg.mode == StreamMode::Adversarial ? 100 : 0;
  cfg.T = get<std::int64_t>(root, "T", default_T);
  if (cfg.T == 0) fail(ErrorCode::Config, "missing required field 'T'");
  require(cfg.T >= 1, ErrorCode::Config, "T must be >= 1");
  cfg.K = get<std::int64_t>(root, "K", 0);
  require(cfg.K >= 0, ErrorCode::Config, "K must be >= 1 when given");

  Index default_batch = 32;
  double default_radius = 8.0;
  if (cfg.model == ModelKind::NN) {
    default_batch = 16;
  } else if (ds.kind == DataKind::Mnist) {
    default_batch = 600;
    default_radius = 8.0;
  } else if (ds.kind == DataKind::Cifar10) {
    default_batch = 500;
    default_radius = 32.0;
  }
  cfg.batch = get<Index>(root, "batch", default_batch);
  require(cfg.batch >= 1, ErrorCode::Config, "batch must be >= 1");
  cfg.radius = get<double>(root, "radius", default_radius);
  cfg.r_w = get<double>(root, "r_w", 10.0);
  cfg.r_b = get<double>(root, "r_b", 10.0);
  require(cfg.radius > 0.0 && cfg.r_w > 0.0 && cfg.r_b > 0.0, ErrorCode::Config, "radii must be > 0");
  cfg.alpha = get<double>(root, "alpha", cfg.model == ModelKind::NN ? 2.0 / 3.0 : 1.0);
  require(cfg.alpha > 0.0 && cfg.alpha <= 1.0, ErrorCode::Config, "alpha must lie in (0, 1]");

  auto seeds = get_list<std::uint64_t>(root, "seeds");
  if (!seeds.empty()) cfg.seeds = seeds;
  std::set<std::uint64_t> uniq(cfg.seeds.begin(), cfg.seeds.end());
  require(uniq.size() == cfg.seeds.size(), ErrorCode::Config, "seeds must be distinct");

  const YAML::Node noise = root["noise"];
  if (noise && !noise.IsNull()) {
    std::string kind;
    if (noise.IsScalar()) {
      kind = noise.as<std::string>();
    } else {
      kind = get<std::string>(noise, "kind", "none");
    }
    if (kind == "none" || kind == "exact") {
      cfg.noise = NoiseConfig{};
    } else if (kind == "minibatch") {
      cfg.noise = NoiseConfig{NoiseMode::Minibatch, noise.IsMap() ? get<Index>(noise, "size", 16) : 16, 0.0};
      require(cfg.noise.size >= 1, ErrorCode::Config, "noise.size must be >= 1");
    } else if (kind == "gaussian") {
      cfg.noise = NoiseConfig{NoiseMode::Gaussian, 0, noise.IsMap() ? get<double>(noise, "sigma", 0.0) : 0.0};
      require(cfg.noise.sigma >= 0.0, ErrorCode::Config, "noise.sigma must be >= 0");
    } else {
      fail(ErrorCode::Config, "invalid noise kind '" + kind + "' (expected none, minibatch or gaussian)");
    }
  }

  cfg.ftpl_scale = get<double>(root, "ftpl_scale", 1.0);
  require(cfg.ftpl_scale > 0.0, ErrorCode::Config, "ftpl_scale must be > 0");
  cfg.output_dir = get<std::string>(root, "output_dir", "out");
  cfg.t_grid = get_list<std::int64_t>(root, "t_grid");
  for (auto t : cfg.t_grid) require(t >= 1, ErrorCode::Config, "t_grid entries must be >= 1");
  cfg.comparator_iters = get<std::int64_t>(root, "comparator_iters", 10000);
  require(cfg.comparator_iters >= 1, ErrorCode::Config, "comparator_iters must be >= 1");
  if (const YAML::Node rec = root["record"]; rec && rec.IsMap()) {
    cfg.est_error = parse_toggle(rec, "est_error");
    cfg.fw_gap = parse_toggle(rec, "fw_gap");
  }

  if (cfg.mode == StreamMode::Adversarial &&
      (ds.kind == DataKind::Synthetic || ds.kind == DataKind::Quadratic)) {
    std::int64_t horizon = cfg.T;
    for (auto t : cfg.t_grid) horizon = std::max(horizon, t);
    const std::int64_t need = static_cast<std::int64_t>(cfg.batch) * horizon;
    if (need > ds.n) {
      fail(ErrorCode::Config, "adversarial stream needs B*T = " + std::to_string(need) +
                                  " samples but n = " + std::to_string(ds.n));
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// data and problems

fs::path resolve_data_path(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* dir = std::getenv("PFO_DATA_DIR"); dir && *dir) return fs::path(dir) / path;
  }
  return path;
}

DatasetPtr load_dataset(const RunConfig& cfg, std::uint64_t seed) {
  const DataSource& ds = cfg.data;
  const std::uint64_t data_seed = ds.seed.value_or(seed);
  switch (ds.kind) {
    case DataKind::Synthetic:
      return std::make_shared<const Dataset>(
          synthetic_dataset(ds.d, ds.classes, ds.n, ds.separation, data_seed));
    case DataKind::Quadratic:
      return std::make_shared<const Dataset>(
          synthetic_perturbations(ds.d, ds.n, ds.perturbation, data_seed));
    case DataKind::Mnist:
      return std::make_shared<const Dataset>(
          load_idx(resolve_data_path(ds.images), resolve_data_path(ds.labels), ds.limit));
    case DataKind::Cifar10: {
      std::vector<fs::path> paths;
      for (const auto& b : ds.batches) paths.push_back(resolve_data_path(b));
      return std::make_shared<const Dataset>(load_cifar10(paths, ds.limit));
    }
    case DataKind::Csv:
      return std::make_shared<const Dataset>(import_csv(resolve_data_path(ds.csv), ds.classes));
  }
  fail(ErrorCode::Internal, "unhandled data source");
}

Model make_model(const RunConfig& cfg, const Dataset& data) {
  switch (cfg.model) {
    case ModelKind::Logistic: return MulticlassLogistic{};
    case ModelKind::NN: return OneHiddenNN{cfg.hidden};
    case ModelKind::Quadratic: {
      auto A = std::make_shared<const Eigen::MatrixXd>(cfg.data.curvature *
                                                       Eigen::MatrixXd::Identity(data.d, data.d));
      Eigen::VectorXd b = Eigen::VectorXd::Zero(data.d);
      b(0) = cfg.data.shift;
      return SyntheticQuadratic{A, b};
    }
  }
  fail(ErrorCode::Internal, "unhandled model");
}

FeasibleSet make_set(const RunConfig& cfg, const Dataset& data) {
  if (cfg.model == ModelKind::NN) {
    return nn_feasible_set(data.d, cfg.hidden, data.num_classes, cfg.r_w, cfg.r_b);
  }
  const Index rows = data.d;
  const Index cols = cfg.model == ModelKind::Logistic ? data.num_classes : 1;
  switch (cfg.set) {
    case SetKind::ColumnL1Ball: return FeasibleSet::column_l1_ball(cfg.radius, rows, cols);
    case SetKind::Simplex: return FeasibleSet::simplex(cfg.radius, rows, cols);
    case SetKind::L2Ball: return FeasibleSet::l2_ball(cfg.radius, rows, cols);
  }
  fail(ErrorCode::Internal, "unhandled set");
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Small random weights: the origin is a symmetric stationary point of the network.
Point nn_initial_point(const FeasibleSet& set, std::uint64_t seed) {
  auto rng = keyed_engine(seed, kTagData, 0x696e6974);
  std::normal_distribution<double> gauss(0.0, 0.1);
  Point x(set.rows(), set.cols());
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
  for (const SetBlock& b : set.blocks()) {
    Eigen::Map<Point> part(x.data() + b.offset, b.rows, b.cols);
    const double worst = part.cwiseAbs().colwise().sum().maxCoeff();
    if (worst > 0.5 * b.radius) part *= 0.5 * b.radius / worst;
  }
  return x;
}

fs::path comparator_cache_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("comparator_seed" + std::to_string(seed) + ".json");
}

json comparator_json(const Comparator& c, const std::string& fingerprint) {
  json j;
  j["fingerprint"] = fingerprint;
  j["rows"] = c.x_star.rows();
  j["cols"] = c.x_star.cols();
  j["x_star"] = std::vector<double>(c.x_star.data(), c.x_star.data() + c.x_star.size());
  j["objective_value"] = c.objective_value;
  j["fw_gap"] = c.fw_gap;
  j["method_note"] = c.method_note;
  return j;
}

std::optional<Comparator> load_cached_comparator(const fs::path& path, const std::string& fingerprint) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("fingerprint").get<std::string>() != fingerprint) return std::nullopt;
    const auto values = j.at("x_star").get<std::vector<double>>();
    Comparator c;
    c.x_star = Eigen::Map<const Point>(values.data(), j.at("rows").get<Index>(), j.at("cols").get<Index>());
    c.objective_value = j.at("objective_value").get<double>();
    c.fw_gap = j.at("fw_gap").get<double>();
    c.method_note = j.at("method_note").get<std::string>() + " (cached)";
    return c;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorCode::Io, "cannot create output directory " + dir.string());
}

json quantiles_json(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  return json{{"min", quantile(v, 0.0)}, {"q25", quantile(v, 0.25)}, {"median", quantile(v, 0.5)},
              {"q75", quantile(v, 0.75)}, {"max", quantile(v, 1.0)}};
}

double median_round_time(const std::vector<const AlgorithmRun*>& runs) {
  std::vector<double> times;
  for (const auto* r : runs) {
    for (const auto& rec : r->records) times.push_back(static_cast<double>(rec.wall_time_ns));
  }
  return times.empty() ? 0.0 : median(times);
}

// Final regret when a comparator exists, otherwise the smallest recorded FW gap.
std::optional<double> run_score(const AlgorithmRun& r) {
  if (r.records.empty()) return std::nullopt;
  if (r.records.back().cum_regret) return r.records.back().cum_regret;
  std::optional<double> best;
  for (const auto& rec : r.records) {
    if (rec.fw_gap) best = best ? std::min(*best, *rec.fw_gap) : *rec.fw_gap;
  }
  return best;
}

json config_json(const RunConfig& cfg) {
  json algos = json::array();
  for (auto a : cfg.algorithms) algos.push_back(to_string(a));
  return json{{"algorithm", algos},
              {"data", data_kind_key(cfg.data.kind)},
              {"model", model_string(cfg.model)},
              {"mode", to_string(cfg.mode)},
              {"T", cfg.T},
              {"K", cfg.K},
              {"batch", cfg.batch},
              {"radius", cfg.radius},
              {"alpha", cfg.alpha},
              {"seeds", cfg.seeds}};
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "algorithm", "synthetic", "quadratic", "mnist",      "cifar10",    "csv",
      "model",     "hidden",    "set",       "mode",       "T",          "K",
      "batch",     "radius",    "r_w",       "r_b",        "alpha",      "seeds",
      "noise",     "ftpl_scale", "output_dir", "t_grid",   "comparator_iters", "record"};
  return keys;
}

std::string RunConfig::stream_fingerprint(std::uint64_t seed) const {
  std::ostringstream os;
  os.precision(17);
  os << data_kind_key(data.kind) << ";d=" << data.d << ";C=" << data.classes << ";n=" << data.n
     << ";sep=" << data.separation << ";dseed=" << (data.seed ? std::to_string(*data.seed) : "run")
     << ";curv=" << data.curvature << ";shift=" << data.shift << ";pert=" << data.perturbation
     << ";files=" << data.images << "|" << data.labels << "|" << data.csv << "|" << data.limit;
  for (const auto& b : data.batches) os << "|" << b;
  os << ";model=" << model_string(model) << ";hidden=" << hidden << ";set=" << to_string(set)
     << ";r=" << radius << ";mode=" << to_string(mode) << ";B=" << batch << ";seed=" << seed
     << ";iters=" << comparator_iters;
  return os.str();
}

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid YAML/JSON: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) fail(ErrorCode::Config, "config must be a mapping of keys to values");
  root = normalize(root);
  try {
    for (const auto& o : overrides) apply_override(root, o);
    return build_config(root);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::Config, std::string("config error: ") + e.what());
  }
}

RunConfig parse_config_file(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

SeedProblem build_problem(const RunConfig& cfg, std::uint64_t seed, std::int64_t T,
                          bool with_comparator, const fs::path& cache_dir) {
  DatasetPtr data = load_dataset(cfg, seed);
  Model model = make_model(cfg, *data);
  FeasibleSet set = make_set(cfg, *data);
  const Stream stream = build_stream(*data, cfg.mode, cfg.batch, T, seed);
  SeedProblem p{data, model, set, make_rounds(data, model, stream), std::nullopt, std::nullopt, std::nullopt};

  const bool want_mean = cfg.est_error == Toggle::On ||
                         (cfg.est_error == Toggle::Auto && cfg.mode == StreamMode::Stochastic &&
                          data->size() <= 20000);
  if (want_mean) p.mean_loss = population_loss(data, model, cfg.batch);
  if (cfg.model == ModelKind::NN) p.x1 = nn_initial_point(set, seed);

  if (with_comparator && model_is_convex(model)) {
    std::string fingerprint = cfg.stream_fingerprint(seed) + ";T=" + std::to_string(T);
    if (!cache_dir.empty()) p.comparator = load_cached_comparator(comparator_cache_path(cache_dir, seed), fingerprint);
    if (!p.comparator) p.comparator = solve_comparator(p.rounds, set, cfg.comparator_iters);
  }
  return p;
}

LearnerConfig learner_config(const RunConfig& cfg, Algorithm algo, std::uint64_t seed) {
  LearnerConfig lc;
  lc.algo = algo;
  lc.schedule = ScheduleSpec::inverse_power(cfg.alpha);
  lc.K = cfg.K;
  lc.ftpl_scale = cfg.ftpl_scale;
  lc.seed = seed;
  switch (cfg.noise.mode) {
    case NoiseMode::None: lc.noise = NoiseSpec::exact(seed); break;
    case NoiseMode::Minibatch: lc.noise = NoiseSpec::minibatch(cfg.noise.size, seed); break;
    case NoiseMode::Gaussian: lc.noise = NoiseSpec::additive_gaussian(cfg.noise.sigma, seed); break;
  }
  return lc;
}

std::string format_csv_row(std::uint64_t seed, const RoundRecord& rec) {
  std::string row = std::to_string(seed) + "," + std::to_string(rec.t) + "," + num(rec.loss_value) + ",";
  if (rec.cum_regret) row += num(*rec.cum_regret);
  row += ",";
  if (rec.est_error) row += num(*rec.est_error);
  row += ",";
  if (rec.fw_gap) row += num(*rec.fw_gap);
  row += "," + std::to_string(rec.wall_time_ns);
  return row;
}

std::pair<std::uint64_t, RoundRecord> parse_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  if (cells.size() != 7) fail(ErrorCode::Format, "csv row must have 7 fields: '" + line + "'");
  try {
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    RoundRecord rec;
    rec.t = std::stoll(cells[1]);
    rec.loss_value = std::stod(cells[2]);
    rec.cum_regret = opt(cells[3]);
    rec.est_error = opt(cells[4]);
    rec.fw_gap = opt(cells[5]);
    rec.wall_time_ns = std::stoll(cells[6]);
    return {std::stoull(cells[0]), rec};
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::Format, "csv row has a non-numeric field: '" + line + "'");
  } catch (const std::out_of_range&) {
    fail(ErrorCode::Format, "csv row has an out-of-range field: '" + line + "'");
  }
}

ExperimentResult run_experiment(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  ExperimentResult result;
  result.output_dir = dir;

  std::map<Algorithm, std::ofstream> csv;
  for (auto a : cfg.algorithms) {
    auto& out = csv[a];
    out.open(dir / (std::string(to_string(a)) + ".csv"));
    if (!out) fail(ErrorCode::Io, "cannot write CSV in " + dir.string());
    out << kCsvHeader << '\n';
  }

  json comparators = json::array();
  json constants = nullptr;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedProblem p = build_problem(cfg, seed, cfg.T, true, dir);
    if (p.comparator) {
      comparators.push_back({{"seed", seed},
                             {"objective_value", p.comparator->objective_value},
                             {"fw_gap", p.comparator->fw_gap},
                             {"method_note", p.comparator->method_note}});
    }
    if (constants.is_null()) {
      const auto lc = learner_config(cfg, cfg.algorithms.front(), seed);
      const auto c = estimate_constants(p.rounds, p.set, lc.noise, p.mean_loss ? &*p.mean_loss : nullptr,
                                        20, seed);
      constants = json{{"L", c.L}, {"sigma", c.sigma}, {"M", p.mean_loss ? json(c.M) : json(nullptr)},
                       {"D", p.set.diameter()}};
    }
    RecordOptions opts;
    opts.mean_loss = p.mean_loss ? &*p.mean_loss : nullptr;
    opts.fw_gap = cfg.fw_gap == Toggle::On || (cfg.fw_gap == Toggle::Auto && cfg.model == ModelKind::NN);
    opts.fw_gap_on_mean = model_is_convex(p.model);
    for (auto a : cfg.algorithms) {
      auto records = run(learner_config(cfg, a, seed), p.rounds, p.set, cfg.T, opts, false, p.x1).records;
      if (p.comparator) attach_regret(records, p.rounds, *p.comparator);
      auto& out = csv[a];
      for (const auto& rec : records) out << format_csv_row(seed, rec) << '\n';
      result.runs.push_back(AlgorithmRun{a, seed, std::move(records)});
    }
  }
  for (auto& [a, out] : csv) {
    out.flush();
    if (!out) fail(ErrorCode::Io, "write failed for " + std::string(to_string(a)) + ".csv");
  }

  json algos = json::object();
  for (auto a : cfg.algorithms) {
    std::vector<const AlgorithmRun*> runs;
    std::vector<double> regrets;
    std::vector<double> scores;
    std::vector<double> losses;
    for (const auto& r : result.runs) {
      if (r.algo != a) continue;
      runs.push_back(&r);
      if (r.records.back().cum_regret) regrets.push_back(*r.records.back().cum_regret);
      if (auto s = run_score(r); s && !r.records.back().cum_regret) scores.push_back(*s);
      losses.push_back(r.records.back().loss_value);
    }
    algos[to_string(a)] = json{{"final_regret", quantiles_json(regrets)},
                               {"min_fw_gap", quantiles_json(scores)},
                               {"final_loss_median", median(losses)},
                               {"per_round_time_median_ns", median_round_time(runs)}};
  }

  json summary{{"config", config_json(cfg)},
               {"algorithms", algos},
               {"comparators", comparators},
               {"empirical_constants", constants}};

  if (!cfg.t_grid.empty()) {
    json fits = json::object();
    std::map<Algorithm, std::vector<std::vector<double>>> finals;
    for (std::size_t g = 0; g < cfg.t_grid.size(); ++g) {
      const std::int64_t T = cfg.t_grid[g];
      for (std::uint64_t seed : cfg.seeds) {
        const SeedProblem p = build_problem(cfg, seed, T, true, {});
        if (!p.comparator) continue;
        for (auto a : cfg.algorithms) {
          auto records = run(learner_config(cfg, a, seed), p.rounds, p.set, T, {}, false, p.x1).records;
          attach_regret(records, p.rounds, *p.comparator);
          auto& per_t = finals[a];
          per_t.resize(cfg.t_grid.size());
          per_t[g].push_back(*records.back().cum_regret);
        }
      }
    }
    for (auto a : cfg.algorithms) {
      try {
        const SlopeFit fit = fit_regret_slope(cfg.t_grid, finals[a]);
        fits[to_string(a)] = json{{"slope", fit.slope}, {"intercept", fit.intercept},
                                  {"r_squared", fit.r_squared}, {"t_grid", fit.t_grid}};
      } catch (const Error& e) {
        fits[to_string(a)] = json{{"error", e.what()}};
      }
    }
    summary["slope_fit"] = fits;
  }
  write_json(dir / "summary.json", summary);
  return result;
}

std::vector<fs::path> solve_comparators(const RunConfig& cfg) {
  require(cfg.model != ModelKind::NN, ErrorCode::Unsupported,
          "comparator: undefined for the nonconvex nn model");
  const fs::path dir(cfg.output_dir);
  ensure_dir(dir);
  std::vector<fs::path> written;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedProblem p = build_problem(cfg, seed, cfg.T, true, {});
    const std::string fingerprint = cfg.stream_fingerprint(seed) + ";T=" + std::to_string(cfg.T);
    const fs::path path = comparator_cache_path(dir, seed);
    write_json(path, comparator_json(*p.comparator, fingerprint));
    written.push_back(path);
  }
  return written;
}

void compare(const std::vector<RunConfig>& configs, const fs::path& out) {
  require(configs.size() >= 2, ErrorCode::InvalidArgument, "compare: needs at least two configs");
  for (const auto& c : configs) {
    if (c.seeds != configs.front().seeds) {
      fail(ErrorCode::InvalidArgument,
           "compare: configs use mismatched stream seeds; comparisons need shared streams");
    }
  }
  struct Entry {
    std::string label;
    std::vector<const AlgorithmRun*> runs;
  };
  std::vector<ExperimentResult> results;
  results.reserve(configs.size());
  for (const auto& c : configs) results.push_back(run_experiment(c));

  std::vector<Entry> entries;
  std::map<std::string, int> used;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (auto a : configs[i].algorithms) {
      std::string label = to_string(a);
      if (used[label]++ > 0) label += "#" + std::to_string(i + 1);
      Entry e{label, {}};
      for (const auto& r : results[i].runs) {
        if (r.algo == a) e.runs.push_back(&r);
      }
      entries.push_back(std::move(e));
    }
  }

  json algos = json::object();
  for (const auto& e : entries) {
    std::vector<double> scores;
    for (const auto* r : e.runs) {
      if (auto s = run_score(*r)) scores.push_back(*s);
    }
    algos[e.label] = json{{"final_regret_median", scores.empty() ? json(nullptr) : json(median(scores))},
                          {"per_round_time_median_ns", median_round_time(e.runs)},
                          {"seeds", e.runs.size()}};
  }
  json wins = json::object();
  for (const auto& a : entries) {
    for (const auto& b : entries) {
      if (&a == &b) continue;
      double won = 0.0;
      std::size_t n = 0;
      for (std::size_t s = 0; s < std::min(a.runs.size(), b.runs.size()); ++s) {
        const auto sa = run_score(*a.runs[s]);
        const auto sb = run_score(*b.runs[s]);
        if (!sa || !sb) continue;
        won += *sa < *sb ? 1.0 : (*sa == *sb ? 0.5 : 0.0);
        ++n;
      }
      wins[a.label + "_vs_" + b.label] = n ? json(won / static_cast<double>(n)) : json(nullptr);
    }
  }
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  write_json(out, json{{"algorithms", algos}, {"win_rates", wins}, {"seeds", configs.front().seeds}});
}

}  // namespace pfo
