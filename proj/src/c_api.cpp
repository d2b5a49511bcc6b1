#include "pfo/pfo.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "pfo/experiment.hpp"
#include "pfo/verify.hpp"

struct pfo_config {
  std::string text;
  std::vector<std::string> overrides;
  pfo::RunConfig cfg;
};

struct pfo_result {
  pfo::ExperimentResult result;
  std::vector<std::string> names;
};

struct pfo_set {
  pfo::FeasibleSet set;
};

namespace {

thread_local std::string g_last_error;

pfo_status to_status(pfo::ErrorCode c) {
  return static_cast<pfo_status>(static_cast<int>(c));
}

template <class F>
pfo_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PFO_OK;
  } catch (const pfo::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PFO_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PFO_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) pfo::fail(pfo::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

double or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

extern "C" {

const char* pfo_last_error(void) { return g_last_error.c_str(); }

const char* pfo_status_name(pfo_status status) {
  switch (status) {
    case PFO_OK: return "ok";
    case PFO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PFO_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case PFO_ERR_CONFIG: return "config error";
    case PFO_ERR_IO: return "i/o error";
    case PFO_ERR_FORMAT: return "format error";
    case PFO_ERR_STREAM_EXHAUSTED: return "stream exhausted";
    case PFO_ERR_UNSUPPORTED: return "unsupported";
    case PFO_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pfo_version(void) { return "0.1.0"; }

pfo_status pfo_config_load(const char* path, pfo_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    if (!in) pfo::fail(pfo::ErrorCode::Io, std::string("cannot open config ") + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto* c = new pfo_config{ss.str(), {}, {}};
    try {
      c->cfg = pfo::parse_config_text(c->text);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

pfo_status pfo_config_parse(const char* text, pfo_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    auto* c = new pfo_config{text, {}, {}};
    try {
      c->cfg = pfo::parse_config_text(c->text);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

pfo_status pfo_config_set(pfo_config* cfg, const char* assignment) {
  return guarded([&] {
    need(cfg, "config");
    need(assignment, "assignment");
    auto overrides = cfg->overrides;
    overrides.emplace_back(assignment);
    cfg->cfg = pfo::parse_config_text(cfg->text, overrides);
    cfg->overrides = std::move(overrides);
  });
}

pfo_status pfo_config_output_dir(const pfo_config* cfg, char* buf, size_t len, size_t* needed) {
  return guarded([&] {
    need(cfg, "config");
    const std::string& dir = cfg->cfg.output_dir;
    if (needed) *needed = dir.size() + 1;
    if (buf && len > 0) {
      const size_t n = std::min(len - 1, dir.size());
      std::memcpy(buf, dir.data(), n);
      buf[n] = '\0';
    }
  });
}

void pfo_config_free(pfo_config* cfg) { delete cfg; }

pfo_status pfo_run(const pfo_config* cfg, pfo_result** out) {
  return guarded([&] {
    need(cfg, "config");
    auto res = pfo::run_experiment(cfg->cfg);
    if (out) {
      auto* r = new pfo_result{std::move(res), {}};
      for (const auto& run : r->result.runs) r->names.emplace_back(pfo::to_string(run.algo));
      *out = r;
    }
  });
}

size_t pfo_result_count(const pfo_result* res) { return res ? res->result.runs.size() : 0; }

pfo_status pfo_result_info(const pfo_result* res, size_t run, pfo_run_info* info) {
  return guarded([&] {
    need(res, "result");
    need(info, "info");
    pfo::require(run < res->result.runs.size(), pfo::ErrorCode::InvalidArgument, "run index out of range");
    const auto& r = res->result.runs[run];
    std::vector<double> times;
    for (const auto& rec : r.records) times.push_back(static_cast<double>(rec.wall_time_ns));
    info->algorithm = res->names[run].c_str();
    info->seed = r.seed;
    info->rounds = static_cast<int64_t>(r.records.size());
    info->final_loss = r.records.empty() ? std::nan("") : r.records.back().loss_value;
    info->final_regret = r.records.empty() ? std::nan("") : or_nan(r.records.back().cum_regret);
    info->median_round_ns = times.empty() ? 0.0 : pfo::median(times);
  });
}

pfo_status pfo_result_record(const pfo_result* res, size_t run, int64_t t, pfo_record* rec) {
  return guarded([&] {
    need(res, "result");
    need(rec, "record");
    pfo::require(run < res->result.runs.size(), pfo::ErrorCode::InvalidArgument, "run index out of range");
    const auto& records = res->result.runs[run].records;
    pfo::require(t >= 1 && t <= static_cast<int64_t>(records.size()), pfo::ErrorCode::InvalidArgument,
                 "round index out of range");
    const auto& r = records[static_cast<size_t>(t - 1)];
    *rec = pfo_record{r.t, r.loss_value, or_nan(r.cum_regret), or_nan(r.est_error), or_nan(r.fw_gap),
                      r.wall_time_ns};
  });
}

void pfo_result_free(pfo_result* res) { delete res; }

pfo_status pfo_compare(const pfo_config* const* cfgs, size_t n, const char* out_path) {
  return guarded([&] {
    need(cfgs, "configs");
    need(out_path, "out_path");
    std::vector<pfo::RunConfig> list;
    for (size_t i = 0; i < n; ++i) {
      need(cfgs[i], "config");
      list.push_back(cfgs[i]->cfg);
    }
    pfo::compare(list, out_path);
  });
}

pfo_status pfo_solve_comparator(const pfo_config* cfg) {
  return guarded([&] {
    need(cfg, "config");
    pfo::solve_comparators(cfg->cfg);
  });
}

pfo_status pfo_verify(int quick, pfo_verify_callback cb, void* user, int* failures) {
  return guarded([&] {
    const auto rows = pfo::run_verification(quick != 0);
    int failed = 0;
    for (const auto& row : rows) {
      if (!row.passed) ++failed;
      if (cb) cb(row.name.c_str(), row.value, row.threshold, row.passed ? 1 : 0, row.seconds, user);
    }
    if (failures) *failures = failed;
  });
}

pfo_status pfo_set_create(pfo_set_kind kind, double radius, int64_t rows, int64_t cols, pfo_set** out) {
  return guarded([&] {
    need(out, "out");
    switch (kind) {
      case PFO_SET_COLUMN_L1_BALL:
        *out = new pfo_set{pfo::FeasibleSet::column_l1_ball(radius, rows, cols)};
        return;
      case PFO_SET_SIMPLEX:
        *out = new pfo_set{pfo::FeasibleSet::simplex(radius, rows, cols)};
        return;
      case PFO_SET_L2_BALL:
        *out = new pfo_set{pfo::FeasibleSet::l2_ball(radius, rows, cols)};
        return;
    }
    pfo::fail(pfo::ErrorCode::InvalidArgument, "unknown set kind");
  });
}

namespace {
void check_len(const pfo_set* set, size_t len) {
  const auto want = static_cast<size_t>(set->set.rows() * set->set.cols());
  if (len != want) {
    pfo::fail(pfo::ErrorCode::DimensionMismatch,
              "buffer holds " + std::to_string(len) + " values but the set needs " + std::to_string(want));
  }
}
}  // namespace

pfo_status pfo_set_lmo(const pfo_set* set, const double* direction, size_t len, double* out) {
  return guarded([&] {
    need(set, "set");
    need(direction, "direction");
    need(out, "out");
    check_len(set, len);
    const Eigen::Map<const pfo::Point> d(direction, set->set.rows(), set->set.cols());
    const pfo::Point v = pfo::lmo(set->set, d);
    std::memcpy(out, v.data(), len * sizeof(double));
  });
}

pfo_status pfo_set_contains(const pfo_set* set, const double* point, size_t len, double tol, int* inside) {
  return guarded([&] {
    need(set, "set");
    need(point, "point");
    need(inside, "inside");
    check_len(set, len);
    const Eigen::Map<const pfo::Point> p(point, set->set.rows(), set->set.cols());
    *inside = pfo::contains(set->set, p, tol) ? 1 : 0;
  });
}

pfo_status pfo_set_diameter(const pfo_set* set, double* out) {
  return guarded([&] {
    need(set, "set");
    need(out, "out");
    *out = set->set.diameter();
  });
}

void pfo_set_free(pfo_set* set) { delete set; }

}  // extern "C"
