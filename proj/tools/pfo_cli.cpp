// Command-line front end. Talks to the library only through pfo.h.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pfo/pfo.h"

namespace {

struct ConfigDeleter {
  void operator()(pfo_config* c) const { pfo_config_free(c); }
};
using ConfigPtr = std::unique_ptr<pfo_config, ConfigDeleter>;

int report(pfo_status st) {
  std::fprintf(stderr, "error (%s): %s\n", pfo_status_name(st), pfo_last_error());
  return 2;
}

// Extra "--key=value" / "--key value" arguments become config overrides.
std::vector<std::string> flag_overrides(const std::vector<std::string>& extras) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string a = extras[i];
    if (a.rfind("--", 0) != 0) throw CLI::ValidationError("unexpected argument '" + a + "'");
    a = a.substr(2);
    if (a.find('=') == std::string::npos) {
      if (i + 1 >= extras.size()) throw CLI::ValidationError("flag --" + a + " needs a value");
      a += "=" + extras[++i];
    }
    out.push_back(a);
  }
  return out;
}

pfo_status load(const std::string& path, const std::vector<std::string>& overrides, ConfigPtr& out) {
  pfo_config* raw = nullptr;
  if (pfo_status st = pfo_config_load(path.c_str(), &raw); st != PFO_OK) return st;
  out.reset(raw);
  for (const auto& o : overrides) {
    if (pfo_status st = pfo_config_set(out.get(), o.c_str()); st != PFO_OK) return st;
  }
  return PFO_OK;
}

void print_row(const char* name, double value, double threshold, int passed, double seconds, void*) {
  std::printf("%-52s %-4s value=%-12.4g threshold=%-10.4g %.2fs\n", name, passed ? "PASS" : "FAIL", value,
              threshold, seconds);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-free online convex optimization experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pfo_version());

  std::vector<std::string> sets;
  std::string config_path;
  auto* run = app.add_subcommand("run", "run every algorithm and seed in a config");
  run->add_option("config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "override, e.g. --set T=512 (any --key=value flag works too)");
  run->allow_extras();

  std::vector<std::string> compare_paths;
  std::string compare_out = "compare.json";
  auto* cmp = app.add_subcommand("compare", "run several configs on shared seeds and summarize");
  cmp->add_option("configs", compare_paths, "two or more YAML configs")->required()->expected(2, -1);
  cmp->add_option("-o,--out", compare_out, "joint summary JSON path");
  cmp->add_option("--set", sets, "override applied to every config");

  bool quick = false;
  auto* ver = app.add_subcommand("verify", "numerical checks of the analysis lemmas and oracles");
  ver->add_flag("--quick", quick, "smaller problem sizes");

  std::string comp_path;
  auto* comp = app.add_subcommand("comparator", "solve and cache the comparator x* per seed");
  comp->add_option("config", comp_path, "YAML config file")->required()->check(CLI::ExistingFile);
  comp->add_option("--set", sets, "override");
  comp->allow_extras();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || comp->parsed()) {
      auto* sub = run->parsed() ? run : comp;
      auto overrides = sets;
      for (auto& o : flag_overrides(sub->remaining())) overrides.push_back(o);
      ConfigPtr cfg;
      if (pfo_status st = load(run->parsed() ? config_path : comp_path, overrides, cfg); st != PFO_OK) {
        return report(st);
      }
      if (run->parsed()) {
        pfo_result* res = nullptr;
        if (pfo_status st = pfo_run(cfg.get(), &res); st != PFO_OK) return report(st);
        for (std::size_t i = 0; i < pfo_result_count(res); ++i) {
          pfo_run_info info;
          pfo_result_info(res, i, &info);
          std::printf("%-7s seed=%-4llu T=%-6lld final_loss=%-12.6g regret=%-12.6g round=%.0fns\n",
                      info.algorithm, static_cast<unsigned long long>(info.seed),
                      static_cast<long long>(info.rounds), info.final_loss, info.final_regret,
                      info.median_round_ns);
        }
        pfo_result_free(res);
      } else if (pfo_status st = pfo_solve_comparator(cfg.get()); st != PFO_OK) {
        return report(st);
      }
      char dir[4096];
      pfo_config_output_dir(cfg.get(), dir, sizeof dir, nullptr);
      std::printf("wrote results to %s\n", dir);
      return 0;
    }
    if (cmp->parsed()) {
      std::vector<ConfigPtr> owned(compare_paths.size());
      std::vector<const pfo_config*> raw;
      for (std::size_t i = 0; i < compare_paths.size(); ++i) {
        if (pfo_status st = load(compare_paths[i], sets, owned[i]); st != PFO_OK) return report(st);
        raw.push_back(owned[i].get());
      }
      if (pfo_status st = pfo_compare(raw.data(), raw.size(), compare_out.c_str()); st != PFO_OK) {
        return report(st);
      }
      std::printf("wrote %s\n", compare_out.c_str());
      return 0;
    }
    int failures = 0;
    if (pfo_status st = pfo_verify(quick ? 1 : 0, print_row, nullptr, &failures); st != PFO_OK) {
      return report(st);
    }
    std::printf("%d check(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  }
}
