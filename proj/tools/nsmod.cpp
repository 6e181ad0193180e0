// Command-line driver for multistart runs.
//
//   nsmod run [--config FILE] [--problem P] [--hmax 0.4,0.2] [--u0 1,2,...] ...
//   nsmod problems
//
// Flags override settings read from --config. Exit status: 0 when every run
// finished, 2 when some run raised an error, 1 when the batch itself failed.

#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "nsmod/experiment.hpp"

namespace ex = nsmod::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Nonsmooth multiobjective common-descent experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a multistart batch and write CSV/JSON results");
  std::string config_path;
  run->add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);

  // Flag name -> setting key. Values are kept as text and go through the
  // same parser as the config file.
  const std::vector<std::pair<std::string, std::string>> keyed = {
      {"--problem", "problem"},     {"--hmax", "hmax"},       {"--u0", "u0"},
      {"--start", "start"},         {"--starts", "starts"},   {"--box", "box"},
      {"--seed", "seed"},           {"--eps-bar", "eps-bar"}, {"--delta-bar", "delta-bar"},
      {"--c", "c"},                 {"--t0", "t0"},           {"--C", "C"},
      {"--max-iters", "max-iters"}, {"--schedule", "schedule"}, {"--out", "out"},
      {"--jobs", "jobs"}};
  std::vector<std::string> values(keyed.size());
  std::vector<CLI::Option*> opts;
  for (std::size_t i = 0; i < keyed.size(); ++i) opts.push_back(run->add_option(keyed[i].first, values[i]));
  bool no_timing = false;
  run->add_flag("--no-timing", no_timing, "write wall_ms = 0 so reruns are byte-identical");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "suppress the per-run table");

  auto* list = app.add_subcommand("problems", "List problem names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    for (const auto& name : nsmod::analytic::problem_names()) std::cout << "analytic:" << name << '\n';
    std::cout << "obstacle:constant\nobstacle:piecewise\n";
    return 0;
  }

  ex::ExperimentSummary summary;
  try {
    ex::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ex::load_config(config_path);
    for (std::size_t i = 0; i < keyed.size(); ++i)
      if (opts[i]->count() > 0) ex::apply_setting(cfg, keyed[i].second, values[i]);
    if (no_timing) cfg.timing = false;
    summary = ex::run_experiment(cfg);
    if (!quiet) {
      for (const auto& r : summary.runs) {
        std::cout << r.run_id << "  h_max=" << r.h_max << "  " << r.start_label << "  " << r.status()
                  << "  iters=" << r.iters();
        if (!r.error.empty()) std::cout << "  error: " << r.error;
        std::cout << '\n';
      }
      std::cout << "results in " << cfg.out.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "nsmod: " << e.what() << '\n';
    return 1;
  }
  return summary.all_completed() ? 0 : 2;
}
