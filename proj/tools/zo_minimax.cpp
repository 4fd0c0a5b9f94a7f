// zo_minimax: run, reproduce and plot multi-seed experiments.
//
// Exit status: 0 success, 1 configuration or run error, 2 acceptance
// threshold failure (reproduce only).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zominimax/harness/config.hpp"
#include "zominimax/harness/experiment.hpp"
#include "zominimax/harness/plot.hpp"
#include "zominimax/harness/reproduce.hpp"

namespace zh = zominimax::harness;

namespace {

int cmd_run(const std::string& config_path, std::uint64_t seed_offset) {
  const zh::ExperimentConfig cfg = zh::ExperimentConfig::from_file(config_path);
  zh::RunOptions opts;
  opts.seed_offset = seed_offset;
  const zh::ExperimentResult res = zh::run_experiment(cfg, opts);
  for (const std::string& w : res.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << res.runs.size() << " runs of " << res.series << " on " << cfg.problem_id << " written to "
            << cfg.output_dir << '\n';
  return res.any_failed() ? 1 : 0;
}

int cmd_reproduce(const std::string& experiment, const std::string& out, std::uint64_t seed_offset) {
  zh::RunOptions opts;
  opts.seed_offset = seed_offset;
  const std::string dir = out.empty() ? "reproduce-" + experiment : out;
  const zh::ReproduceReport rep = zh::reproduce(experiment, dir, opts);
  for (const auto& r : rep.results) {
    for (const std::string& w : r.warnings) std::cerr << "warning: " << r.series << ": " << w << '\n';
  }
  std::cout << rep.summary();
  std::cout << "artifacts in " << dir << '\n';
  if (!rep.all_pass()) return 2;
  return rep.any_run_failed() ? 1 : 0;
}

int cmd_plot(const std::vector<std::string>& aggregates, const std::string& metric, const std::string& x,
             bool logy, const std::string& out, const std::string& title) {
  std::vector<zh::Aggregate> series;
  for (const std::string& f : aggregates) {
    for (auto& a : zh::read_aggregate_csv(f)) series.push_back(std::move(a));
  }
  zh::PlotSpec spec;
  spec.metric = metric;
  spec.x_axis = x == "queries" ? zh::XAxis::kQueries : zh::XAxis::kIteration;
  spec.log_y = logy;
  spec.title = title;
  zh::write_file(out, zh::render_svg(series, spec));
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zeroth-order alternating gradient descent ascent experiments"};
  app.require_subcommand(1);
  std::uint64_t seed_offset = 0;
  app.add_option("--seed-offset", seed_offset, "Added to every configured seed");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment config over its seeds");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::string experiment;
  std::string out_dir;
  auto* repro = app.add_subcommand("reproduce", "Run the pinned wgan or robust-poly comparison");
  repro->add_option("experiment", experiment)->required()->check(CLI::IsMember({"wgan", "robust-poly"}));
  repro->add_option("--out", out_dir, "Output directory (default reproduce-<experiment>)");

  std::vector<std::string> aggregates;
  std::string metric;
  std::string x_axis = "iteration";
  bool logy = false;
  std::string plot_out;
  std::string title;
  auto* plot = app.add_subcommand("plot", "Render an aggregate file as SVG");
  plot->add_option("--aggregate", aggregates, "Aggregate CSV (repeatable)")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric)->required();
  plot->add_option("--x", x_axis)->check(CLI::IsMember({"iteration", "queries"}));
  plot->add_flag("--logy", logy);
  plot->add_option("--out", plot_out)->required();
  plot->add_option("--title", title);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(config_path, seed_offset);
    if (*repro) return cmd_reproduce(experiment, out_dir, seed_offset);
    if (*plot) return cmd_plot(aggregates, metric, x_axis, logy, plot_out, title);
  } catch (const zominimax::Error& e) {
    std::cerr << "error [" << zominimax::to_string(e.kind()) << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
