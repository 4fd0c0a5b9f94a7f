#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include <unistd.h>

#include "test_util.hpp"
#include "zominimax/harness/config.hpp"
#include "zominimax/harness/experiment.hpp"
#include "zominimax/harness/plot.hpp"

using namespace zominimax;
using namespace zominimax::harness;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("zominimax_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

json wgan_json(const fs::path& out) {
  return json{{"problem", "wgan"},
              {"algorithm", "zo-vragda"},
              {"params", {{"alpha", 0.05}, {"beta", 0.2}, {"q", 5}, {"B", 20}, {"b", 5}}},
              {"seeds", {0, 1, 2}},
              {"max_iter", 60},
              {"record_every", 10},
              {"metrics", {"dist_to_opt", "grad_phi_norm"}},
              {"output_dir", out.string()}};
}

}  // namespace

TEST(Config, ParsesFullDocument) {
  json j = wgan_json("o");
  j["problem"] = json{{"id", "pl-quadratic"}, {"params", {{"A", 2.0}, {"noise_variance", 0.1}}}};
  j["start"] = json{{"x", {0.5}}, {"y", {-0.5}}};
  j["label"] = "vr-small";
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  EXPECT_EQ(c.problem_id, "pl-quadratic");
  EXPECT_EQ(c.algorithm, Algorithm::kZoVragda);
  EXPECT_EQ(c.series(), "vr-small");
  EXPECT_EQ(c.q, 5);
  EXPECT_EQ(c.B, 20);
  EXPECT_DOUBLE_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.seeds.size(), 3u);
  ASSERT_TRUE(c.start.has_value());
  EXPECT_EQ(c.start->x, vec({0.5}));
  const AnyProblem p = make_problem(c.problem_id, c.problem_params);
  EXPECT_TRUE(is_stochastic(p));
  EXPECT_NO_THROW(check_compatible(c, p));
}

TEST(Config, TheoryMode) {
  json j = wgan_json("o");
  j["params"] = json{{"mode", "theory"}, {"eps", 0.1}, {"max_batch", 500}};
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  EXPECT_EQ(c.mode, ParamMode::kTheory);
  const AnyProblem p = make_problem(c.problem_id);
  const VragdaConfig v = vragda_config(c, info(p));
  // The cap applies to B, but B is never allowed below b = ceil(kappa / eps).
  EXPECT_TRUE(v.batch_capped);
  EXPECT_EQ(v.B, v.b);
  EXPECT_GT(v.b, 500);
  EXPECT_EQ(v.max_iter, 60);
}

TEST(Config, Errors) {
  json j = wgan_json("o");
  j.erase("seeds");
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  j = wgan_json("o");
  j["seeds"] = json::array();
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  j = wgan_json("o");
  j["metrics"] = json{"nope"};
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  j = wgan_json("o");
  j["algorithm"] = "sgd";
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  j = wgan_json("o");
  j["params"]["mode"] = "magic";
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  j = wgan_json("o");
  j["max_iter"] = "many";
  EXPECT_ERROR_KIND(ExperimentConfig::from_json(j), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(make_problem("rosenbrock"), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(ExperimentConfig::from_file("/nonexistent/cfg.json"), ErrorKind::kIo);
}

TEST(Config, IncompatibleAlgorithms) {
  json j = wgan_json("o");
  j["problem"] = "robust-poly";
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  EXPECT_ERROR_KIND(check_compatible(c, make_problem("robust-poly")), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(run_experiment(c, RunOptions{0, 1, false, {}}), ErrorKind::kInvalidArgument);

  MinimaxProblem no_grad = make_robust_polynomial();
  no_grad.grad_x = nullptr;
  ExperimentConfig fo = c;
  fo.algorithm = Algorithm::kFoAgda;
  EXPECT_ERROR_KIND(check_compatible(fo, AnyProblem(no_grad)), ErrorKind::kMissingOracle);
}

TEST(Metrics, UnknownAndUnsupported) {
  const auto pl = std::make_shared<const MinimaxProblem>(make_pl_quadratic(PlQuadraticSpec::scalar(1, 1, 1)));
  EXPECT_ERROR_KIND(make_metric("nope", pl), ErrorKind::kInvalidArgument);
  EXPECT_ERROR_KIND(make_metric("regret", pl), ErrorKind::kUnsupported);
  EXPECT_ERROR_KIND(make_metric("value", nullptr), ErrorKind::kUnsupported);
  QueryMeter aux;
  EXPECT_DOUBLE_EQ(make_metric("dist_to_opt", pl).eval(vec({0.5}), vec({0.0}), aux), 0.5);
  EXPECT_DOUBLE_EQ(make_metric("value", pl).eval(vec({1.0}), vec({1.0}), aux), 1.0);
  EXPECT_EQ(aux.value(), 1u);
}

TEST(Aggregate, SingleSeedHasZeroStd) {
  RunTrace t({"m"});
  t.append({0, 0, 0, {1.0}});
  t.append({5, 20, 0, {0.5}});
  const Aggregate a = aggregate("s", {&t});
  ASSERT_EQ(a.rows.size(), 2u);
  for (const AggregateRow& r : a.rows) {
    EXPECT_EQ(r.n, 1u);
    EXPECT_EQ(r.std[0], 0.0);
    EXPECT_EQ(r.queries_std, 0.0);
  }
  EXPECT_EQ(a.rows[1].mean[0], 0.5);
}

TEST(Aggregate, UsesCommonIterationsOnly) {
  RunTrace a({"m"});
  RunTrace b({"m"});
  for (std::int64_t t : {0, 10, 20, 30}) a.append({t, static_cast<std::uint64_t>(t), 0, {1.0 * t}});
  for (std::int64_t t : {0, 10, 20}) b.append({t, static_cast<std::uint64_t>(t), 0, {3.0 * t}});
  const Aggregate g = aggregate("s", {&a, &b});
  ASSERT_EQ(g.rows.size(), 3u);
  EXPECT_EQ(g.rows.back().t, 20);
  EXPECT_DOUBLE_EQ(g.rows.back().mean[0], 40.0);
  EXPECT_DOUBLE_EQ(g.rows.back().std[0], std::sqrt(2.0) * 20.0);
  RunTrace other({"k"});
  EXPECT_ERROR_KIND(aggregate("s", {&a, &other}), ErrorKind::kInvalidArgument);
}

TEST(Csv, TraceRoundTripIsExact) {
  const fs::path d = fresh_dir("roundtrip");
  RunTrace t({"a", "b"});
  t.append({0, 0, 3, {0.1, 1.0 / 3.0}});
  t.append({7, 28, 9, {-2.5e-300, 123456789.123456789}});
  write_file(d / "t.csv", trace_csv(t));
  const RunTrace r = read_trace_csv(d / "t.csv");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.metric_names(), t.metric_names());
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.rows()[i].t, t.rows()[i].t);
    EXPECT_EQ(r.rows()[i].queries, t.rows()[i].queries);
    EXPECT_EQ(r.rows()[i].aux_queries, t.rows()[i].aux_queries);
    EXPECT_EQ(r.rows()[i].metrics, t.rows()[i].metrics);
  }
  fs::remove_all(d);
}

TEST(Experiment, OutputsRecomputeExactly) {
  const fs::path d = fresh_dir("recompute");
  const ExperimentConfig c = ExperimentConfig::from_json(wgan_json(d));
  const ExperimentResult res = run_experiment(c);
  ASSERT_FALSE(res.any_failed());
  ASSERT_TRUE(fs::exists(d / "zo-vragda_runs.json"));

  // Re-read the per-seed files and recompute the statistics independently.
  std::vector<RunTrace> traces;
  for (std::uint64_t s : c.seeds) traces.push_back(read_trace_csv(d / ("zo-vragda_seed" + std::to_string(s) + ".csv")));
  const auto file = read_aggregate_csv(d / "zo-vragda_aggregate.csv");
  ASSERT_EQ(file.size(), 1u);
  const Aggregate& agg = file.front();
  ASSERT_EQ(agg.rows.size(), traces.front().size());
  for (std::size_t i = 0; i < agg.rows.size(); ++i) {
    for (std::size_t k = 0; k < agg.metric_names.size(); ++k) {
      Running r;
      for (const RunTrace& t : traces) r.push(t.rows()[i].metrics[k]);
      EXPECT_EQ(agg.rows[i].mean[k], r.mean);
      EXPECT_EQ(agg.rows[i].std[k], r.stddev());
    }
  }
  EXPECT_EQ(aggregate_csv({res.aggregate}), read_file(d / "zo-vragda_aggregate.csv"));
  fs::remove_all(d);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
  ExperimentConfig c = ExperimentConfig::from_json(wgan_json("unused"));
  const ExperimentResult a = run_experiment(c, RunOptions{0, 1, false, {}});
  const ExperimentResult b = run_experiment(c, RunOptions{0, 3, false, {}});
  EXPECT_EQ(aggregate_csv({a.aggregate}), aggregate_csv({b.aggregate}));
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(trace_csv(a.runs[i].trace), trace_csv(b.runs[i].trace));
}

TEST(Experiment, SeedOffsetShiftsStreams) {
  ExperimentConfig c = ExperimentConfig::from_json(wgan_json("unused"));
  const ExperimentResult base = run_experiment(c, RunOptions{0, 1, false, {}});
  const ExperimentResult off = run_experiment(c, RunOptions{1, 1, false, {}});
  EXPECT_EQ(off.runs[0].seed, 1u);
  EXPECT_EQ(trace_csv(off.runs[0].trace), trace_csv(base.runs[1].trace));
  EXPECT_NE(aggregate_csv({off.aggregate}), aggregate_csv({base.aggregate}));
}

TEST(Experiment, FailedSeedIsExcludedWithWarning) {
  json j = wgan_json("unused");
  j["problem"] = "pl-quadratic";
  j["algorithm"] = "fo-agda";
  j["params"] = json{{"alpha", 50.0}, {"beta", 50.0}};
  j["max_iter"] = 2000;
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  const ExperimentResult r = run_experiment(c, RunOptions{0, 1, false, {}});
  EXPECT_TRUE(r.any_failed());
  EXPECT_FALSE(r.warnings.empty());
  EXPECT_FALSE(r.runs[0].error.empty());
}

TEST(Plot, UnknownMetricListsAvailable) {
  RunTrace t({"dist_to_opt"});
  t.append({0, 0, 0, {1.0}});
  const Aggregate a = aggregate("s", {&t});
  PlotSpec spec;
  spec.metric = "regret";
  try {
    render_svg({a}, spec);
    ADD_FAILURE() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("dist_to_opt"), std::string::npos);
  }
}

TEST(Plot, BandOmittedWhenStdIsZero) {
  RunTrace t({"m"});
  t.append({0, 0, 0, {1.0}});
  t.append({10, 40, 0, {0.5}});
  PlotSpec spec;
  spec.metric = "m";
  const std::string single = render_svg({aggregate("one", {&t})}, spec);
  EXPECT_EQ(single.find("<polygon"), std::string::npos);
  EXPECT_NE(single.find("<polyline"), std::string::npos);
  RunTrace u({"m"});
  u.append({0, 0, 0, {2.0}});
  u.append({10, 40, 0, {0.25}});
  spec.log_y = true;
  spec.x_axis = XAxis::kQueries;
  const std::string two = render_svg({aggregate("two", {&t, &u})}, spec);
  EXPECT_NE(two.find("<polygon"), std::string::npos);
  EXPECT_NE(two.find("function queries"), std::string::npos);
}

TEST(Cli, RunAndPlotSmoke) {
  const fs::path d = fresh_dir("cli");
  json j = wgan_json(d / "out");
  j["seeds"] = {0, 1};
  write_file(d / "cfg.json", j.dump());
  const std::string cli = ZO_MINIMAX_CLI;
  const std::string quiet = " > " + (d / "log.txt").string() + " 2>&1";
  ASSERT_EQ(std::system((cli + " run --config " + (d / "cfg.json").string() + quiet).c_str()), 0);
  ASSERT_TRUE(fs::exists(d / "out" / "zo-vragda_aggregate.csv"));
  const std::string plot = cli + " plot --aggregate " + (d / "out" / "zo-vragda_aggregate.csv").string() +
                           " --metric dist_to_opt --logy --out " + (d / "p.svg").string();
  ASSERT_EQ(std::system((plot + quiet).c_str()), 0);
  EXPECT_NE(read_file(d / "p.svg").find("<svg"), std::string::npos);
  const std::string bad = cli + " plot --aggregate " + (d / "out" / "zo-vragda_aggregate.csv").string() +
                          " --metric nope --out " + (d / "q.svg").string();
  EXPECT_NE(std::system((bad + quiet).c_str()), 0);
  EXPECT_NE(std::system((cli + " run --config " + (d / "missing.json").string() + quiet).c_str()), 0);
  fs::remove_all(d);
}
