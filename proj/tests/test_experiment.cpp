#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nsmod/experiment.hpp"

using namespace nsmod;
namespace ex = nsmod::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nsmod_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Experiment, ObstacleFrontHasOneRowPerRun) {
  ex::ExperimentConfig cfg;
  cfg.problem = "obstacle:constant";
  cfg.h_max = {0.4};
  cfg.u0 = {1, 2};
  cfg.eps_bar = cfg.delta_bar = 1e-2;
  cfg.out = scratch("obstacle");
  cfg.jobs = 2;
  const auto summary = ex::run_experiment(cfg);
  ASSERT_EQ(summary.runs.size(), 2u);
  EXPECT_TRUE(summary.all_completed());
  const auto front = lines(slurp(cfg.out / "front.csv"));
  ASSERT_EQ(front.size(), 3u);
  EXPECT_EQ(front[0], "run_id,problem,h_max,start_label,J1,J2,iters,status,wall_ms,max_xi_set");
  EXPECT_EQ(front[1].rfind("r000,obstacle:constant,0.4,u0=1,", 0), 0u);
  for (const auto& r : summary.runs) {
    const auto trace = lines(slurp(cfg.out / ("trace_" + r.run_id + ".csv")));
    EXPECT_EQ(trace.size(), r.record->rows.size() + 1);
    EXPECT_EQ(trace[0], "iter,f1,f2,norm_v,step,xi_set_size,func_evals,subgrad_evals");
    const auto field = lines(slurp(cfg.out / ("field_" + r.run_id + ".csv")));
    EXPECT_EQ(field.size(), 82u);  // 9 x 9 nodes + header
    EXPECT_EQ(field[0], "node_id,x1,x2,u,y,psi,active");
    for (std::size_t i = 1; i < field.size(); ++i) {
      const char flag = field[i].back();
      EXPECT_TRUE(flag == '0' || flag == '1');
    }
  }
  EXPECT_TRUE(fs::exists(cfg.out / "summary.json"));
  const auto j = nlohmann::json::parse(slurp(cfg.out / "summary.json"));
  EXPECT_EQ(j["runs"].size(), 2u);
  EXPECT_TRUE(j["all_completed"].get<bool>());
}

TEST(Experiment, AnalyticStartsAreDeterministic) {
  ex::ExperimentConfig cfg;
  cfg.problem = "analytic:absdist";
  cfg.starts = 5;
  cfg.seed = 42;
  cfg.timing = false;
  cfg.out = scratch("absdist_a");
  const auto s1 = ex::run_experiment(cfg);
  ASSERT_EQ(s1.runs.size(), 5u);
  for (const auto& r : s1.runs) EXPECT_EQ(r.status(), "EpsDeltaCritical");
  EXPECT_FALSE(fs::exists(cfg.out / "field_r000.csv"));
  const std::string first = slurp(cfg.out / "front.csv");
  EXPECT_EQ(lines(first).size(), 6u);
  cfg.out = scratch("absdist_b");
  cfg.jobs = 3;
  ex::run_experiment(cfg);
  EXPECT_EQ(slurp(cfg.out / "front.csv"), first);
}

TEST(Experiment, ExplicitStartPoints) {
  ex::ExperimentConfig cfg;
  ex::apply_setting(cfg, "problem", "analytic:smoothpair");
  ex::apply_setting(cfg, "start", "3, 1; -2, 0.5");
  cfg.out = scratch("explicit");
  const auto s = ex::run_experiment(cfg);
  ASSERT_EQ(s.runs.size(), 2u);
  EXPECT_EQ(s.runs[0].start_label, "p00");
  ex::apply_setting(cfg, "start", "1,2,3");
  EXPECT_THROW(ex::run_experiment(cfg), ArgumentError);
}

TEST(Experiment, FrontExportSingleRecordAndIterCounts) {
  const auto p = analytic::make_absdist();
  ex::RunOutcome r;
  r.run_id = "r000";
  r.problem = "analytic:absdist";
  r.start_label = "p00";
  r.record = solve(p, p.space()->primal(Eigen::Vector2d(3, 1)), SolverConfig::constant(1e-3, 1e-3));
  const auto out = lines(ex::front_csv({&r}, false));
  ASSERT_EQ(out.size(), 2u);
  std::stringstream row(out[1]);
  std::vector<std::string> cols;
  for (std::string c; std::getline(row, c, ',');) cols.push_back(c);
  ASSERT_EQ(cols.size(), 10u);
  EXPECT_EQ(std::stoul(cols[6]), r.record->rows.size());
  EXPECT_EQ(cols[8], "0.000");
  EXPECT_THROW(ex::front_csv({}), ArgumentError);
}

TEST(Experiment, FailedRunIsRecordedNotFatal) {
  ex::ExperimentConfig cfg;
  cfg.problem = "analytic:l1";
  cfg.start_points = {{1.0, 1.0}};
  cfg.max_iters = 1;
  cfg.out = scratch("cap");
  const auto s = ex::run_experiment(cfg);
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_EQ(s.runs[0].status(), "MaxIters");
  EXPECT_TRUE(s.all_completed());
}

TEST(Experiment, ConfigFileAndValidation) {
  const fs::path dir = scratch("cfg");
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "a.cfg");
    f << "# comment\nproblem = obstacle:piecewise\nhmax = 0.4, 0.2\nu0 = 1,3\n\neps-bar = 1e-3  # trailing\nC = 0.02\n"
         "timing = false\njobs = 2\n";
  }
  const auto cfg = ex::load_config(dir / "a.cfg");
  EXPECT_EQ(cfg.problem, "obstacle:piecewise");
  EXPECT_EQ(cfg.h_max, (std::vector<double>{0.4, 0.2}));
  EXPECT_EQ(cfg.u0, (std::vector<double>{1, 3}));
  EXPECT_DOUBLE_EQ(cfg.eps_bar, 1e-3);
  EXPECT_DOUBLE_EQ(cfg.control_weight, 0.02);
  EXPECT_FALSE(cfg.timing);
  EXPECT_EQ(cfg.jobs, 2);
  {
    std::ofstream f(dir / "bad.cfg");
    f << "problem = analytic:absdist\nfoo = 1\n";
  }
  try {
    ex::load_config(dir / "bad.cfg");
    FAIL();
  } catch (const ArgumentError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  ex::ExperimentConfig bad;
  bad.c = 1.5;
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = {};
  bad.problem = "obstacle:wavy";
  EXPECT_THROW(bad.validate(), ArgumentError);
  bad = {};
  bad.problem = "analytic";
  EXPECT_THROW(bad.validate(), ArgumentError);
  EXPECT_THROW(ex::apply_setting(bad, "hmax", "0.4,x"), ArgumentError);
}

TEST(Experiment, FieldExportChecksLengths) {
  const auto p = fem::make_benchmark(1.0, fem::ObstacleKind::Constant);
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(16);
  const std::vector<char> act(16, 0);
  EXPECT_EQ(lines(ex::field_csv(p.mesh(), z, z, p.psi(), act)).size(), 17u);
  EXPECT_THROW(ex::field_csv(p.mesh(), Eigen::VectorXd::Zero(3), z, p.psi(), act), DimensionError);
}

// Desk-scale run whose end point is nonsmooth: the sampled set must grow
// beyond the k = 2 initial subgradients.
TEST(Experiment, LargeControlRunEnrichesSubdifferential) {
  ex::ExperimentConfig cfg;
  cfg.problem = "obstacle:constant";
  cfg.h_max = {0.4};
  cfg.u0 = {8};
  cfg.out = scratch("xi_growth");
  const auto s = ex::run_experiment(cfg);
  ASSERT_EQ(s.runs.size(), 1u);
  ASSERT_TRUE(s.runs[0].completed()) << s.runs[0].error;
  EXPECT_GT(s.runs[0].record->max_xi_set_size(), 2u);
  const auto front = lines(slurp(cfg.out / "front.csv"));
  EXPECT_EQ(front[1].substr(front[1].rfind(',') + 1), std::to_string(s.runs[0].record->max_xi_set_size()));
}
