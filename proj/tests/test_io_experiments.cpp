#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfmc/experiments.hpp"
#include "mfmc/io/csv.hpp"

using namespace mfmc;

namespace {

MFDataset parse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Usage;
}

double cell(const Table& t, std::size_t row, const std::string& col) {
  return *parse_double(t.rows[row][t.column(col)]);
}

}  // namespace

TEST(Csv, PairedAndLowFidelityRows) {
  MFDataset d = parse("x1,x2\n1,2\n3,4\n,6\n,8\n");
  EXPECT_EQ(d.n(), 2u);
  EXPECT_EQ(d.m(), 2u);
  EXPECT_EQ(d.lofi()[1], 8.0);
}

TEST(Csv, MalformedRowNamesLine) {
  try {
    parse("x1,x2\nabc,2\n3,4\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Csv, WeightsNormalised) {
  MFDataset d = parse("x1,x2,w\n1,2,2\n3,4,2\n");
  EXPECT_DOUBLE_EQ(d.paired_weights()[0], 0.5);
  EXPECT_DOUBLE_EQ(d.paired_weights()[1], 0.5);
}

TEST(Csv, Errors) {
  EXPECT_EQ(kind_of([] { parse("x1,x2\n1,2\n"); }), ErrorKind::Dataset);
  EXPECT_EQ(kind_of([] { parse("x1,x2,w\n1,2,-1\n3,4,1\n"); }), ErrorKind::Dataset);
  EXPECT_EQ(kind_of([] { parse("x1,y\n1,2\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse("x1,x2\n1,2,3\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::Parse);
}

TEST(Csv, RoundTripIsExact) {
  RngStream rng(7);
  auto s = JointModel::bivariate_gumbel(2, 4, 2, 1, 0.4).sample(300, rng);
  std::vector<double> a, b, l;
  for (std::size_t i = 0; i < 200; ++i) {
    a.push_back(s[i].first);
    b.push_back(s[i].second);
  }
  for (std::size_t i = 200; i < 300; ++i) l.push_back(s[i].second);
  MFDataset d(a, b, l);
  std::ostringstream out;
  write_dataset(out, d);
  MFDataset back = parse(out.str());
  EXPECT_EQ(back.x1(), d.x1());
  EXPECT_EQ(back.x2(), d.x2());
  EXPECT_EQ(back.lofi(), d.lofi());
}

TEST(Json, EstimateRoundTrip) {
  Estimate e = baseline_ml(std::vector<double>{1, 2, 4, 7}, FamilyId::Gaussian);
  Estimate back = estimate_from_json(json::parse(to_json(e).dump()));
  EXPECT_EQ(back.method, e.method);
  EXPECT_EQ(back.theta1, e.theta1);
  EXPECT_EQ(back.sigma, e.sigma);
  EXPECT_EQ(back.n, e.n);
  EXPECT_EQ(kind_of([] { estimate_from_json(json::parse(R"({"method":"baseline-ml"})")); }), ErrorKind::Parse);
}

TEST(Experiments, SeedRequired) {
  ExperimentConfig c;
  c.id = ExperimentId::Fig1;
  EXPECT_EQ(kind_of([&] { run_figure(c); }), ErrorKind::Usage);
}

TEST(Experiments, Fig1EndpointAndOrdering) {
  ExperimentConfig c;
  c.id = ExperimentId::Fig1;
  c.seed = 1;
  c.grid = {0.3, 1.0};
  ExperimentReport r = run_figure(c);
  const Table& t = r.table("curve");
  std::map<std::pair<double, std::string>, double> v;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    v[{cell(t, i, "dependence"), t.rows[i][t.column("method")]}] = cell(t, i, "variance");
  EXPECT_NEAR((v[{1.0, "joint-ml"}]), 16.0, 1e-6);
  for (double g : c.grid)
    for (const char* m : {"baseline-ml", "baseline-moment", "moment-mf", "marginal-ml-mf"})
      EXPECT_LE((v[{g, "joint-ml"}]), (v[{g, m}]) + 1e-9);
}

TEST(Experiments, Fig5BaselineAtHalf) {
  ExperimentConfig c;
  c.id = ExperimentId::Fig5;
  c.seed = 1;
  c.grid = {0.5};
  ExperimentReport r = run_figure(c);
  const Table& t = r.table("curve");
  bool found = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.rows[i][t.column("method")] == "baseline-ml") {
      EXPECT_NEAR(cell(t, i, "variance"), 0.75, 1e-12);
      found = true;
    }
  EXPECT_TRUE(found);
}

TEST(Experiments, Fig3Samples) {
  ExperimentConfig c;
  c.id = ExperimentId::Fig3;
  c.seed = 3;
  c.grid = {0.5};
  ExperimentReport r = run_figure(c);
  EXPECT_EQ(r.table("samples").rows.size(), 6u * 500u);
  EXPECT_EQ(r.table("sweep").rows.size(), 2u * 40u * 4u);
}

TEST(Experiments, ValidationDeterministicAndScheduleIndependent) {
  ExperimentConfig c;
  c.id = ExperimentId::McValidate;
  c.seed = 11;
  c.replications = 100;
  c.n = 200;
  c.threads = 1;
  std::string serial = run_mc_validation(c).payload();
  c.threads = 4;
  EXPECT_EQ(run_mc_validation(c).payload(), serial);
  EXPECT_EQ(run_mc_validation(c).payload(), serial);
  c.replications = 50;
  EXPECT_EQ(kind_of([&] { run_mc_validation(c); }), ErrorKind::Usage);
}

TEST(Experiments, ValidationMfmcMeanRatio) {
  ExperimentConfig c;
  c.id = ExperimentId::McValidate;
  c.seed = 5;
  c.replications = 2000;
  c.n = 200;
  c.m = 1800;
  c.known_lofi = false;
  c.methods = {Method::MfmcMean};
  ExperimentReport r = run_mc_validation(c);
  const Table& t = r.table("methods");
  ASSERT_EQ(t.rows.size(), 1u);
  // 2000 replications: the variance ratio has a relative SE near 3%
  EXPECT_NEAR(cell(t, 0, "ratio"), 1.0, 0.1);
}

TEST(Experiments, PipelineDefaults) {
  ExperimentConfig c;
  c.id = ExperimentId::Pipeline;
  c.seed = 2;
  ExperimentReport r = run_pipeline(c);
  EXPECT_EQ(r.config["n"].get<std::size_t>(), 100u);
  EXPECT_EQ(r.config["m"].get<std::size_t>(), 99900u);
  EXPECT_EQ(r.table("qoi").rows.size(), 10u);
  EXPECT_GE(r.table("qq").rows.size(), 1000u);
  EXPECT_LE(pipeline_width(r, Method::JointMl, "location"), pipeline_width(r, Method::BaselineMl, "location"));
  EXPECT_EQ(run_pipeline(c).payload(), r.payload());
}

TEST(Experiments, PipelineWithoutExceedances) {
  RngStream rng(4);
  std::vector<double> a, b, l;
  for (int i = 0; i < 60; ++i) {
    a.push_back(1.0 + 0.02 * i);
    b.push_back(1.0 + 0.02 * i + 0.1 * rng.normal());
  }
  for (int i = 0; i < 500; ++i) l.push_back(1.0 + 1.2 * rng.uniform());
  ExperimentConfig c;
  c.id = ExperimentId::Pipeline;
  c.dataset = MFDataset(a, b, l);
  ExperimentReport r = run_pipeline(c);
  const Table& q = r.table("qoi");
  ASSERT_FALSE(q.rows.empty());
  EXPECT_TRUE(std::isfinite(cell(q, 0, "estimate")));
  EXPECT_FALSE(r.warnings.empty());
}

TEST(Experiments, ReportWritesTablesAndSidecar) {
  ExperimentConfig c;
  c.id = ExperimentId::Fig5;
  c.seed = 1;
  c.grid = {0.25, 0.5};
  auto dir = std::filesystem::temp_directory_path() / "mfmc_report_test";
  std::filesystem::remove_all(dir);
  auto files = run_figure(c).write(dir);
  EXPECT_EQ(files.size(), 3u);
  std::ifstream in(dir / "fig5.json");
  json meta = json::parse(in);
  EXPECT_EQ(meta["config"]["seed"], 1);
  EXPECT_TRUE(meta.contains("version"));
  EXPECT_TRUE(meta.contains("runtime_seconds"));
  std::filesystem::remove_all(dir);
}

TEST(Experiments, ThreadsFromEnvironment) {
  ::setenv("MFMC_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  ::setenv("MFMC_THREADS", "x", 1);
  EXPECT_EQ(kind_of([] { thread_count(); }), ErrorKind::Usage);
  ::unsetenv("MFMC_THREADS");
}

TEST(Experiments, ValidationTrueCoefficientsMatchDirectFit) {
  ExperimentConfig c;
  c.id = ExperimentId::McValidate;
  c.seed = 21;
  c.replications = 100;
  c.n = 300;
  c.model = JointModel::bivariate_gumbel(2, 4, 2, 1, 0.3);
  c.methods = {Method::MomentMf};
  c.true_coefficients = true;
  ExperimentReport r = run_mc_validation(c);
  EXPECT_EQ(r.config["coefficients"], "optimal-true");
  // replication mean against fits done one by one with model-true coefficients
  MfOptions mo;
  mo.coef = CoefficientChoice::truth(*c.model);
  mo.known_lofi = *c.model;
  double acc = 0.0;
  for (std::size_t k = 0; k < c.replications; ++k) {
    RngStream rng(*c.seed + k);
    auto s = c.model->sample(c.n, rng);
    std::vector<double> a, b;
    for (auto& [x, y] : s) {
      a.push_back(x);
      b.push_back(y);
    }
    acc += moment_mf(MFDataset(a, b, {}), FamilyId::Gumbel, mo).theta1(1);
  }
  const Table& t = r.table("methods");
  EXPECT_NEAR(cell(t, 1, "mean"), acc / 100.0, 1e-12);
}
