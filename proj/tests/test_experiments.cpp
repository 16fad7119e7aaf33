#include "sparsechan/experiments.hpp"
#include "sparsechan/io.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace sparsechan;

namespace {

ExperimentConfig small_config(std::size_t trials) {
  ExperimentConfig cfg;
  cfg.trials = trials;
  return cfg;
}

}  // namespace

TEST(Mse, Examples) {
  SparseChannel h{ComplexVector::Zero(2), {0}};
  h.taps(0) = 1.0;
  Estimate same = make_estimate(Method::ls, h.taps);
  EXPECT_EQ(mse(h, same), 0.0);
  EXPECT_EQ(mse(h, make_estimate(Method::ls, ComplexVector::Zero(2))), 1.0);
  ComplexVector other = ComplexVector::Zero(2);
  other(1) = 1.0;
  EXPECT_EQ(mse(h, make_estimate(Method::ls, other)), 2.0);
  EXPECT_THROW(mse(h, make_estimate(Method::ls, ComplexVector::Zero(3))), InvalidInput);
}

TEST(RunTrial, BitIdenticalRepeats) {
  ExperimentConfig cfg = small_config(3);
  cfg.methods = {Method::ls, Method::omp, Method::lasso, Method::ds, Method::sds, Method::oracle};
  const TrialRecord a = run_trial(cfg, 10.0, 30, 2);
  const TrialRecord b = run_trial(cfg, 10.0, 30, 2);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  EXPECT_EQ(a.seed, b.seed);
  for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.outcomes[k].mse), std::bit_cast<std::uint64_t>(b.outcomes[k].mse));
    EXPECT_FALSE(a.outcomes[k].failed) << a.outcomes[k].error;
  }
}

TEST(RunTrial, NoiselessOracleIsExact) {
  ExperimentConfig cfg = small_config(5);
  cfg.methods = {Method::oracle};
  for (std::size_t t = 0; t < 5; ++t)
    EXPECT_LE(run_trial(cfg, std::numeric_limits<double>::infinity(), 30, t).outcomes[0].mse, 1e-20);
}

TEST(RunTrial, SeedsDifferAcrossAxes) {
  EXPECT_NE(trial_seed(1, 10.0, 30, 0), trial_seed(1, 10.0, 30, 1));
  EXPECT_NE(trial_seed(1, 10.0, 30, 0), trial_seed(1, 13.0, 30, 0));
  EXPECT_NE(trial_seed(1, 10.0, 30, 0), trial_seed(1, 10.0, 35, 0));
  EXPECT_NE(trial_seed(1, 10.0, 30, 0), trial_seed(2, 10.0, 30, 0));
  EXPECT_EQ(trial_seed(1, 0.0, 30, 0), trial_seed(1, -0.0, 30, 0));
}

TEST(RunTrial, RejectsBadTrainingLength) {
  EXPECT_THROW(run_trial(small_config(1), 10.0, 0, 0), InvalidInput);
}

TEST(Aggregate, OracleBelowDsOnBatch) {
  ExperimentConfig cfg = small_config(200);
  cfg.methods = {Method::ds, Method::oracle};
  const SweepPoint pt = aggregate(10.0, cfg.methods, run_trials(cfg, 10.0, 30));
  EXPECT_LE(pt.per_method[1].mse.mean, pt.per_method[0].mse.mean);
}

TEST(Aggregate, SingleTrialSummary) {
  ExperimentConfig cfg = small_config(1);
  cfg.methods = {Method::ls};
  const SweepPoint pt = aggregate(10.0, cfg.methods, run_trials(cfg, 10.0, 30));
  const auto& a = pt.per_method[0];
  EXPECT_EQ(a.mse.mean, a.mse.median);
  EXPECT_EQ(a.mse.mean, pt.trials[0].outcomes[0].mse);
  EXPECT_EQ(a.mse.std, 0.0);
  EXPECT_EQ(a.trials_used, 1u);
}

TEST(Aggregate, FailedCellsAreExcludedAndCounted) {
  std::vector<TrialRecord> recs(3);
  for (std::size_t t = 0; t < 3; ++t) {
    MethodOutcome o{Method::ds};
    o.mse = static_cast<double>(t + 1);
    o.failed = t == 1;
    o.converged = t != 2;
    recs[t].outcomes.push_back(o);
  }
  const SweepPoint pt = aggregate(0.0, {Method::ds}, recs);
  EXPECT_EQ(pt.per_method[0].failed, 1u);
  EXPECT_EQ(pt.per_method[0].trials_used, 2u);
  EXPECT_EQ(pt.per_method[0].non_converged, 1u);
  EXPECT_DOUBLE_EQ(pt.per_method[0].mse.mean, 2.0);
}

TEST(Summary, CompensatedMeanMatchesStoredValues) {
  std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(v), 2.0);
  const Summary s = summarize({1.0, 2.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.median, 2.0);
  EXPECT_NEAR(s.std, std::sqrt(((4.0 / 3) * (4.0 / 3) + (1.0 / 3) * (1.0 / 3) + (5.0 / 3) * (5.0 / 3)) / 2.0), 1e-15);
  EXPECT_DOUBLE_EQ(summarize({1.0, 3.0}).median, 2.0);
}

TEST(Sweep, GridIntegrity) {
  ExperimentConfig cfg = small_config(2);
  const SweepResult snr = sweep_snr(cfg);
  ASSERT_EQ(snr.points.size(), 10u);
  for (const auto& p : snr.points) EXPECT_EQ(p.per_method.size(), 5u);
  EXPECT_EQ(snr.points.front().axis_value, 3.0);
  EXPECT_EQ(snr.points.back().axis_value, 30.0);

  const SweepResult n = sweep_training_length(cfg);
  ASSERT_EQ(n.points.size(), 10u);
  EXPECT_EQ(n.points.front().axis_value, 10.0);
  EXPECT_EQ(n.points.back().axis_value, 55.0);

  const std::string csv = sweep_csv(snr);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 51);
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  ExperimentConfig cfg = small_config(6);
  cfg.snr_grid_db = {5.0, 15.0};
  cfg.methods = {Method::ls, Method::lasso, Method::ds};
  const std::string serial = sweep_csv(sweep_snr(cfg));
  cfg.threads = 3;
  EXPECT_EQ(sweep_csv(sweep_snr(cfg)), serial);
}

TEST(Validate, RejectsBadConfigs) {
  ExperimentConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = {};
  cfg.snr_grid_db = {10, 5};
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = {};
  cfg.n_grid = {};
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = {};
  cfg.n_grid = {0, 5};
  EXPECT_THROW(validate(cfg), InvalidInput);
  cfg = {};
  cfg.T = 61;
  EXPECT_THROW(validate(cfg), InvalidInput);
}
