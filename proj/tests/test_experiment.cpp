#include <gtest/gtest.h>

#include "vaeq/channels.hpp"
#include "vaeq/experiment.hpp"

using namespace vaeq;

namespace {

ExperimentSpec tiny_spec() {
  ExperimentSpec spec;
  spec.channel_name = "h1";
  spec.channel_taps = channel_preset("h1");
  spec.snr_grid = {0.0, 10.0};
  spec.train_len = 300;
  spec.trials = 2;
  spec.test_len = 400;
  spec.base_seed = 42;

  EqualizerRun vae;
  vae.id = "vae";
  vae.kind = EqualizerRun::Kind::kVae;
  vae.vae.max_updates = 250;
  vae.vae.subseq_len = 64;

  EqualizerRun cma;
  cma.id = "cma";
  cma.kind = EqualizerRun::Kind::kCma;
  cma.adapt.passes = 5;

  EqualizerRun mmse;
  mmse.id = "mmse";
  mmse.kind = EqualizerRun::Kind::kMmse;
  mmse.adapt.step_size = 0.05;
  mmse.adapt.normalize = true;
  mmse.adapt.passes = 5;

  spec.runs = {vae, cma, mmse};
  return spec;
}

}  // namespace

TEST(RunExperiment, CardinalityContract) {
  const ExperimentSpec spec = tiny_spec();
  const auto rows = run_experiment(spec);
  EXPECT_EQ(rows.size(), 3u * 2u * 2u);
  const auto summary = summarize(rows);
  EXPECT_EQ(summary.size(), 3u * 2u);
  for (const auto& s : summary) EXPECT_EQ(s.trials, 2u);
}

TEST(RunExperiment, RowsCanonicallyOrdered) {
  const auto rows = run_experiment(tiny_spec());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    const auto& b = rows[i];
    const auto key = [](const TrialResult& r) {
      return std::make_tuple(r.equalizer, r.channel, r.snr_db, r.trial);
    };
    EXPECT_LE(key(a), key(b));
  }
}

TEST(RunExperiment, VaeRowsCarryUpdatesAndDistance) {
  const auto rows = run_experiment(tiny_spec());
  for (const auto& r : rows) {
    if (r.failed) continue;
    if (r.equalizer == "vae") {
      EXPECT_TRUE(r.updates.has_value());
      EXPECT_TRUE(r.hhat_distance.has_value());
    } else {
      EXPECT_FALSE(r.updates.has_value());
      EXPECT_FALSE(r.hhat_distance.has_value());
    }
  }
}

TEST(RunExperiment, DeterministicBytes) {
  const ExperimentSpec spec = tiny_spec();
  const std::string a = results_csv(run_experiment(spec));
  const std::string b = results_csv(run_experiment(spec));
  EXPECT_EQ(a, b);
}

TEST(RunExperiment, IndependentOfWorkerCount) {
  ExperimentSpec spec = tiny_spec();
  spec.jobs = 1;
  const auto rows1 = run_experiment(spec);
  spec.jobs = 4;
  const auto rows4 = run_experiment(spec);
  EXPECT_EQ(results_csv(rows1), results_csv(rows4));
  EXPECT_EQ(summary_csv(summarize(rows1)), summary_csv(summarize(rows4)));
}

TEST(RunExperiment, DivergentTrialsBecomeFailedRows) {
  ExperimentSpec spec = tiny_spec();
  EqualizerRun bad;
  bad.id = "cma-hot";
  bad.kind = EqualizerRun::Kind::kCma;
  bad.adapt.step_size = 10.0;  // diverges immediately
  bad.adapt.passes = 2;
  spec.runs = {bad};
  spec.snr_grid = {10.0};
  const auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.failed);
    EXPECT_FALSE(r.fail_reason.empty());
  }
  const auto summary = summarize(rows);
  ASSERT_EQ(summary.size(), 1u);
  EXPECT_EQ(summary[0].failures, 2u);
  const std::string csv = summary_csv(summary);
  EXPECT_NE(csv.find(",,,2,2\n"), std::string::npos);  // empty mean/median
}

TEST(RunExperiment, TimingColumnOnlyWhenRequested) {
  ExperimentSpec spec = tiny_spec();
  spec.runs = {spec.runs[1]};  // cma only, fast
  spec.record_timing = false;
  for (const auto& r : run_experiment(spec)) EXPECT_FALSE(r.wall_time_s.has_value());
  spec.record_timing = true;
  for (const auto& r : run_experiment(spec)) EXPECT_TRUE(r.wall_time_s.has_value());
}

TEST(TrialSeed, DependsOnAllCellCoordinates) {
  const auto s = trial_seed(1, 2000, 10.0, 3);
  EXPECT_NE(s, trial_seed(2, 2000, 10.0, 3));
  EXPECT_NE(s, trial_seed(1, 2001, 10.0, 3));
  EXPECT_NE(s, trial_seed(1, 2000, 8.0, 3));
  EXPECT_NE(s, trial_seed(1, 2000, 10.0, 4));
  EXPECT_EQ(s, trial_seed(1, 2000, 10.0, 3));
}

TEST(ResultsCsv, SchemaAndFailedRowShape) {
  TrialResult ok;
  ok.equalizer = "vae";
  ok.channel = "h1";
  ok.snr_db = 10.0;
  ok.trial = 0;
  ok.ser = 0.0015;
  ok.rotation_deg = 90;
  ok.delay = 2;
  ok.updates = 1234;
  ok.hhat_distance = 0.05;

  TrialResult bad;
  bad.equalizer = "cma";
  bad.channel = "h1";
  bad.snr_db = 10.0;
  bad.trial = 1;
  bad.failed = true;

  const std::string csv = results_csv({ok, bad});
  EXPECT_EQ(csv,
            "equalizer,channel,snr_db,trial,ser,rotation_deg,delay,updates,"
            "hhat_distance,wall_time_s,failed\n"
            "vae,h1,10,0,0.0015,90,2,1234,0.05,,0\n"
            "cma,h1,10,1,,,,,,,1\n");
}
