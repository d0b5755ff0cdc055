#include <gtest/gtest.h>

#include <random>

#include "sje/harness.hpp"
#include "sje/synth.hpp"
#include "test_util.hpp"

namespace sje {
namespace {

PlantedTask planted(std::uint64_t seed, double noise = 0.0) {
  PlantedTaskConfig pc;
  pc.seed = seed;
  pc.noise = noise;
  return generate_planted_task(pc);
}

InputEmbeddingSet seen_only(const PlantedTask& t) {
  std::vector<ClassId> seen = t.split.train;
  seen.insert(seen.end(), t.split.val.begin(), t.split.val.end());
  std::sort(seen.begin(), seen.end());
  return t.data.subset(seen);
}

TEST(CrossValidateEta, SingletonGrid) {
  auto t = planted(1);
  TrainConfig base;
  auto r = cross_validate_eta(seen_only(t), t.table, t.split, {1e-2}, base);
  EXPECT_EQ(r.eta, 1e-2);
  EXPECT_EQ(r.model.meta.eta, 1e-2);
}

TEST(CrossValidateEta, SelectionIsTheMaxAndTiesGoToSmallerEta) {
  auto t = planted(2, 0.5);
  TrainConfig base;
  base.seed = 2;
  auto r = cross_validate_eta(seen_only(t), t.table, t.split, {1e-1, 1e-3, 1e-2, 1e-3}, base);
  ASSERT_EQ(r.evaluated.size(), 4u);
  for (auto [eta, acc] : r.evaluated) EXPECT_GE(r.val_accuracy, acc);
  // Duplicate grid entries train identically.
  EXPECT_EQ(r.evaluated[1].second, r.evaluated[3].second);
  double best = 0;
  for (auto [eta, acc] : r.evaluated) best = std::max(best, acc);
  double smallest = 1e9;
  for (auto [eta, acc] : r.evaluated)
    if (acc == best) smallest = std::min(smallest, eta);
  EXPECT_EQ(r.eta, smallest);

  auto same = cross_validate_eta(seen_only(t), t.table, t.split, {1e-2, 1e-2}, base);
  EXPECT_EQ(same.evaluated[0].second, same.evaluated[1].second);
  EXPECT_EQ(same.eta, 1e-2);
}

TEST(RunZeroShot, SingleModeRecoversPlantedTask) {
  auto t = planted(3);
  ExperimentConfig cfg;
  cfg.seed = 3;
  auto r = run_zero_shot({t.data, {t.table}, t.split}, cfg);
  ASSERT_TRUE(r.report.test_accuracy);
  EXPECT_GE(*r.report.test_accuracy, 0.99);
  EXPECT_EQ(r.report.per_class.size(), 4u);
  EXPECT_EQ(r.report.selected_eta.size(), 1u);
  EXPECT_EQ(r.report.cv.size(), cfg.eta_grid.size());
  EXPECT_EQ(r.alpha, std::vector<double>{1.0});
}

TEST(RunZeroShot, CmbWithIdenticalTablesEqualsSingle) {
  auto t = planted(4, 0.3);
  ExperimentConfig single;
  single.seed = 4;
  auto s = run_zero_shot({t.data, {t.table}, t.split}, single);
  ExperimentConfig cmb = single;
  cmb.mode = Mode::kCmb;
  auto c = run_zero_shot({t.data, {t.table, t.table}, t.split}, cmb);
  EXPECT_EQ(c.report.test_accuracy, s.report.test_accuracy);
  EXPECT_EQ(c.report.alpha_cv.size(), 11u);
  EXPECT_EQ(c.report.alpha, (std::vector<double>{0.0, 1.0}));
}

TEST(RunZeroShot, ForcedEqualAlphaMatchesStackedPredictions) {
  auto t = planted(5, 0.3);
  std::mt19937_64 rng(5);
  auto second = testing::make_table(testing::random_matrix(20, 6, rng));
  second.class_names = t.table.class_names;
  ExperimentConfig cfg;
  cfg.mode = Mode::kCmb;
  cfg.forced_alpha = std::vector<double>{0.5, 0.5};
  cfg.seed = 5;
  auto r = run_zero_shot({t.data, {t.table, second}, t.split}, cfg);
  EXPECT_TRUE(r.report.alpha_cv.empty());
  EnsembleModel em{r.members, r.alpha};
  auto stacked = stack_members(r.members);
  auto test = t.data.subset(t.split.test);
  auto a = ensemble_predict_all(test, em, t.split.test);
  auto b = predict_all(test, stacked.model, stacked.table, t.split.test);
  EXPECT_EQ(a, b);
  EXPECT_NE(format_report(r.report).find("selected.alpha.from=config"), std::string::npos);
}

TEST(RunZeroShot, CncTrainsOnConcatenation) {
  auto t = planted(6);
  std::mt19937_64 rng(6);
  auto second = testing::make_table(testing::random_matrix(20, 3, rng));
  second.class_names = t.table.class_names;
  ExperimentConfig cfg;
  cfg.mode = Mode::kCnc;
  cfg.seed = 6;
  auto r = run_zero_shot({t.data, {t.table, second}, t.split}, cfg);
  ASSERT_EQ(r.members.size(), 1u);
  EXPECT_EQ(r.members[0].table.dim(), 11u);
  EXPECT_EQ(r.members[0].table.kind, EmbeddingKind::kConcatenated);
}

TEST(RunZeroShot, TestSamplesNeverInfluenceTraining) {
  auto t = planted(7, 0.2);
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.evaluate_test = false;
  auto a = run_zero_shot({t.data, {t.table}, t.split}, cfg);
  auto scrambled = t.data;
  std::mt19937_64 rng(70);
  for (std::size_t n = 0; n < scrambled.size(); ++n) {
    if (contains(t.split.test, scrambled.labels[n])) {
      scrambled.features.row(static_cast<Eigen::Index>(n)) = testing::random_vector(16, rng, 100.0).transpose();
    }
  }
  auto b = run_zero_shot({scrambled, {t.table}, t.split}, cfg);
  EXPECT_EQ(a.members[0].model.W, b.members[0].model.W);
  EXPECT_EQ(a.report.val_accuracy, b.report.val_accuracy);
  EXPECT_FALSE(a.report.test_accuracy);
}

TEST(RunZeroShot, RejectsBadConfigurations) {
  auto t = planted(8);
  ExperimentConfig cfg;
  cfg.mode = Mode::kCmb;
  EXPECT_THROW(run_zero_shot({t.data, {t.table}, t.split}, cfg), ValidationError);
  cfg.mode = Mode::kSingle;
  EXPECT_THROW(run_zero_shot({t.data, {t.table, t.table}, t.split}, cfg), ValidationError);
  cfg.eta_grid = {};
  EXPECT_THROW(run_zero_shot({t.data, {t.table}, t.split}, cfg), ValidationError);
}

Report sample_report() {
  Report r;
  r.mode = Mode::kCmb;
  r.seed = 12345678901234567ull;
  r.normalize = false;
  r.train_classes = 12;
  r.val_classes = 4;
  r.test_classes = 4;
  r.cv = {{0, 1e-3, 0.5}, {0, 0.1, 0.75}, {1, 1e-3, 1.0}};
  r.selected_eta = {0.1, 1e-3};
  r.alpha_cv = {{{0.0, 1.0}, 0.25}, {{0.1, 0.9}, 1.0}};
  r.alpha = {0.1, 0.9};
  r.val_accuracy = 1.0;
  r.test_accuracy = 0.8333333333333334;
  r.per_class = {{"black-footed albatross", 10, 9, 0.9}, {"a,b", 3, 1, 1.0 / 3.0}};
  r.warnings = {"class 'x' has a zero output embedding row"};
  r.wall_clock_seconds = 0.25;
  return r;
}

TEST(Report, RoundTrips) {
  auto r = sample_report();
  EXPECT_EQ(parse_report(format_report(r)), r);
  r.wall_clock_seconds.reset();
  r.test_accuracy.reset();
  auto text = format_report(r);
  EXPECT_EQ(text.find("wall_clock"), std::string::npos);
  EXPECT_EQ(parse_report(text), r);
}

TEST(Report, EmitWritesFormattedText) {
  auto dir = testing::temp_dir("report");
  emit_report(sample_report(), dir / "r.txt");
  std::string body;
  for (const auto& l : read_lines(dir / "r.txt")) body += l + "\n";
  EXPECT_EQ(body, format_report(sample_report()));
  EXPECT_THROW(emit_report(sample_report(), dir / "no" / "such" / "dir" / "r.txt"), IoError);
}

TEST(Report, AccuracyOutsideUnitIntervalIsRejected) {
  auto r = sample_report();
  r.val_accuracy = 1.5;
  EXPECT_THROW(format_report(r), ValidationError);
  r = sample_report();
  r.per_class[0].accuracy = -0.1;
  EXPECT_THROW(format_report(r), ValidationError);
}

TEST(Report, SameConfigAndSeedGiveIdenticalReports) {
  auto t = planted(9, 0.3);
  ExperimentConfig cfg;
  cfg.seed = 9;
  auto a = run_zero_shot({t.data, {t.table}, t.split}, cfg).report;
  auto b = run_zero_shot({t.data, {t.table}, t.split}, cfg).report;
  a.wall_clock_seconds.reset();
  b.wall_clock_seconds.reset();
  EXPECT_EQ(format_report(a), format_report(b));
  auto text = format_report(a);
  EXPECT_NE(text.find("selected.eta[0].from=val"), std::string::npos);
  EXPECT_NE(text.find("selected.alpha.from=val"), std::string::npos);
}

TEST(LoadExperiment, ReadsFilesAndDrawsSplit) {
  auto t = planted(10);
  auto dir = testing::temp_dir("load_experiment");
  write_feature_matrix(dir / "f.txt", t.data);
  write_output_table(dir / "t.txt", t.table);
  ExperimentPaths paths;
  paths.features = dir / "f.txt";
  paths.tables = {dir / "t.txt"};
  paths.split_counts = SplitCounts{12, 4, 4};
  auto in = load_experiment(paths, 10);
  EXPECT_EQ(in.data.features, t.data.features);
  EXPECT_EQ(in.split.train.size(), 12u);
  auto again = load_experiment(paths, 10);
  EXPECT_EQ(again.split.test, in.split.test);
  paths.split_counts.reset();
  EXPECT_THROW(load_experiment(paths, 10), ValidationError);
  paths.features = dir / "missing.txt";
  paths.split_counts = SplitCounts{12, 4, 4};
  EXPECT_THROW(load_experiment(paths, 10), IoError);
}

}  // namespace
}  // namespace sje
