#include <gtest/gtest.h>

#include "sje/harness.hpp"
#include "sje/synth.hpp"
#include "test_util.hpp"

namespace sje {
namespace {

TEST(PlantedTask, ShapesAndSplit) {
  PlantedTaskConfig cfg;
  cfg.seed = 1;
  auto t = generate_planted_task(cfg);
  EXPECT_EQ(t.truth.rows(), 16);
  EXPECT_EQ(t.truth.cols(), 8);
  EXPECT_EQ(t.table.num_classes(), 20u);
  EXPECT_EQ(t.data.size(), 1000u);
  EXPECT_EQ(t.split.train.size(), 12u);
  EXPECT_EQ(t.split.val.size(), 4u);
  EXPECT_EQ(t.split.test.size(), 4u);
  EXPECT_NO_THROW(t.split.validate());
  for (Eigen::Index c = 0; c < 20; ++c) EXPECT_NEAR(t.table.rows.row(c).norm(), 1.0, 1e-12);
}

TEST(PlantedTask, OracleArgmaxEqualsLabel) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PlantedTaskConfig cfg;
    cfg.seed = seed;
    auto t = generate_planted_task(cfg);
    // Independent oracle: score every class by x . (M phi_c).
    Matrix proto = t.table.rows * t.truth.transpose();  // C x D
    for (std::size_t n = 0; n < t.data.size(); ++n) {
      Eigen::Index best = 0;
      Eigen::RowVectorXd x = t.data.features.row(static_cast<Eigen::Index>(n));
      for (Eigen::Index c = 1; c < proto.rows(); ++c) {
        if (x.dot(proto.row(c)) > x.dot(proto.row(best))) best = c;
      }
      ASSERT_EQ(class_at(static_cast<std::size_t>(best)), t.data.labels[n]);
    }
  }
}

TEST(PlantedTask, SameSeedSameTask) {
  PlantedTaskConfig cfg;
  cfg.seed = 77;
  cfg.noise = 0.2;
  auto a = generate_planted_task(cfg), b = generate_planted_task(cfg);
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_EQ(a.table.rows, b.table.rows);
  EXPECT_EQ(a.data.features, b.data.features);
  EXPECT_EQ(a.split.test, b.split.test);
  cfg.seed = 78;
  EXPECT_NE(generate_planted_task(cfg).truth, a.truth);
}

TEST(PlantedTask, RejectsBadConfig) {
  PlantedTaskConfig cfg;
  cfg.split = {15, 4, 4};
  EXPECT_THROW(generate_planted_task(cfg), ValidationError);
  cfg = {};
  cfg.noise = -1;
  EXPECT_THROW(generate_planted_task(cfg), ValidationError);
}

TEST(PlantedTask, SjeRecoversTestClasses) {
  PlantedTaskConfig pc;
  pc.seed = 0;
  auto t = generate_planted_task(pc);
  ExperimentConfig cfg;
  cfg.seed = 0;
  auto r = run_zero_shot({t.data, {t.table}, t.split}, cfg);
  ASSERT_TRUE(r.report.test_accuracy);
  EXPECT_GE(*r.report.test_accuracy, 0.99);
}

std::vector<ClassId> ids(std::size_t n) {
  std::vector<ClassId> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(class_at(i));
  return v;
}

TEST(OracleGradient, FlatRegionIsZero) {
  Matrix phi(2, 2);
  phi << 1, 0, 0, 1;
  auto table = testing::make_table(phi);
  CompatibilityModel m;
  m.W = 10 * Matrix::Identity(2, 2);
  Vector x = (Vector(2) << 1, 0).finished();
  auto cands = ids(2);
  auto g = oracle_loss_gradient(m, x, class_at(0), table, cands, 1e-5);
  EXPECT_TRUE(g.isZero(0.0));
}

TEST(OracleGradient, KinkIsReported) {
  Matrix phi(3, 2);
  phi << 1, 0, 0, 1, 0, 1;  // classes 1 and 2 tie
  CompatibilityModel m;
  m.W = Matrix::Zero(2, 2);
  Vector x = (Vector(2) << 1, 1).finished();
  auto cands = ids(3);
  EXPECT_THROW(oracle_loss_gradient(m, x, class_at(0), testing::make_table(phi), cands, 1e-5), KinkError);
}

TEST(OracleGradient, StepRobust) {
  std::mt19937_64 rng(31);
  int checked = 0;
  for (int attempt = 0; attempt < 500 && checked < 50; ++attempt) {
    CompatibilityModel m;
    m.W = testing::random_matrix(4, 3, rng);
    auto table = testing::make_table(testing::random_matrix(5, 3, rng));
    Vector x = testing::random_vector(4, rng);
    auto cands = ids(5);
    try {
      auto a = oracle_loss_gradient(m, x, class_at(0), table, cands, 1e-5);
      auto b = oracle_loss_gradient(m, x, class_at(0), table, cands, 1e-6);
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) EXPECT_TRUE(testing::rel_close(a(i, j), b(i, j), 1e-3, 1e-8));
      ++checked;
    } catch (const KinkError&) {
    }
  }
  EXPECT_EQ(checked, 50);
}

TEST(OraclePath, RandomThirtyNodeTree) {
  auto t = random_tree(30, 4);
  auto ic = information_content(t);
  for (NodeId u = 0; u < 30; ++u)
    for (NodeId v = 0; v < 30; ++v) EXPECT_EQ(oracle_path_length(t, u, v), similarity(t, ic, u, v, SimilarityKind::kPath));
}

TEST(RandomTree, IsDeterministicAndRooted) {
  auto a = random_tree(25, 9), b = random_tree(25, 9);
  EXPECT_EQ(a.num_nodes(), 25u);
  EXPECT_EQ(a.name(a.root()), "n0");
  for (NodeId n = 0; n < 25; ++n) EXPECT_EQ(a.parents(n), b.parents(n));
  EXPECT_EQ(a.class_nodes().size(), 25u);
}

}  // namespace
}  // namespace sje
