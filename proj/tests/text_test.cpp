#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sje/text.hpp"
#include "test_util.hpp"

namespace sje {
namespace {

WordVectorTable make_wv(const std::vector<std::pair<std::string, std::vector<double>>>& entries) {
  WordVectorTable wv;
  wv.vectors.resize(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(entries[0].second.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    wv.words.push_back(entries[i].first);
    wv.index.emplace(entries[i].first, i);
    for (std::size_t j = 0; j < entries[i].second.size(); ++j) {
      wv.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = entries[i].second[j];
    }
  }
  return wv;
}

TEST(Tokenize, LowercasesAndSplits) {
  EXPECT_EQ(tokenize("The Black-footed  albatross, 2x!"),
            (std::vector<std::string>{"the", "black", "footed", "albatross", "2x"}));
  EXPECT_TRUE(tokenize("  ,; ").empty());
}

TEST(Vocabulary, DocumentFrequencyFilters) {
  Corpus corpus{{"x", "a b"}, {"y", "a c"}};
  auto v = build_vocabulary(corpus, 2, 1.0);
  EXPECT_EQ(v.words, std::vector<std::string>{"a"});
  EXPECT_EQ(v.document_frequency, std::vector<std::size_t>{2});
  auto w = build_vocabulary(corpus, 1, 0.5);
  EXPECT_EQ(w.words, (std::vector<std::string>{"b", "c"}));
  auto capped = build_vocabulary(corpus, 1, 0.5, 1);
  EXPECT_EQ(capped.words, std::vector<std::string>{"b"});
  EXPECT_THROW(build_vocabulary(corpus, 3, 1.0), ValidationError);
}

TEST(Vocabulary, RanksByTotalCount) {
  Corpus corpus{{"x", "z z z y"}, {"y", "y w"}};
  auto v = build_vocabulary(corpus, 1, 1.0);
  EXPECT_EQ(v.words, (std::vector<std::string>{"z", "y", "w"}));
}

TEST(Bow, CountsAndWarnings) {
  Vocabulary vocab;
  vocab.words = {"cat", "dog", "bird"};
  for (std::size_t i = 0; i < 3; ++i) vocab.index.emplace(vocab.words[i], i);
  Corpus corpus{{"pets", "cat cat dog"}, {"empty", ""}, {"zoo", "cat zebra"}};
  Diagnostics diag;
  auto t = bow_embedding(corpus, vocab, &diag);
  EXPECT_EQ(t.kind, EmbeddingKind::kBow);
  Matrix expected(3, 3);
  expected << 2, 1, 0, 0, 0, 0, 1, 0, 0;
  EXPECT_EQ(t.rows, expected);
  ASSERT_EQ(diag.warnings.size(), 1u);
  EXPECT_NE(diag.warnings[0].find("empty"), std::string::npos);
}

TEST(ContextVector, MeanOfKnownWords) {
  auto wv = make_wv({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {3, 4}}, {"d", {2, 2}}});
  auto m = context_vector({"a", "b"}, wv);
  EXPECT_EQ(m(0), 0.5);
  EXPECT_EQ(m(1), 0.5);
  EXPECT_EQ(context_vector({"c"}, wv), (Vector(2) << 3, 4).finished());
  EXPECT_EQ(context_vector({"d", "unknown"}, wv), (Vector(2) << 2, 2).finished());
  EXPECT_THROW(context_vector({"unknown"}, wv), ValidationError);
}

TEST(Ws2vLoss, HandValues) {
  Vector c = (Vector(2) << 1, 0).finished(), w = (Vector(2) << 0, 1).finished();
  EXPECT_NEAR(ws_w2v_loss({{c, w}}, {}), std::log(0.5), 1e-15);
  EXPECT_EQ(ws_w2v_loss({}, {}), 0.0);
  EXPECT_NEAR(ws_w2v_loss({{c, w}}, {{c, w}}), 2 * std::log(0.5), 1e-15);
  EXPECT_NEAR(-1.3862943611198906, 2 * std::log(0.5), 1e-15);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-800.0)));
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-9);
}

TEST(Ws2vGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 + trial % 6;
    Vector c = testing::random_vector(d, rng), w = testing::random_vector(d, rng), wn = testing::random_vector(d, rng);
    auto loss = [&](const Vector& pos, const Vector& neg) { return ws_w2v_loss({{c, pos}}, {{c, neg}}); };
    Vector gp = positive_gradient(c, w), gn = negative_gradient(c, wn);
    for (Eigen::Index j = 0; j < d; ++j) {
      Vector up = w, down = w;
      up(j) += h;
      down(j) -= h;
      double fd = (loss(up, wn) - loss(down, wn)) / (2 * h);
      EXPECT_TRUE(testing::rel_close(fd, gp(j), 1e-5, 1e-8)) << fd << " vs " << gp(j);
      Vector nup = wn, ndown = wn;
      nup(j) += h;
      ndown(j) -= h;
      double fdn = (loss(w, nup) - loss(w, ndown)) / (2 * h);
      EXPECT_TRUE(testing::rel_close(fdn, gn(j), 1e-5, 1e-8)) << fdn << " vs " << gn(j);
    }
  }
}

TEST(Ws2vGradient, SmallFullBatchStepNeverDecreasesLoss) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 4, labels_n = 3;
    Matrix labels = testing::random_matrix(labels_n, d, rng);
    struct Pair {
      Vector ctx;
      Eigen::Index label;
      bool positive;
    };
    std::vector<Pair> pairs;
    for (int p = 0; p < 8; ++p) {
      pairs.push_back({testing::random_vector(d, rng), static_cast<Eigen::Index>(p % labels_n), p % 2 == 0});
    }
    auto total = [&](const Matrix& L) {
      std::vector<std::pair<Vector, Vector>> pos, neg;
      for (const auto& p : pairs) (p.positive ? pos : neg).emplace_back(p.ctx, L.row(p.label).transpose());
      return ws_w2v_loss(pos, neg);
    };
    Matrix grad = Matrix::Zero(labels_n, d);
    for (const auto& p : pairs) {
      Vector v = labels.row(p.label).transpose();
      grad.row(p.label) += (p.positive ? positive_gradient(p.ctx, v) : negative_gradient(p.ctx, v)).transpose();
    }
    double before = total(labels);
    double after = total(labels + 1e-4 * grad);
    EXPECT_GE(after, before) << "trial " << trial;
  }
}

Corpus twin_corpus() {
  return {{"twin1", "sun heat sand dune sun heat sand dune desert"},
          {"twin2", "sun heat sand dune sun heat sand dune desert"},
          {"sea", "wave salt tide reef wave salt tide reef ocean"},
          {"ice", "snow frost glacier cold snow frost glacier cold polar"}};
}

WordVectorTable topic_vectors() {
  return make_wv({{"sun", {1, 0.1, 0, 0}},    {"heat", {0.9, 0, 0.1, 0}}, {"sand", {1, 0, 0, 0.1}},
                  {"dune", {0.95, 0.05, 0, 0}}, {"desert", {1, 0, 0, 0}}, {"wave", {0, 1, 0.1, 0}},
                  {"salt", {0.1, 0.9, 0, 0}},  {"tide", {0, 1, 0, 0.1}},  {"reef", {0, 0.95, 0.05, 0}},
                  {"ocean", {0, 1, 0, 0}},     {"snow", {0, 0, 1, 0.1}},  {"frost", {0.1, 0, 0.9, 0}},
                  {"glacier", {0, 0.1, 1, 0}}, {"cold", {0, 0, 0.95, 0}}, {"polar", {0, 0, 1, 0}}});
}

double cosine(const Matrix& m, Eigen::Index a, Eigen::Index b) {
  return m.row(a).dot(m.row(b)) / (m.row(a).norm() * m.row(b).norm());
}

TEST(Ws2vFinetune, TwinDocumentsEndUpClosest) {
  auto wv = topic_vectors();
  Matrix before = wv.vectors;
  Ws2vConfig cfg;
  cfg.window = 4;
  cfg.negatives = 2;
  cfg.epochs = 50;
  cfg.init_scale = 0.01;
  cfg.seed = 5;
  auto t = ws_w2v_finetune(twin_corpus(), wv, cfg);
  EXPECT_EQ(t.kind, EmbeddingKind::kWordVector);
  EXPECT_EQ(t.rows.rows(), 4);
  EXPECT_EQ(t.rows.cols(), 4);
  double twins = cosine(t.rows, 0, 1);
  for (Eigen::Index other : {2, 3}) {
    EXPECT_GT(twins, cosine(t.rows, 0, other));
    EXPECT_GT(twins, cosine(t.rows, 1, other));
  }
  EXPECT_EQ(wv.vectors, before);
}

TEST(Ws2vFinetune, DeterministicAndValidated) {
  auto wv = topic_vectors();
  Ws2vConfig cfg;
  cfg.window = 3;
  cfg.epochs = 3;
  cfg.seed = 9;
  EXPECT_EQ(ws_w2v_finetune(twin_corpus(), wv, cfg).rows, ws_w2v_finetune(twin_corpus(), wv, cfg).rows);
  Corpus bad{{"x", "unknown words only"}};
  EXPECT_THROW(ws_w2v_finetune(bad, wv, cfg), ValidationError);
  cfg.window = 0;
  EXPECT_THROW(ws_w2v_finetune(twin_corpus(), wv, cfg), ValidationError);
}

TEST(WordVectorFile, RoundTripsAndRejectsBadRows) {
  auto dir = testing::temp_dir("wv_file");
  auto wv = topic_vectors();
  testing::write_file(dir / "wv.txt", format_word_vectors(wv));
  auto back = load_word_vectors(dir / "wv.txt");
  EXPECT_EQ(back.words, wv.words);
  EXPECT_EQ(back.vectors, wv.vectors);
  testing::write_file(dir / "bad.txt", "V=1 d=2\nword 1\n");
  EXPECT_THROW(load_word_vectors(dir / "bad.txt"), ValidationError);
  testing::write_file(dir / "dup.txt", "V=2 d=1\nw 1\nw 2\n");
  EXPECT_THROW(load_word_vectors(dir / "dup.txt"), ValidationError);
}

TEST(CorpusDir, LoadsSortedDocuments) {
  auto dir = testing::temp_dir("corpus");
  testing::write_file(dir / "zebra.txt", "stripes");
  testing::write_file(dir / "ant", "tiny");
  auto corpus = load_corpus_dir(dir);
  ASSERT_EQ(corpus.size(), 2u);
  EXPECT_EQ(corpus[0].class_name, "ant");
  EXPECT_EQ(corpus[1].class_name, "zebra");
  EXPECT_EQ(corpus[1].text, "stripes");
  EXPECT_THROW(load_corpus_dir(dir / "missing"), IoError);
}

}  // namespace
}  // namespace sje
