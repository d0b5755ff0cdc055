#include "sje/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "sje/io.hpp"

namespace sje {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current += static_cast<char>(std::tolower(c));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df, double max_df_fraction,
                            std::size_t max_size) {
  if (corpus.empty()) throw ValidationError("vocabulary: empty corpus");
  if (!(max_df_fraction > 0.0 && max_df_fraction <= 1.0)) {
    throw ValidationError("vocabulary: max_df_fraction must lie in (0, 1]");
  }
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // word -> (df, total)
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc.text);
    std::sort(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      auto& s = stats[tokens[i]];
      if (i == 0 || tokens[i] != tokens[i - 1]) ++s.first;
      ++s.second;
    }
  }
  const double max_df = max_df_fraction * static_cast<double>(corpus.size());
  std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> kept;
  for (auto& [word, s] : stats) {
    if (s.first < min_df || static_cast<double>(s.first) > max_df) continue;
    kept.emplace_back(word, s);
  }
  // std::map iteration is alphabetical, so a stable sort keeps that as the tie-break.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second.second > b.second.second; });
  if (max_size > 0 && kept.size() > max_size) kept.resize(max_size);
  if (kept.empty()) throw ValidationError("vocabulary: empty after frequency filtering");

  Vocabulary vocab;
  for (auto& [word, s] : kept) {
    vocab.index.emplace(word, vocab.words.size());
    vocab.words.push_back(word);
    vocab.document_frequency.push_back(s.first);
  }
  return vocab;
}

OutputEmbeddingTable bow_embedding(const Corpus& corpus, const Vocabulary& vocab, Diagnostics* diag) {
  if (corpus.empty()) throw ValidationError("bow: empty corpus");
  OutputEmbeddingTable table;
  table.kind = EmbeddingKind::kBow;
  table.rows = Matrix::Zero(static_cast<Eigen::Index>(corpus.size()), static_cast<Eigen::Index>(vocab.size()));
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    if (corpus[c].class_name.empty()) throw ValidationError("bow: document without a class name");
    table.class_names.push_back(corpus[c].class_name);
    for (const auto& tok : tokenize(corpus[c].text)) {
      auto it = vocab.index.find(tok);
      if (it != vocab.index.end()) table.rows(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(it->second)) += 1.0;
    }
    if (diag && table.rows.row(static_cast<Eigen::Index>(c)).isZero(0.0)) {
      diag->warn("class '" + corpus[c].class_name + "' has no vocabulary words; its bow row is zero");
    }
  }
  table.validate();
  return table;
}

const double* WordVectorTable::find(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? nullptr : vectors.row(static_cast<Eigen::Index>(it->second)).data();
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  auto fail = [&](std::size_t line, const std::string& what) {
    return ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
  };
  if (lines.empty()) throw fail(1, "missing header 'V=<int> d=<int>'");
  auto header = split_fields(lines[0], ' ');
  std::optional<long long> V, d;
  if (header.size() == 2 && header[0].substr(0, 2) == "V=" && header[1].substr(0, 2) == "d=") {
    V = parse_int(header[0].substr(2));
    d = parse_int(header[1].substr(2));
  }
  if (!V || !d || *V < 1 || *d < 1) throw fail(1, "malformed header, expected 'V=<int> d=<int>'");

  WordVectorTable wv;
  wv.source = path.string();
  wv.vectors.resize(*V, *d);
  std::size_t row = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i], ' ');
    if (f.size() != static_cast<std::size_t>(*d) + 1 || f[0].empty()) {
      throw fail(i + 1, "expected a word followed by " + std::to_string(*d) + " values");
    }
    if (row >= static_cast<std::size_t>(*V)) throw fail(i + 1, "more vectors than V");
    std::string word(f[0]);
    if (!wv.index.emplace(word, row).second) throw fail(i + 1, "duplicate word '" + word + "'");
    for (long long j = 0; j < *d; ++j) {
      auto v = parse_double(f[static_cast<std::size_t>(j) + 1]);
      if (!v || !std::isfinite(*v)) throw fail(i + 1, "bad value");
      wv.vectors(static_cast<Eigen::Index>(row), j) = *v;
    }
    wv.words.push_back(std::move(word));
    ++row;
  }
  if (row != static_cast<std::size_t>(*V)) throw fail(lines.size(), "fewer vectors than V");
  return wv;
}

std::string format_word_vectors(const WordVectorTable& wv) {
  std::string out = "V=" + std::to_string(wv.words.size()) + " d=" + std::to_string(wv.dim()) + "\n";
  for (std::size_t i = 0; i < wv.words.size(); ++i) {
    out += wv.words[i];
    for (Eigen::Index j = 0; j < wv.vectors.cols(); ++j) out += " " + format_double(wv.vectors(static_cast<Eigen::Index>(i), j));
    out += '\n';
  }
  return out;
}

Vector context_vector(const std::vector<std::string>& window, const WordVectorTable& wv) {
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(wv.dim()));
  std::size_t found = 0;
  for (const auto& w : window) {
    if (const double* v = wv.find(w)) {
      sum += Eigen::Map<const Vector>(v, sum.size());
      ++found;
    }
  }
  if (found == 0) throw ValidationError("context window has no word with a known vector");
  return sum / static_cast<double>(found);
}

double log_sigmoid(double z) {
  // log(1 / (1 + e^-z)) without overflow for large |z|.
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

namespace {

double sigmoid(double z) {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

double ws_w2v_loss(const std::vector<std::pair<Vector, Vector>>& positives,
                   const std::vector<std::pair<Vector, Vector>>& negatives) {
  double loss = 0.0;
  for (const auto& [c, w] : positives) loss += log_sigmoid(c.dot(w));
  for (const auto& [c, w] : negatives) loss += log_sigmoid(-c.dot(w));
  return loss;
}

Vector positive_gradient(const Vector& context, const Vector& label) {
  return (1.0 - sigmoid(context.dot(label))) * context;
}

Vector negative_gradient(const Vector& context, const Vector& label) {
  return -sigmoid(context.dot(label)) * context;
}

OutputEmbeddingTable ws_w2v_finetune(const Corpus& corpus, const WordVectorTable& wv, const Ws2vConfig& cfg) {
  if (corpus.empty()) throw ValidationError("ws-w2v: empty corpus");
  if (cfg.window == 0) throw ValidationError("ws-w2v: window size must be positive");
  if (!(cfg.step > 0.0)) throw ValidationError("ws-w2v: step size must be positive");
  const std::size_t C = corpus.size();
  const auto d = static_cast<Eigen::Index>(wv.dim());

  // Documents reduced to the tokens that have word vectors.
  std::vector<std::vector<std::string>> docs(C);
  for (std::size_t c = 0; c < C; ++c) {
    for (auto& tok : tokenize(corpus[c].text)) {
      if (wv.find(tok)) docs[c].push_back(std::move(tok));
    }
    if (docs[c].empty()) {
      throw ValidationError("ws-w2v: document for class '" + corpus[c].class_name + "' has no in-vocabulary words");
    }
  }

  std::mt19937_64 rng(cfg.seed);
  const double bound = cfg.init_scale / static_cast<double>(d);
  std::uniform_real_distribution<double> init(-bound, bound);
  Matrix labels(static_cast<Eigen::Index>(C), d);
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) labels(i, j) = bound > 0.0 ? init(rng) : 0.0;
  }

  std::vector<std::size_t> order(C);
  for (std::size_t c = 0; c < C; ++c) order[c] = c;
  std::vector<std::string> window;
  std::vector<std::size_t> negatives;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t target : order) {
      const auto& doc = docs[target];
      const std::size_t span = std::min(cfg.window, doc.size());
      std::uniform_int_distribution<std::size_t> start_dist(0, doc.size() - span);
      for (std::size_t s = 0; s < cfg.windows_per_class; ++s) {
        std::size_t start = start_dist(rng);
        window.assign(doc.begin() + static_cast<std::ptrdiff_t>(start),
                      doc.begin() + static_cast<std::ptrdiff_t>(start + span));
        Vector ctx = context_vector(window, wv);

        negatives.clear();
        if (C > 1) {
          std::uniform_int_distribution<std::size_t> other(0, C - 2);
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            std::size_t r = other(rng);
            negatives.push_back(r >= target ? r + 1 : r);
          }
        }

        // Gradients at the current point, then one ascent step.
        Vector pos_grad = positive_gradient(ctx, labels.row(static_cast<Eigen::Index>(target)).transpose());
        std::vector<Vector> neg_grads;
        neg_grads.reserve(negatives.size());
        for (std::size_t n : negatives) {
          neg_grads.push_back(negative_gradient(ctx, labels.row(static_cast<Eigen::Index>(n)).transpose()));
        }
        labels.row(static_cast<Eigen::Index>(target)) += cfg.step * pos_grad.transpose();
        for (std::size_t k = 0; k < negatives.size(); ++k) {
          labels.row(static_cast<Eigen::Index>(negatives[k])) += cfg.step * neg_grads[k].transpose();
        }
      }
    }
  }

  OutputEmbeddingTable table;
  table.kind = EmbeddingKind::kWordVector;
  for (const auto& doc : corpus) table.class_names.push_back(doc.class_name);
  table.rows = std::move(labels);
  table.validate();
  return table;
}

Corpus load_corpus_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("corpus directory '" + dir.string() + "' not found");
  Corpus corpus;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() > 4 && name.substr(name.size() - 4) == ".txt") name.resize(name.size() - 4);
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError("cannot open '" + entry.path().string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    corpus.push_back({name, text.str()});
  }
  std::sort(corpus.begin(), corpus.end(), [](const auto& a, const auto& b) { return a.class_name < b.class_name; });
  for (std::size_t i = 1; i < corpus.size(); ++i) {
    if (corpus[i].class_name == corpus[i - 1].class_name) {
      throw ValidationError("corpus: two files map to class '" + corpus[i].class_name + "'");
    }
  }
  if (corpus.empty()) throw ValidationError("corpus directory '" + dir.string() + "' has no documents");
  return corpus;
}

}  // namespace sje
