#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sje/types.hpp"

namespace sje {

// One document per class.
struct ClassDocument {
  std::string class_name;
  std::string text;
};
using Corpus = std::vector<ClassDocument>;

// Lowercase ASCII, split on anything that is not alphanumeric.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> document_frequency;  // parallel to words

  std::size_t size() const { return words.size(); }
};

// Drops words with document frequency below `min_df` or above
// `max_df_fraction * |docs|`, ranks the rest by total count (ties
// alphabetical) and keeps the first `max_size` (0 = no cap).
Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_df, double max_df_fraction,
                            std::size_t max_size = 0);

// Per-class histogram of vocabulary words, raw counts, kind bow.
OutputEmbeddingTable bow_embedding(const Corpus& corpus, const Vocabulary& vocab, Diagnostics* diag = nullptr);

/// Fixed pre-trained word vectors (the first-layer weights).
struct WordVectorTable {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index;
  Matrix vectors;  // V x d
  std::string source;

  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
  const double* find(const std::string& word) const;
};

// Word-vector file: `V=<int> d=<int>` then `word v1 ... vd` per line.
WordVectorTable load_word_vectors(const std::filesystem::path& path);
std::string format_word_vectors(const WordVectorTable& wv);

// Mean of the vectors of the window words present in `wv`.
Vector context_vector(const std::vector<std::string>& window, const WordVectorTable& wv);

double log_sigmoid(double z);

// sum_+ log sigma(v_c . v_w) + sum_- log sigma(-v_c . v_w').
double ws_w2v_loss(const std::vector<std::pair<Vector, Vector>>& positives,
                   const std::vector<std::pair<Vector, Vector>>& negatives);

// Gradient of the loss for a single pair with respect to the label vector:
// (1 - sigma(v_c . v_w)) v_c for a positive, -sigma(v_c . v_w') v_c for a negative.
Vector positive_gradient(const Vector& context, const Vector& label);
Vector negative_gradient(const Vector& context, const Vector& label);

struct Ws2vConfig {
  std::size_t window = 35;
  std::size_t negatives = 5;
  double step = 0.025;
  int epochs = 20;
  std::size_t windows_per_class = 20;
  double init_scale = 0.5;  // label vectors start uniform in +-init_scale/d
  std::uint64_t seed = 0;
};

// Weakly supervised fine-tuning of per-class label vectors: every window
// sampled from a class's document has that class as its positive target and
// `negatives` uniformly drawn other classes as negatives. Word vectors stay
// fixed. Returns one row per class in corpus order, kind word-vector.
OutputEmbeddingTable ws_w2v_finetune(const Corpus& corpus, const WordVectorTable& wv, const Ws2vConfig& cfg);

// One UTF-8 text file per class, file name = class name (a trailing ".txt"
// is dropped). Sorted by class name.
Corpus load_corpus_dir(const std::filesystem::path& dir);

}  // namespace sje
