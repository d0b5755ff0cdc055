#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sje/types.hpp"

namespace sje {

struct TrainMetadata {
  double eta = 0.0;
  std::uint64_t seed = 0;
  int epochs_run = 0;
  int best_epoch = 0;  // 0 = the initialization was kept
};

/// Bilinear compatibility F(x, y) = theta(x)^T W phi(y), W of shape D x E.
struct CompatibilityModel {
  Matrix W;
  TrainMetadata meta;

  std::size_t input_dim() const { return static_cast<std::size_t>(W.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(W.cols()); }
};

struct TrainConfig {
  double eta = 1e-2;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 0;
  double init_scale = 1e-3;

  void validate() const;
};

// Sample-level instrumentation for the training loop.
struct TrainHooks {
  // Called with the row index (into the training set passed to train) of
  // every sample that triggers an SGD update.
  std::function<void(std::size_t sample)> on_update;
  // Called after each epoch with (epoch, val per-class accuracy).
  std::function<void(int epoch, double val_accuracy)> on_epoch;
};

struct Violation {
  ClassId cls;
  double loss;
};

double compatibility(const Vector& x, const CompatibilityModel& model, const Vector& phi);

// argmax over candidates of the compatibility; lowest ClassId wins ties.
// `candidates` must be non-empty; row index_of(c) of `table` is phi(c).
ClassId predict(const Vector& x, const CompatibilityModel& model, const OutputEmbeddingTable& table,
                std::span<const ClassId> candidates);

// argmax over candidates of Delta(y_true, y) + F(x, y) - F(x, y_true) with
// the 0/1 margin; the loss at y_true is exactly 0. Lowest ClassId wins ties.
Violation most_violating_class(const Vector& x, ClassId y_true, const CompatibilityModel& model,
                               const OutputEmbeddingTable& table, std::span<const ClassId> candidates);

// W += eta * x * (phi(y_true) - phi(y_viol))^T
void sgd_step(CompatibilityModel& model, const Vector& x, ClassId y_true, ClassId y_viol,
              const OutputEmbeddingTable& table, double eta);

// Single-sample SGD on the structured hinge over train classes, early-stopped
// on zero-shot val per-class accuracy. Returns the best-val snapshot.
CompatibilityModel train(const InputEmbeddingSet& data, const OutputEmbeddingTable& table, const SplitSpec& split,
                         const TrainConfig& cfg, const TrainHooks& hooks = {});

// Mean over distinct true classes of within-class accuracy.
double per_class_accuracy(std::span<const std::pair<ClassId, ClassId>> predicted_and_true);

// Predictions for every sample, restricted to `candidates` (sorted).
std::vector<ClassId> predict_all(const InputEmbeddingSet& data, const CompatibilityModel& model,
                                 const OutputEmbeddingTable& table, std::span<const ClassId> candidates);

// Per-class accuracy of `model` over the samples whose label is in
// `classes`, using `classes` as the candidate set.
double zero_shot_accuracy(const InputEmbeddingSet& data, const CompatibilityModel& model,
                          const OutputEmbeddingTable& table, const std::vector<ClassId>& classes);

// Model file:
//   D=<int> E=<int>
//   D lines of E comma-separated values
//   eta=<float> seed=<int> best_epoch=<int>
std::string format_model(const CompatibilityModel& model);
void write_model(const std::filesystem::path& path, const CompatibilityModel& model);
CompatibilityModel load_model(const std::filesystem::path& path);

}  // namespace sje
