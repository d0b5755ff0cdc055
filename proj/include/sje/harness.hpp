#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sje/ensemble.hpp"
#include "sje/model.hpp"
#include "sje/preprocess.hpp"
#include "sje/types.hpp"

namespace sje {

enum class Mode { kSingle, kCnc, kCmb };
std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view s);

struct ExperimentConfig {
  Mode mode = Mode::kSingle;
  std::vector<double> eta_grid{1e-3, 1e-2, 1e-1, 1.0};
  double alpha_step = 0.1;
  std::optional<std::vector<double>> forced_alpha;  // cmb only; skips the alpha search
  bool normalize = true;
  int max_epochs = 50;
  int patience = 5;
  double init_scale = 1e-3;
  std::uint64_t seed = 0;
  bool evaluate_test = true;

  void validate(std::size_t num_tables) const;
};

struct CvEntry {
  std::size_t member = 0;
  double eta = 0.0;
  double val_accuracy = 0.0;
  bool operator==(const CvEntry&) const = default;
};

struct AlphaEntry {
  std::vector<double> alpha;
  double val_accuracy = 0.0;
  bool operator==(const AlphaEntry&) const = default;
};

struct ClassResult {
  std::string name;
  std::size_t samples = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  bool operator==(const ClassResult&) const = default;
};

/// Outcome of one zero-shot experiment. Every selected value is chosen on
/// val; test accuracy is computed once at the end.
struct Report {
  Mode mode = Mode::kSingle;
  std::uint64_t seed = 0;
  bool normalize = true;
  std::size_t train_classes = 0;
  std::size_t val_classes = 0;
  std::size_t test_classes = 0;
  std::vector<CvEntry> cv;
  std::vector<double> selected_eta;  // one per member
  std::vector<AlphaEntry> alpha_cv;
  std::vector<double> alpha;
  double val_accuracy = 0.0;
  std::optional<double> test_accuracy;
  std::vector<ClassResult> per_class;
  std::vector<std::string> warnings;
  std::optional<double> wall_clock_seconds;

  bool operator==(const Report&) const = default;
};

struct EtaSearchResult {
  double eta = 0.0;
  double val_accuracy = 0.0;
  CompatibilityModel model;
  std::vector<std::pair<double, double>> evaluated;  // (eta, val accuracy) in grid order
};

// Trains once per grid point with the same seed; keeps the best val
// per-class accuracy, ties going to the smaller eta. Grid points run in
// parallel.
EtaSearchResult cross_validate_eta(const InputEmbeddingSet& data, const OutputEmbeddingTable& table,
                                   const SplitSpec& split, const std::vector<double>& grid, const TrainConfig& base);

struct ExperimentInputs {
  InputEmbeddingSet data;
  std::vector<OutputEmbeddingTable> tables;
  SplitSpec split;
};

struct ExperimentResult {
  Report report;
  // Trained members. single and cnc have exactly one; for cnc its table is
  // the concatenation.
  std::vector<EnsembleMember> members;
  std::vector<double> alpha;
};

// load -> normalize -> train (single / cnc / cmb) -> evaluate on test classes.
// Training sees only train and val samples.
ExperimentResult run_zero_shot(const ExperimentInputs& inputs, const ExperimentConfig& cfg);

// File-level entry point: tables are aligned to the first table's class
// order; the split comes from `split_file` or is drawn from `split_counts`.
struct ExperimentPaths {
  std::filesystem::path features;
  std::vector<std::filesystem::path> tables;
  std::optional<std::filesystem::path> split_file;
  std::optional<SplitCounts> split_counts;
};
ExperimentInputs load_experiment(const ExperimentPaths& paths, std::uint64_t seed);

// Line-oriented key=value report followed by a [per_class] CSV block.
// Accuracies must lie in [0, 1]. Wall-clock is written only if present.
std::string format_report(const Report& report);
void emit_report(const Report& report, const std::filesystem::path& path);
Report parse_report(std::string_view text);

}  // namespace sje
