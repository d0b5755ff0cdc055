#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sje/model.hpp"
#include "sje/types.hpp"

namespace sje {

struct EnsembleMember {
  CompatibilityModel model;
  OutputEmbeddingTable table;  // rows indexed by ClassId
};

/// Convex combination of K compatibility models, each paired with its own
/// output embedding:  F(x, y) = sum_k alpha_k theta(x)^T W_k phi_k(y).
struct EnsembleModel {
  std::vector<EnsembleMember> members;
  std::vector<double> alpha;

  // alpha on the simplex (sum 1 +- 1e-9, all >= 0); members share D.
  void validate() const;
};

double ensemble_score(const Vector& x, ClassId y, const EnsembleModel& em);

// argmax of ensemble_score over candidates; lowest ClassId wins ties.
ClassId ensemble_predict(const Vector& x, const EnsembleModel& em, std::span<const ClassId> candidates);

std::vector<ClassId> ensemble_predict_all(const InputEmbeddingSet& data, const EnsembleModel& em,
                                          std::span<const ClassId> candidates);

// Row-wise concatenation in list order. All tables must name the same
// classes; the result follows the first table's class order.
OutputEmbeddingTable concatenate_embeddings(std::span<const OutputEmbeddingTable> tables);

// Stacks the member matrices side by side, W = [W_1 | ... | W_K], paired
// with the concatenated tables. Equal-alpha ensemble scores times K.
EnsembleMember stack_members(std::span<const EnsembleMember> members);

// All points of the simplex grid {alpha : alpha_k = i_k * step, sum = 1} in
// lexicographically ascending order. Supports 1 <= K <= 4; the grid has
// O(step^-(K-1)) points.
std::vector<std::vector<double>> simplex_grid(std::size_t K, double step);

struct AlphaSearchResult {
  std::vector<double> alpha;
  double val_accuracy = 0.0;
  // Accuracy of every grid point, in simplex_grid order.
  std::vector<std::pair<std::vector<double>, double>> evaluated;
};

// Picks alpha on the simplex grid maximising zero-shot per-class accuracy on
// the val classes; ties go to the lexicographically smallest alpha.
AlphaSearchResult grid_search_alpha(std::span<const EnsembleMember> members, const InputEmbeddingSet& data,
                                    const SplitSpec& split, double step);

// Ensemble file: `K=<int> alpha=<a1,...,aK>` then one model path per line.
// Relative model paths resolve against the ensemble file's directory.
struct EnsembleFile {
  std::vector<double> alpha;
  std::vector<std::filesystem::path> model_paths;
};
std::string format_ensemble_file(const EnsembleFile& file);
EnsembleFile load_ensemble_file(const std::filesystem::path& path);

}  // namespace sje
