#include "sje/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "sje/io.hpp"
#include "sje/kernels.hpp"

namespace sje {

namespace {

void require_class(const EnsembleMember& m, ClassId y) {
  if (index_of(y) >= m.table.num_classes()) {
    throw ValidationError("class id " + std::to_string(index_of(y)) + " missing from a member table");
  }
}

Matrix candidate_rows(const OutputEmbeddingTable& table, std::span<const ClassId> candidates) {
  Matrix phi(static_cast<Eigen::Index>(candidates.size()), table.rows.cols());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (index_of(candidates[i]) >= table.num_classes()) {
      throw ValidationError("candidate class missing from a member table");
    }
    phi.row(static_cast<Eigen::Index>(i)) = table.rows.row(static_cast<Eigen::Index>(index_of(candidates[i])));
  }
  return phi;
}

void compositions(std::size_t parts, int remaining, std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int i = 0; i <= remaining; ++i) {
    prefix.push_back(i);
    compositions(parts - 1, remaining - i, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

void EnsembleModel::validate() const {
  if (members.empty()) throw ValidationError("ensemble: no members");
  if (alpha.size() != members.size()) throw ValidationError("ensemble: need one weight per member");
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw ValidationError("ensemble: negative weight");
    sum += a;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("ensemble: weights do not sum to 1");
  for (const auto& m : members) {
    if (m.model.input_dim() != members.front().model.input_dim()) {
      throw ValidationError("ensemble: members differ in input dimension");
    }
    if (m.model.output_dim() != m.table.dim()) {
      throw ValidationError("ensemble: member model and table disagree on E");
    }
  }
}

double ensemble_score(const Vector& x, ClassId y, const EnsembleModel& em) {
  double score = 0.0;
  for (std::size_t k = 0; k < em.members.size(); ++k) {
    const auto& m = em.members[k];
    require_class(m, y);
    Vector phi = m.table.rows.row(static_cast<Eigen::Index>(index_of(y))).transpose();
    score += em.alpha[k] * compatibility(x, m.model, phi);
  }
  return score;
}

ClassId ensemble_predict(const Vector& x, const EnsembleModel& em, std::span<const ClassId> candidates) {
  if (candidates.empty()) throw ValidationError("ensemble_predict: empty candidate set");
  ClassId best = candidates.front();
  double top = 0.0;
  bool have = false;
  for (ClassId c : candidates) {
    double s = ensemble_score(x, c, em);
    if (!have || s > top || (s == top && c < best)) {
      best = c;
      top = s;
      have = true;
    }
  }
  return best;
}

std::vector<ClassId> ensemble_predict_all(const InputEmbeddingSet& data, const EnsembleModel& em,
                                          std::span<const ClassId> candidates) {
  if (candidates.empty()) throw ValidationError("ensemble_predict: empty candidate set");
  em.validate();
  std::vector<Matrix> scores;
  for (const auto& m : em.members) {
    scores.push_back(kernels::score_matrix(data.features, m.model.W, candidate_rows(m.table, candidates)));
  }
  auto arg = kernels::weighted_argmax_rows(scores, em.alpha);
  std::vector<ClassId> out;
  out.reserve(arg.size());
  for (std::size_t a : arg) out.push_back(candidates[a]);
  return out;
}

OutputEmbeddingTable concatenate_embeddings(std::span<const OutputEmbeddingTable> tables) {
  if (tables.empty()) throw ValidationError("concatenate: no tables");
  if (tables.size() == 1) return tables.front();
  const auto& names = tables.front().class_names;
  Eigen::Index total = 0;
  for (const auto& t : tables) {
    if (t.num_classes() != names.size()) throw ValidationError("concatenate: tables cover different class sets");
    for (const auto& n : names) {
      if (t.find(n) < 0) throw ValidationError("concatenate: class '" + n + "' missing from a table");
    }
    total += t.rows.cols();
  }
  OutputEmbeddingTable out;
  out.kind = EmbeddingKind::kConcatenated;
  out.class_names = names;
  out.rows.resize(static_cast<Eigen::Index>(names.size()), total);
  Eigen::Index offset = 0;
  for (const auto& t : tables) {
    auto aligned = t.aligned_to(names);
    out.rows.middleCols(offset, aligned.rows.cols()) = aligned.rows;
    offset += aligned.rows.cols();
  }
  return out;
}

EnsembleMember stack_members(std::span<const EnsembleMember> members) {
  if (members.empty()) throw ValidationError("stack: no members");
  std::vector<OutputEmbeddingTable> tables;
  Eigen::Index total = 0;
  for (const auto& m : members) {
    if (m.model.input_dim() != members.front().model.input_dim()) {
      throw ValidationError("stack: members differ in input dimension");
    }
    tables.push_back(m.table);
    total += m.model.W.cols();
  }
  EnsembleMember out;
  out.table = concatenate_embeddings(tables);
  out.model.W.resize(members.front().model.W.rows(), total);
  Eigen::Index offset = 0;
  for (const auto& m : members) {
    out.model.W.middleCols(offset, m.model.W.cols()) = m.model.W;
    offset += m.model.W.cols();
  }
  return out;
}

std::vector<std::vector<double>> simplex_grid(std::size_t K, double step) {
  if (!(step > 0.0 && step <= 1.0)) throw ValidationError("alpha grid: step must lie in (0, 1]");
  if (K < 1 || K > 4) throw ValidationError("alpha grid: supports 1 to 4 members");
  const double n_real = 1.0 / step;
  const int n = static_cast<int>(std::lround(n_real));
  if (std::abs(n * step - 1.0) > 1e-9) throw ValidationError("alpha grid: step must divide 1 evenly");

  std::vector<std::vector<int>> parts;
  std::vector<int> prefix;
  compositions(K, n, prefix, parts);
  std::vector<std::vector<double>> grid;
  grid.reserve(parts.size());
  for (const auto& p : parts) {
    std::vector<double> alpha;
    for (int i : p) alpha.push_back(static_cast<double>(i) / n);
    grid.push_back(std::move(alpha));
  }
  return grid;
}

AlphaSearchResult grid_search_alpha(std::span<const EnsembleMember> members, const InputEmbeddingSet& data,
                                    const SplitSpec& split, double step) {
  if (members.empty()) throw ValidationError("grid_search_alpha: no members");
  auto grid = simplex_grid(members.size(), step);
  InputEmbeddingSet val = data.subset(split.val);
  if (split.val.empty() || val.size() == 0) throw ValidationError("grid_search_alpha: empty validation set");

  std::vector<Matrix> scores;
  for (const auto& m : members) {
    scores.push_back(kernels::score_matrix(val.features, m.model.W, candidate_rows(m.table, split.val)));
  }

  std::vector<double> acc(grid.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t g = 0; g < grid.size(); ++g) {
    auto arg = kernels::weighted_argmax_rows_serial(scores, grid[g]);
    std::vector<std::pair<ClassId, ClassId>> pairs;
    pairs.reserve(arg.size());
    for (std::size_t n = 0; n < arg.size(); ++n) pairs.emplace_back(split.val[arg[n]], val.labels[n]);
    acc[g] = per_class_accuracy(pairs);
  }

  AlphaSearchResult result;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (acc[g] > acc[best]) best = g;
    result.evaluated.emplace_back(grid[g], acc[g]);
  }
  result.alpha = grid[best];
  result.val_accuracy = acc[best];
  return result;
}

std::string format_ensemble_file(const EnsembleFile& file) {
  std::string out = "K=" + std::to_string(file.alpha.size()) + " alpha=";
  for (std::size_t k = 0; k < file.alpha.size(); ++k) {
    if (k) out += ',';
    out += format_double(file.alpha[k]);
  }
  out += '\n';
  for (const auto& p : file.model_paths) out += p.generic_string() + "\n";
  return out;
}

EnsembleFile load_ensemble_file(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  auto fail = [&](const std::string& what) { return ValidationError(path.string() + ": " + what); };
  if (lines.empty()) throw fail("empty ensemble file");
  auto header = split_fields(lines[0], ' ');
  if (header.size() != 2 || header[0].substr(0, 2) != "K=" || header[1].substr(0, 6) != "alpha=") {
    throw fail("malformed header, expected 'K=<int> alpha=<a1,...,aK>'");
  }
  auto K = parse_int(header[0].substr(2));
  if (!K || *K < 1) throw fail("K must be a positive integer");
  EnsembleFile file;
  for (auto f : split_fields(header[1].substr(6), ',')) {
    auto v = parse_double(f);
    if (!v) throw fail("bad alpha value '" + std::string(f) + "'");
    file.alpha.push_back(*v);
  }
  if (file.alpha.size() != static_cast<std::size_t>(*K)) throw fail("alpha has the wrong number of entries");
  if (lines.size() != static_cast<std::size_t>(*K) + 1) throw fail("expected K model paths");
  for (std::size_t k = 1; k < lines.size(); ++k) {
    std::filesystem::path p(lines[k]);
    if (p.is_relative()) p = path.parent_path() / p;
    file.model_paths.push_back(p);
  }
  return file;
}

}  // namespace sje
