#include "sje/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "sje/io.hpp"
#include "sje/kernels.hpp"

namespace sje {

namespace {

const Eigen::Index kNoRow = -1;

Eigen::Index row_of(const OutputEmbeddingTable& table, ClassId c) {
  auto i = static_cast<Eigen::Index>(index_of(c));
  return i < table.rows.rows() ? i : kNoRow;
}

void require_row(const OutputEmbeddingTable& table, ClassId c) {
  if (row_of(table, c) == kNoRow) {
    throw ValidationError("class id " + std::to_string(index_of(c)) + " has no row in the output table");
  }
}

void check_dims(const Vector& x, const CompatibilityModel& model, const OutputEmbeddingTable& table) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim()) {
    throw ValidationError("input dimension " + std::to_string(x.size()) + " does not match model D=" +
                          std::to_string(model.input_dim()));
  }
  if (table.dim() != model.output_dim()) {
    throw ValidationError("output table dimension " + std::to_string(table.dim()) + " does not match model E=" +
                          std::to_string(model.output_dim()));
  }
}

// Scans candidates for the largest loss; y_true contributes exactly 0.
Violation scan_violation(const Eigen::RowVectorXd& projected, ClassId y_true, const OutputEmbeddingTable& table,
                         std::span<const ClassId> candidates) {
  const double true_score = projected.dot(table.rows.row(row_of(table, y_true)));
  Violation best{candidates.front(), 0.0};
  bool have = false;
  for (ClassId c : candidates) {
    double loss = 0.0;
    if (c != y_true) loss = 1.0 + projected.dot(table.rows.row(row_of(table, c))) - true_score;
    if (!have || loss > best.loss || (loss == best.loss && c < best.cls)) {
      best = {c, loss};
      have = true;
    }
  }
  return best;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ValidationError("train config: step size must be positive");
  if (max_epochs < 0) throw ValidationError("train config: max epochs must be non-negative");
  if (patience < 1) throw ValidationError("train config: patience must be positive");
  if (max_epochs > 0 && patience > max_epochs) throw ValidationError("train config: patience exceeds max epochs");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ValidationError("train config: init scale must be non-negative");
  }
}

double compatibility(const Vector& x, const CompatibilityModel& model, const Vector& phi) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim() ||
      static_cast<std::size_t>(phi.size()) != model.output_dim()) {
    throw ValidationError("compatibility: dimension mismatch");
  }
  return x.dot(model.W * phi);
}

ClassId predict(const Vector& x, const CompatibilityModel& model, const OutputEmbeddingTable& table,
                std::span<const ClassId> candidates) {
  if (candidates.empty()) throw ValidationError("predict: empty candidate set");
  check_dims(x, model, table);
  Eigen::RowVectorXd projected = x.transpose() * model.W;
  ClassId best = candidates.front();
  double top = 0.0;
  bool have = false;
  for (ClassId c : candidates) {
    require_row(table, c);
    double s = projected.dot(table.rows.row(row_of(table, c)));
    if (!have || s > top || (s == top && c < best)) {
      best = c;
      top = s;
      have = true;
    }
  }
  return best;
}

Violation most_violating_class(const Vector& x, ClassId y_true, const CompatibilityModel& model,
                               const OutputEmbeddingTable& table, std::span<const ClassId> candidates) {
  if (std::find(candidates.begin(), candidates.end(), y_true) == candidates.end()) {
    throw ValidationError("most_violating_class: true class is not a candidate");
  }
  check_dims(x, model, table);
  for (ClassId c : candidates) require_row(table, c);
  Eigen::RowVectorXd projected = x.transpose() * model.W;
  return scan_violation(projected, y_true, table, candidates);
}

void sgd_step(CompatibilityModel& model, const Vector& x, ClassId y_true, ClassId y_viol,
              const OutputEmbeddingTable& table, double eta) {
  check_dims(x, model, table);
  require_row(table, y_true);
  require_row(table, y_viol);
  Eigen::RowVectorXd diff = table.rows.row(row_of(table, y_true)) - table.rows.row(row_of(table, y_viol));
  model.W.noalias() += (eta * x) * diff;
}

CompatibilityModel train(const InputEmbeddingSet& data, const OutputEmbeddingTable& table_in, const SplitSpec& split,
                         const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  split.validate();
  data.validate();

  std::vector<ClassId> seen = split.train;
  seen.insert(seen.end(), split.val.begin(), split.val.end());
  std::sort(seen.begin(), seen.end());
  const OutputEmbeddingTable table = align_table(table_in, data.class_names, seen);

  std::vector<std::size_t> train_rows;
  bool any_val = false;
  for (std::size_t n = 0; n < data.size(); ++n) {
    ClassId y = data.labels[n];
    if (contains(split.test, y)) {
      throw ValidationError("test class '" + data.class_names[index_of(y)] + "' present in training data");
    }
    if (contains(split.train, y)) {
      train_rows.push_back(n);
    } else if (contains(split.val, y)) {
      any_val = true;
    } else {
      throw ValidationError("sample class '" + data.class_names[index_of(y)] + "' is in neither train nor val");
    }
  }
  if (train_rows.empty()) throw ValidationError("train: no samples from training classes");
  if (!any_val) throw ValidationError("train: no samples from validation classes");

  std::mt19937_64 rng(cfg.seed);
  CompatibilityModel model;
  model.W.resize(static_cast<Eigen::Index>(data.dim()), static_cast<Eigen::Index>(table.dim()));
  std::uniform_real_distribution<double> init(-cfg.init_scale, cfg.init_scale);
  for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.W.cols(); ++j) model.W(i, j) = cfg.init_scale > 0.0 ? init(rng) : 0.0;
  }
  model.meta = {cfg.eta, cfg.seed, 0, 0};

  CompatibilityModel best = model;
  double best_acc = -1.0;
  int stale = 0;
  int epochs_run = 0;
  std::vector<std::size_t> order = train_rows;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t n : order) {
      auto x = data.features.row(static_cast<Eigen::Index>(n));
      ClassId y = data.labels[n];
      Eigen::RowVectorXd projected = x * model.W;
      Violation v = scan_violation(projected, y, table, split.train);
      if (v.cls == y) continue;
      Eigen::RowVectorXd diff = table.rows.row(row_of(table, y)) - table.rows.row(row_of(table, v.cls));
      model.W.noalias() += (cfg.eta * x.transpose()) * diff;
      if (hooks.on_update) hooks.on_update(n);
    }
    epochs_run = epoch;
    if (!model.W.allFinite()) break;  // diverged; keep the last finite best

    double acc = zero_shot_accuracy(data, model, table, split.val);
    if (hooks.on_epoch) hooks.on_epoch(epoch, acc);
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
      best.meta.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }
  best.meta.epochs_run = epochs_run;
  return best;
}

double per_class_accuracy(std::span<const std::pair<ClassId, ClassId>> predicted_and_true) {
  if (predicted_and_true.empty()) throw ValidationError("per_class_accuracy: no predictions");
  std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;  // correct, total
  for (const auto& [pred, truth] : predicted_and_true) {
    auto& t = tally[truth];
    t.first += pred == truth ? 1 : 0;
    t.second += 1;
  }
  double sum = 0.0;
  for (const auto& [cls, t] : tally) sum += static_cast<double>(t.first) / static_cast<double>(t.second);
  return sum / static_cast<double>(tally.size());
}

std::vector<ClassId> predict_all(const InputEmbeddingSet& data, const CompatibilityModel& model,
                                 const OutputEmbeddingTable& table, std::span<const ClassId> candidates) {
  if (candidates.empty()) throw ValidationError("predict: empty candidate set");
  if (data.dim() != model.input_dim() || table.dim() != model.output_dim()) {
    throw ValidationError("predict: dimension mismatch");
  }
  Matrix phi(static_cast<Eigen::Index>(candidates.size()), table.rows.cols());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    require_row(table, candidates[i]);
    phi.row(static_cast<Eigen::Index>(i)) = table.rows.row(row_of(table, candidates[i]));
  }
  auto arg = kernels::argmax_rows(kernels::score_matrix(data.features, model.W, phi));
  std::vector<ClassId> out;
  out.reserve(arg.size());
  for (std::size_t a : arg) out.push_back(candidates[a]);
  return out;
}

double zero_shot_accuracy(const InputEmbeddingSet& data, const CompatibilityModel& model,
                          const OutputEmbeddingTable& table, const std::vector<ClassId>& classes) {
  InputEmbeddingSet part = data.subset(classes);
  if (part.size() == 0) throw ValidationError("zero_shot_accuracy: no samples for the requested classes");
  auto pred = predict_all(part, model, table, classes);
  std::vector<std::pair<ClassId, ClassId>> pairs;
  pairs.reserve(pred.size());
  for (std::size_t n = 0; n < pred.size(); ++n) pairs.emplace_back(pred[n], part.labels[n]);
  return per_class_accuracy(pairs);
}

std::string format_model(const CompatibilityModel& model) {
  std::string out = "D=" + std::to_string(model.W.rows()) + " E=" + std::to_string(model.W.cols()) + "\n";
  for (Eigen::Index i = 0; i < model.W.rows(); ++i) {
    for (Eigen::Index j = 0; j < model.W.cols(); ++j) {
      if (j) out += ',';
      out += format_double(model.W(i, j));
    }
    out += '\n';
  }
  out += "eta=" + format_double(model.meta.eta) + " seed=" + std::to_string(model.meta.seed) +
         " best_epoch=" + std::to_string(model.meta.best_epoch) + "\n";
  return out;
}

void write_model(const std::filesystem::path& path, const CompatibilityModel& model) {
  write_text(path, format_model(model));
}

CompatibilityModel load_model(const std::filesystem::path& path) {
  auto lines = read_lines(path);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  auto fail = [&](std::size_t line, const std::string& what) -> ValidationError {
    return ValidationError(path.string() + ":" + std::to_string(line) + ": " + what);
  };
  if (lines.empty()) throw fail(1, "empty model file");
  auto header = split_fields(lines[0], ' ');
  std::optional<long long> D, E;
  if (header.size() == 2 && header[0].substr(0, 2) == "D=" && header[1].substr(0, 2) == "E=") {
    D = parse_int(header[0].substr(2));
    E = parse_int(header[1].substr(2));
  }
  if (!D || !E || *D < 1 || *E < 1) throw fail(1, "malformed header, expected 'D=<int> E=<int>'");
  if (lines.size() != static_cast<std::size_t>(*D) + 2) throw fail(lines.size(), "expected D rows plus a metadata line");

  CompatibilityModel model;
  model.W.resize(*D, *E);
  for (long long i = 0; i < *D; ++i) {
    auto fields = split_fields(lines[static_cast<std::size_t>(i) + 1], ',');
    if (fields.size() != static_cast<std::size_t>(*E)) {
      throw fail(static_cast<std::size_t>(i) + 2, "row length mismatch at line " + std::to_string(i + 2));
    }
    for (long long j = 0; j < *E; ++j) {
      auto v = parse_double(fields[static_cast<std::size_t>(j)]);
      if (!v || !std::isfinite(*v)) throw fail(static_cast<std::size_t>(i) + 2, "bad value");
      model.W(i, j) = *v;
    }
  }
  auto meta = split_fields(lines.back(), ' ');
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  std::optional<long long> best_epoch;
  if (meta.size() == 3 && meta[0].substr(0, 4) == "eta=" && meta[1].substr(0, 5) == "seed=" &&
      meta[2].substr(0, 11) == "best_epoch=") {
    eta = parse_double(meta[0].substr(4));
    seed = parse_uint(meta[1].substr(5));
    best_epoch = parse_int(meta[2].substr(11));
  }
  if (!eta || !seed || !best_epoch) throw fail(lines.size(), "malformed metadata line");
  model.meta.eta = *eta;
  model.meta.seed = *seed;
  model.meta.best_epoch = static_cast<int>(*best_epoch);
  return model;
}

}  // namespace sje
