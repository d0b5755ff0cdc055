#include "sje/harness.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>

#include "sje/io.hpp"

namespace sje {

namespace {

std::vector<ClassId> all_split_classes(const SplitSpec& split) {
  std::vector<ClassId> all = split.train;
  all.insert(all.end(), split.val.begin(), split.val.end());
  all.insert(all.end(), split.test.begin(), split.test.end());
  std::sort(all.begin(), all.end());
  return all;
}

std::vector<ClassId> seen_classes(const SplitSpec& split) {
  std::vector<ClassId> seen = split.train;
  seen.insert(seen.end(), split.val.begin(), split.val.end());
  std::sort(seen.begin(), seen.end());
  return seen;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (auto f : split_fields(s, ',')) {
    auto v = parse_double(f);
    if (!v) throw ValidationError("report: bad number '" + std::string(f) + "'");
    out.push_back(*v);
  }
  return out;
}

void check_accuracy(double a, const char* what) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw ValidationError(std::string("report: ") + what + " accuracy " + format_double(a) + " outside [0, 1]");
  }
}

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig t;
  t.max_epochs = cfg.max_epochs;
  t.patience = cfg.patience;
  t.init_scale = cfg.init_scale;
  t.seed = cfg.seed;
  return t;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kSingle: return "single";
    case Mode::kCnc: return "cnc";
    case Mode::kCmb: return "cmb";
  }
  return "unknown";
}

Mode parse_mode(std::string_view s) {
  if (s == "single") return Mode::kSingle;
  if (s == "cnc") return Mode::kCnc;
  if (s == "cmb") return Mode::kCmb;
  throw ValidationError("unknown mode '" + std::string(s) + "' (expected single, cnc or cmb)");
}

void ExperimentConfig::validate(std::size_t num_tables) const {
  if (num_tables == 0) throw ValidationError("experiment: no output embedding table");
  if (mode == Mode::kSingle && num_tables != 1) throw ValidationError("experiment: mode single takes exactly one table");
  if (mode == Mode::kCmb && num_tables < 2) throw ValidationError("experiment: mode cmb needs at least two tables");
  if (eta_grid.empty()) throw ValidationError("experiment: empty eta grid");
  for (double eta : eta_grid) {
    if (!(eta > 0.0)) throw ValidationError("experiment: eta grid values must be positive");
  }
  if (mode == Mode::kCmb) {
    if (forced_alpha) {
      if (forced_alpha->size() != num_tables) throw ValidationError("experiment: forced alpha needs one weight per table");
    } else {
      simplex_grid(num_tables, alpha_step);  // validates step and K
    }
  }
}

EtaSearchResult cross_validate_eta(const InputEmbeddingSet& data, const OutputEmbeddingTable& table,
                                   const SplitSpec& split, const std::vector<double>& grid, const TrainConfig& base) {
  if (grid.empty()) throw ValidationError("cross-validation: empty eta grid");
  std::vector<CompatibilityModel> models(grid.size());
  std::vector<double> acc(grid.size(), 0.0);
  std::vector<std::exception_ptr> errors(grid.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t g = 0; g < grid.size(); ++g) {
    try {
      TrainConfig cfg = base;
      cfg.eta = grid[g];
      models[g] = train(data, table, split, cfg);
      acc[g] = zero_shot_accuracy(data, models[g], align_table(table, data.class_names, split.val), split.val);
    } catch (...) {
      errors[g] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EtaSearchResult result;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.evaluated.emplace_back(grid[g], acc[g]);
    if (acc[g] > acc[best] || (acc[g] == acc[best] && grid[g] < grid[best])) best = g;
  }
  result.eta = grid[best];
  result.val_accuracy = acc[best];
  result.model = std::move(models[best]);
  return result;
}

ExperimentResult run_zero_shot(const ExperimentInputs& inputs, const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  cfg.validate(inputs.tables.size());
  inputs.data.validate();
  const SplitSpec& split = inputs.split;
  split.validate();
  const auto& names = inputs.data.class_names;
  for (ClassId c : all_split_classes(split)) {
    if (index_of(c) >= names.size()) throw ValidationError("experiment: split names an unknown class id");
  }

  Report report;
  report.mode = cfg.mode;
  report.seed = cfg.seed;
  report.normalize = cfg.normalize;
  report.train_classes = split.train.size();
  report.val_classes = split.val.size();
  report.test_classes = split.test.size();

  // Training only ever sees train and val classes.
  const InputEmbeddingSet seen_data = inputs.data.subset(seen_classes(split));
  for (ClassId y : seen_data.labels) {
    if (contains(split.test, y)) throw ValidationError("experiment: test class present in training data");
  }

  Diagnostics diag;
  std::vector<OutputEmbeddingTable> tables;
  for (const auto& t : inputs.tables) {
    auto aligned = align_table(t, names, all_split_classes(split));
    tables.push_back(cfg.normalize ? l2_normalize_rows(aligned, &diag) : std::move(aligned));
  }
  report.warnings = diag.warnings;

  const TrainConfig base = train_config(cfg);
  ExperimentResult result;

  auto add_member = [&](std::size_t index, const OutputEmbeddingTable& table) {
    auto cv = cross_validate_eta(seen_data, table, split, cfg.eta_grid, base);
    for (auto [eta, acc] : cv.evaluated) report.cv.push_back({index, eta, acc});
    report.selected_eta.push_back(cv.eta);
    result.members.push_back({std::move(cv.model), table});
    return cv.val_accuracy;
  };

  if (cfg.mode == Mode::kCmb) {
    for (std::size_t k = 0; k < tables.size(); ++k) add_member(k, tables[k]);
    if (cfg.forced_alpha) {
      result.alpha = *cfg.forced_alpha;
      EnsembleModel em{result.members, result.alpha};
      em.validate();
      const auto val = seen_data.subset(split.val);
      auto pred = ensemble_predict_all(val, em, split.val);
      std::vector<std::pair<ClassId, ClassId>> pairs;
      for (std::size_t n = 0; n < pred.size(); ++n) pairs.emplace_back(pred[n], val.labels[n]);
      report.val_accuracy = per_class_accuracy(pairs);
    } else {
      auto search = grid_search_alpha(result.members, seen_data, split, cfg.alpha_step);
      for (auto& [alpha, acc] : search.evaluated) report.alpha_cv.push_back({alpha, acc});
      result.alpha = search.alpha;
      report.val_accuracy = search.val_accuracy;
    }
  } else {
    OutputEmbeddingTable table = tables.front();
    if (cfg.mode == Mode::kCnc) table = concatenate_embeddings(tables);
    report.val_accuracy = add_member(0, table);
    result.alpha = {1.0};
  }
  report.alpha = result.alpha;

  if (cfg.evaluate_test) {
    const InputEmbeddingSet test = inputs.data.subset(split.test);
    if (test.size() == 0) throw ValidationError("experiment: no samples from test classes");
    EnsembleModel em{result.members, result.alpha};
    auto pred = ensemble_predict_all(test, em, split.test);
    std::map<ClassId, std::pair<std::size_t, std::size_t>> tally;
    std::vector<std::pair<ClassId, ClassId>> pairs;
    for (std::size_t n = 0; n < pred.size(); ++n) {
      pairs.emplace_back(pred[n], test.labels[n]);
      auto& t = tally[test.labels[n]];
      t.first += pred[n] == test.labels[n] ? 1 : 0;
      t.second += 1;
    }
    report.test_accuracy = per_class_accuracy(pairs);
    for (const auto& [cls, t] : tally) {
      report.per_class.push_back({names[index_of(cls)], t.second, t.first,
                                  static_cast<double>(t.first) / static_cast<double>(t.second)});
    }
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  result.report = std::move(report);
  return result;
}

ExperimentInputs load_experiment(const ExperimentPaths& paths, std::uint64_t seed) {
  if (paths.tables.empty()) throw ValidationError("experiment: no output embedding table");
  ExperimentInputs in;
  for (const auto& p : paths.tables) in.tables.push_back(load_output_table(p));
  const auto& names = in.tables.front().class_names;
  in.data = load_feature_matrix(paths.features, &names);
  if (paths.split_file) {
    in.split = load_split(*paths.split_file, names);
  } else if (paths.split_counts) {
    std::vector<ClassId> all;
    for (std::size_t i = 0; i < names.size(); ++i) all.push_back(class_at(i));
    in.split = make_split(all, *paths.split_counts, seed);
  } else {
    throw ValidationError("experiment: need a split file or split counts");
  }
  return in;
}

std::string format_report(const Report& r) {
  check_accuracy(r.val_accuracy, "val");
  if (r.test_accuracy) check_accuracy(*r.test_accuracy, "test");
  for (const auto& e : r.cv) check_accuracy(e.val_accuracy, "cv");
  for (const auto& e : r.alpha_cv) check_accuracy(e.val_accuracy, "alpha cv");
  for (const auto& c : r.per_class) check_accuracy(c.accuracy, "per-class");

  std::string out = "format=sje-report/1\n";
  auto kv = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
  kv("mode", std::string(to_string(r.mode)));
  kv("seed", std::to_string(r.seed));
  kv("normalize", r.normalize ? "1" : "0");
  kv("classes.train", std::to_string(r.train_classes));
  kv("classes.val", std::to_string(r.val_classes));
  kv("classes.test", std::to_string(r.test_classes));
  for (const auto& e : r.cv) {
    kv("cv[" + std::to_string(e.member) + "][eta=" + format_double(e.eta) + "]", format_double(e.val_accuracy));
  }
  for (std::size_t k = 0; k < r.selected_eta.size(); ++k) {
    kv("selected.eta[" + std::to_string(k) + "]", format_double(r.selected_eta[k]));
    kv("selected.eta[" + std::to_string(k) + "].from", "val");
  }
  for (const auto& e : r.alpha_cv) kv("alpha_cv[" + join_doubles(e.alpha) + "]", format_double(e.val_accuracy));
  kv("selected.alpha", join_doubles(r.alpha));
  kv("selected.alpha.from", r.alpha_cv.empty() && r.mode == Mode::kCmb ? "config" : "val");
  kv("val_accuracy", format_double(r.val_accuracy));
  if (r.test_accuracy) kv("test_accuracy", format_double(*r.test_accuracy));
  for (const auto& w : r.warnings) kv("warning", w);
  if (r.wall_clock_seconds) kv("wall_clock_seconds", format_double(*r.wall_clock_seconds));
  out += "[per_class]\nclass,samples,correct,accuracy\n";
  for (const auto& c : r.per_class) {
    out += c.name + "," + std::to_string(c.samples) + "," + std::to_string(c.correct) + "," +
           format_double(c.accuracy) + "\n";
  }
  return out;
}

void emit_report(const Report& report, const std::filesystem::path& path) {
  write_text(path, format_report(report));
}

Report parse_report(std::string_view text) {
  Report r;
  auto lines = split_fields(text, '\n');
  if (lines.empty() || lines[0] != "format=sje-report/1") throw ValidationError("report: missing format line");
  auto num = [](std::string_view v) {
    auto d = parse_double(v);
    if (!d) throw ValidationError("report: bad number '" + std::string(v) + "'");
    return *d;
  };
  auto count = [](std::string_view v) {
    auto u = parse_uint(v);
    if (!u) throw ValidationError("report: bad count '" + std::string(v) + "'");
    return static_cast<std::size_t>(*u);
  };
  std::size_t i = 1;
  for (; i < lines.size() && lines[i] != "[per_class]"; ++i) {
    auto line = lines[i];
    if (line.empty()) continue;
    // Bracketed keys may contain '='; their value starts after the first "]=".
    auto eq = line.find('=');
    auto close = line.find("]=");
    if (line.find('[') < eq && close != std::string_view::npos) eq = close + 1;
    if (eq == std::string_view::npos) throw ValidationError("report: malformed line '" + std::string(line) + "'");
    auto key = line.substr(0, eq);
    auto value = line.substr(eq + 1);
    if (key == "mode") {
      r.mode = parse_mode(value);
    } else if (key == "seed") {
      auto s = parse_uint(value);
      if (!s) throw ValidationError("report: bad seed");
      r.seed = *s;
    } else if (key == "normalize") {
      r.normalize = value == "1";
    } else if (key == "classes.train") {
      r.train_classes = count(value);
    } else if (key == "classes.val") {
      r.val_classes = count(value);
    } else if (key == "classes.test") {
      r.test_classes = count(value);
    } else if (key.substr(0, 3) == "cv[") {
      auto mid = key.find("][eta=");
      if (mid == std::string_view::npos || key.back() != ']') throw ValidationError("report: malformed cv key");
      r.cv.push_back({count(key.substr(3, mid - 3)), num(key.substr(mid + 6, key.size() - mid - 7)), num(value)});
    } else if (key.substr(0, 13) == "selected.eta[") {
      if (key.size() > 5 && key.substr(key.size() - 5) == ".from") continue;
      r.selected_eta.push_back(num(value));
    } else if (key.substr(0, 9) == "alpha_cv[") {
      r.alpha_cv.push_back({parse_doubles(key.substr(9, key.size() - 10)), num(value)});
    } else if (key == "selected.alpha") {
      r.alpha = parse_doubles(value);
    } else if (key == "selected.alpha.from") {
      continue;
    } else if (key == "val_accuracy") {
      r.val_accuracy = num(value);
    } else if (key == "test_accuracy") {
      r.test_accuracy = num(value);
    } else if (key == "warning") {
      r.warnings.emplace_back(value);
    } else if (key == "wall_clock_seconds") {
      r.wall_clock_seconds = num(value);
    } else {
      throw ValidationError("report: unknown key '" + std::string(key) + "'");
    }
  }
  if (i < lines.size()) ++i;                                       // [per_class]
  if (i < lines.size() && lines[i] == "class,samples,correct,accuracy") ++i;
  for (; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto f = split_fields(lines[i], ',');
    if (f.size() < 4) throw ValidationError("report: malformed per-class row");
    // Class names may contain commas; the last three fields are numeric.
    std::string name;
    for (std::size_t k = 0; k + 3 < f.size(); ++k) {
      if (k) name += ',';
      name += f[k];
    }
    r.per_class.push_back({name, count(f[f.size() - 3]), count(f[f.size() - 2]), num(f[f.size() - 1])});
  }
  return r;
}

}  // namespace sje
