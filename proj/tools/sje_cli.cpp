// Command-line front end: synth, train, eval, combine, report, build-embedding.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sje/ensemble.hpp"
#include "sje/harness.hpp"
#include "sje/io.hpp"
#include "sje/model.hpp"
#include "sje/preprocess.hpp"
#include "sje/synth.hpp"
#include "sje/taxonomy.hpp"
#include "sje/text.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kValidationExit = 2;
constexpr int kIoExit = 3;

struct DataFlags {
  std::string features;
  std::vector<std::string> tables;
  std::string split_file;
  std::vector<std::size_t> split_counts;
  bool no_normalize = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--features", features, "Feature-matrix file")->required();
    cmd->add_option("--table", tables, "Output embedding table (repeatable)")->required();
    auto* file = cmd->add_option("--split", split_file, "Split file (class<TAB>train|val|test)");
    auto* counts = cmd->add_option("--split-counts", split_counts, "Random split sizes train,val,test")
                       ->delimiter(',')
                       ->expected(3);
    file->excludes(counts);
    cmd->add_flag("--no-normalize", no_normalize, "Skip l2 normalization of table rows");
  }

  sje::ExperimentPaths paths() const {
    sje::ExperimentPaths p;
    p.features = features;
    for (const auto& t : tables) p.tables.emplace_back(t);
    if (!split_file.empty()) {
      p.split_file = split_file;
    } else if (split_counts.size() == 3) {
      p.split_counts = sje::SplitCounts{split_counts[0], split_counts[1], split_counts[2]};
    } else {
      throw sje::ValidationError("either --split or --split-counts is required");
    }
    return p;
  }
};

struct TrainFlags {
  std::vector<double> eta_grid{1e-3, 1e-2, 1e-1, 1.0};
  int max_epochs = 50;
  int patience = 5;
  double init_scale = 1e-3;

  void add(CLI::App* cmd) {
    cmd->add_option("--eta-grid", eta_grid, "Step sizes to cross-validate")->delimiter(',');
    cmd->add_option("--max-epochs", max_epochs, "Maximum SGD epochs");
    cmd->add_option("--patience", patience, "Epochs without val improvement before stopping");
    cmd->add_option("--init-scale", init_scale, "W entries start uniform in [-s, s]");
  }

  void apply(sje::ExperimentConfig& cfg) const {
    cfg.eta_grid = eta_grid;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.init_scale = init_scale;
  }
};

void finish_report(sje::Report report, const std::string& path, bool timing) {
  if (report.wall_clock_seconds) {
    std::cerr << "wall clock: " << *report.wall_clock_seconds << " s\n";
  }
  if (!timing) report.wall_clock_seconds.reset();
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!path.empty()) sje::emit_report(report, path);
  std::cout << "val_accuracy=" << sje::format_double(report.val_accuracy) << "\n";
  if (report.test_accuracy) std::cout << "test_accuracy=" << sje::format_double(*report.test_accuracy) << "\n";
}

// Tables as training saw them: aligned to the dataset classes, normalized.
std::vector<sje::OutputEmbeddingTable> prepared_tables(const sje::ExperimentInputs& in, bool normalize) {
  std::vector<sje::OutputEmbeddingTable> out;
  sje::Diagnostics diag;
  for (const auto& t : in.tables) {
    auto aligned = sje::align_table(t, in.data.class_names, in.split.test);
    out.push_back(normalize ? sje::l2_normalize_rows(aligned, &diag) : aligned);
  }
  for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Structured joint embedding toolkit for zero-shot classification"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a planted zero-shot task in the toolkit's file formats");
  sje::PlantedTaskConfig planted;
  std::string synth_out;
  std::vector<std::size_t> synth_split{12, 4, 4};
  synth->add_option("--out-dir", synth_out, "Output directory")->required();
  synth->add_option("--seed", planted.seed, "Random seed")->required();
  synth->add_option("--input-dim,-D", planted.input_dim, "Input embedding dimension");
  synth->add_option("--output-dim,-E", planted.output_dim, "Output embedding dimension");
  synth->add_option("--classes,-C", planted.num_classes, "Number of classes");
  synth->add_option("--samples-per-class", planted.samples_per_class, "Samples per class");
  synth->add_option("--noise", planted.noise, "Gaussian noise scale on inputs");
  synth->add_option("--split-counts", synth_split, "train,val,test class counts")->delimiter(',')->expected(3);

  // train
  auto* train = app.add_subcommand("train", "Cross-validate eta and train one model (cnc if several tables)");
  DataFlags train_data;
  TrainFlags train_flags;
  std::uint64_t train_seed = 0;
  std::string model_out, train_report;
  bool train_timing = false;
  train_data.add(train);
  train_flags.add(train);
  train->add_option("--seed", train_seed, "Random seed")->required();
  train->add_option("--model-out", model_out, "Model file to write")->required();
  train->add_option("--report", train_report, "Validation report to write");
  train->add_flag("--timing", train_timing, "Include wall-clock time in the report");

  // eval
  auto* eval = app.add_subcommand("eval", "Per-class top-1 accuracy of a model or ensemble on the test classes");
  DataFlags eval_data;
  std::string eval_model, eval_ensemble, eval_report;
  std::uint64_t eval_seed = 0;
  eval_data.add(eval);
  auto* model_opt = eval->add_option("--model", eval_model, "Model file");
  auto* ens_opt = eval->add_option("--ensemble", eval_ensemble, "Ensemble file");
  model_opt->excludes(ens_opt);
  eval->add_option("--seed", eval_seed, "Seed used to draw --split-counts");
  eval->add_option("--report", eval_report, "Report file to write");

  // combine
  auto* combine = app.add_subcommand("combine", "Train one model per table and grid-search the convex weights");
  DataFlags combine_data;
  TrainFlags combine_flags;
  std::uint64_t combine_seed = 0;
  double alpha_step = 0.1;
  std::string ensemble_out, combine_report;
  bool combine_timing = false;
  combine_data.add(combine);
  combine_flags.add(combine);
  combine->add_option("--seed", combine_seed, "Random seed")->required();
  combine->add_option("--alpha-step", alpha_step, "Simplex grid spacing for the weights");
  combine->add_option("--ensemble-out", ensemble_out, "Ensemble file to write")->required();
  combine->add_option("--report", combine_report, "Validation report to write");
  combine->add_flag("--timing", combine_timing, "Include wall-clock time in the report");

  // report
  auto* report = app.add_subcommand("report", "Run the full zero-shot protocol and write the report");
  DataFlags report_data;
  TrainFlags report_flags;
  std::uint64_t report_seed = 0;
  std::string report_mode = "single", report_out;
  double report_alpha_step = 0.1;
  bool report_timing = false;
  report_data.add(report);
  report_flags.add(report);
  report->add_option("--seed", report_seed, "Random seed")->required();
  report->add_option("--mode", report_mode, "single, cnc or cmb")->check(CLI::IsMember({"single", "cnc", "cmb"}));
  report->add_option("--alpha-step", report_alpha_step, "Simplex grid spacing (cmb)");
  report->add_option("--out", report_out, "Report file to write")->required();
  report->add_flag("--timing", report_timing, "Include wall-clock time in the report");

  // build-embedding
  auto* build = app.add_subcommand("build-embedding", "Build an output embedding table");
  build->require_subcommand(1);

  auto* bow = build->add_subcommand("bow", "Bag-of-words histograms from one document per class");
  std::string bow_corpus, bow_out;
  std::size_t min_df = 1, vocab_size = 0;
  double max_df = 1.0;
  bow->add_option("--corpus", bow_corpus, "Directory with one text file per class")->required();
  bow->add_option("--min-df", min_df, "Minimum document frequency");
  bow->add_option("--max-df", max_df, "Maximum document frequency as a fraction of documents");
  bow->add_option("--vocab-size", vocab_size, "Keep the most frequent words (0 = all)");
  bow->add_option("--out", bow_out, "Table file to write")->required();

  auto* hier = build->add_subcommand("hierarchy", "Taxonomy similarity embeddings (jcn, lin, path)");
  std::string tax_file, leaves_file, counts_file, hier_kind = "lin", attach_under, hier_out;
  bool invert = false;
  hier->add_option("--taxonomy", tax_file, "Edge file parent<TAB>child")->required();
  hier->add_option("--leaves", leaves_file, "Leaf map class<TAB>node[<TAB>attach_under]")->required();
  hier->add_option("--counts", counts_file, "Optional node<TAB>count corpus counts");
  hier->add_option("--kind", hier_kind, "jcn, lin or path")->check(CLI::IsMember({"jcn", "lin", "path"}));
  hier->add_option("--attach-under", attach_under, "Default parent for classes missing from the taxonomy");
  hier->add_flag("--invert", invert, "Emit 1/(1+len) for path and -jcn for jcn");
  hier->add_option("--out", hier_out, "Table file to write")->required();

  auto* wsw2v = build->add_subcommand("wsw2v", "Weakly supervised label vectors from per-class documents");
  std::string w2v_corpus, w2v_vectors, w2v_out;
  sje::Ws2vConfig w2v;
  wsw2v->add_option("--corpus", w2v_corpus, "Directory with one text file per class")->required();
  wsw2v->add_option("--word-vectors", w2v_vectors, "Pre-trained word-vector file")->required();
  wsw2v->add_option("--seed", w2v.seed, "Random seed")->required();
  wsw2v->add_option("--window", w2v.window, "Context window size");
  wsw2v->add_option("--negatives", w2v.negatives, "Negative classes per positive");
  wsw2v->add_option("--step", w2v.step, "Step size");
  wsw2v->add_option("--epochs", w2v.epochs, "Passes over the classes");
  wsw2v->add_option("--windows-per-class", w2v.windows_per_class, "Windows sampled per class per epoch");
  wsw2v->add_option("--out", w2v_out, "Table file to write")->required();

  auto* binarize = build->add_subcommand("binarize", "Threshold continuous attributes at the per-attribute mean");
  std::string bin_in, bin_out;
  binarize->add_option("--table", bin_in, "attributes-continuous table")->required();
  binarize->add_option("--out", bin_out, "Table file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidationExit;
  }

  if (*synth) {
    planted.split = {synth_split[0], synth_split[1], synth_split[2]};
    auto task = sje::generate_planted_task(planted);
    fs::path dir(synth_out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw sje::IoError("cannot create '" + dir.string() + "'");
    sje::write_feature_matrix(dir / "features.txt", task.data);
    sje::write_output_table(dir / "table.txt", task.table);
    sje::write_split(dir / "split.txt", task.split, task.table.class_names);
    std::cout << "wrote " << task.data.size() << " samples, " << task.table.num_classes() << " classes to " << dir.string()
              << "\n";
  } else if (*train) {
    sje::ExperimentConfig cfg;
    cfg.mode = train_data.tables.size() > 1 ? sje::Mode::kCnc : sje::Mode::kSingle;
    cfg.seed = train_seed;
    cfg.normalize = !train_data.no_normalize;
    cfg.evaluate_test = false;
    train_flags.apply(cfg);
    auto in = sje::load_experiment(train_data.paths(), train_seed);
    auto result = sje::run_zero_shot(in, cfg);
    sje::write_model(model_out, result.members.front().model);
    finish_report(result.report, train_report, train_timing);
  } else if (*eval) {
    auto in = sje::load_experiment(eval_data.paths(), eval_seed);
    auto tables = prepared_tables(in, !eval_data.no_normalize);
    sje::EnsembleModel em;
    sje::Report r;
    r.seed = eval_seed;
    r.normalize = !eval_data.no_normalize;
    if (!eval_model.empty()) {
      auto table = tables.size() > 1 ? sje::concatenate_embeddings(tables) : tables.front();
      em.members.push_back({sje::load_model(eval_model), table});
      em.alpha = {1.0};
      r.mode = tables.size() > 1 ? sje::Mode::kCnc : sje::Mode::kSingle;
      r.selected_eta = {em.members.front().model.meta.eta};
    } else if (!eval_ensemble.empty()) {
      auto file = sje::load_ensemble_file(eval_ensemble);
      if (file.model_paths.size() != tables.size()) {
        throw sje::ValidationError("ensemble has " + std::to_string(file.model_paths.size()) + " members but " +
                                   std::to_string(tables.size()) + " tables were given");
      }
      for (std::size_t k = 0; k < tables.size(); ++k) {
        em.members.push_back({sje::load_model(file.model_paths[k]), tables[k]});
        r.selected_eta.push_back(em.members.back().model.meta.eta);
      }
      em.alpha = file.alpha;
      r.mode = sje::Mode::kCmb;
    } else {
      throw sje::ValidationError("eval needs --model or --ensemble");
    }
    em.validate();
    r.alpha = em.alpha;
    r.train_classes = in.split.train.size();
    r.val_classes = in.split.val.size();
    r.test_classes = in.split.test.size();
    auto test = in.data.subset(in.split.test);
    if (test.size() == 0) throw sje::ValidationError("no samples from test classes");
    auto pred = sje::ensemble_predict_all(test, em, in.split.test);
    std::vector<std::pair<sje::ClassId, sje::ClassId>> pairs;
    for (std::size_t n = 0; n < pred.size(); ++n) pairs.emplace_back(pred[n], test.labels[n]);
    r.test_accuracy = sje::per_class_accuracy(pairs);
    for (sje::ClassId c : in.split.test) {
      std::size_t samples = 0, correct = 0;
      for (const auto& [p, t] : pairs) {
        if (t != c) continue;
        ++samples;
        correct += p == t ? 1 : 0;
      }
      if (samples) {
        r.per_class.push_back({in.data.class_names[sje::index_of(c)], samples, correct,
                               static_cast<double>(correct) / static_cast<double>(samples)});
      }
    }
    finish_report(r, eval_report, false);
  } else if (*combine) {
    sje::ExperimentConfig cfg;
    cfg.mode = sje::Mode::kCmb;
    cfg.seed = combine_seed;
    cfg.alpha_step = alpha_step;
    cfg.normalize = !combine_data.no_normalize;
    cfg.evaluate_test = false;
    combine_flags.apply(cfg);
    auto in = sje::load_experiment(combine_data.paths(), combine_seed);
    auto result = sje::run_zero_shot(in, cfg);
    fs::path ens(ensemble_out);
    sje::EnsembleFile file;
    file.alpha = result.alpha;
    for (std::size_t k = 0; k < result.members.size(); ++k) {
      fs::path member = ens.filename().string() + ".m" + std::to_string(k) + ".model";
      sje::write_model(ens.parent_path() / member, result.members[k].model);
      file.model_paths.push_back(member);
    }
    sje::write_text(ens, sje::format_ensemble_file(file));
    finish_report(result.report, combine_report, combine_timing);
  } else if (*report) {
    sje::ExperimentConfig cfg;
    cfg.mode = sje::parse_mode(report_mode);
    cfg.seed = report_seed;
    cfg.alpha_step = report_alpha_step;
    cfg.normalize = !report_data.no_normalize;
    report_flags.apply(cfg);
    auto in = sje::load_experiment(report_data.paths(), report_seed);
    auto result = sje::run_zero_shot(in, cfg);
    finish_report(result.report, report_out, report_timing);
  } else if (*bow) {
    auto corpus = sje::load_corpus_dir(bow_corpus);
    auto vocab = sje::build_vocabulary(corpus, min_df, max_df, vocab_size);
    sje::Diagnostics diag;
    auto table = sje::bow_embedding(corpus, vocab, &diag);
    for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
    sje::write_output_table(bow_out, table);
  } else if (*hier) {
    auto edges = sje::load_taxonomy_edges(tax_file);
    auto leaves = sje::load_leaf_map(leaves_file);
    std::optional<std::string> attach;
    if (!attach_under.empty()) attach = attach_under;
    auto tax = sje::Taxonomy::build(edges, leaves, attach);
    if (!counts_file.empty()) sje::load_counts(counts_file, tax);
    auto ic = sje::information_content(tax);
    std::vector<std::string> classes;
    for (const auto& l : leaves) classes.push_back(l.class_name);
    auto table = sje::build_hierarchy_embedding(tax, ic, classes, sje::parse_similarity_kind(hier_kind), invert);
    sje::write_output_table(hier_out, table);
  } else if (*wsw2v) {
    auto corpus = sje::load_corpus_dir(w2v_corpus);
    auto wv = sje::load_word_vectors(w2v_vectors);
    sje::write_output_table(w2v_out, sje::ws_w2v_finetune(corpus, wv, w2v));
  } else if (*binarize) {
    auto table = sje::load_output_table(bin_in, sje::EmbeddingKind::kAttributesContinuous);
    sje::write_output_table(bin_out, sje::binarize_attributes(table));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const sje::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoExit;
  } catch (const sje::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidationExit;
  }
}
