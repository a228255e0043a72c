#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csgdn/csgdn.hpp"

namespace {

using namespace csgdn;

enum ExitCode {
  kOk = 0,
  kOther = 1,
  kUsage = 2,
  kIo = 3,
  kConfig = 4,
  kData = 5,
  kNumerical = 6,
};

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kIo: return kIo;
    case ErrorCategory::kConfig: return kConfig;
    case ErrorCategory::kParse:
    case ErrorCategory::kConflict:
    case ErrorCategory::kDimension: return kData;
    case ErrorCategory::kNumerical:
    case ErrorCategory::kConvergence: return kNumerical;
    case ErrorCategory::kInterface: return kOther;
  }
  return kOther;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("CSGDN_SEED");
  if (!env) return TrainConfig{}.seed;
  std::uint64_t seed = 0;
  if (!text::parse_u64(env, seed)) throw ConfigError("CSGDN_SEED must be an unsigned integer, got '" + std::string(env) + "'");
  return seed;
}

void log_line(const std::string& s) { std::cerr << "# " << s << '\n'; }

void log_config(const TrainConfig& cfg) {
  log_line("config_hash = " + config_hash(cfg));
  std::istringstream lines(canonical_text(cfg));
  for (std::string l; std::getline(lines, l);) log_line(l);
}

SignRule sign_rule_from(const std::string& s) { return parse_sign_rule(s); }

/// Re-indexes `g` into the node universe of `universe`, which must contain
/// every node of `g`.
SignedBipartiteGraph embed_into(const SignedBipartiteGraph& g, const SignedBipartiteGraph& universe) {
  SignedBipartiteGraph out = universe.empty_copy();
  for (const auto& e : g.edges()) {
    const auto gi = out.find_gene(g.gene_labels()[e.gene]);
    const auto pi = out.find_phenotype(g.phenotype_labels()[e.phenotype]);
    if (!gi || !pi) throw ParseError("edge node missing from the --known universe");
    out.add_edge(*gi, *pi, e.sign, e.weight);
  }
  return out.with_edges(out.sorted_edges());
}

/// Two-column (gene, phenotype) file; extra columns are ignored and a header
/// starting with "gene" is skipped.
std::vector<LabeledPair> load_pairs(const std::string& path, int label) {
  auto in = open_input(path);
  std::vector<LabeledPair> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = text::split_fields(line);
    if (f.empty() || (!f[0].empty() && f[0].front() == '#')) continue;
    if (out.empty() && f[0] == "gene") continue;
    if (f.size() < 2) throw ParseError("expected gene and phenotype columns", line_no);
    if (f[0].empty() || f[1].empty()) throw ParseError("empty node label", line_no);
    out.push_back({std::string(f[0]), std::string(f[1]), label});
  }
  return out;
}

void write_json_report(const std::string& path, const EvalReport& r, std::size_t skipped) {
  nlohmann::json j;
  j["auc"] = r.auc ? nlohmann::json(*r.auc) : nlohmann::json(nullptr);
  j["binary_f1"] = r.binary_f1;
  j["micro_f1"] = r.micro_f1;
  j["macro_f1"] = r.macro_f1;
  j["n_pairs"] = r.n_pairs;
  j["n_skipped"] = skipped;
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  nlohmann::json cm = nlohmann::json::array();
  for (const auto& row : r.confusion.counts) cm.push_back(row);
  j["confusion"] = cm;
  j["confusion_order"] = {"down", "none", "up"};
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

struct Options {
  int threads = 1;
  std::optional<std::uint64_t> seed;

  // data files
  std::string edges, features, out, config, checkpoint, test_edges, neutral, report, pairs, no_twas, known;
  std::string train_out, test_out, matrix_out, curve_out, predictions_out, sign_rule = "sign";

  // diffuse
  double c = DiffusionConfig{}.c;
  double beta = DiffusionConfig{}.beta_bal;
  double gamma = DiffusionConfig{}.gamma_bal;
  double epsilon = DiffusionConfig{}.epsilon;
  int max_iters = DiffusionConfig{}.max_iters;
  std::string densify = "topk:10";
  std::string dangling = "zero";

  // train
  std::string ablation;
  std::optional<int> epochs;

  // split / perturb / subsample
  double ratio = 0.8;
  double fraction = 0.0;

  // sweep
  std::string preset;
  std::optional<int> repetitions;
  std::vector<std::string> protocols;
};

std::uint64_t resolved_seed(const Options& o) { return o.seed ? *o.seed : default_seed(); }

int cmd_diffuse(const Options& o) {
  DiffusionConfig cfg;
  cfg.c = o.c;
  cfg.beta_bal = o.beta;
  cfg.gamma_bal = o.gamma;
  cfg.epsilon = o.epsilon;
  cfg.max_iters = o.max_iters;
  cfg.validate();
  const auto policy = DensifyPolicy::parse(o.densify);
  DanglingPolicy dangling;
  if (o.dangling == "zero") {
    dangling = DanglingPolicy::kZeroRow;
  } else if (o.dangling == "error") {
    dangling = DanglingPolicy::kError;
  } else {
    throw ConfigError("unknown dangling policy '" + o.dangling + "' (expected zero|error)");
  }
  log_line("diffuse c=" + text::format_exact(cfg.c) + " beta=" + text::format_exact(cfg.beta_bal) +
           " gamma=" + text::format_exact(cfg.gamma_bal) + " epsilon=" + text::format_exact(cfg.epsilon) +
           " max_iters=" + std::to_string(cfg.max_iters) + " densify=" + policy.to_string() +
           " dangling=" + o.dangling + " threads=" + std::to_string(o.threads));

  const auto g = load_edge_list(o.edges, sign_rule_from(o.sign_rule));
  const auto result = srwr_all_seeds(semi_row_normalize(adjacency(g), dangling), cfg, o.threads,
                                     [&g](std::size_t i) { return g.node(i).label; });
  save_edge_list(o.out, densify(result, g, policy));
  if (!o.matrix_out.empty()) {
    auto out = open_output(o.matrix_out);
    out << "node";
    for (std::size_t j = 0; j < g.num_nodes(); ++j) out << '\t' << g.node(j).label;
    out << '\n';
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
      out << g.node(i).label;
      for (std::size_t j = 0; j < g.num_nodes(); ++j) {
        out << '\t' << text::format_exact(result.diffusion_matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
      out << '\n';
    }
  }
  log_line("max iterations " + std::to_string(result.max_iterations) + ", dangling nodes " +
           std::to_string(result.dangling.size()));
  return kOk;
}

TrainConfig train_config_from(const Options& o) {
  TrainConfig cfg;
  if (!o.config.empty()) {
    const auto kv = load_key_values(o.config);
    for (const auto& [key, value] : kv) {
      (void)value;
      const bool other = key.rfind("data.", 0) == 0 || key.rfind("experiment.", 0) == 0 || key.rfind("sweep.", 0) == 0;
      if (!other && !is_train_key(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    cfg = apply_train_keys(cfg, kv);
    if (!kv.count("train.seed")) cfg.seed = default_seed();
  } else {
    cfg.seed = default_seed();
  }
  if (o.seed) cfg.seed = *o.seed;
  if (!o.ablation.empty()) cfg.ablation = parse_ablation(o.ablation);
  if (o.epochs) cfg.epochs = *o.epochs;
  cfg.validate();
  return cfg;
}

int cmd_train(const Options& o) {
  const auto cfg = train_config_from(o);
  log_config(cfg);
  log_line("threads = " + std::to_string(o.threads));
  auto g = load_edge_list(o.edges, sign_rule_from(o.sign_rule));
  std::optional<SignedBipartiteGraph> known;
  if (!o.known.empty()) {
    known = load_edge_list(o.known, sign_rule_from(o.sign_rule));
    g = embed_into(g, *known);
  }
  std::optional<FeatureMatrix> features;
  if (!o.features.empty()) features = load_feature_matrix(o.features, g);

  TrainOptions opts;
  opts.threads = o.threads;
  if (known) opts.known = &*known;
  const auto model = train(g, features ? &*features : nullptr, cfg, opts);
  for (const auto& w : model.warnings) log_line("warning: " + w);
  save_checkpoint(o.out, model);
  if (!o.curve_out.empty()) {
    auto out = open_output(o.curve_out);
    out << "epoch\ttotal\tlabel\tinter\tintra\tcontrastive\n";
    for (std::size_t e = 0; e < model.curve.size(); ++e) {
      const auto& l = model.curve[e];
      out << e << '\t' << text::format_exact(l.total) << '\t' << text::format_exact(l.label) << '\t'
          << text::format_exact(l.inter) << '\t' << text::format_exact(l.intra) << '\t'
          << text::format_exact(l.contrastive) << '\n';
    }
  }
  log_line("trained " + std::to_string(model.epochs_run) + " epochs, final loss " +
           text::format_report(model.curve.empty() ? 0.0 : model.curve.back().total));
  return kOk;
}

int cmd_predict(const Options& o) {
  const auto model = load_checkpoint(o.checkpoint);
  log_line("checkpoint " + o.checkpoint + " config_hash = " + model.config_hash());
  std::optional<FeatureTable> extra;
  if (!o.no_twas.empty()) extra = load_feature_table(o.no_twas);

  std::vector<LabeledPair> pairs;
  if (!o.pairs.empty()) {
    pairs = load_pairs(o.pairs, 0);
  } else {
    std::vector<std::string> genes = model.genes;
    if (extra) {
      for (const auto& l : extra->labels) {
        if (std::find(model.genes.begin(), model.genes.end(), l) == model.genes.end()) genes.push_back(l);
      }
    }
    for (const auto& gname : genes) {
      for (const auto& p : model.phenotypes) pairs.push_back({gname, p, 0});
    }
  }
  const auto probs = predict_probabilities(model, pairs, extra ? &*extra : nullptr);
  auto out = open_output(o.out);
  write_predictions_tsv(out, pairs, probs);
  return kOk;
}

int cmd_evaluate(const Options& o) {
  const auto model = load_checkpoint(o.checkpoint);
  log_line("checkpoint " + o.checkpoint + " config_hash = " + model.config_hash());
  const auto test_graph = load_edge_list(o.test_edges, sign_rule_from(o.sign_rule));
  auto pairs = labeled_pairs(test_graph);
  if (!o.neutral.empty()) {
    auto neutral = load_pairs(o.neutral, 0);
    pairs.insert(pairs.end(), neutral.begin(), neutral.end());
  }
  std::optional<FeatureTable> extra;
  if (!o.no_twas.empty()) extra = load_feature_table(o.no_twas);

  // Pairs whose nodes the model never saw cannot be scored.
  std::vector<LabeledPair> usable;
  const EmbeddingLookup lookup(model, extra ? &*extra : nullptr);
  std::size_t skipped = 0;
  for (const auto& p : pairs) {
    try {
      lookup.gene(p.gene);
      lookup.phenotype(p.phenotype);
      usable.push_back(p);
    } catch (const ParseError&) {
      ++skipped;
    }
  }
  if (skipped) log_line("warning: skipped " + std::to_string(skipped) + " pairs with unknown nodes");
  const auto report = evaluate(model, usable, extra ? &*extra : nullptr);
  {
    auto out = open_output(o.report);
    write_report_tsv(out, report);
  }
  write_json_report(o.report + ".json", report, skipped);
  if (!o.predictions_out.empty()) {
    auto out = open_output(o.predictions_out);
    write_predictions_tsv(out, usable, predict_probabilities(model, usable, extra ? &*extra : nullptr));
  }
  write_report_tsv(std::cout, report);
  return kOk;
}

int cmd_split(const Options& o) {
  const auto seed = resolved_seed(o);
  log_line("split ratio=" + text::format_exact(o.ratio) + " seed=" + std::to_string(seed));
  const auto g = load_edge_list(o.edges, sign_rule_from(o.sign_rule));
  const auto s = split_edges(g, o.ratio, seed);
  if (!s.warning.empty()) log_line("warning: " + s.warning);
  save_edge_list(o.train_out, s.train);
  save_edge_list(o.test_out, s.test);
  return kOk;
}

int cmd_perturb(const Options& o) {
  const auto seed = resolved_seed(o);
  log_line("perturb fraction=" + text::format_exact(o.fraction) + " seed=" + std::to_string(seed));
  save_edge_list(o.out, perturb_signs(load_edge_list(o.edges, sign_rule_from(o.sign_rule)), o.fraction, seed));
  return kOk;
}

int cmd_subsample(const Options& o) {
  const auto seed = resolved_seed(o);
  log_line("subsample fraction=" + text::format_exact(o.fraction) + " seed=" + std::to_string(seed));
  save_edge_list(o.out, subsample(load_edge_list(o.edges, sign_rule_from(o.sign_rule)), o.fraction, seed));
  return kOk;
}

int cmd_sweep(const Options& o) {
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (!o.edges.empty()) cfg.edges = o.edges;
  if (!o.features.empty()) cfg.features = o.features;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.base.seed = *o.seed;
  if (o.epochs) cfg.base.epochs = *o.epochs;
  if (o.repetitions) cfg.repetitions = *o.repetitions;
  if (!o.protocols.empty()) cfg.protocols = o.protocols;
  if (!o.preset.empty()) {
    const auto p = sweep_preset(o.preset);
    cfg.sweep_key = p.key;
    cfg.sweep_values = p.values;
    if (o.protocols.empty()) cfg.protocols = {"baseline"};
  }
  cfg.validate();
  if (cfg.edges.empty()) throw ConfigError("no edge list: set data.edges or pass --edges");

  log_config(cfg.base);
  log_line("repetitions = " + std::to_string(cfg.repetitions));
  std::string plist;
  for (const auto& p : cfg.protocols) plist += (plist.empty() ? "" : ",") + p;
  log_line("protocols = " + plist);
  if (!cfg.sweep_key.empty()) {
    std::string values;
    for (const auto& v : cfg.sweep_values) values += (values.empty() ? "" : ",") + v;
    log_line("sweep " + cfg.sweep_key + " = " + values);
  }

  const auto g = load_edge_list(cfg.edges, cfg.sign_rule);
  std::optional<FeatureMatrix> features;
  if (!cfg.features.empty()) features = load_feature_matrix(cfg.features, g);
  const auto res = run_experiment(cfg, g, features ? &*features : nullptr, o.threads);
  write_experiment(cfg.output_dir, res, cfg.sweep_key);
  write_summary_tsv(std::cout, res, cfg.sweep_key);
  std::size_t failed = 0;
  for (const auto& r : res.runs) {
    if (!r.report) {
      ++failed;
      log_line("run failed: " + r.protocol + " rep " + std::to_string(r.repetition) + ": " + r.error);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signed bipartite graph diffusion, contrastive training and link-sign prediction"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  Options o;
  app.add_option("--threads", o.threads, "Maximum worker threads")->check(CLI::PositiveNumber);

  auto seed_opt = [&o](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Random seed (default: $CSGDN_SEED or 42)");
  };
  auto rule_opt = [&o](CLI::App* sub) {
    sub->add_option("--sign-rule", o.sign_rule, "Third-column rule: sign|zscore|weighted")
        ->check(CLI::IsMember({"sign", "zscore", "weighted"}));
  };

  auto* diffuse = app.add_subcommand("diffuse", "Signed diffusion of an edge list into a denser signed graph");
  diffuse->add_option("--edges", o.edges, "Input edge list TSV")->required();
  diffuse->add_option("--out", o.out, "Output diffusion-graph TSV")->required();
  diffuse->add_option("--c", o.c, "Restart probability");
  diffuse->add_option("--beta", o.beta, "Balance attenuation beta");
  diffuse->add_option("--gamma", o.gamma, "Balance attenuation gamma");
  diffuse->add_option("--eps,--epsilon", o.epsilon, "L1 convergence tolerance");
  diffuse->add_option("--max-iters", o.max_iters, "Iteration cap per seed");
  diffuse->add_option("--densify", o.densify, "topk:K or threshold:T");
  diffuse->add_option("--dangling", o.dangling, "Isolated-node policy: zero|error");
  diffuse->add_option("--matrix", o.matrix_out, "Also write the dense diffusion matrix");
  rule_opt(diffuse);

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--edges", o.edges, "Training edge list TSV")->required();
  train->add_option("--features", o.features, "Gene feature table TSV");
  train->add_option("--config", o.config, "Config file (key = value sections)");
  train->add_option("--ablation", o.ablation, "full|no-diffuse|no-aug|no-cl")
      ->check(CLI::IsMember({"full", "no-diffuse", "no-aug", "no-cl"}));
  train->add_option("--epochs", o.epochs, "Override train.epochs");
  train->add_option("--known", o.known, "Full edge list: node universe and pairs never sampled as neutral");
  train->add_option("--curve", o.curve_out, "Write the per-epoch loss curve");
  train->add_option("--out", o.out, "Checkpoint path")->required();
  seed_opt(train);
  rule_opt(train);

  auto* predict = app.add_subcommand("predict", "Score gene-phenotype pairs with a checkpoint");
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  predict->add_option("--pairs", o.pairs, "Pairs TSV (gene, phenotype); default: every pair");
  predict->add_option("--no-twas-genes", o.no_twas, "Feature table for genes without trained embeddings");
  predict->add_option("--out", o.out, "Predictions TSV")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint against held-out edges");
  evaluate->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  evaluate->add_option("--test-edges", o.test_edges, "Held-out edge list TSV")->required();
  evaluate->add_option("--neutral", o.neutral, "Neutral pairs TSV (label 0)");
  evaluate->add_option("--no-twas-genes", o.no_twas, "Feature table for genes without trained embeddings");
  evaluate->add_option("--report", o.report, "Report TSV; a JSON summary is written next to it")->required();
  evaluate->add_option("--predictions", o.predictions_out, "Also write per-pair predictions");
  rule_opt(evaluate);

  auto* split = app.add_subcommand("split", "Stratified train/test edge split");
  split->add_option("--edges", o.edges, "Input edge list TSV")->required();
  split->add_option("--ratio", o.ratio, "Training fraction");
  split->add_option("--train-out", o.train_out, "Training edges TSV")->required();
  split->add_option("--test-out", o.test_out, "Test edges TSV")->required();
  seed_opt(split);
  rule_opt(split);

  auto* perturb = app.add_subcommand("perturb", "Flip the signs of a fraction of edges");
  perturb->add_option("--edges", o.edges, "Input edge list TSV")->required();
  perturb->add_option("--fraction", o.fraction, "Fraction of edges to flip")->required();
  perturb->add_option("--out", o.out, "Output edge list TSV")->required();
  seed_opt(perturb);
  rule_opt(perturb);

  auto* sub = app.add_subcommand("subsample", "Keep a uniform fraction of edges");
  sub->add_option("--edges", o.edges, "Input edge list TSV")->required();
  sub->add_option("--fraction", o.fraction, "Fraction of edges to keep")->required();
  sub->add_option("--out", o.out, "Output edge list TSV")->required();
  seed_opt(sub);
  rule_opt(sub);

  auto* sweep = app.add_subcommand("sweep", "Seeded repetitions over protocols and a hyperparameter grid");
  sweep->add_option("--config", o.config, "Experiment config file")->required();
  sweep->add_option("--edges", o.edges, "Override data.edges");
  sweep->add_option("--features", o.features, "Override data.features");
  sweep->add_option("--preset", o.preset, "alpha|tau|lambda|dim|mask|predictor");
  sweep->add_option("--repetitions", o.repetitions, "Override experiment.repetitions");
  sweep->add_option("--protocols", o.protocols, "Protocols to run")->delimiter(',');
  sweep->add_option("--epochs", o.epochs, "Override train.epochs");
  sweep->add_option("--out", o.out, "Output directory");
  seed_opt(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (diffuse->parsed()) return cmd_diffuse(o);
    if (train->parsed()) return cmd_train(o);
    if (predict->parsed()) return cmd_predict(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (split->parsed()) return cmd_split(o);
    if (perturb->parsed()) return cmd_perturb(o);
    if (sub->parsed()) return cmd_subsample(o);
    if (sweep->parsed()) return cmd_sweep(o);
  } catch (const Error& e) {
    std::cerr << "error: " << category_name(e.category()) << ": " << e.what() << '\n';
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: other: " << e.what() << '\n';
    return kOther;
  }
  return kUsage;
}
