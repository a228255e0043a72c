#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csgdn/augmentation.hpp"
#include "csgdn/config.hpp"
#include "csgdn/diffusion.hpp"
#include "csgdn/features.hpp"
#include "csgdn/metrics.hpp"
#include "csgdn/model.hpp"
#include "csgdn/objectives.hpp"
#include "csgdn/optimizer.hpp"
#include "csgdn/protocol.hpp"
#include "csgdn/transfer.hpp"

namespace csgdn {

struct EpochLoss {
  double total = 0.0;
  double label = 0.0;
  double inter = 0.0;
  double intra = 0.0;
  double contrastive = 0.0;
};

struct TrainedModel {
  TrainConfig config;
  std::vector<std::string> genes;
  std::vector<std::string> phenotypes;
  InputProjection projection;
  ModelParams params;
  Matrix embeddings;  // fused embeddings, genes then phenotypes
  std::optional<TransferParams> transfer;
  int epochs_run = 0;

  // Not persisted.
  std::vector<EpochLoss> curve;
  std::vector<std::string> warnings;

  std::string config_hash() const { return csgdn::config_hash(config); }
  std::size_t num_genes() const { return genes.size(); }
};

struct TrainOptions {
  int threads = 1;
  /// Pairs with an edge here are never sampled as neutral; defaults to the
  /// training graph. Must share the training graph's node universe.
  const SignedBipartiteGraph* known = nullptr;
  std::function<void(int epoch, const EpochLoss&)> on_epoch;
};

namespace detail {

inline std::vector<std::size_t> contrastive_batch(std::size_t nodes, int batch_size, std::uint64_t seed) {
  const auto size = static_cast<std::size_t>(batch_size);
  std::vector<std::size_t> out;
  if (nodes <= size) {
    out.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) out[i] = i;
    return out;
  }
  Rng rng(seed);
  const auto perm = random_permutation(nodes, rng);
  out.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string describe(const EpochLoss& l) {
  return "total=" + text::format_report(l.total) + " label=" + text::format_report(l.label) +
         " inter=" + text::format_report(l.inter) + " intra=" + text::format_report(l.intra);
}

}  // namespace detail

/// Encoder inputs for every node of `g`.
inline Matrix model_inputs(const FeatureMatrix* features, const SignedBipartiteGraph& g,
                           const InputProjection& proj) {
  return node_input_features(features, g, proj);
}

/// The diffusion graph 𝒮 used for views 3–4; the original graph under the
/// no-diffuse ablation.
inline SignedBipartiteGraph diffusion_graph(const SignedBipartiteGraph& g, const TrainConfig& cfg,
                                            int threads = 1) {
  if (cfg.ablation == Ablation::kNoDiffuse) return g;
  return densify(srwr_all_seeds(g, cfg.diffusion, threads), g, cfg.densify);
}

/// Fused embeddings from the unmasked views (𝒢, 𝒢, 𝒮, 𝒮).
inline Matrix inference_embeddings(const Matrix& inputs, const SignedBipartiteGraph& g,
                                   const SignedBipartiteGraph& s, const ModelParams& params,
                                   const TrainConfig& cfg) {
  const auto views = view_neighbors(assemble_views({g, g, s, s}, cfg.seed));
  ad::Tape tape;
  ad::ParamBinder bind(tape);
  return model_forward(tape.constant(inputs), views, params, encoder_config(cfg), bind).fused.value();
}

/// Joint objective of one epoch: label loss on the scored pairs plus λ times
/// the contrastive loss over the node batch. Fills `parts` with the pieces.
inline ad::Var training_objective(const Matrix& inputs, const std::array<ViewNeighbors, ViewSet::kViews>& views,
                                  const std::vector<NodePair>& pairs, const std::vector<int>& labels,
                                  const std::vector<std::size_t>& batch, std::size_t num_genes,
                                  const ModelParams& params, const TrainConfig& cfg, ad::ParamBinder& bind,
                                  EpochLoss& parts) {
  const auto fp = model_forward(bind.tape().constant(inputs), views, params, encoder_config(cfg), bind);
  const auto logits = pair_logits(fp.fused, pairs, num_genes, params.predictor, bind);
  const auto l_label = ad::label_loss(logits, labels, cfg.squash);

  const std::vector<Eigen::Index> rows(batch.begin(), batch.end());
  std::vector<ad::Var> pos, neg;
  for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
    pos.push_back(ad::gather_rows(fp.positive[k], rows));
    neg.push_back(ad::gather_rows(fp.negative[k], rows));
  }
  const double alpha = cfg.loss.alpha;
  const auto inter_p = ad::inter_view_loss(pos, cfg.loss);
  const auto inter_n = ad::inter_view_loss(neg, cfg.loss);
  const auto l_inter = ad::weighted_sum(std::vector<ad::Var>{inter_p, inter_n}, {1.0, 1.0});
  const auto l_intra = ad::intra_view_loss(ad::gather_rows(fp.fused, rows), pos, neg, cfg.loss);
  const auto l_cl = ad::weighted_sum(std::vector<ad::Var>{l_inter, l_intra}, {1.0 - alpha, alpha});
  const auto total = ad::weighted_sum(std::vector<ad::Var>{l_label, l_cl}, {1.0, cfg.effective_lambda()});
  parts = {total.scalar(), l_label.scalar(), l_inter.scalar(), l_intra.scalar(), l_cl.scalar()};
  return total;
}

/// Full-batch training loop: per epoch build four views, encode, score the
/// labelled pairs, combine label and contrastive losses and take one
/// optimizer step.
inline TrainedModel train(const SignedBipartiteGraph& g, const FeatureMatrix* features, const TrainConfig& cfg,
                          const TrainOptions& opts = {}) {
  cfg.validate();
  if (g.num_edges() == 0) throw InterfaceError("training graph has no edges");
  if (opts.known && !opts.known->same_universe(g)) {
    throw DimensionError("known-edge graph does not share the training node universe");
  }

  TrainedModel model;
  model.config = cfg;
  model.genes = g.gene_labels();
  model.phenotypes = g.phenotype_labels();
  if (g.count(Sign::kPositive) == 0 || g.count(Sign::kNegative) == 0) {
    model.warnings.push_back("training graph has a single sign class");
  }

  const std::size_t n = g.num_genes();
  const std::size_t gene_dim = features ? static_cast<std::size_t>(features->values.cols()) : n;
  model.projection = make_input_projection(gene_dim, g.num_phenotypes(),
                                           static_cast<std::size_t>(cfg.input_dim), cfg.seed);
  const Matrix inputs = model_inputs(features, g, model.projection);
  const SignedBipartiteGraph s = diffusion_graph(g, cfg, opts.threads);

  std::vector<NodePair> pairs;
  std::vector<int> labels;
  for (const auto& e : g.sorted_edges()) {
    pairs.push_back({e.gene, e.phenotype});
    labels.push_back(to_int(e.sign));
  }
  const auto n_neutral = static_cast<std::size_t>(std::llround(cfg.neutral_ratio * static_cast<double>(g.num_edges())));
  for (const auto& [gene, pheno] :
       sample_neutral_pairs(opts.known ? *opts.known : g, n_neutral, derive_seed(cfg.seed, 0x6e747231ULL))) {
    pairs.push_back({gene, pheno});
    labels.push_back(0);
  }

  Rng init_rng(derive_seed(cfg.seed, 0x696e6974ULL));
  model.params = init_model(cfg, init_rng);

  std::vector<Matrix*> plist;
  for_each_model_param(model.params, [&](const std::string&, Matrix& m) { plist.push_back(&m); });
  Optimizer opt(cfg.optimizer, cfg.learning_rate);

  std::optional<std::array<ViewNeighbors, ViewSet::kViews>> fixed_views;
  if (cfg.ablation == Ablation::kNoAug) fixed_views = view_neighbors(assemble_views({g, g, s, s}, cfg.seed));

  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::array<ViewNeighbors, ViewSet::kViews> views;
    if (fixed_views) {
      views = *fixed_views;
    } else {
      const auto seed = derive_seed(cfg.seed, 0x65706f63ULL, static_cast<std::uint64_t>(epoch));
      views = view_neighbors(build_views(g, s, cfg.mask_rate, seed, cfg.augment_mode));
    }

    const auto batch = detail::contrastive_batch(
        g.num_nodes(), cfg.loss.batch_size, derive_seed(cfg.seed, 0x62617463ULL, static_cast<std::uint64_t>(epoch)));
    ad::Tape tape;
    ad::ParamBinder bind(tape);
    EpochLoss loss;
    ad::Var total;
    try {
      total = training_objective(inputs, views, pairs, labels, batch, n, model.params, cfg, bind, loss);
    } catch (const NumericalError& e) {
      throw NumericalError("at epoch " + std::to_string(epoch) + ": " + e.what());
    }

    if (!std::isfinite(loss.total)) {
      throw NumericalError("non-finite loss at epoch " + std::to_string(epoch) + " (" + detail::describe(loss) + ")");
    }
    tape.backward(total);
    std::vector<Matrix> grads;
    grads.reserve(plist.size());
    for (auto* p : plist) grads.push_back(bind.grad(*p));
    opt.step(plist, grads);

    model.curve.push_back(loss);
    model.epochs_run = epoch + 1;
    if (opts.on_epoch) opts.on_epoch(epoch, loss);
    if (loss.total < best) {
      best = loss.total;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      break;
    }
  }

  model.embeddings = inference_embeddings(inputs, g, s, model.params, cfg);
  if (!model.embeddings.allFinite()) throw NumericalError("non-finite embeddings after training");

  if (cfg.fit_transfer) {
    std::vector<Eigen::Index> linked;
    std::vector<bool> has_edge(n, false);
    for (const auto& e : g.edges()) has_edge[e.gene] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (has_edge[i]) linked.push_back(static_cast<Eigen::Index>(i));
    }
    Matrix x(static_cast<Eigen::Index>(linked.size()), inputs.cols());
    Matrix z(static_cast<Eigen::Index>(linked.size()), model.embeddings.cols());
    for (std::size_t r = 0; r < linked.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = inputs.row(linked[r]);
      z.row(static_cast<Eigen::Index>(r)) = model.embeddings.row(linked[r]);
    }
    auto tcfg = cfg.transfer;
    tcfg.seed = derive_seed(cfg.seed, 0x7866720aULL);
    model.transfer = fit_transfer(x, z, tcfg);
  }
  return model;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace detail {

constexpr const char* kCheckpointMagic = "csgdn-checkpoint";
constexpr int kCheckpointVersion = 1;

inline void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "tensor\t" << name << '\t' << m.rows() << '\t' << m.cols() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "\t" : "") << text::format_exact(m(r, c));
    out << '\n';
  }
}

class CheckpointReader {
 public:
  explicit CheckpointReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string l;
    if (!std::getline(in_, l)) throw ParseError("unexpected end of checkpoint", line_no_);
    ++line_no_;
    return l;
  }

  std::vector<std::string> fields() {
    const auto l = line();
    std::vector<std::string> out;
    for (auto f : text::split(l, '\t')) out.emplace_back(f);
    return out;
  }

  std::vector<std::string> expect(const std::string& key, std::size_t arity) {
    auto f = fields();
    if (f.empty() || f[0] != key || f.size() != arity + 1) {
      throw ParseError("expected '" + key + "' record in checkpoint", line_no_);
    }
    return f;
  }

  long long integer(const std::string& s) {
    double d = 0.0;
    if (!text::parse_double(s, d) || d != std::floor(d) || d < 0) {
      throw ParseError("bad integer '" + s + "' in checkpoint", line_no_);
    }
    return static_cast<long long>(d);
  }

  Matrix tensor_body(long long rows, long long cols) {
    Matrix m(rows, cols);
    for (long long r = 0; r < rows; ++r) {
      const auto f = fields();
      if (static_cast<long long>(f.size()) != cols) throw ParseError("tensor row width mismatch", line_no_);
      for (long long c = 0; c < cols; ++c) {
        double v = 0.0;
        if (!text::parse_double(f[static_cast<std::size_t>(c)], v)) {
          throw ParseError("bad tensor value '" + f[static_cast<std::size_t>(c)] + "'", line_no_);
        }
        m(r, c) = v;
      }
    }
    return m;
  }

  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace detail

/// Text checkpoint; doubles are written in shortest round-trip form so a
/// reload is bit-exact.
inline void write_checkpoint(std::ostream& out, const TrainedModel& m) {
  out << detail::kCheckpointMagic << '\t' << detail::kCheckpointVersion << '\n';
  out << "config_hash\t" << m.config_hash() << '\n';
  out << "config_begin\n" << canonical_text(m.config) << "config_end\n";
  out << "genes\t" << m.genes.size() << '\n';
  for (const auto& l : m.genes) out << l << '\n';
  out << "phenotypes\t" << m.phenotypes.size() << '\n';
  for (const auto& l : m.phenotypes) out << l << '\n';
  out << "projection\t" << m.projection.seed << '\t' << m.projection.gene_dim << '\t'
      << m.projection.phenotype_count << '\t' << m.projection.input_dim << '\n';
  out << "epochs_run\t" << m.epochs_run << '\n';
  out << "transfer_layers\t" << (m.transfer ? m.transfer->mlp.layers() : 0) << '\n';
  if (m.transfer) out << "transfer_loss\t" << text::format_exact(m.transfer->final_loss) << '\n';
  for_each_model_param(m.params, [&](const std::string& name, const Matrix& t) { detail::write_tensor(out, name, t); });
  detail::write_tensor(out, "projection", m.projection.matrix);
  detail::write_tensor(out, "embeddings", m.embeddings);
  if (m.transfer) for_each_param(m.transfer->mlp, "transfer", [&](const std::string& name, const Matrix& t) {
      detail::write_tensor(out, name, t);
    });
  out << "end\n";
}

inline void save_checkpoint(const std::string& path, const TrainedModel& m) {
  auto out = open_output(path);
  write_checkpoint(out, m);
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline TrainedModel read_checkpoint(std::istream& in) {
  detail::CheckpointReader r(in);
  auto head = r.fields();
  if (head.size() != 2 || head[0] != detail::kCheckpointMagic) throw ParseError("not a checkpoint file", 1);
  if (head[1] != std::to_string(detail::kCheckpointVersion)) {
    throw ParseError("unsupported checkpoint version " + head[1], 1);
  }
  const auto hash = r.expect("config_hash", 1)[1];
  if (r.line() != "config_begin") throw ParseError("expected config_begin", r.line_no());
  std::string body;
  for (std::string l = r.line(); l != "config_end"; l = r.line()) body += l + "\n";

  TrainedModel m;
  m.config = parse_train_config(body);
  if (m.config_hash() != hash) throw ParseError("checkpoint config hash mismatch", r.line_no());

  const auto n = r.integer(r.expect("genes", 1)[1]);
  for (long long i = 0; i < n; ++i) m.genes.push_back(r.line());
  const auto np = r.integer(r.expect("phenotypes", 1)[1]);
  for (long long i = 0; i < np; ++i) m.phenotypes.push_back(r.line());
  const auto proj = r.expect("projection", 4);
  if (!text::parse_u64(proj[1], m.projection.seed)) throw ParseError("bad projection seed", r.line_no());
  m.projection.gene_dim = static_cast<std::size_t>(r.integer(proj[2]));
  m.projection.phenotype_count = static_cast<std::size_t>(r.integer(proj[3]));
  m.projection.input_dim = static_cast<std::size_t>(r.integer(proj[4]));
  m.epochs_run = static_cast<int>(r.integer(r.expect("epochs_run", 1)[1]));
  const auto transfer_layers = r.integer(r.expect("transfer_layers", 1)[1]);
  double transfer_loss = 0.0;
  if (transfer_layers > 0) {
    const auto f = r.expect("transfer_loss", 1);
    if (!text::parse_double(f[1], transfer_loss)) throw ParseError("bad transfer loss", r.line_no());
  }

  std::map<std::string, Matrix> tensors;
  for (auto f = r.fields(); !(f.size() == 1 && f[0] == "end"); f = r.fields()) {
    if (f.size() != 4 || f[0] != "tensor") throw ParseError("expected tensor record", r.line_no());
    const auto rows = r.integer(f[2]);
    const auto cols = r.integer(f[3]);
    if (!tensors.emplace(f[1], r.tensor_body(rows, cols)).second) {
      throw ParseError("duplicate tensor '" + f[1] + "'", r.line_no());
    }
  }
  auto take = [&](const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw ParseError("checkpoint lacks tensor '" + name + "'", r.line_no());
    Matrix out = std::move(it->second);
    tensors.erase(it);
    return out;
  };

  Rng shape_rng(0);
  m.params = init_model(m.config, shape_rng);
  for_each_model_param(m.params, [&](const std::string& name, Matrix& t) {
    Matrix v = take(name);
    if (v.rows() != t.rows() || v.cols() != t.cols()) {
      throw DimensionError("tensor '" + name + "' has shape " + std::to_string(v.rows()) + "x" +
                           std::to_string(v.cols()) + ", config implies " + std::to_string(t.rows()) + "x" +
                           std::to_string(t.cols()));
    }
    t = std::move(v);
  });
  m.projection.matrix = take("projection");
  m.embeddings = take("embeddings");
  if (m.embeddings.rows() != static_cast<Eigen::Index>(m.genes.size() + m.phenotypes.size())) {
    throw DimensionError("embedding rows do not match the node list");
  }
  if (transfer_layers > 0) {
    TransferParams t;
    t.mlp.activation = m.config.transfer.activation;
    for (long long l = 0; l < transfer_layers; ++l) {
      t.mlp.weights.push_back(take("transfer.w" + std::to_string(l)));
      t.mlp.biases.push_back(take("transfer.b" + std::to_string(l)));
    }
    t.final_loss = transfer_loss;
    m.transfer = std::move(t);
  }
  if (!tensors.empty()) throw ParseError("unexpected tensor '" + tensors.begin()->first + "'", r.line_no());
  return m;
}

inline TrainedModel load_checkpoint(const std::string& path) {
  auto in = open_input(path);
  return read_checkpoint(in);
}

// ---------------------------------------------------------------------------
// Prediction and evaluation

struct LabeledPair {
  std::string gene;
  std::string phenotype;
  int label = 0;  // −1, 0 or +1
};

inline std::vector<LabeledPair> labeled_pairs(const SignedBipartiteGraph& g) {
  std::vector<LabeledPair> out;
  for (const auto& e : g.sorted_edges()) {
    out.push_back({g.gene_labels()[e.gene], g.phenotype_labels()[e.phenotype], to_int(e.sign)});
  }
  return out;
}

/// Resolves gene embeddings by label: trained genes from the embedding table,
/// others through the transfer head when their features are supplied.
class EmbeddingLookup {
 public:
  EmbeddingLookup(const TrainedModel& m, const FeatureTable* extra) : m_(m) {
    for (std::size_t i = 0; i < m.genes.size(); ++i) gene_[m.genes[i]] = i;
    for (std::size_t j = 0; j < m.phenotypes.size(); ++j) pheno_[m.phenotypes[j]] = j;
    if (!extra) return;
    std::vector<std::string> unseen;
    for (const auto& l : extra->labels) {
      if (!gene_.count(l)) unseen.push_back(l);
    }
    if (unseen.empty()) return;
    if (!m.transfer) throw InterfaceError("checkpoint has no transfer head for unseen genes");
    const Matrix raw = select_rows(*extra, unseen);
    const Matrix z = embed_untrained(project_gene_rows(raw, m.projection), *m.transfer);
    for (std::size_t i = 0; i < unseen.size(); ++i) transferred_[unseen[i]] = z.row(static_cast<Eigen::Index>(i));
  }

  RowVector gene(const std::string& label) const {
    if (auto it = gene_.find(label); it != gene_.end()) {
      return m_.embeddings.row(static_cast<Eigen::Index>(it->second));
    }
    if (auto it = transferred_.find(label); it != transferred_.end()) return it->second;
    throw ParseError("unknown gene '" + label + "'");
  }

  RowVector phenotype(const std::string& label) const {
    auto it = pheno_.find(label);
    if (it == pheno_.end()) throw ParseError("unknown phenotype '" + label + "'");
    return m_.embeddings.row(static_cast<Eigen::Index>(m_.genes.size() + it->second));
  }

  bool transferred(const std::string& gene) const { return transferred_.count(gene) != 0; }

 private:
  const TrainedModel& m_;
  std::unordered_map<std::string, std::size_t> gene_, pheno_;
  std::unordered_map<std::string, RowVector> transferred_;
};

/// Normalized (P_down, P_none, P_up) per pair.
inline Matrix predict_probabilities(const TrainedModel& m, const std::vector<LabeledPair>& pairs,
                                    const FeatureTable* extra = nullptr) {
  const EmbeddingLookup lookup(m, extra);
  const auto d = m.embeddings.cols();
  Matrix gz(static_cast<Eigen::Index>(pairs.size()), d), pz(static_cast<Eigen::Index>(pairs.size()), d);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    gz.row(static_cast<Eigen::Index>(i)) = lookup.gene(pairs[i].gene);
    pz.row(static_cast<Eigen::Index>(i)) = lookup.phenotype(pairs[i].phenotype);
  }
  if (pairs.empty()) return Matrix(0, 3);
  return sign_probabilities(pair_logits(gz, pz, m.params.predictor), m.config.squash);
}

struct EvalReport {
  std::optional<double> auc;
  double binary_f1 = 0.0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  ConfusionMatrix confusion;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t n_pairs = 0;
};

/// Metrics from scored pairs. AUC ranks up against down edges by
/// P_up/(P_up+P_down); neutral pairs only enter the F1 scores.
inline EvalReport score_predictions(const Matrix& probs, const std::vector<int>& labels) {
  if (labels.empty()) throw InterfaceError("evaluation set is empty");
  if (static_cast<std::size_t>(probs.rows()) != labels.size()) throw DimensionError("one score row per label");
  EvalReport rep;
  rep.n_pairs = labels.size();
  std::vector<double> scores;
  std::vector<int> up;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto s = to_sign_score(probs, static_cast<Eigen::Index>(i));
    rep.confusion.add(labels[i], s.predicted_label());
    if (labels[i] == 0) continue;
    const double denom = s.p_up() + s.p_down();
    scores.push_back(denom > 0.0 ? s.p_up() / denom : 0.5);
    up.push_back(labels[i]);
  }
  const auto flags = std::make_unique<bool[]>(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) flags[i] = up[i] > 0;
  rep.auc = auc_midrank(scores, std::span<const bool>(flags.get(), up.size()));
  const auto present = rep.confusion.present_labels();
  rep.binary_f1 = binary_f1(rep.confusion);
  rep.micro_f1 = micro_f1(rep.confusion, present);
  rep.macro_f1 = macro_f1(rep.confusion, present);
  return rep;
}

inline EvalReport evaluate(const TrainedModel& m, const std::vector<LabeledPair>& test,
                           const FeatureTable* extra = nullptr) {
  std::vector<int> labels;
  for (const auto& p : test) {
    label_column(p.label);
    labels.push_back(p.label);
  }
  auto rep = score_predictions(predict_probabilities(m, test, extra), labels);
  rep.seed = m.config.seed;
  rep.config_hash = m.config_hash();
  return rep;
}

/// Train-set AUC and F1 of a freshly trained model against its own edges.
inline EvalReport evaluate_on(const TrainedModel& m, const SignedBipartiteGraph& g) {
  return evaluate(m, labeled_pairs(g));
}

inline std::string optional_metric(const std::optional<double>& v) {
  return v ? text::format_report(*v) : std::string("NA");
}

inline void write_report_tsv(std::ostream& out, const EvalReport& r) {
  out << "auc\tbinary_f1\tmicro_f1\tmacro_f1\tn_pairs\tseed\tconfig_hash\n";
  out << optional_metric(r.auc) << '\t' << text::format_report(r.binary_f1) << '\t'
      << text::format_report(r.micro_f1) << '\t' << text::format_report(r.macro_f1) << '\t' << r.n_pairs << '\t'
      << r.seed << '\t' << r.config_hash << '\n';
}

inline void write_predictions_tsv(std::ostream& out, const std::vector<LabeledPair>& pairs, const Matrix& probs) {
  out << "gene\tphenotype\tP_down\tP_none\tP_up\tpredicted\n";
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto s = to_sign_score(probs, static_cast<Eigen::Index>(i));
    const int pred = s.predicted_label();
    out << pairs[i].gene << '\t' << pairs[i].phenotype << '\t' << text::format_report(s.p_down()) << '\t'
        << text::format_report(s.p_none()) << '\t' << text::format_report(s.p_up()) << '\t'
        << (pred > 0 ? "up" : pred < 0 ? "down" : "none") << '\n';
  }
}

}  // namespace csgdn
