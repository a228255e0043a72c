#include <gtest/gtest.h>

#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace csgdn;
using csgdn::testing::parse;
using csgdn::testing::random_graph;
using csgdn::testing::random_matrix;

namespace {

TrainConfig tiny_config(std::uint64_t seed = 5) {
  TrainConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_dim = 3;
  cfg.embed_dim = 3;
  cfg.layers = 2;
  cfg.predictor_layers = 2;
  cfg.epochs = 30;
  cfg.patience = 0;
  cfg.learning_rate = 1e-2;
  cfg.seed = seed;
  cfg.densify = DensifyPolicy::top_k(2);
  cfg.fit_transfer = false;
  return cfg;
}

const char* kSix =
    "gene\tphenotype\tsign\n"
    "A\tx\t1\nA\ty\t-1\nB\tx\t-1\nB\tz\t1\nC\ty\t1\nC\tz\t-1\n";

std::string checkpoint_text(const TrainedModel& m) {
  std::ostringstream out;
  write_checkpoint(out, m);
  return out.str();
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  std::vector<Matrix> xs, ys;
  for_each_model_param(a, [&](const std::string&, const Matrix& m) { xs.push_back(m); });
  for_each_model_param(b, [&](const std::string&, const Matrix& m) { ys.push_back(m); });
  if (xs.size() != ys.size()) return false;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].rows() != ys[i].rows() || xs[i].cols() != ys[i].cols() || xs[i] != ys[i]) return false;
  }
  return true;
}

}  // namespace

TEST(TrainingObjective, GradientMatchesFiniteDifferences) {
  for (int t = 0; t < 20; ++t) {
    Rng rng(900 + t);
    const auto g = random_graph(4 + t % 3, 3, 0.5, rng);
    auto cfg = tiny_config(static_cast<std::uint64_t>(t));
    cfg.loss.alpha = 0.3;
    cfg.loss.lambda_cl = 0.7;
    cfg.activation = t % 2 ? Activation::kTanh : Activation::kIdentity;
    Rng init(t);
    const auto params = init_model(cfg, init);
    const Matrix inputs = random_matrix(static_cast<Eigen::Index>(g.num_nodes()), cfg.input_dim, rng);
    const auto s = diffusion_graph(g, cfg);
    const auto views = view_neighbors(build_views(g, s, 0.2, 77 + t, AugmentMode::kDrop));

    std::vector<NodePair> pairs;
    std::vector<int> labels;
    for (const auto& e : g.sorted_edges()) {
      pairs.push_back({e.gene, e.phenotype});
      labels.push_back(to_int(e.sign));
    }
    pairs.push_back({0, 0});
    labels.push_back(0);
    std::vector<std::size_t> batch(g.num_nodes());
    std::iota(batch.begin(), batch.end(), 0);

    std::string worst;
    const double err = csgdn::testing::worst_param_gradient_error(
        params, [](auto& p, auto f) { for_each_model_param(p, f); },
        [&](const ModelParams& p, ad::ParamBinder& bind) {
          EpochLoss parts;
          return training_objective(inputs, views, pairs, labels, batch, g.num_genes(), p, cfg, bind, parts);
        },
        &worst);
    EXPECT_LE(err, 1e-4) << "instance " << t << ", tensor " << worst;
  }
}

TEST(TrainingObjective, PartsCombine) {
  Rng rng(3);
  const auto g = random_graph(5, 3, 0.5, rng);
  auto cfg = tiny_config();
  cfg.loss.alpha = 0.25;
  cfg.loss.lambda_cl = 0.5;
  Rng init(1);
  const auto params = init_model(cfg, init);
  const Matrix inputs = random_matrix(8, cfg.input_dim, rng);
  const auto views = view_neighbors(assemble_views({g, g, g, g}, 1));
  std::vector<NodePair> pairs{{0, 0}, {1, 2}};
  std::vector<int> labels{1, -1};
  std::vector<std::size_t> batch{0, 2, 4, 6};
  ad::Tape tape;
  ad::ParamBinder bind(tape);
  EpochLoss parts;
  const auto total = training_objective(inputs, views, pairs, labels, batch, 5, params, cfg, bind, parts);
  EXPECT_DOUBLE_EQ(total.scalar(), parts.total);
  EXPECT_NEAR(parts.contrastive, 0.75 * parts.inter + 0.25 * parts.intra, 1e-12);
  EXPECT_NEAR(parts.total, parts.label + 0.5 * parts.contrastive, 1e-12);
}

TEST(Train, LossDecreasesOnSmallGraph) {
  const auto g = parse(kSix);
  auto cfg = tiny_config();
  cfg.epochs = 200;
  const auto m = train(g, nullptr, cfg);
  ASSERT_EQ(m.curve.size(), 200u);
  EXPECT_LT(m.curve.back().label, m.curve.front().label);
  EXPECT_LT(m.curve.back().total, m.curve.front().total);
}

TEST(Train, NoClMatchesZeroLambda) {
  const auto g = parse(kSix);
  auto a = tiny_config();
  a.ablation = Ablation::kNoCL;
  auto b = tiny_config();
  b.loss.lambda_cl = 0.0;
  const auto ma = train(g, nullptr, a);
  const auto mb = train(g, nullptr, b);
  EXPECT_TRUE(same_params(ma.params, mb.params));
  EXPECT_TRUE(ma.embeddings == mb.embeddings);
}

TEST(Train, ContrastiveTermChangesTheModel) {
  const auto g = parse(kSix);
  auto a = tiny_config();
  auto b = tiny_config();
  b.ablation = Ablation::kNoCL;
  EXPECT_FALSE(same_params(train(g, nullptr, a).params, train(g, nullptr, b).params));
}

TEST(Train, DeterministicCheckpoint) {
  const auto g = parse(kSix);
  auto cfg = tiny_config();
  cfg.fit_transfer = true;
  cfg.transfer.epochs = 20;
  EXPECT_EQ(checkpoint_text(train(g, nullptr, cfg)), checkpoint_text(train(g, nullptr, cfg)));
}

TEST(Train, ThreadCountDoesNotChangeResult) {
  const auto g = parse(kSix);
  const auto cfg = tiny_config();
  TrainOptions one, four;
  four.threads = 4;
  EXPECT_EQ(checkpoint_text(train(g, nullptr, cfg, one)), checkpoint_text(train(g, nullptr, cfg, four)));
}

TEST(Train, PatienceStopsEarly) {
  const auto g = parse(kSix);
  auto cfg = tiny_config();
  cfg.epochs = 400;
  cfg.patience = 1;
  cfg.learning_rate = 0.5;
  const auto m = train(g, nullptr, cfg);
  EXPECT_LT(m.epochs_run, 400);
  EXPECT_EQ(static_cast<std::size_t>(m.epochs_run), m.curve.size());
}

TEST(Train, NonFiniteLossNamesEpoch) {
  const auto g = parse(kSix);
  FeatureMatrix f;
  f.values = Matrix::Constant(3, 2, std::numeric_limits<double>::quiet_NaN());
  try {
    train(g, &f, tiny_config());
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsEmptyGraph) {
  auto g = parse(kSix).empty_copy();
  EXPECT_THROW(train(g, nullptr, tiny_config()), InterfaceError);
}

TEST(Train, RejectsKnownGraphFromAnotherUniverse) {
  const auto g = parse(kSix);
  const auto other = parse("gene\tphenotype\tsign\nQ\tx\t1\n");
  TrainOptions opts;
  opts.known = &other;
  EXPECT_THROW(train(g, nullptr, tiny_config(), opts), DimensionError);
}

TEST(Train, WarnsOnSingleSignClass) {
  const auto g = parse("gene\tphenotype\tsign\nA\tx\t1\nB\ty\t1\n");
  const auto m = train(g, nullptr, tiny_config());
  ASSERT_EQ(m.warnings.size(), 1u);
}

TEST(Train, InvalidConfigIsRejected) {
  auto cfg = tiny_config();
  cfg.mask_rate = 1.5;
  EXPECT_THROW(train(parse(kSix), nullptr, cfg), ConfigError);
}

TEST(DiffusionGraph, NoDiffuseKeepsOriginal) {
  Rng rng(4);
  const auto g = random_graph(6, 4, 0.4, rng);
  auto cfg = tiny_config();
  cfg.ablation = Ablation::kNoDiffuse;
  EXPECT_TRUE(same_edges(diffusion_graph(g, cfg), g));
  cfg.ablation = Ablation::kFull;
  cfg.densify = DensifyPolicy::top_k(4);
  EXPECT_GT(diffusion_graph(g, cfg).num_edges(), g.num_edges());
}

TEST(ContrastiveBatch, AllNodesWhenSmall) {
  const auto b = detail::contrastive_batch(7, 512, 1);
  ASSERT_EQ(b.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(b[i], i);
}

TEST(ContrastiveBatch, SortedDistinctSubsetWhenLarge) {
  const auto b = detail::contrastive_batch(1000, 64, 9);
  ASSERT_EQ(b.size(), 64u);
  EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
  EXPECT_EQ(std::set<std::size_t>(b.begin(), b.end()).size(), 64u);
  EXPECT_LT(b.back(), 1000u);
  EXPECT_EQ(b, detail::contrastive_batch(1000, 64, 9));
  EXPECT_NE(b, detail::contrastive_batch(1000, 64, 10));
}

TEST(Checkpoint, RoundTrip) {
  const auto g = parse(kSix);
  auto cfg = tiny_config();
  cfg.fit_transfer = true;
  cfg.transfer.epochs = 10;
  const auto m = train(g, nullptr, cfg);
  const auto text = checkpoint_text(m);
  std::istringstream in(text);
  const auto back = read_checkpoint(in);
  EXPECT_EQ(checkpoint_text(back), text);
  EXPECT_EQ(back.genes, m.genes);
  EXPECT_EQ(back.phenotypes, m.phenotypes);
  EXPECT_TRUE(back.embeddings == m.embeddings);
  EXPECT_TRUE(same_params(back.params, m.params));
  EXPECT_EQ(back.config_hash(), m.config_hash());
  ASSERT_TRUE(back.transfer.has_value());

  const auto pairs = labeled_pairs(g);
  EXPECT_TRUE(predict_probabilities(back, pairs) == predict_probabilities(m, pairs));
}

TEST(Checkpoint, RejectsCorruption) {
  const auto m = train(parse(kSix), nullptr, tiny_config());
  auto text = checkpoint_text(m);
  {
    std::istringstream in("not-a-checkpoint 1\n");
    EXPECT_THROW(read_checkpoint(in), ParseError);
  }
  {
    std::istringstream in(text.substr(0, text.size() / 2));
    EXPECT_THROW(read_checkpoint(in), ParseError);
  }
}

TEST(Predict, ProbabilitiesSumToOne) {
  const auto g = parse(kSix);
  const auto m = train(g, nullptr, tiny_config());
  std::vector<LabeledPair> pairs{{"A", "z", 0}, {"C", "x", 0}, {"B", "x", -1}};
  const auto p = predict_probabilities(m, pairs);
  ASSERT_EQ(p.rows(), 3);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    EXPECT_TRUE((p.row(r).array() >= 0.0).all());
  }
}

TEST(Predict, UnknownLabelsAreParseErrors) {
  const auto m = train(parse(kSix), nullptr, tiny_config());
  EXPECT_THROW(predict_probabilities(m, {{"nope", "x", 0}}), ParseError);
  EXPECT_THROW(predict_probabilities(m, {{"A", "nope", 0}}), ParseError);
}

TEST(Predict, UnseenGeneThroughTransferHead) {
  const auto g = parse(kSix);
  std::istringstream fin("gene\tf1\tf2\nA\t1\t0\nB\t0\t1\nC\t1\t1\n");
  const auto table = parse_feature_table(fin);
  const auto f = features_for(table, g);
  auto cfg = tiny_config();
  cfg.fit_transfer = true;
  cfg.transfer.epochs = 50;
  const auto m = train(g, &f, cfg);

  std::istringstream ein("gene\tf1\tf2\nD\t0.5\t0.5\n");
  const auto extra = parse_feature_table(ein);
  const EmbeddingLookup lookup(m, &extra);
  EXPECT_TRUE(lookup.transferred("D"));
  EXPECT_FALSE(lookup.transferred("A"));
  const auto p = predict_probabilities(m, {{"D", "x", 0}}, &extra);
  ASSERT_EQ(p.rows(), 1);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(Predict, UnseenGeneWithoutTransferHeadIsInterfaceError) {
  const auto g = parse(kSix);
  std::istringstream fin("gene\tf1\nA\t1\nB\t0\nC\t1\n");
  const auto f = features_for(parse_feature_table(fin), g);
  const auto m = train(g, &f, tiny_config());
  std::istringstream ein("gene\tf1\nD\t0.5\n");
  const auto extra = parse_feature_table(ein);
  EXPECT_THROW(EmbeddingLookup(m, &extra), InterfaceError);
}

TEST(Evaluate, ReportFields) {
  const auto g = parse(kSix);
  const auto m = train(g, nullptr, tiny_config());
  auto pairs = labeled_pairs(g);
  pairs.push_back({"A", "z", 0});
  const auto rep = evaluate(m, pairs);
  ASSERT_TRUE(rep.auc.has_value());
  EXPECT_GE(*rep.auc, 0.0);
  EXPECT_LE(*rep.auc, 1.0);
  EXPECT_EQ(rep.n_pairs, 7u);
  EXPECT_EQ(rep.seed, m.config.seed);
  EXPECT_EQ(rep.config_hash, m.config_hash());
  std::ostringstream out;
  write_report_tsv(out, rep);
  EXPECT_EQ(out.str().rfind("auc\tbinary_f1\tmicro_f1\tmacro_f1\t", 0), 0u);
}

TEST(Evaluate, AucIsNaWithOneSignClass) {
  Matrix probs(2, 3);
  probs << 0.2, 0.3, 0.5, 0.1, 0.1, 0.8;
  const auto rep = score_predictions(probs, {1, 1});
  EXPECT_FALSE(rep.auc.has_value());
  EXPECT_EQ(optional_metric(rep.auc), "NA");
}

TEST(Evaluate, AucScoresUpAgainstDown) {
  Matrix probs(4, 3);
  probs << 0.7, 0.2, 0.1,   // down
      0.1, 0.8, 0.1,        // down
      0.1, 0.2, 0.7,        // up
      0.1, 0.1, 0.8;        // neutral, excluded from AUC
  const auto rep = score_predictions(probs, {-1, -1, 1, 0});
  ASSERT_TRUE(rep.auc.has_value());
  // up scores 0.875 against down scores 0.125 and 0.5
  EXPECT_DOUBLE_EQ(*rep.auc, 1.0);
  EXPECT_EQ(rep.n_pairs, 4u);
}
