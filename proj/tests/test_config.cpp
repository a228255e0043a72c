#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace csgdn;

TEST(KeyValues, SectionsAndComments) {
  const auto kv = parse_key_values(
      "# header\n"
      "top = 1\n"
      "[loss]\n"
      "tau = 0.5   ; trailing\n"
      "\n"
      "[ model ]\n"
      "embed_dim=8\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("top"), "1");
  EXPECT_EQ(kv.at("loss.tau"), "0.5");
  EXPECT_EQ(kv.at("model.embed_dim"), "8");
}

TEST(KeyValues, Errors) {
  EXPECT_THROW(parse_key_values("[a]\nx = 1\nx = 2\n"), ParseError);
  EXPECT_THROW(parse_key_values("just words\n"), ParseError);
  EXPECT_THROW(parse_key_values("[open\n"), ParseError);
  EXPECT_THROW(parse_key_values("= 3\n"), ParseError);
  try {
    parse_key_values("a = 1\n\nbroken\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
  }
}

TEST(TrainConfigParse, AppliesKeys) {
  const auto cfg = parse_train_config(
      "[loss]\ntau = 0.2\nalpha = 0.6\nlambda_cl = 0.01\n"
      "[model]\nembed_dim = 16\nactivation = identity\n"
      "[train]\nseed = 18446744073709551615\nablation = no-aug\n"
      "[diffusion]\ndensify = threshold:0.05\n"
      "[transfer]\nhidden = 32, 16\n");
  EXPECT_DOUBLE_EQ(cfg.loss.tau, 0.2);
  EXPECT_DOUBLE_EQ(cfg.loss.alpha, 0.6);
  EXPECT_DOUBLE_EQ(cfg.loss.lambda_cl, 0.01);
  EXPECT_EQ(cfg.embed_dim, 16);
  EXPECT_EQ(cfg.activation, Activation::kIdentity);
  EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
  EXPECT_EQ(cfg.ablation, Ablation::kNoAug);
  EXPECT_EQ(cfg.transfer.hidden, (std::vector<Eigen::Index>{32, 16}));
}

TEST(TrainConfigParse, RejectsBadValues) {
  EXPECT_THROW(parse_train_config("[loss]\ntemperature = 1\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[loss]\ntau = fast\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[loss]\ntau = 0\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[loss]\nalpha = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[model]\nlayers = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[model]\nembed_dim = 0\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[train]\nseed = -1\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[train]\nablation = none\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[train]\noptimizer = lbfgs\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[diffusion]\nc = 0\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[diffusion]\nc = nan\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[protocol]\nsplit_ratio = 1\n"), ConfigError);
  EXPECT_THROW(parse_train_config("[protocol]\ntest_neutral = maybe\n"), ConfigError);
}

TEST(TrainConfigParse, OtherSectionsAreLeftAlone) {
  EXPECT_NO_THROW(parse_train_config("[data]\nedges = x.tsv\n"));
}

TEST(CanonicalText, RoundTripsThroughParser) {
  TrainConfig cfg;
  cfg.loss.tau = 0.1 + 0.2;  // not exactly representable as a short decimal
  cfg.seed = 123456789012345ULL;
  cfg.ablation = Ablation::kNoDiffuse;
  cfg.densify = DensifyPolicy::at_threshold(0.125);
  const auto text = canonical_text(cfg);
  const auto back = parse_train_config(text);
  EXPECT_EQ(canonical_text(back), text);
  EXPECT_EQ(back.loss.tau, cfg.loss.tau);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(CanonicalText, SortedOneKeyPerLine) {
  const auto text = canonical_text(TrainConfig{});
  std::vector<std::string> keys;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) keys.push_back(line.substr(0, line.find(" = ")));
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(std::set<std::string>(keys.begin(), keys.end()).size(), keys.size());
  for (const auto& k : keys) EXPECT_TRUE(is_train_key(k)) << k;
}

TEST(ConfigHash, StableAndSensitive) {
  TrainConfig a, b;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.loss.alpha = 0.5000000001;
  EXPECT_NE(config_hash(a), config_hash(b));
  b = a;
  b.seed = a.seed + 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(ConfigHash, MatchesIndependentFnv) {
  const auto text = canonical_text(TrainConfig{});
  unsigned long long h = 14695981039346656037ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", h);
  EXPECT_EQ(config_hash(TrainConfig{}), buf);
}

TEST(Ablation, NamesRoundTrip) {
  for (const auto* name : {"full", "no-diffuse", "no-aug", "no-cl"}) {
    EXPECT_STREQ(to_string(parse_ablation(name)), name);
  }
  TrainConfig cfg;
  cfg.loss.lambda_cl = 0.3;
  EXPECT_DOUBLE_EQ(cfg.effective_lambda(), 0.3);
  cfg.ablation = Ablation::kNoCL;
  EXPECT_DOUBLE_EQ(cfg.effective_lambda(), 0.0);
}

TEST(Protocols, Known) {
  const auto names = default_protocols();
  ASSERT_EQ(names.size(), 7u);
  for (const auto& n : names) EXPECT_EQ(parse_protocol(n).name, n);
  EXPECT_DOUBLE_EQ(parse_protocol("subsample").subsample_fraction, 0.8);
  EXPECT_DOUBLE_EQ(parse_protocol("perturb-0.2").perturb_fraction, 0.2);
  EXPECT_EQ(parse_protocol("no-cl").ablation, Ablation::kNoCL);
  EXPECT_THROW(parse_protocol("perturb-0.3"), ConfigError);
}

TEST(ExperimentConfigParse, Defaults) {
  const auto cfg = parse_experiment_config("[data]\nedges = e.tsv\n");
  EXPECT_EQ(cfg.edges, "e.tsv");
  EXPECT_EQ(cfg.repetitions, 5);
  EXPECT_EQ(cfg.protocols, default_protocols());
  EXPECT_TRUE(cfg.sweep_key.empty());
}

TEST(ExperimentConfigParse, Presets) {
  const auto alpha = parse_experiment_config("[sweep]\npreset = alpha\n");
  EXPECT_EQ(alpha.sweep_key, "loss.alpha");
  EXPECT_EQ(alpha.sweep_values.size(), 5u);
  const auto tau = parse_experiment_config("[sweep]\npreset = tau\n");
  EXPECT_EQ(tau.sweep_key, "loss.tau");
  EXPECT_EQ(tau.sweep_values, (std::vector<std::string>{"0.05", "0.1", "0.2", "0.4", "0.8"}));
  const auto lambda = parse_experiment_config("[sweep]\npreset = lambda\n");
  EXPECT_EQ(lambda.sweep_values.front(), "0");
  EXPECT_THROW(parse_experiment_config("[sweep]\npreset = beta\n"), ConfigError);
}

TEST(ExperimentConfigParse, Errors) {
  EXPECT_THROW(parse_experiment_config("[experiment]\nrepetitions = 0\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[experiment]\nprotocols = baseline, sideways\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[experiment]\ncolour = red\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[data]\nsign_rule = vibes\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[sweep]\nkey = data.edges\nvalues = a\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[sweep]\nkey = loss.tau\n"), ConfigError);
  EXPECT_THROW(parse_experiment_config("[sweep]\npreset = tau\nkey = loss.alpha\n"), ConfigError);
}

TEST(ExperimentConfigParse, CustomSweep) {
  const auto cfg = parse_experiment_config(
      "[experiment]\nprotocols = baseline,no-cl\nrepetitions = 2\n[sweep]\nkey = loss.tau\nvalues = 0.1, 0.3\n");
  EXPECT_EQ(cfg.protocols, (std::vector<std::string>{"baseline", "no-cl"}));
  EXPECT_EQ(cfg.sweep_values, (std::vector<std::string>{"0.1", "0.3"}));
}

TEST(Summarize, MeanAndSampleStd) {
  std::vector<RunResult> runs(4);
  const double aucs[] = {0.5, 0.7, 0.9};
  for (int i = 0; i < 3; ++i) {
    runs[i].protocol = "baseline";
    EvalReport rep;
    rep.auc = aucs[i];
    rep.binary_f1 = 0.4;
    runs[i].report = rep;
  }
  runs[3].protocol = "baseline";
  runs[3].error = "boom";
  const auto rows = summarize(runs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].runs, 4u);
  EXPECT_EQ(rows[0].failed, 1u);
  EXPECT_NEAR(*rows[0].auc_mean, 0.7, 1e-15);
  EXPECT_NEAR(*rows[0].auc_std, 0.2, 1e-15);
  EXPECT_NEAR(*rows[0].binary_std, 0.0, 1e-15);
}

TEST(RunExperiment, GridShapeAndSeeds) {
  const auto g = csgdn::testing::planted_fixture();
  ExperimentConfig cfg;
  cfg.base.input_dim = 4;
  cfg.base.hidden_dim = 4;
  cfg.base.embed_dim = 4;
  cfg.base.epochs = 3;
  cfg.base.fit_transfer = false;
  cfg.base.seed = 70;
  cfg.repetitions = 2;
  cfg.protocols = {"baseline", "no-cl"};
  cfg.sweep_key = "loss.tau";
  cfg.sweep_values = {"0.1", "0.4"};
  const auto res = run_experiment(cfg, g, nullptr);
  ASSERT_EQ(res.runs.size(), 8u);
  ASSERT_EQ(res.summary.size(), 4u);
  for (const auto& r : res.runs) {
    EXPECT_TRUE(r.report.has_value()) << r.error;
    EXPECT_EQ(r.seed, 70u + static_cast<std::uint64_t>(r.repetition));
  }
  for (const auto& row : res.summary) EXPECT_EQ(row.runs, 2u);
  EXPECT_EQ(res.config_hash, config_hash(cfg.base));

  std::ostringstream out;
  write_summary_tsv(out, res, cfg.sweep_key);
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 5u);
}
