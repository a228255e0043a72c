#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "csgdn/config.hpp"
#include "csgdn/features.hpp"
#include "csgdn/graph.hpp"
#include "csgdn/protocol.hpp"
#include "csgdn/training.hpp"

namespace csgdn {

/// One evaluation protocol: optional subsampling of the whole edge set,
/// optional sign flips on the training edges, and an ablation.
struct Protocol {
  std::string name;
  double subsample_fraction = 1.0;
  double perturb_fraction = 0.0;
  Ablation ablation = Ablation::kFull;
};

inline Protocol parse_protocol(const std::string& name) {
  if (name == "baseline") return {name};
  if (name == "subsample") return {name, 0.8};
  if (name == "perturb-0.1") return {name, 1.0, 0.1};
  if (name == "perturb-0.2") return {name, 1.0, 0.2};
  if (name == "no-diffuse" || name == "no-aug" || name == "no-cl") return {name, 1.0, 0.0, parse_ablation(name)};
  throw ConfigError("unknown protocol '" + name +
                    "' (expected baseline|subsample|perturb-0.1|perturb-0.2|no-diffuse|no-aug|no-cl)");
}

inline std::vector<std::string> default_protocols() {
  return {"baseline", "subsample", "perturb-0.1", "perturb-0.2", "no-diffuse", "no-aug", "no-cl"};
}

/// Named hyperparameter grids.
struct SweepPreset {
  std::string key;
  std::vector<std::string> values;
};

inline SweepPreset sweep_preset(const std::string& name) {
  if (name == "alpha") return {"loss.alpha", {"0.2", "0.4", "0.6", "0.8", "1.0"}};
  if (name == "tau") return {"loss.tau", {"0.05", "0.1", "0.2", "0.4", "0.8"}};
  if (name == "lambda") return {"loss.lambda_cl", {"0", "0.1", "0.01", "0.001", "0.0001", "0.00001"}};
  if (name == "dim") return {"model.embed_dim", {"8", "16", "32", "64", "96", "128"}};
  if (name == "mask") return {"augment.mask_rate", {"0", "0.2", "0.4", "0.6", "0.8"}};
  if (name == "predictor") return {"model.predictor_layers", {"1", "2", "3", "4"}};
  throw ConfigError("unknown sweep '" + name + "' (expected alpha|tau|lambda|dim|mask|predictor)");
}

struct ExperimentConfig {
  TrainConfig base;
  std::string edges;
  std::string features;
  SignRule sign_rule = SignRule::kSignColumn;
  int repetitions = 5;
  std::vector<std::string> protocols = default_protocols();
  std::string sweep_key;
  std::vector<std::string> sweep_values;
  std::string output_dir = "experiment_out";

  void validate() const {
    base.validate();
    if (repetitions <= 0) throw ConfigError("repetitions must be >= 1");
    if (protocols.empty()) throw ConfigError("no protocols selected");
    for (const auto& p : protocols) parse_protocol(p);
    if (!sweep_key.empty() && sweep_values.empty()) throw ConfigError("sweep key set without values");
    if (!sweep_key.empty() && !is_train_key(sweep_key)) throw ConfigError("cannot sweep '" + sweep_key + "'");
  }
};

inline SignRule parse_sign_rule(const std::string& s) {
  if (s == "sign") return SignRule::kSignColumn;
  if (s == "zscore") return SignRule::kZScoreSign;
  if (s == "weighted") return SignRule::kWeighted;
  throw ConfigError("unknown sign rule '" + s + "' (expected sign|zscore|weighted)");
}

namespace detail {

inline std::vector<std::string> comma_list(const std::string& v) {
  std::vector<std::string> out;
  for (auto part : text::split(v, ',')) {
    part = text::trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

}  // namespace detail

/// Reads `[data]`, `[experiment]` and `[sweep]` on top of the training keys.
inline ExperimentConfig parse_experiment_config(const std::string& body) {
  const auto kv = parse_key_values(body);
  ExperimentConfig cfg;
  cfg.base = apply_train_keys(TrainConfig{}, kv);
  for (const auto& [key, value] : kv) {
    if (is_train_key(key)) continue;
    if (key == "data.edges") {
      cfg.edges = value;
    } else if (key == "data.features") {
      cfg.features = value;
    } else if (key == "data.sign_rule") {
      cfg.sign_rule = parse_sign_rule(value);
    } else if (key == "experiment.repetitions") {
      cfg.repetitions = static_cast<int>(detail::to_int(key, value));
    } else if (key == "experiment.protocols") {
      cfg.protocols = detail::comma_list(value);
    } else if (key == "experiment.output") {
      cfg.output_dir = value;
    } else if (key == "sweep.preset") {
      const auto p = sweep_preset(value);
      cfg.sweep_key = p.key;
      cfg.sweep_values = p.values;
    } else if (key == "sweep.key") {
      cfg.sweep_key = value;
    } else if (key == "sweep.values") {
      cfg.sweep_values = detail::comma_list(value);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (kv.count("sweep.preset") && (kv.count("sweep.key") || kv.count("sweep.values"))) {
    throw ConfigError("sweep.preset cannot be combined with sweep.key/sweep.values");
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

struct RunResult {
  std::string protocol;
  std::string sweep_value;  // empty without a sweep
  int repetition = 0;
  std::uint64_t seed = 0;
  std::optional<EvalReport> report;
  std::string error;
};

struct SummaryRow {
  std::string protocol;
  std::string sweep_value;
  std::size_t runs = 0;
  std::size_t failed = 0;
  std::optional<double> auc_mean, auc_std;
  std::optional<double> binary_mean, binary_std;
  std::optional<double> micro_mean, micro_std;
  std::optional<double> macro_mean, macro_std;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<SummaryRow> summary;
  std::string config_hash;
};

/// Data pipeline and training for one repetition of one protocol.
inline EvalReport run_single(const SignedBipartiteGraph& full, const FeatureMatrix* features,
                             const TrainConfig& cfg, const Protocol& protocol, int threads = 1) {
  SignedBipartiteGraph data = full;
  if (protocol.subsample_fraction < 1.0) data = subsample(data, protocol.subsample_fraction, cfg.seed);
  auto split = split_edges(data, cfg.split_ratio, cfg.seed);
  SignedBipartiteGraph train_graph = split.train;
  if (protocol.perturb_fraction > 0.0) train_graph = perturb_signs(train_graph, protocol.perturb_fraction, cfg.seed);

  auto test = labeled_pairs(split.test);
  SignedBipartiteGraph known = full;
  if (cfg.test_neutral) {
    const auto neutral = sample_neutral_pairs(full, split.test.num_edges(), derive_seed(cfg.seed, 0x7465737aULL));
    for (const auto& [g, p] : neutral) {
      test.push_back({full.gene_labels()[g], full.phenotype_labels()[p], 0});
      known.add_edge(g, p, Sign::kPositive);
    }
  }
  TrainConfig run_cfg = cfg;
  run_cfg.ablation = protocol.ablation;
  TrainOptions opts;
  opts.threads = threads;
  opts.known = &known;
  const auto model = train(train_graph, features, run_cfg, opts);
  return evaluate(model, test);
}

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

inline void summarize_metric(const std::vector<double>& v, std::optional<double>& mean, std::optional<double>& sd) {
  if (v.empty()) return;
  const auto [m, s] = mean_std(v);
  mean = m;
  sd = s;
}

}  // namespace detail

inline std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::vector<std::array<std::vector<double>, 4>> values;
  for (const auto& r : runs) {
    const auto key = std::make_pair(r.protocol, r.sweep_value);
    auto [it, inserted] = index.try_emplace(key, rows.size());
    if (inserted) {
      SummaryRow row;
      row.protocol = r.protocol;
      row.sweep_value = r.sweep_value;
      rows.push_back(std::move(row));
      values.emplace_back();
    }
    auto& row = rows[it->second];
    auto& vals = values[it->second];
    ++row.runs;
    if (!r.report) {
      ++row.failed;
      continue;
    }
    if (r.report->auc) vals[0].push_back(*r.report->auc);
    vals[1].push_back(r.report->binary_f1);
    vals[2].push_back(r.report->micro_f1);
    vals[3].push_back(r.report->macro_f1);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail::summarize_metric(values[i][0], rows[i].auc_mean, rows[i].auc_std);
    detail::summarize_metric(values[i][1], rows[i].binary_mean, rows[i].binary_std);
    detail::summarize_metric(values[i][2], rows[i].micro_mean, rows[i].micro_std);
    detail::summarize_metric(values[i][3], rows[i].macro_mean, rows[i].macro_std);
  }
  return rows;
}

/// Runs every (protocol, sweep value, repetition) cell. Repetition r uses
/// seed base + r. Failures are recorded, not thrown.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const SignedBipartiteGraph& full,
                                       const FeatureMatrix* features, int threads = 1) {
  cfg.validate();
  struct Job {
    Protocol protocol;
    std::string sweep_value;
    int repetition;
    TrainConfig train;
  };
  std::vector<Job> jobs;
  const std::vector<std::string> sweep = cfg.sweep_key.empty() ? std::vector<std::string>{""} : cfg.sweep_values;
  for (const auto& pname : cfg.protocols) {
    const auto protocol = parse_protocol(pname);
    for (const auto& value : sweep) {
      TrainConfig t = cfg.base;
      if (!cfg.sweep_key.empty()) {
        set_train_key(t, cfg.sweep_key, value);
        t.validate();
      }
      for (int r = 0; r < cfg.repetitions; ++r) {
        Job job{protocol, value, r, t};
        job.train.seed = cfg.base.seed + static_cast<std::uint64_t>(r);
        jobs.push_back(std::move(job));
      }
    }
  }

  ExperimentResult out;
  out.runs.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      auto& res = out.runs[i];
      res.protocol = job.protocol.name;
      res.sweep_value = job.sweep_value;
      res.repetition = job.repetition;
      res.seed = job.train.seed;
      try {
        res.report = run_single(full, features, job.train, job.protocol);
      } catch (const std::exception& e) {
        res.error = e.what();
      }
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, jobs.size()); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  out.summary = summarize(out.runs);
  out.config_hash = config_hash(cfg.base);
  return out;
}

inline void write_runs_tsv(std::ostream& out, const ExperimentResult& res, const std::string& sweep_key) {
  out << "protocol\t" << (sweep_key.empty() ? "sweep" : sweep_key)
      << "\trepetition\tseed\tauc\tbinary_f1\tmicro_f1\tmacro_f1\tconfig_hash\terror\n";
  for (const auto& r : res.runs) {
    out << r.protocol << '\t' << (r.sweep_value.empty() ? "-" : r.sweep_value) << '\t' << r.repetition << '\t'
        << r.seed << '\t';
    if (r.report) {
      out << optional_metric(r.report->auc) << '\t' << text::format_report(r.report->binary_f1) << '\t'
          << text::format_report(r.report->micro_f1) << '\t' << text::format_report(r.report->macro_f1) << '\t'
          << r.report->config_hash << "\t-\n";
    } else {
      out << "NA\tNA\tNA\tNA\t" << res.config_hash << '\t' << r.error << '\n';
    }
  }
}

/// mean±std per cell; "NA" marks cells without a value.
inline void write_summary_tsv(std::ostream& out, const ExperimentResult& res, const std::string& sweep_key) {
  auto cell = [](const std::optional<double>& m, const std::optional<double>& s) {
    return m ? text::format_report(*m) + "±" + text::format_report(*s) : std::string("NA");
  };
  out << "protocol\t" << (sweep_key.empty() ? "sweep" : sweep_key)
      << "\truns\tfailed\tauc\tbinary_f1\tmicro_f1\tmacro_f1\tconfig_hash\n";
  for (const auto& r : res.summary) {
    out << r.protocol << '\t' << (r.sweep_value.empty() ? "-" : r.sweep_value) << '\t' << r.runs << '\t' << r.failed
        << '\t' << cell(r.auc_mean, r.auc_std) << '\t' << cell(r.binary_mean, r.binary_std) << '\t'
        << cell(r.micro_mean, r.micro_std) << '\t' << cell(r.macro_mean, r.macro_std) << '\t' << res.config_hash
        << '\n';
  }
}

/// Writes runs.tsv and summary.tsv under the output directory.
inline void write_experiment(const std::string& dir, const ExperimentResult& res, const std::string& sweep_key) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  {
    auto out = open_output((std::filesystem::path(dir) / "runs.tsv").string());
    write_runs_tsv(out, res, sweep_key);
  }
  auto out = open_output((std::filesystem::path(dir) / "summary.tsv").string());
  write_summary_tsv(out, res, sweep_key);
}

}  // namespace csgdn
