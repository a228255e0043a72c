#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "csgdn/augmentation.hpp"
#include "csgdn/common.hpp"
#include "csgdn/diffusion.hpp"
#include "csgdn/mlp.hpp"
#include "csgdn/objectives.hpp"
#include "csgdn/optimizer.hpp"
#include "csgdn/transfer.hpp"

namespace csgdn {

enum class Ablation {
  kFull,
  kNoDiffuse,  // views 3–4 are re-maskings of the original graph
  kNoAug,      // views are the unmasked original and diffusion graphs
  kNoCL,       // contrastive weight forced to 0
};

inline Ablation parse_ablation(const std::string& s) {
  if (s == "full") return Ablation::kFull;
  if (s == "no-diffuse") return Ablation::kNoDiffuse;
  if (s == "no-aug") return Ablation::kNoAug;
  if (s == "no-cl") return Ablation::kNoCL;
  throw ConfigError("unknown ablation '" + s + "' (expected full|no-diffuse|no-aug|no-cl)");
}

inline const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoDiffuse: return "no-diffuse";
    case Ablation::kNoAug: return "no-aug";
    case Ablation::kNoCL: return "no-cl";
  }
  return "full";
}

struct TrainConfig {
  DiffusionConfig diffusion;
  DensifyPolicy densify = DensifyPolicy::top_k(10);

  double mask_rate = 0.1;
  AugmentMode augment_mode = AugmentMode::kDrop;

  LossConfig loss;
  OutputSquash squash = OutputSquash::kNormalizedSigmoid;

  Eigen::Index input_dim = 64;
  Eigen::Index hidden_dim = 64;
  Eigen::Index embed_dim = 64;
  int layers = 2;
  int predictor_layers = 2;
  Activation activation = Activation::kTanh;
  bool view_specific_projection = false;

  int epochs = 300;
  int patience = 50;  // epochs without a new best loss before stopping; 0 disables
  double learning_rate = 5e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 42;
  Ablation ablation = Ablation::kFull;
  double neutral_ratio = 1.0;  // neutral training pairs per labelled edge

  double split_ratio = 0.8;
  double perturb_fraction = 0.0;
  double subsample_fraction = 1.0;
  bool test_neutral = false;

  bool fit_transfer = true;
  TransferConfig transfer;

  void validate() const {
    diffusion.validate();
    densify.validate();
    loss.validate();
    if (!(mask_rate >= 0.0 && mask_rate <= 1.0)) throw ConfigError("mask_rate must be in [0, 1]");
    if (input_dim <= 0 || hidden_dim <= 0 || embed_dim <= 0) throw ConfigError("dimensions must be positive");
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (predictor_layers < 1) throw ConfigError("predictor_layers must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(neutral_ratio >= 0.0)) throw ConfigError("neutral_ratio must be >= 0");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must be in (0, 1)");
    if (!(perturb_fraction >= 0.0 && perturb_fraction <= 1.0)) {
      throw ConfigError("perturb_fraction must be in [0, 1]");
    }
    if (!(subsample_fraction > 0.0 && subsample_fraction <= 1.0)) {
      throw ConfigError("subsample_fraction must be in (0, 1]");
    }
    if (transfer.epochs < 0 || !(transfer.learning_rate > 0.0)) throw ConfigError("bad transfer settings");
  }

  /// λ_cl after the ablation is applied.
  double effective_lambda() const { return ablation == Ablation::kNoCL ? 0.0 : loss.lambda_cl; }
};

/// Flat `section.key -> value` view of a declarative config file.
using KeyValues = std::map<std::string, std::string>;

/// Parses `[section]` headers and `key = value` lines; `#` and `;` start
/// comments.
inline KeyValues parse_key_values(const std::string& body) {
  KeyValues kv;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in(body);
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = text::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section header", line_no);
      section = std::string(text::trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const auto key = std::string(text::trim(line.substr(0, eq)));
    const auto value = std::string(text::trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", line_no);
    const auto full = section.empty() ? key : section + "." + key;
    if (!kv.emplace(full, value).second) throw ParseError("duplicate key '" + full + "'", line_no);
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  auto in = open_input(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  double d = 0.0;
  if (!text::parse_double(v, d) || !std::isfinite(d)) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

inline std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  if (!text::parse_u64(v, out)) throw ConfigError("'" + key + "' expects an unsigned integer, got '" + v + "'");
  return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true|false, got '" + v + "'");
}

inline std::string from_bool(bool b) { return b ? "true" : "false"; }

inline std::vector<Eigen::Index> to_widths(const std::string& key, const std::string& v) {
  std::vector<Eigen::Index> out;
  for (auto part : text::split(v, ',')) {
    part = text::trim(part);
    if (part.empty()) continue;
    out.push_back(static_cast<Eigen::Index>(to_int(key, std::string(part))));
  }
  return out;
}

inline std::string from_widths(const std::vector<Eigen::Index>& w) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? "," : "") + std::to_string(w[i]);
  return s;
}

/// One binding per config key: how to write it into a TrainConfig and read
/// it back in canonical form.
struct Field {
  const char* key;
  std::function<void(TrainConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define CSGDN_DOUBLE(KEY, MEMBER)                                                              \
  Field {                                                                                      \
    KEY, [](TrainConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_double(k, v); }, \
        [](const TrainConfig& c) { return text::format_exact(c.MEMBER); }                      \
  }
#define CSGDN_INT(KEY, MEMBER, TYPE)                                                           \
  Field {                                                                                      \
    KEY, [](TrainConfig& c, const std::string& k, const std::string& v) { c.MEMBER = static_cast<TYPE>(to_int(k, v)); }, \
        [](const TrainConfig& c) { return std::to_string(c.MEMBER); }                         \
  }
#define CSGDN_BOOL(KEY, MEMBER)                                                                \
  Field {                                                                                      \
    KEY, [](TrainConfig& c, const std::string& k, const std::string& v) { c.MEMBER = to_bool(k, v); }, \
        [](const TrainConfig& c) { return from_bool(c.MEMBER); }                               \
  }

inline const std::vector<Field>& train_fields() {
  static const std::vector<Field> fields = {
      CSGDN_DOUBLE("diffusion.c", diffusion.c),
      CSGDN_DOUBLE("diffusion.beta", diffusion.beta_bal),
      CSGDN_DOUBLE("diffusion.gamma", diffusion.gamma_bal),
      CSGDN_DOUBLE("diffusion.epsilon", diffusion.epsilon),
      CSGDN_INT("diffusion.max_iters", diffusion.max_iters, int),
      Field{"diffusion.densify",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.densify = DensifyPolicy::parse(v); },
            [](const TrainConfig& c) { return c.densify.to_string(); }},
      CSGDN_DOUBLE("augment.mask_rate", mask_rate),
      Field{"augment.mode",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.augment_mode = parse_augment_mode(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.augment_mode)); }},
      CSGDN_DOUBLE("loss.tau", loss.tau),
      CSGDN_DOUBLE("loss.alpha", loss.alpha),
      CSGDN_DOUBLE("loss.lambda_cl", loss.lambda_cl),
      CSGDN_INT("loss.batch_size", loss.batch_size, int),
      CSGDN_BOOL("loss.include_positive_in_denominator", loss.include_positive_in_denominator),
      Field{"loss.squash",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.squash = parse_squash(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.squash)); }},
      CSGDN_INT("model.input_dim", input_dim, Eigen::Index),
      CSGDN_INT("model.hidden_dim", hidden_dim, Eigen::Index),
      CSGDN_INT("model.embed_dim", embed_dim, Eigen::Index),
      CSGDN_INT("model.layers", layers, int),
      CSGDN_INT("model.predictor_layers", predictor_layers, int),
      Field{"model.activation",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.activation = parse_activation(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.activation)); }},
      CSGDN_BOOL("model.view_specific_projection", view_specific_projection),
      CSGDN_INT("train.epochs", epochs, int),
      CSGDN_INT("train.patience", patience, int),
      CSGDN_DOUBLE("train.learning_rate", learning_rate),
      Field{"train.optimizer",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.optimizer = parse_optimizer(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.optimizer)); }},
      Field{"train.seed",
            [](TrainConfig& c, const std::string& k, const std::string& v) { c.seed = parse_seed(k, v); },
            [](const TrainConfig& c) { return std::to_string(c.seed); }},
      Field{"train.ablation",
            [](TrainConfig& c, const std::string&, const std::string& v) { c.ablation = parse_ablation(v); },
            [](const TrainConfig& c) { return std::string(to_string(c.ablation)); }},
      CSGDN_DOUBLE("train.neutral_ratio", neutral_ratio),
      CSGDN_DOUBLE("protocol.split_ratio", split_ratio),
      CSGDN_DOUBLE("protocol.perturb_fraction", perturb_fraction),
      CSGDN_DOUBLE("protocol.subsample_fraction", subsample_fraction),
      CSGDN_BOOL("protocol.test_neutral", test_neutral),
      CSGDN_BOOL("transfer.enabled", fit_transfer),
      CSGDN_INT("transfer.epochs", transfer.epochs, int),
      CSGDN_DOUBLE("transfer.learning_rate", transfer.learning_rate),
      Field{"transfer.hidden",
            [](TrainConfig& c, const std::string& k, const std::string& v) { c.transfer.hidden = to_widths(k, v); },
            [](const TrainConfig& c) { return from_widths(c.transfer.hidden); }},
  };
  return fields;
}

#undef CSGDN_DOUBLE
#undef CSGDN_INT
#undef CSGDN_BOOL

}  // namespace detail

inline bool is_train_key(const std::string& key) {
  for (const auto& f : detail::train_fields()) {
    if (key == f.key) return true;
  }
  return false;
}

inline void set_train_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : detail::train_fields()) {
    if (key == f.key) {
      f.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

/// Applies every training key in `kv`; keys outside the training sections are
/// left for the caller. Unknown keys inside them are errors.
inline TrainConfig apply_train_keys(TrainConfig cfg, const KeyValues& kv) {
  static const std::vector<std::string> sections{"diffusion.", "augment.", "loss.", "model.",
                                                 "train.", "protocol.", "transfer."};
  for (const auto& [key, value] : kv) {
    bool ours = false;
    for (const auto& s : sections) ours = ours || key.rfind(s, 0) == 0;
    if (ours) set_train_key(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

/// Canonical `key = value` listing, one per line in key order.
inline std::string canonical_text(const TrainConfig& cfg) {
  std::map<std::string, std::string> sorted;
  for (const auto& f : detail::train_fields()) sorted.emplace(f.key, f.get(cfg));
  std::string out;
  for (const auto& [k, v] : sorted) out += k + " = " + v + "\n";
  return out;
}

inline TrainConfig parse_train_config(const std::string& body) {
  return apply_train_keys(TrainConfig{}, parse_key_values(body));
}

/// FNV-1a over the canonical listing, as 16 hex digits.
inline std::string config_hash(const TrainConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace csgdn
