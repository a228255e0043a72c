#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "csgdn/autodiff.hpp"
#include "csgdn/config.hpp"
#include "csgdn/encoder.hpp"
#include "csgdn/mlp.hpp"

namespace csgdn {

inline EncoderConfig encoder_config(const TrainConfig& cfg) {
  EncoderConfig e;
  e.input_dim = cfg.input_dim;
  e.hidden_dim = cfg.hidden_dim;
  e.output_dim = cfg.embed_dim;
  e.layers = cfg.layers;
  e.activation = cfg.activation;
  e.view_specific_projection = cfg.view_specific_projection;
  return e;
}

/// Encoder, fusion perceptron g and the sign predictor.
struct ModelParams {
  SignedEncoderParams encoder;
  MlpParams fusion;     // 8d -> d -> d
  MlpParams predictor;  // 2d -> d ... -> 3
};

inline std::vector<Eigen::Index> predictor_widths(Eigen::Index d, int depth) {
  std::vector<Eigen::Index> w{2 * d};
  for (int l = 1; l < depth; ++l) w.push_back(d);
  w.push_back(3);
  return w;
}

inline ModelParams init_model(const TrainConfig& cfg, Rng& rng) {
  ModelParams p;
  const auto d = cfg.embed_dim;
  p.encoder = init_encoder(encoder_config(cfg), rng);
  p.fusion = init_mlp({static_cast<Eigen::Index>(kFusionInputs) * d, d, d}, Activation::kTanh, rng);
  p.predictor = init_mlp(predictor_widths(d, cfg.predictor_layers), Activation::kTanh, rng);
  return p;
}

template <class Params, class F>
void for_each_model_param(Params& p, F&& f) {
  for_each_encoder_param(p.encoder, f);
  for_each_param(p.fusion, "fusion", f);
  for_each_param(p.predictor, "predictor", f);
}

/// Every embedding produced by one forward pass.
struct ForwardPass {
  std::array<ad::Var, ViewSet::kViews> positive;
  std::array<ad::Var, ViewSet::kViews> negative;
  ad::Var fused;
};

inline ForwardPass model_forward(ad::Var features,
                                 const std::array<ViewNeighbors, ViewSet::kViews>& views,
                                 const ModelParams& params, const EncoderConfig& ecfg,
                                 ad::ParamBinder& bind) {
  ForwardPass out;
  for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
    auto z = encode_view(features, views[k], params.encoder, k, ecfg, bind);
    out.positive[k] = z.positive;
    out.negative[k] = z.negative;
  }
  std::vector<ad::Var> parts(out.positive.begin(), out.positive.end());
  parts.insert(parts.end(), out.negative.begin(), out.negative.end());
  out.fused = fuse(parts, params.fusion, bind);
  return out;
}

/// Gene index into the node table, phenotype index into the phenotype list.
struct NodePair {
  std::size_t gene = 0;
  std::size_t phenotype = 0;
};

/// Predictor logits for MLP(z_gene ∥ z_phenotype), one row per pair.
inline ad::Var pair_logits(ad::Var embeddings, const std::vector<NodePair>& pairs, std::size_t num_genes,
                           const MlpParams& predictor, ad::ParamBinder& bind) {
  std::vector<Eigen::Index> genes, phenos;
  genes.reserve(pairs.size());
  phenos.reserve(pairs.size());
  for (const auto& p : pairs) {
    genes.push_back(static_cast<Eigen::Index>(p.gene));
    phenos.push_back(static_cast<Eigen::Index>(num_genes + p.phenotype));
  }
  auto zg = ad::gather_rows(embeddings, std::move(genes));
  auto zp = ad::gather_rows(embeddings, std::move(phenos));
  return mlp_forward(ad::hcat({zg, zp}), predictor, bind);
}

/// Predictor logits from fixed gene and phenotype embedding rows.
inline Matrix pair_logits(const Matrix& gene_rows, const Matrix& phenotype_rows, const MlpParams& predictor) {
  if (gene_rows.rows() != phenotype_rows.rows()) throw DimensionError("pair rows mismatch");
  Matrix in(gene_rows.rows(), gene_rows.cols() + phenotype_rows.cols());
  in << gene_rows, phenotype_rows;
  return mlp_apply(in, predictor);
}

}  // namespace csgdn
