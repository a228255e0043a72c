#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "csgdn/augmentation.hpp"
#include "csgdn/autodiff.hpp"
#include "csgdn/graph.hpp"
#include "csgdn/mlp.hpp"

namespace csgdn {

struct EncoderConfig {
  Eigen::Index input_dim = 64;
  Eigen::Index hidden_dim = 64;
  Eigen::Index output_dim = 64;
  int layers = 2;
  Activation activation = Activation::kTanh;
  bool view_specific_projection = false;

  Eigen::Index concat_dim() const { return input_dim + layers * hidden_dim; }
};

/// Single-head attention layer: weight (in x out), attention (1 x 2·out),
/// bias (1 x out).
struct AttentionLayerParams {
  Matrix weight;
  Matrix attention;
  Matrix bias;
};

/// One attention stack per sign. Projections are shared per sign unless the
/// view-specific mode holds one per view.
struct SignedEncoderParams {
  std::vector<AttentionLayerParams> positive;
  std::vector<AttentionLayerParams> negative;
  std::vector<Matrix> positive_projection;
  std::vector<Matrix> negative_projection;

  const std::vector<AttentionLayerParams>& stack(Sign s) const {
    return s == Sign::kPositive ? positive : negative;
  }
  const Matrix& projection(Sign s, std::size_t view) const {
    const auto& p = s == Sign::kPositive ? positive_projection : negative_projection;
    return p.size() == 1 ? p[0] : p.at(view);
  }
};

inline SignedEncoderParams init_encoder(const EncoderConfig& cfg, Rng& rng) {
  if (cfg.layers < 1) throw ConfigError("encoder needs at least one layer");
  if (cfg.input_dim <= 0 || cfg.hidden_dim <= 0 || cfg.output_dim <= 0) {
    throw ConfigError("encoder dimensions must be positive");
  }
  SignedEncoderParams p;
  for (auto* stack : {&p.positive, &p.negative}) {
    Eigen::Index in = cfg.input_dim;
    for (int l = 0; l < cfg.layers; ++l) {
      AttentionLayerParams layer;
      layer.weight = glorot_uniform(in, cfg.hidden_dim, rng);
      layer.attention = glorot_uniform(2 * cfg.hidden_dim, 1, rng, 1, 2 * cfg.hidden_dim);
      layer.bias = Matrix::Zero(1, cfg.hidden_dim);
      stack->push_back(std::move(layer));
      in = cfg.hidden_dim;
    }
  }
  const std::size_t copies = cfg.view_specific_projection ? ViewSet::kViews : 1;
  for (std::size_t k = 0; k < copies; ++k) {
    p.positive_projection.push_back(glorot_uniform(cfg.concat_dim(), cfg.output_dim, rng));
    p.negative_projection.push_back(glorot_uniform(cfg.concat_dim(), cfg.output_dim, rng));
  }
  return p;
}

template <class Params, class F>
void for_each_encoder_param(Params& p, F&& f) {
  for (const auto& [name, stack] : {std::pair{"pos", &p.positive}, std::pair{"neg", &p.negative}}) {
    for (std::size_t l = 0; l < stack->size(); ++l) {
      const std::string base = std::string("encoder.") + name + ".layer" + std::to_string(l);
      f(base + ".weight", (*stack)[l].weight);
      f(base + ".attention", (*stack)[l].attention);
      f(base + ".bias", (*stack)[l].bias);
    }
  }
  for (std::size_t k = 0; k < p.positive_projection.size(); ++k) {
    f("encoder.pos.projection" + std::to_string(k), p.positive_projection[k]);
    f("encoder.neg.projection" + std::to_string(k), p.negative_projection[k]);
  }
}

/// Undirected neighbours per global node index.
using NeighborLists = std::vector<std::vector<std::uint32_t>>;

inline NeighborLists neighbor_lists(const SignedBipartiteGraph& g) {
  NeighborLists out(g.num_nodes());
  for (const auto& e : g.edges()) {
    const auto u = static_cast<std::uint32_t>(g.gene_node(e.gene));
    const auto v = static_cast<std::uint32_t>(g.phenotype_node(e.phenotype));
    out[u].push_back(v);
    out[v].push_back(u);
  }
  return out;
}

struct ViewNeighbors {
  NeighborLists positive;
  NeighborLists negative;

  const NeighborLists& of(Sign s) const { return s == Sign::kPositive ? positive : negative; }
};

inline std::array<ViewNeighbors, ViewSet::kViews> view_neighbors(const ViewSet& vs) {
  std::array<ViewNeighbors, ViewSet::kViews> out;
  for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
    out[k] = {neighbor_lists(vs.positive[k]), neighbor_lists(vs.negative[k])};
  }
  return out;
}

namespace detail {

constexpr double kLeakySlope = 0.2;

struct AttentionCache {
  std::vector<std::vector<double>> alpha;  // per node, over [self, neighbours...]
  std::vector<std::vector<double>> pre;    // logits before LeakyReLU
};

}  // namespace detail

/// out_i = Σ_{j ∈ {i} ∪ N(i)} α_ij x_j with
/// α_i· = softmax_j LeakyReLU(a_src·x_i + a_dst·x_j).
inline ad::Var attention_aggregate(ad::Var x, ad::Var attention, const NeighborLists& nbrs) {
  const Matrix& xv = x.value();
  const auto n = xv.rows();
  const auto h = xv.cols();
  if (static_cast<Eigen::Index>(nbrs.size()) != n) {
    throw DimensionError("neighbour lists cover " + std::to_string(nbrs.size()) + " nodes, features " +
                         std::to_string(n));
  }
  if (attention.rows() != 1 || attention.cols() != 2 * h) {
    throw DimensionError("attention vector must be 1 x " + std::to_string(2 * h));
  }
  const RowVector a_src = attention.value().leftCols(h);
  const RowVector a_dst = attention.value().rightCols(h);
  const Vector src = xv * a_src.transpose();
  const Vector dst = xv * a_dst.transpose();

  auto cache = std::make_shared<detail::AttentionCache>();
  cache->alpha.resize(static_cast<std::size_t>(n));
  cache->pre.resize(static_cast<std::size_t>(n));
  Matrix out = Matrix::Zero(n, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& nb = nbrs[static_cast<std::size_t>(i)];
    auto& pre = cache->pre[static_cast<std::size_t>(i)];
    auto& alpha = cache->alpha[static_cast<std::size_t>(i)];
    pre.resize(nb.size() + 1);
    alpha.resize(nb.size() + 1);
    pre[0] = src(i) + dst(i);
    for (std::size_t t = 0; t < nb.size(); ++t) pre[t + 1] = src(i) + dst(nb[t]);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < pre.size(); ++t) {
      const double e = pre[t] > 0 ? pre[t] : detail::kLeakySlope * pre[t];
      if (std::isnan(e)) throw NumericalError("NaN attention logit at node " + std::to_string(i));
      alpha[t] = e;
      mx = std::max(mx, e);
    }
    double z = 0.0;
    for (auto& a : alpha) {
      a = std::exp(a - mx);
      z += a;
    }
    for (auto& a : alpha) a /= z;
    out.row(i) += alpha[0] * xv.row(i);
    for (std::size_t t = 0; t < nb.size(); ++t) out.row(i) += alpha[t + 1] * xv.row(nb[t]);
  }

  const NeighborLists* nb_ptr = &nbrs;
  return x.tape()->record(
      std::move(out), {x, attention},
      [x, attention, cache, nb_ptr, a_src, a_dst](ad::Tape& t, const Matrix& g) {
        const Matrix& xv = x.value();
        const auto n = xv.rows();
        const auto h = xv.cols();
        const auto& nbrs = *nb_ptr;
        Matrix dx = Matrix::Zero(n, h);
        Vector dsrc = Vector::Zero(n);
        Vector ddst = Vector::Zero(n);
        std::vector<double> dalpha;
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto& nb = nbrs[static_cast<std::size_t>(i)];
          const auto& alpha = cache->alpha[static_cast<std::size_t>(i)];
          const auto& pre = cache->pre[static_cast<std::size_t>(i)];
          auto node_at = [&](std::size_t t) -> Eigen::Index {
            return t == 0 ? i : static_cast<Eigen::Index>(nb[t - 1]);
          };
          dalpha.assign(alpha.size(), 0.0);
          double weighted = 0.0;
          for (std::size_t t = 0; t < alpha.size(); ++t) {
            const auto j = node_at(t);
            dx.row(j) += alpha[t] * g.row(i);
            dalpha[t] = g.row(i).dot(xv.row(j));
            weighted += alpha[t] * dalpha[t];
          }
          for (std::size_t t = 0; t < alpha.size(); ++t) {
            const double de = alpha[t] * (dalpha[t] - weighted);
            const double dpre = de * (pre[t] > 0 ? 1.0 : detail::kLeakySlope);
            dsrc(i) += dpre;
            ddst(node_at(t)) += dpre;
          }
        }
        if (t.needs_grad(x)) {
          dx += dsrc * a_src + ddst * a_dst;
          t.accumulate(x, dx);
        }
        if (t.needs_grad(attention)) {
          Matrix da(1, 2 * h);
          da.leftCols(h) = dsrc.transpose() * xv;
          da.rightCols(h) = ddst.transpose() * xv;
          t.accumulate(attention, da);
        }
      });
}

/// One attention layer: act(aggregate(h·W) + b).
inline ad::Var attention_layer(ad::Var h, const AttentionLayerParams& p, const NeighborLists& nbrs,
                               Activation act, ad::ParamBinder& bind) {
  if (h.cols() != p.weight.rows()) {
    throw DimensionError("attention layer expects width " + std::to_string(p.weight.rows()) +
                         ", got " + std::to_string(h.cols()));
  }
  auto x = ad::matmul(h, bind(p.weight));
  auto agg = attention_aggregate(x, bind(p.attention), nbrs);
  return activate(ad::add_row(agg, bind(p.bias)), act);
}

/// Per-layer outputs h⁽¹⁾..h⁽ᴸ⁾ over one sign-specific subgraph.
inline std::vector<ad::Var> attention_forward(ad::Var features,
                                              const std::vector<AttentionLayerParams>& stack,
                                              const NeighborLists& nbrs, Activation act,
                                              ad::ParamBinder& bind) {
  std::vector<ad::Var> layers;
  ad::Var h = features;
  for (const auto& p : stack) {
    h = attention_layer(h, p, nbrs, act, bind);
    layers.push_back(h);
  }
  return layers;
}

struct ViewEmbedding {
  ad::Var positive;
  ad::Var negative;
};

/// z_k^ζ = [h⁽⁰⁾ ∥ h⁽¹⁾ ∥ … ∥ h⁽ᴸ⁾]·W_k^ζ for both signs of view k.
inline ViewEmbedding encode_view(ad::Var features, const ViewNeighbors& view,
                                 const SignedEncoderParams& params, std::size_t k,
                                 const EncoderConfig& cfg, ad::ParamBinder& bind) {
  auto encode = [&](Sign s) {
    auto layers = attention_forward(features, params.stack(s), view.of(s), cfg.activation, bind);
    std::vector<ad::Var> parts{features};
    parts.insert(parts.end(), layers.begin(), layers.end());
    return ad::matmul(ad::hcat(parts), bind(params.projection(s, k)));
  };
  return {encode(Sign::kPositive), encode(Sign::kNegative)};
}

constexpr std::size_t kFusionInputs = 2 * ViewSet::kViews;

/// g(z⁺₁ ∥ … ∥ z⁺₄ ∥ z⁻₁ ∥ … ∥ z⁻₄).
inline ad::Var fuse(std::span<const ad::Var> per_view, const MlpParams& g, ad::ParamBinder& bind) {
  if (per_view.size() != kFusionInputs) {
    throw InterfaceError("fuse expects " + std::to_string(kFusionInputs) + " embeddings, got " +
                         std::to_string(per_view.size()));
  }
  for (const auto& v : per_view) {
    if (v.cols() != per_view[0].cols() || v.rows() != per_view[0].rows()) {
      throw InterfaceError("fuse inputs must share one shape");
    }
  }
  return mlp_forward(ad::hcat(per_view), g, bind);
}

}  // namespace csgdn
