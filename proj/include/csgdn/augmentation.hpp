#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "csgdn/common.hpp"
#include "csgdn/graph.hpp"

namespace csgdn {

enum class AugmentMode {
  kDrop,  // masked edges are removed
  kFlip,  // masked edges change sign
};

inline AugmentMode parse_augment_mode(const std::string& s) {
  if (s == "drop") return AugmentMode::kDrop;
  if (s == "flip") return AugmentMode::kFlip;
  throw ConfigError("unknown augmentation mode '" + s + "' (expected drop|flip)");
}

inline const char* to_string(AugmentMode m) { return m == AugmentMode::kDrop ? "drop" : "flip"; }

/// Draws u ~ U[0,1) per edge in stored order; the edge is masked when u < p_r.
inline SignedBipartiteGraph mask_edges(const SignedBipartiteGraph& g, double p_r,
                                       std::uint64_t rng_seed,
                                       AugmentMode mode = AugmentMode::kDrop) {
  if (!(p_r >= 0.0 && p_r <= 1.0)) throw ConfigError("mask probability must be in [0, 1]");
  Rng rng(rng_seed);
  std::vector<SignedEdge> kept;
  kept.reserve(g.num_edges());
  for (const auto& e : g.edges()) {
    const bool masked = uniform01(rng) < p_r;
    if (!masked) {
      kept.push_back(e);
    } else if (mode == AugmentMode::kFlip) {
      kept.push_back({e.gene, e.phenotype, flip(e.sign), e.weight});
    }
  }
  return g.with_edges(kept);
}

inline std::pair<SignedBipartiteGraph, SignedBipartiteGraph> split_by_sign(
    const SignedBipartiteGraph& g) {
  std::vector<SignedEdge> pos, neg;
  for (const auto& e : g.edges()) (e.sign == Sign::kPositive ? pos : neg).push_back(e);
  return {g.with_edges(pos), g.with_edges(neg)};
}

/// Four views: 0–1 come from the original graph, 2–3 from the diffusion
/// graph. Each carries its positive-only and negative-only subgraphs.
struct ViewSet {
  static constexpr std::size_t kViews = 4;
  std::array<SignedBipartiteGraph, kViews> views;
  std::array<SignedBipartiteGraph, kViews> positive;
  std::array<SignedBipartiteGraph, kViews> negative;
  std::uint64_t rng_seed = 0;
};

inline ViewSet assemble_views(std::array<SignedBipartiteGraph, ViewSet::kViews> views,
                              std::uint64_t rng_seed) {
  ViewSet vs;
  vs.rng_seed = rng_seed;
  for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
    auto [pos, neg] = split_by_sign(views[k]);
    vs.positive[k] = std::move(pos);
    vs.negative[k] = std::move(neg);
    vs.views[k] = std::move(views[k]);
  }
  return vs;
}

inline std::uint64_t view_seed(std::uint64_t rng_seed, std::size_t k) {
  return derive_seed(rng_seed, 0x76696577ULL, k);
}

inline ViewSet build_views(const SignedBipartiteGraph& original,
                           const SignedBipartiteGraph& diffusion, double p_r,
                           std::uint64_t rng_seed, AugmentMode mode = AugmentMode::kDrop) {
  if (!original.same_universe(diffusion)) {
    throw DimensionError("original and diffusion graphs have different node universes");
  }
  return assemble_views({mask_edges(original, p_r, view_seed(rng_seed, 0), mode),
                         mask_edges(original, p_r, view_seed(rng_seed, 1), mode),
                         mask_edges(diffusion, p_r, view_seed(rng_seed, 2), mode),
                         mask_edges(diffusion, p_r, view_seed(rng_seed, 3), mode)},
                        rng_seed);
}

}  // namespace csgdn
