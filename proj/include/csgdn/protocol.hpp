#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "csgdn/common.hpp"
#include "csgdn/graph.hpp"

namespace csgdn {

struct EdgeSplit {
  SignedBipartiteGraph train;
  SignedBipartiteGraph test;
  bool stratified = true;
  std::string warning;
};

namespace detail {

inline std::size_t floor_count(double fraction, std::size_t n) {
  // Guard against 0.1 * 100 = 10.000000000000002 style rounding.
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

}  // namespace detail

/// Uniform split of the edges into train and test, per sign class when both
/// classes have at least two edges. Each class contributes round(ratio·count)
/// training edges.
inline EdgeSplit split_edges(const SignedBipartiteGraph& g, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must be in (0, 1)");
  Rng rng(derive_seed(seed, 0x73706c74ULL));
  EdgeSplit out;
  const auto& edges = g.edges();
  std::vector<std::vector<std::size_t>> groups(2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    groups[edges[i].sign == Sign::kPositive ? 0 : 1].push_back(i);
  }
  if (groups[0].size() < 2 || groups[1].size() < 2) {
    out.stratified = false;
    out.warning = "a sign class has fewer than 2 edges; split is not stratified";
    std::vector<std::size_t> all(edges.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups = {all};
  }
  std::vector<SignedEdge> train, test;
  for (const auto& grp : groups) {
    const auto perm = random_permutation(grp.size(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(grp.size())));
    std::vector<std::size_t> picked(grp.size());
    for (std::size_t r = 0; r < grp.size(); ++r) picked[r] = grp[perm[r]];
    std::sort(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::sort(picked.begin() + static_cast<std::ptrdiff_t>(n_train), picked.end());
    for (std::size_t r = 0; r < picked.size(); ++r) (r < n_train ? train : test).push_back(edges[picked[r]]);
  }
  out.train = g.with_edges(train);
  out.test = g.with_edges(test);
  return out;
}

/// Flips the signs of exactly ⌊fraction·|E|⌋ distinct, uniformly chosen edges.
inline SignedBipartiteGraph perturb_signs(const SignedBipartiteGraph& g, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("perturb fraction must be in [0, 1]");
  Rng rng(derive_seed(seed, 0x70657274ULL));
  const auto perm = random_permutation(g.num_edges(), rng);
  const auto k = detail::floor_count(fraction, g.num_edges());
  std::vector<bool> flipped(g.num_edges(), false);
  for (std::size_t r = 0; r < k; ++r) flipped[perm[r]] = true;
  std::vector<SignedEdge> out = g.edges();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (flipped[i]) out[i].sign = flip(out[i].sign);
  }
  return g.with_edges(out);
}

/// Keeps ⌊fraction·|E|⌋ uniformly chosen edges; the node universe is kept.
inline SignedBipartiteGraph subsample(const SignedBipartiteGraph& g, double fraction,
                                      std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("subsample fraction must be in (0, 1]");
  Rng rng(derive_seed(seed, 0x73756273ULL));
  const auto perm = random_permutation(g.num_edges(), rng);
  const auto k = detail::floor_count(fraction, g.num_edges());
  std::vector<std::size_t> keep(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(keep.begin(), keep.end());
  std::vector<SignedEdge> out;
  for (auto i : keep) out.push_back(g.edges()[i]);
  return g.with_edges(out);
}

using GenePhenotypePair = std::pair<std::size_t, std::size_t>;

/// Uniform sample of gene–phenotype pairs that carry no edge in `known`.
/// Returns every such pair when fewer than `count` exist.
inline std::vector<GenePhenotypePair> sample_neutral_pairs(const SignedBipartiteGraph& known,
                                                           std::size_t count, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x6e657574ULL));
  const std::size_t n = known.num_genes(), m = known.num_phenotypes();
  const std::size_t universe = n * m;
  const std::size_t available = universe - known.num_edges();
  std::vector<GenePhenotypePair> out;
  if (count == 0 || available == 0) return out;

  if (count * 4 >= available || universe <= 4'000'000) {
    std::vector<GenePhenotypePair> candidates;
    candidates.reserve(available);
    for (std::size_t g = 0; g < n; ++g) {
      for (std::size_t p = 0; p < m; ++p) {
        if (!known.edge_sign(g, p)) candidates.emplace_back(g, p);
      }
    }
    const auto perm = random_permutation(candidates.size(), rng);
    const auto take = std::min(count, candidates.size());
    for (std::size_t r = 0; r < take; ++r) out.push_back(candidates[perm[r]]);
  } else {
    std::unordered_set<std::uint64_t> seen;
    while (out.size() < count) {
      const auto g = static_cast<std::size_t>(rng() % n);
      const auto p = static_cast<std::size_t>(rng() % m);
      if (known.edge_sign(g, p)) continue;
      if (!seen.insert(SignedBipartiteGraph::pair_key(g, p)).second) continue;
      out.emplace_back(g, p);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace csgdn
