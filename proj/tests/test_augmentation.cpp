#include <gtest/gtest.h>

#include "support.hpp"

namespace {

using namespace csgdn;
using csgdn::testing::random_graph;

SignedBipartiteGraph big_graph(std::size_t edges) {
  SignedBipartiteGraph g;
  const std::size_t phenos = 100;
  for (std::size_t i = 0; i < edges / phenos; ++i) g.add_gene("g" + std::to_string(i));
  for (std::size_t j = 0; j < phenos; ++j) g.add_phenotype("p" + std::to_string(j));
  for (std::size_t e = 0; e < edges; ++e) {
    g.add_edge(e / phenos, e % phenos, e % 3 ? Sign::kPositive : Sign::kNegative);
  }
  return g;
}

bool is_subset(const SignedBipartiteGraph& sub, const SignedBipartiteGraph& super) {
  for (const auto& e : sub.edges()) {
    const auto s = super.edge_sign(e.gene, e.phenotype);
    if (!s || *s != e.sign) return false;
  }
  return true;
}

TEST(Mask, ZeroProbabilityKeepsEverything) {
  Rng rng(1);
  const auto g = random_graph(10, 5, 0.5, rng);
  EXPECT_TRUE(same_edges(mask_edges(g, 0.0, 99), g));
}

TEST(Mask, FullProbabilityDropsEverything) {
  Rng rng(2);
  const auto g = random_graph(10, 5, 0.5, rng);
  const auto out = mask_edges(g, 1.0, 99);
  EXPECT_EQ(out.num_edges(), 0u);
  EXPECT_TRUE(out.same_universe(g));
}

TEST(Mask, SurvivorsStayInTheBinomialBand) {
  const auto g = big_graph(10000);
  for (std::uint64_t seed : {0ull, 1ull, 42ull, 1234567ull, 0xdeadbeefull}) {
    const auto n = mask_edges(g, 0.1, seed).num_edges();
    EXPECT_GE(n, 8700u) << "seed " << seed;
    EXPECT_LE(n, 9300u) << "seed " << seed;
  }
}

TEST(Mask, FlipModeKeepsEveryPairAndFlipsMasked) {
  Rng rng(3);
  const auto g = random_graph(20, 8, 0.4, rng);
  const auto flipped = mask_edges(g, 0.3, 5, AugmentMode::kFlip);
  const auto dropped = mask_edges(g, 0.3, 5, AugmentMode::kDrop);
  EXPECT_EQ(flipped.num_edges(), g.num_edges());
  std::size_t changed = 0;
  for (const auto& e : g.edges()) {
    const bool kept = dropped.edge_sign(e.gene, e.phenotype).has_value();
    const auto s = *flipped.edge_sign(e.gene, e.phenotype);
    EXPECT_EQ(s == e.sign, kept);
    changed += s != e.sign;
  }
  EXPECT_EQ(changed, g.num_edges() - dropped.num_edges());
}

TEST(Mask, BadProbabilityIsAConfigError) {
  SignedBipartiteGraph g({"a"}, {"x"});
  EXPECT_THROW(mask_edges(g, 1.5, 0), ConfigError);
  EXPECT_THROW(mask_edges(g, -0.1, 0), ConfigError);
}

TEST(Views, ZeroMaskReproducesTheSources) {
  Rng rng(4);
  const auto g = random_graph(10, 5, 0.3, rng);
  const auto s = random_graph(10, 5, 0.7, rng);
  const auto vs = build_views(g, s, 0.0, 7);
  EXPECT_TRUE(same_edges(vs.views[0], g));
  EXPECT_TRUE(same_edges(vs.views[1], g));
  EXPECT_TRUE(same_edges(vs.views[2], s));
  EXPECT_TRUE(same_edges(vs.views[3], s));
}

TEST(Views, SameSeedIsBitIdentical) {
  Rng rng(5);
  const auto g = random_graph(12, 6, 0.4, rng);
  const auto s = random_graph(12, 6, 0.6, rng);
  const auto a = build_views(g, s, 0.3, 11);
  const auto b = build_views(g, s, 0.3, 11);
  for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
    EXPECT_EQ(a.views[k].edges(), b.views[k].edges());
    EXPECT_EQ(a.positive[k].edges(), b.positive[k].edges());
    EXPECT_EQ(a.negative[k].edges(), b.negative[k].edges());
  }
}

TEST(Views, SignSplitSizesFiveThree) {
  SignedBipartiteGraph g({"a", "b", "c", "d"}, {"x", "y"});
  const int signs[] = {1, 1, 1, -1, 1, -1, 1, -1};
  for (std::size_t e = 0; e < 8; ++e) {
    g.add_edge(e / 2, e % 2, signs[e] > 0 ? Sign::kPositive : Sign::kNegative);
  }
  const auto vs = build_views(g, g, 0.0, 3);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(vs.positive[k].num_edges(), 5u);
    EXPECT_EQ(vs.negative[k].num_edges(), 3u);
  }
}

TEST(Views, SubsetAndPartitionHoldForEveryView) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const auto g = random_graph(15, 6, 0.3, rng);
    const auto s = random_graph(15, 6, 0.6, rng);
    const auto vs = build_views(g, s, 0.25, rng());
    for (std::size_t k = 0; k < ViewSet::kViews; ++k) {
      const auto& source = k < 2 ? g : s;
      EXPECT_TRUE(is_subset(vs.views[k], source));
      EXPECT_EQ(vs.positive[k].num_edges() + vs.negative[k].num_edges(), vs.views[k].num_edges());
      EXPECT_EQ(vs.positive[k].count(Sign::kNegative), 0u);
      EXPECT_EQ(vs.negative[k].count(Sign::kPositive), 0u);
      EXPECT_TRUE(is_subset(vs.positive[k], vs.views[k]));
      EXPECT_TRUE(is_subset(vs.negative[k], vs.views[k]));
    }
  }
}

TEST(Views, SiblingViewsUseDistinctStreams) {
  Rng rng(7);
  const auto g = random_graph(20, 10, 0.5, rng);
  ASSERT_GE(g.num_edges(), 50u);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto vs = build_views(g, g, 0.3, seed);
    EXPECT_NE(vs.views[0].edges(), vs.views[1].edges());
    EXPECT_NE(vs.views[2].edges(), vs.views[3].edges());
  }
}

TEST(Views, UniverseMismatchIsRejected) {
  SignedBipartiteGraph a({"g1"}, {"p1"}), b({"g1", "g2"}, {"p1"});
  EXPECT_THROW(build_views(a, b, 0.1, 0), DimensionError);
}

}  // namespace
