// Trains on a small planted two-block graph and scores held-out edges.
#include <iostream>

#include "csgdn/csgdn.hpp"

int main() {
  using namespace csgdn;

  SignedBipartiteGraph g;
  for (int i = 0; i < 24; ++i) g.add_gene("g" + std::to_string(i));
  for (int j = 0; j < 4; ++j) g.add_phenotype("p" + std::to_string(j));
  Rng rng(3);
  for (std::size_t i = 0; i < 24; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (uniform01(rng) < 0.3) continue;
      const bool same_block = (i < 12) == (j < 2);
      g.add_edge(i, j, same_block ? Sign::kPositive : Sign::kNegative);
    }
  }

  TrainConfig cfg;
  cfg.epochs = 150;
  cfg.input_dim = cfg.hidden_dim = cfg.embed_dim = 16;
  const auto split = split_edges(g, cfg.split_ratio, cfg.seed);
  TrainOptions opts;
  opts.known = &g;
  const auto model = train(split.train, nullptr, cfg, opts);
  const auto report = evaluate(model, labeled_pairs(split.test));

  std::cout << "epochs " << model.epochs_run << ", final loss " << model.curve.back().total << '\n';
  write_report_tsv(std::cout, report);
}
