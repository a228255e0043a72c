#pragma once

#include <functional>
#include <utility>
#include <vector>
#include <sstream>
#include <string>

#include "csgdn/csgdn.hpp"

namespace csgdn::testing {

/// Random signed bipartite graph; every node gets at least one edge when
/// `dangling_free` is set.
inline SignedBipartiteGraph random_graph(std::size_t genes, std::size_t phenotypes, double density, Rng& rng,
                                         double positive_share = 0.5, bool dangling_free = true) {
  SignedBipartiteGraph g;
  for (std::size_t i = 0; i < genes; ++i) g.add_gene("g" + std::to_string(i));
  for (std::size_t j = 0; j < phenotypes; ++j) g.add_phenotype("p" + std::to_string(j));
  auto sign = [&] { return uniform01(rng) < positive_share ? Sign::kPositive : Sign::kNegative; };
  for (std::size_t i = 0; i < genes; ++i) {
    for (std::size_t j = 0; j < phenotypes; ++j) {
      if (uniform01(rng) < density) g.add_edge(i, j, sign());
    }
  }
  if (dangling_free) {
    for (std::size_t i = 0; i < genes; ++i) {
      const auto j = static_cast<std::size_t>(rng() % phenotypes);
      if (!g.edge_sign(i, j)) g.add_edge(i, j, sign());
    }
    for (std::size_t j = 0; j < phenotypes; ++j) {
      const auto i = static_cast<std::size_t>(rng() % genes);
      if (!g.edge_sign(i, j)) g.add_edge(i, j, sign());
    }
  }
  return g;
}

inline SignedBipartiteGraph parse(const std::string& body, SignRule rule = SignRule::kSignColumn) {
  std::istringstream in(body);
  return parse_edge_list(in, rule);
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = scale * (2.0 * uniform01(rng) - 1.0);
  }
  return m;
}

/// Central differences of f at x, step h.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// ‖a − b‖ / max(‖a‖, ‖b‖), with the denominator floored at 1e−8.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-8});
  return (a - b).norm() / denom;
}

/// 40 genes × 4 phenotypes, genes 0–19 and phenotypes 0–1 form one block:
/// within-block pairs are positive, cross-block pairs negative. 120 of the
/// 160 pairs carry an edge.
inline SignedBipartiteGraph planted_fixture(std::uint64_t seed = 11) {
  SignedBipartiteGraph g;
  for (int i = 0; i < 40; ++i) g.add_gene("gene" + std::to_string(100 + i));
  for (int j = 0; j < 4; ++j) g.add_phenotype("trait" + std::to_string(j));
  Rng rng(seed);
  const auto perm = random_permutation(160, rng);
  for (std::size_t r = 0; r < 120; ++r) {
    const std::size_t gene = perm[r] / 4, pheno = perm[r] % 4;
    const bool same = (gene < 20) == (pheno < 2);
    g.add_edge(gene, pheno, same ? Sign::kPositive : Sign::kNegative);
  }
  return g.with_edges(g.sorted_edges());
}

/// Worst per-tensor relative error between backprop and central differences
/// over every tensor `for_each` visits. `loss` builds a scalar from the
/// parameters through the binder.
template <class Params, class ForEach, class Loss>
double worst_param_gradient_error(Params params, ForEach for_each, Loss loss, std::string* worst = nullptr) {
  std::vector<std::pair<std::string, Matrix>> analytic;
  {
    ad::Tape tape;
    ad::ParamBinder bind(tape);
    auto root = loss(params, bind);
    tape.backward(root);
    for_each(params, [&](const std::string& name, Matrix& m) { analytic.emplace_back(name, bind.grad(m)); });
  }
  double out = 0.0;
  std::size_t idx = 0;
  for_each(params, [&](const std::string& name, Matrix& m) {
    const Matrix saved = m;
    const Matrix numeric = numeric_gradient(
        [&](const Matrix& probe) {
          m = probe;
          ad::Tape tape;
          ad::ParamBinder bind(tape);
          return loss(params, bind).scalar();
        },
        saved);
    m = saved;
    const double err = relative_error(analytic[idx++].second, numeric);
    if (err > out) {
      out = err;
      if (worst) *worst = name;
    }
  });
  return out;
}

}  // namespace csgdn::testing
