#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csgdn/common.hpp"

namespace csgdn {

enum class NodeKind { kGene, kPhenotype };

enum class Sign : int { kNegative = -1, kPositive = 1 };

inline int to_int(Sign s) { return static_cast<int>(s); }
inline Sign flip(Sign s) { return s == Sign::kPositive ? Sign::kNegative : Sign::kPositive; }

struct NodeId {
  std::size_t index = 0;  // within its kind
  NodeKind kind = NodeKind::kGene;
  std::string label;

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

struct SignedEdge {
  std::size_t gene = 0;
  std::size_t phenotype = 0;
  Sign sign = Sign::kPositive;
  double weight = 1.0;

  friend bool operator==(const SignedEdge&, const SignedEdge&) = default;
};

/// How the third edge-list column becomes a sign and weight.
enum class SignRule {
  kSignColumn,  // literal +1 / -1, weight 1
  kZScoreSign,  // sign(z), weight 1; z == 0 rejected
  kWeighted,    // sign(value), weight |value|; used for diffusion graphs
};

/// Gene/phenotype node universe plus a signed edge set with at most one sign
/// per (gene, phenotype) pair. Global node indices place genes first.
class SignedBipartiteGraph {
 public:
  SignedBipartiteGraph() = default;

  SignedBipartiteGraph(std::vector<std::string> genes, std::vector<std::string> phenotypes) {
    for (auto& g : genes) add_gene(g);
    for (auto& p : phenotypes) add_phenotype(p);
  }

  std::size_t add_gene(const std::string& label) {
    return add_label(label, genes_, gene_index_, "gene");
  }

  std::size_t add_phenotype(const std::string& label) {
    return add_label(label, phenotypes_, phenotype_index_, "phenotype");
  }

  /// Returns false when the identical edge is already present. A second
  /// edge on the same pair with the opposite sign is a conflict.
  bool add_edge(std::size_t gene, std::size_t phenotype, Sign sign, double weight = 1.0) {
    if (gene >= genes_.size() || phenotype >= phenotypes_.size()) {
      throw DimensionError("edge endpoint out of range");
    }
    if (!(weight > 0.0) || !std::isfinite(weight)) {
      throw NumericalError("edge weight must be positive and finite for (" + genes_[gene] +
                           ", " + phenotypes_[phenotype] + ")");
    }
    const auto key = pair_key(gene, phenotype);
    if (auto it = edge_index_.find(key); it != edge_index_.end()) {
      if (edges_[it->second].sign != sign) {
        throw ConflictError("conflicting signs for pair (" + genes_[gene] + ", " +
                            phenotypes_[phenotype] + ")");
      }
      return false;
    }
    edge_index_.emplace(key, edges_.size());
    edges_.push_back({gene, phenotype, sign, weight});
    return true;
  }

  std::size_t num_genes() const { return genes_.size(); }
  std::size_t num_phenotypes() const { return phenotypes_.size(); }
  std::size_t num_nodes() const { return genes_.size() + phenotypes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<SignedEdge>& edges() const { return edges_; }
  const std::vector<std::string>& gene_labels() const { return genes_; }
  const std::vector<std::string>& phenotype_labels() const { return phenotypes_; }

  std::size_t global_index(NodeKind kind, std::size_t index) const {
    return kind == NodeKind::kGene ? index : genes_.size() + index;
  }
  std::size_t gene_node(std::size_t gene) const { return gene; }
  std::size_t phenotype_node(std::size_t phenotype) const { return genes_.size() + phenotype; }

  NodeId node(std::size_t global) const {
    if (global < genes_.size()) return {global, NodeKind::kGene, genes_[global]};
    const auto p = global - genes_.size();
    if (p >= phenotypes_.size()) throw DimensionError("node index out of range");
    return {p, NodeKind::kPhenotype, phenotypes_[p]};
  }

  std::optional<std::size_t> find_gene(const std::string& label) const {
    auto it = gene_index_.find(label);
    if (it == gene_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<std::size_t> find_phenotype(const std::string& label) const {
    auto it = phenotype_index_.find(label);
    if (it == phenotype_index_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<Sign> edge_sign(std::size_t gene, std::size_t phenotype) const {
    auto it = edge_index_.find(pair_key(gene, phenotype));
    if (it == edge_index_.end()) return std::nullopt;
    return edges_[it->second].sign;
  }

  std::size_t count(Sign s) const {
    return static_cast<std::size_t>(
        std::count_if(edges_.begin(), edges_.end(), [s](const SignedEdge& e) { return e.sign == s; }));
  }

  /// Genes incident to at least one edge.
  std::vector<bool> twas_gene_mask() const {
    std::vector<bool> mask(genes_.size(), false);
    for (const auto& e : edges_) mask[e.gene] = true;
    return mask;
  }

  bool same_universe(const SignedBipartiteGraph& other) const {
    return genes_ == other.genes_ && phenotypes_ == other.phenotypes_;
  }

  /// Same node universe, different edges.
  SignedBipartiteGraph with_edges(const std::vector<SignedEdge>& edges) const {
    SignedBipartiteGraph g = empty_copy();
    for (const auto& e : edges) g.add_edge(e.gene, e.phenotype, e.sign, e.weight);
    return g;
  }

  SignedBipartiteGraph empty_copy() const {
    SignedBipartiteGraph g;
    g.genes_ = genes_;
    g.phenotypes_ = phenotypes_;
    g.gene_index_ = gene_index_;
    g.phenotype_index_ = phenotype_index_;
    return g;
  }

  /// Edges ordered by (gene index, phenotype index).
  std::vector<SignedEdge> sorted_edges() const {
    auto out = edges_;
    std::sort(out.begin(), out.end(), [](const SignedEdge& a, const SignedEdge& b) {
      return std::tie(a.gene, a.phenotype) < std::tie(b.gene, b.phenotype);
    });
    return out;
  }

  static std::uint64_t pair_key(std::size_t gene, std::size_t phenotype) {
    return (static_cast<std::uint64_t>(gene) << 32) | static_cast<std::uint64_t>(phenotype);
  }

 private:
  static std::size_t add_label(const std::string& label, std::vector<std::string>& labels,
                               std::unordered_map<std::string, std::size_t>& index,
                               const char* what) {
    if (label.empty()) throw ParseError(std::string("empty ") + what + " label");
    auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  }

  std::vector<std::string> genes_;
  std::vector<std::string> phenotypes_;
  std::unordered_map<std::string, std::size_t> gene_index_;
  std::unordered_map<std::string, std::size_t> phenotype_index_;
  std::vector<SignedEdge> edges_;
  std::unordered_map<std::uint64_t, std::size_t> edge_index_;
};

inline bool same_edges(const SignedBipartiteGraph& a, const SignedBipartiteGraph& b) {
  return a.same_universe(b) && a.sorted_edges() == b.sorted_edges();
}

namespace detail {

inline bool is_comment_or_blank(std::string_view line) {
  line = text::trim(line);
  return line.empty() || line.front() == '#';
}

inline std::pair<Sign, double> interpret_value(std::string_view raw, SignRule rule,
                                               std::size_t line_no) {
  double v = 0.0;
  if (!text::parse_double(raw, v) || !std::isfinite(v)) {
    throw ParseError("value '" + std::string(raw) + "' is not a finite number", line_no);
  }
  switch (rule) {
    case SignRule::kSignColumn:
      if (v == 1.0) return {Sign::kPositive, 1.0};
      if (v == -1.0) return {Sign::kNegative, 1.0};
      throw ParseError("sign column must be +1 or -1, got '" + std::string(raw) + "'", line_no);
    case SignRule::kZScoreSign:
      if (v == 0.0) throw ParseError("z-score of 0 has no sign", line_no);
      return {v > 0 ? Sign::kPositive : Sign::kNegative, 1.0};
    case SignRule::kWeighted:
      if (v == 0.0) throw ParseError("weighted edge value of 0 has no sign", line_no);
      return {v > 0 ? Sign::kPositive : Sign::kNegative, std::abs(v)};
  }
  throw ParseError("unknown sign rule", line_no);
}

}  // namespace detail

/// Reads `gene<TAB>phenotype<TAB>value` rows. A leading header row (third
/// field non-numeric) and `#` comments are skipped. Repeated identical pairs
/// collapse to one edge. Node labels are indexed in sorted order so the result
/// does not depend on row order.
inline SignedBipartiteGraph parse_edge_list(std::istream& in, SignRule rule) {
  struct Row {
    std::string gene, phenotype;
    Sign sign;
    double weight;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_comment_or_blank(line)) continue;
    const auto fields = text::split_fields(line);
    if (fields.size() < 3) {
      throw ParseError("expected at least 3 columns, found " + std::to_string(fields.size()),
                       line_no);
    }
    double probe = 0.0;
    if (!seen_data && !text::parse_double(fields[2], probe)) {
      seen_data = true;  // header row
      continue;
    }
    seen_data = true;
    if (fields[0].empty() || fields[1].empty()) throw ParseError("empty node label", line_no);
    const auto [sign, weight] = detail::interpret_value(fields[2], rule, line_no);
    rows.push_back({std::string(fields[0]), std::string(fields[1]), sign, weight, line_no});
  }

  std::vector<std::string> genes, phenotypes;
  for (const auto& r : rows) {
    genes.push_back(r.gene);
    phenotypes.push_back(r.phenotype);
  }
  for (auto* v : {&genes, &phenotypes}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  SignedBipartiteGraph g(std::move(genes), std::move(phenotypes));
  for (const auto& r : rows) {
    const auto gi = *g.find_gene(r.gene);
    const auto pi = *g.find_phenotype(r.phenotype);
    if (auto existing = g.edge_sign(gi, pi); existing && *existing != r.sign) {
      throw ConflictError("line " + std::to_string(r.line) + ": conflicting signs for pair (" +
                          r.gene + ", " + r.phenotype + ")");
    }
    g.add_edge(gi, pi, r.sign, r.weight);
  }
  return g.with_edges(g.sorted_edges());
}

inline SignedBipartiteGraph load_edge_list(const std::string& path, SignRule rule) {
  auto in = open_input(path);
  return parse_edge_list(in, rule);
}

/// Unit-weight edges are written as +1 / -1, others as the signed weight at
/// full precision.
inline void write_edge_list(std::ostream& out, const SignedBipartiteGraph& g) {
  out << "gene\tphenotype\tvalue\n";
  for (const auto& e : g.sorted_edges()) {
    out << g.gene_labels()[e.gene] << '\t' << g.phenotype_labels()[e.phenotype] << '\t';
    if (e.weight == 1.0) {
      out << (e.sign == Sign::kPositive ? "+1" : "-1");
    } else {
      out << text::format_exact(to_int(e.sign) * e.weight);
    }
    out << '\n';
  }
}

inline void save_edge_list(const std::string& path, const SignedBipartiteGraph& g) {
  auto out = open_output(path);
  write_edge_list(out, g);
}

/// Symmetric signed adjacency over genes followed by phenotypes.
inline SparseMatrix adjacency(const SignedBipartiteGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * g.num_edges());
  for (const auto& e : g.edges()) {
    const auto u = static_cast<Eigen::Index>(g.gene_node(e.gene));
    const auto v = static_cast<Eigen::Index>(g.phenotype_node(e.phenotype));
    const double w = to_int(e.sign) * e.weight;
    trips.emplace_back(u, v, w);
    trips.emplace_back(v, u, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

enum class DanglingPolicy {
  kError,    // an all-zero row is an isolated-node error
  kZeroRow,  // keep zero rows; mass reaching the node is lost
};

struct NormalizedAdjacency {
  SparseMatrix positive;  // max(D^-1 A, 0)
  SparseMatrix negative;  // max(-D^-1 A, 0)
  std::vector<std::size_t> dangling;

  Eigen::Index size() const { return positive.rows(); }
};

inline NormalizedAdjacency semi_row_normalize(const SparseMatrix& a,
                                              DanglingPolicy policy = DanglingPolicy::kZeroRow) {
  if (a.rows() != a.cols()) throw DimensionError("adjacency must be square");
  const auto n = a.rows();
  NormalizedAdjacency out;
  std::vector<Eigen::Triplet<double>> pos, neg;
  for (Eigen::Index i = 0; i < n; ++i) {
    double degree = 0.0;
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) degree += std::abs(it.value());
    if (degree == 0.0) {
      if (policy == DanglingPolicy::kError) {
        throw NumericalError("isolated node " + std::to_string(i) + " has no edges");
      }
      out.dangling.push_back(static_cast<std::size_t>(i));
      continue;
    }
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      const double v = it.value() / degree;
      if (v > 0) pos.emplace_back(i, it.col(), v);
      if (v < 0) neg.emplace_back(i, it.col(), -v);
    }
  }
  out.positive.resize(n, n);
  out.negative.resize(n, n);
  out.positive.setFromTriplets(pos.begin(), pos.end());
  out.negative.setFromTriplets(neg.begin(), neg.end());
  return out;
}

}  // namespace csgdn
