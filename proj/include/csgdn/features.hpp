#pragma once

#include <algorithm>
#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "csgdn/common.hpp"
#include "csgdn/graph.hpp"

namespace csgdn {

/// Labelled rows as read from disk, in file order.
struct FeatureTable {
  std::vector<std::string> labels;
  Matrix values;
};

/// Gene feature rows in graph gene order; row i is gene i's raw feature.
struct FeatureMatrix {
  Matrix values;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// First column is the label, the rest are floats. With `square`, the file
/// is a self-similarity matrix and must have as many value columns as rows.
inline FeatureTable parse_feature_table(std::istream& in, bool square = false) {
  FeatureTable t;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = text::split_fields(line);
    if (fields.size() < 2) throw ParseError("feature row needs a label and values", line_no);
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    bool numeric = true;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      if (!text::parse_double(fields[i], v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;  // header
        continue;
      }
      throw ParseError("non-numeric feature value", line_no);
    }
    first = false;
    if (width == 0) width = values.size();
    if (values.size() != width) {
      throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(width) + " feature values, found " +
                           std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw NumericalError("line " + std::to_string(line_no) + ": non-finite feature for '" +
                             std::string(fields[0]) + "'");
      }
    }
    t.labels.emplace_back(fields[0]);
    rows.push_back(std::move(values));
  }
  if (square && rows.size() != width) {
    throw DimensionError("similarity matrix is " + std::to_string(rows.size()) + "x" +
                         std::to_string(width) + ", expected square");
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return t;
}

inline FeatureTable load_feature_table(const std::string& path, bool square = false) {
  auto in = open_input(path);
  return parse_feature_table(in, square);
}

/// Picks the rows for `labels` in the given order.
inline Matrix select_rows(const FeatureTable& table, const std::vector<std::string>& labels) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    index.emplace(table.labels[i], static_cast<Eigen::Index>(i));
  }
  std::vector<std::string> missing;
  Matrix out(static_cast<Eigen::Index>(labels.size()), table.values.cols());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = index.find(labels[i]);
    if (it == index.end()) {
      missing.push_back(labels[i]);
      continue;
    }
    out.row(static_cast<Eigen::Index>(i)) = table.values.row(it->second);
  }
  if (!missing.empty()) {
    std::string msg = "missing feature rows for " + std::to_string(missing.size()) + " gene(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ParseError(msg);
  }
  return out;
}

inline FeatureMatrix features_for(const FeatureTable& table, const SignedBipartiteGraph& g) {
  return FeatureMatrix{select_rows(table, g.gene_labels())};
}

inline FeatureMatrix load_feature_matrix(const std::string& path, const SignedBipartiteGraph& g,
                                         bool square = false) {
  return features_for(load_feature_table(path, square), g);
}

/// Maps the raw node feature space [gene features | phenotype one-hot] to the
/// encoder input width. Identity-padded when the raw width fits, otherwise a
/// seeded random matrix with orthonormal columns.
struct InputProjection {
  std::size_t gene_dim = 0;
  std::size_t phenotype_count = 0;
  std::size_t input_dim = 0;
  std::uint64_t seed = 0;
  Matrix matrix;  // (gene_dim + phenotype_count) x input_dim

  std::size_t raw_dim() const { return gene_dim + phenotype_count; }
};

inline InputProjection make_input_projection(std::size_t gene_dim, std::size_t phenotype_count,
                                             std::size_t input_dim, std::uint64_t seed) {
  if (input_dim == 0) throw ConfigError("input dimension must be positive");
  InputProjection p{gene_dim, phenotype_count, input_dim, seed, {}};
  const auto raw = static_cast<Eigen::Index>(p.raw_dim());
  const auto out = static_cast<Eigen::Index>(input_dim);
  if (raw <= out) {
    p.matrix = Matrix::Identity(raw, out);
    return p;
  }
  Rng rng(derive_seed(seed, 0x70726f6aULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix gauss(raw, out);
  for (Eigen::Index c = 0; c < out; ++c) {
    for (Eigen::Index r = 0; r < raw; ++r) gauss(r, c) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(gauss);
  p.matrix = qr.householderQ() * Matrix::Identity(raw, out);
  return p;
}

/// Gene rows (k x gene_dim) into the encoder input space.
inline Matrix project_gene_rows(const Matrix& gene_rows, const InputProjection& p) {
  if (static_cast<std::size_t>(gene_rows.cols()) != p.gene_dim) {
    throw DimensionError("gene feature width " + std::to_string(gene_rows.cols()) +
                         " does not match projection width " + std::to_string(p.gene_dim));
  }
  return gene_rows * p.matrix.topRows(static_cast<Eigen::Index>(p.gene_dim));
}

/// Encoder inputs for every node (genes then phenotypes). Without gene
/// features every gene gets a one-hot row of its own.
inline Matrix node_input_features(const FeatureMatrix* genes, const SignedBipartiteGraph& g,
                                  const InputProjection& p) {
  const auto n = static_cast<Eigen::Index>(g.num_genes());
  const auto m = static_cast<Eigen::Index>(g.num_phenotypes());
  if (static_cast<std::size_t>(m) != p.phenotype_count) {
    throw DimensionError("projection built for a different phenotype count");
  }
  Matrix gene_rows = genes ? genes->values : Matrix::Identity(n, n);
  if (gene_rows.rows() != n) throw DimensionError("feature rows do not match gene count");
  Matrix out(n + m, static_cast<Eigen::Index>(p.input_dim));
  out.topRows(n) = project_gene_rows(gene_rows, p);
  out.bottomRows(m) = p.matrix.bottomRows(m);
  return out;
}

}  // namespace csgdn
