#pragma once

#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "csgdn/common.hpp"

// Minimal reverse-mode differentiation over dense matrices. Every value is a
// matrix; scalars are 1x1. Nodes are appended in evaluation order, so a
// reverse sweep visits them in a valid topological order.
namespace csgdn::ad {

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Receives the gradient of the node's output; pushes contributions to
  /// its inputs through Tape::accumulate.
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Var constant(Matrix value) { return push(std::move(value), false, {}); }
  Var leaf(Matrix value) { return push(std::move(value), true, {}); }

  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
    return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  Var record(Matrix value, std::span<const Var> inputs, Backward backward) {
    bool needs = false;
    for (const auto& v : inputs) needs = needs || nodes_[v.id()].needs_grad;
    return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
  }

  bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }

  void accumulate(Var v, const Matrix& g) {
    auto& node = nodes_[v.id()];
    if (!node.needs_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  /// Seeds d(root)/d(root) = 1 and sweeps backwards. Root must be 1x1.
  void backward(Var root) {
    if (root.rows() != 1 || root.cols() != 1) throw DimensionError("backward root must be scalar");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[root.id()].grad = Matrix::Ones(1, 1);
    for (int i = root.id(); i >= 0; --i) {
      auto& node = nodes_[i];
      if (!node.backward || node.grad.size() == 0) continue;
      const Matrix g = node.grad;
      node.backward(*this, g);
    }
  }

  const Matrix& value(int id) const { return nodes_[id].value; }

  /// Zero-filled when nothing flowed into the node.
  const Matrix& grad(int id) const {
    auto& node = nodes_[id];
    if (node.grad.size() == 0) node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
    return node.grad;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    mutable Matrix grad;
    bool needs_grad = false;
    Backward backward;
  };

  Var push(Matrix value, bool needs, Backward backward) {
    nodes_.push_back({std::move(value), Matrix(), needs, std::move(backward)});
    return Var(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(id_); }
inline const Matrix& Var::grad() const { return tape_->grad(id_); }

/// Registers parameter matrices as tape leaves, once per matrix address, so
/// a parameter used in several places accumulates a single gradient.
class ParamBinder {
 public:
  explicit ParamBinder(Tape& tape) : tape_(&tape) {}

  Var operator()(const Matrix& param) {
    auto [it, inserted] = ids_.try_emplace(&param, -1);
    if (inserted) it->second = tape_->leaf(param).id();
    return Var(tape_, it->second);
  }

  bool bound(const Matrix& param) const { return ids_.count(&param) != 0; }

  Matrix grad(const Matrix& param) const {
    auto it = ids_.find(&param);
    if (it == ids_.end()) return Matrix::Zero(param.rows(), param.cols());
    return tape_->grad(it->second);
  }

  Tape& tape() { return *tape_; }

 private:
  Tape* tape_;
  std::unordered_map<const Matrix*, int> ids_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

inline Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                         std::to_string(b.rows()));
  }
  return a.tape()->record(a.value() * b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * b.value().transpose());
    if (t.needs_grad(b)) t.accumulate(b, a.value().transpose() * g);
  });
}

inline Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  return a.tape()->record(a.value() + b.value(), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

/// a (n x k) plus a 1 x k row broadcast to every row.
inline Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw DimensionError("add_row: bias shape");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.tape()->record(std::move(out), {a, row}, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

inline Var scale(Var a, double s) {
  return a.tape()->record(s * a.value(), {a},
                          [a, s](Tape& t, const Matrix& g) { t.accumulate(a, s * g); });
}

inline Var tanh(Var a) {
  Matrix y = a.value().array().tanh().matrix();
  return a.tape()->record(y, {a}, [a, y](Tape& t, const Matrix& g) {
    t.accumulate(a, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

/// Column-wise concatenation [a ∥ b ∥ ...].
inline Var hcat(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("hcat: no inputs");
  const auto rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("hcat: row count mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->record(std::move(out), parts, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index at = 0;
    for (const auto& p : inputs) {
      if (t.needs_grad(p)) t.accumulate(p, g.middleCols(at, p.cols()));
      at += p.cols();
    }
  });
}

inline Var hcat(std::initializer_list<Var> parts) {
  return hcat(std::span<const Var>(parts.begin(), parts.size()));
}

/// Output row r is input row idx[r].
inline Var gather_rows(Var a, std::vector<Eigen::Index> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), a.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= a.rows()) throw DimensionError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(r)) = a.value().row(idx[r]);
  }
  return a.tape()->record(std::move(out), {a}, [a, idx = std::move(idx)](Tape& t, const Matrix& g) {
    Matrix da = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) da.row(idx[r]) += g.row(static_cast<Eigen::Index>(r));
    t.accumulate(a, da);
  });
}

/// Σ coeffs[i]·terms[i] over 1x1 terms.
inline Var weighted_sum(std::span<const Var> terms, std::vector<double> coeffs) {
  if (terms.size() != coeffs.size() || terms.empty()) throw DimensionError("weighted_sum: arity");
  double v = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].rows() != 1 || terms[i].cols() != 1) throw DimensionError("weighted_sum: non-scalar");
    v += coeffs[i] * terms[i].scalar();
  }
  std::vector<Var> inputs(terms.begin(), terms.end());
  return terms[0].tape()->record(Matrix::Constant(1, 1, v), terms,
                                 [inputs, coeffs = std::move(coeffs)](Tape& t, const Matrix& g) {
                                   for (std::size_t i = 0; i < inputs.size(); ++i) {
                                     t.accumulate(inputs[i], coeffs[i] * g);
                                   }
                                 });
}

/// Σ_ij a_ij·weights_ij against a constant weight matrix.
inline Var dot(Var a, const Matrix& weights) {
  require_same_shape(a.value(), weights, "dot");
  return a.tape()->record(Matrix::Constant(1, 1, a.value().cwiseProduct(weights).sum()), {a},
                          [a, weights](Tape& t, const Matrix& g) { t.accumulate(a, g(0, 0) * weights); });
}

}  // namespace csgdn::ad
