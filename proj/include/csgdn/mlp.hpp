#pragma once

#include <string>
#include <vector>

#include "csgdn/autodiff.hpp"
#include "csgdn/common.hpp"

namespace csgdn {

enum class Activation { kTanh, kIdentity };

inline Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "identity" || s == "linear") return Activation::kIdentity;
  throw ConfigError("unknown activation '" + s + "'");
}

inline const char* to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

inline ad::Var activate(ad::Var x, Activation a) {
  return a == Activation::kTanh ? ad::tanh(x) : x;
}

/// Uniform Glorot: U(−√(6/(fan_in+fan_out)), +√(6/(fan_in+fan_out))).
inline Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng,
                             Eigen::Index rows = -1, Eigen::Index cols = -1) {
  if (rows < 0) rows = fan_in;
  if (cols < 0) cols = fan_out;
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
  }
  return m;
}

/// Fully connected stack; the activation sits between layers, the last
/// layer is linear.
struct MlpParams {
  std::vector<Matrix> weights;  // in x out
  std::vector<Matrix> biases;   // 1 x out
  Activation activation = Activation::kTanh;

  std::size_t layers() const { return weights.size(); }
  Eigen::Index input_dim() const { return weights.front().rows(); }
  Eigen::Index output_dim() const { return weights.back().cols(); }
};

/// widths = {in, hidden..., out}.
inline MlpParams init_mlp(const std::vector<Eigen::Index>& widths, Activation activation, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least one layer");
  MlpParams p;
  p.activation = activation;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] <= 0 || widths[l + 1] <= 0) throw ConfigError("MLP widths must be positive");
    p.weights.push_back(glorot_uniform(widths[l], widths[l + 1], rng));
    p.biases.push_back(Matrix::Zero(1, widths[l + 1]));
  }
  return p;
}

inline ad::Var mlp_forward(ad::Var x, const MlpParams& p, ad::ParamBinder& bind) {
  if (x.cols() != p.input_dim()) {
    throw DimensionError("MLP expects width " + std::to_string(p.input_dim()) + ", got " +
                         std::to_string(x.cols()));
  }
  for (std::size_t l = 0; l < p.layers(); ++l) {
    x = ad::add_row(ad::matmul(x, bind(p.weights[l])), bind(p.biases[l]));
    if (l + 1 < p.layers()) x = activate(x, p.activation);
  }
  return x;
}

inline Matrix mlp_apply(const Matrix& x, const MlpParams& p) {
  ad::Tape tape;
  ad::ParamBinder bind(tape);
  return mlp_forward(tape.constant(x), p, bind).value();
}

template <class F>
void for_each_param(MlpParams& p, const std::string& prefix, F&& f) {
  for (std::size_t l = 0; l < p.layers(); ++l) {
    f(prefix + ".w" + std::to_string(l), p.weights[l]);
    f(prefix + ".b" + std::to_string(l), p.biases[l]);
  }
}

template <class F>
void for_each_param(const MlpParams& p, const std::string& prefix, F&& f) {
  for (std::size_t l = 0; l < p.layers(); ++l) {
    f(prefix + ".w" + std::to_string(l), p.weights[l]);
    f(prefix + ".b" + std::to_string(l), p.biases[l]);
  }
}

}  // namespace csgdn
