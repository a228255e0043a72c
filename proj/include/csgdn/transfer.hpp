#pragma once

#include <vector>

#include "csgdn/autodiff.hpp"
#include "csgdn/mlp.hpp"
#include "csgdn/objectives.hpp"
#include "csgdn/optimizer.hpp"

namespace csgdn {

/// Settings for the perceptron that maps gene input features into the
/// trained embedding space.
struct TransferConfig {
  std::vector<Eigen::Index> hidden{64, 64};  // two hidden layers
  Activation activation = Activation::kTanh;
  int epochs = 300;
  double learning_rate = 5e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::uint64_t seed = 7;
};

struct TransferParams {
  MlpParams mlp;
  double final_loss = 0.0;
  std::vector<double> loss_curve;
};

inline double transfer_loss(const MlpParams& mlp, const Matrix& features, const Matrix& targets) {
  return mse_loss(mlp_apply(features, mlp), targets).value;
}

/// Full-batch minimisation of (1/N) Σ ‖MLP(h_i) − z_i‖² over genes with
/// trained embeddings.
inline TransferParams fit_transfer(const Matrix& features, const Matrix& targets,
                                   const TransferConfig& cfg) {
  if (features.rows() == 0) throw InterfaceError("transfer fit needs at least one gene");
  if (features.rows() != targets.rows()) throw DimensionError("transfer: features/targets row mismatch");
  if (cfg.epochs < 0) throw ConfigError("transfer epochs must be >= 0");

  std::vector<Eigen::Index> widths{features.cols()};
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(targets.cols());
  Rng rng(derive_seed(cfg.seed, 0x7472616eULL));
  TransferParams out{init_mlp(widths, cfg.activation, rng), 0.0, {}};

  Optimizer opt(cfg.optimizer, cfg.learning_rate);
  std::vector<Matrix*> params;
  for_each_param(out.mlp, "transfer", [&](const std::string&, Matrix& m) { params.push_back(&m); });

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    ad::Tape tape;
    ad::ParamBinder bind(tape);
    auto loss = ad::mse_loss(mlp_forward(tape.constant(features), out.mlp, bind), targets);
    if (!std::isfinite(loss.scalar())) throw NumericalError("transfer loss diverged");
    out.loss_curve.push_back(loss.scalar());
    tape.backward(loss);
    std::vector<Matrix> grads;
    for (auto* p : params) grads.push_back(bind.grad(*p));
    opt.step(params, grads);
  }
  out.final_loss = transfer_loss(out.mlp, features, targets);
  return out;
}

/// Embeddings for genes outside the supervised set.
inline Matrix embed_untrained(const Matrix& features, const TransferParams& params) {
  if (params.mlp.layers() == 0) throw InterfaceError("transfer head is not fitted");
  if (features.cols() != params.mlp.input_dim()) {
    throw DimensionError("transfer input width " + std::to_string(features.cols()) +
                         " does not match fitted width " + std::to_string(params.mlp.input_dim()));
  }
  return mlp_apply(features, params.mlp);
}

}  // namespace csgdn
