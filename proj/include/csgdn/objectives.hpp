#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "csgdn/autodiff.hpp"
#include "csgdn/common.hpp"

namespace csgdn {

struct LossConfig {
  double tau = 0.05;
  double alpha = 0.8;       // intra vs inter weight
  double lambda_cl = 0.01;  // contrastive weight in the joint loss
  int batch_size = 512;     // nodes per contrastive batch
  bool include_positive_in_denominator = false;

  void validate() const {
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in [0, 1]");
    if (!(lambda_cl >= 0.0)) throw ConfigError("lambda_cl must be >= 0");
    if (batch_size < 2) throw ConfigError("contrastive batch size must be >= 2");
  }
};

/// Scalar loss plus one gradient per input matrix, in argument order.
struct LossValue {
  double value = 0.0;
  std::vector<Matrix> grads;
};

namespace detail {

struct UnitRows {
  Matrix unit;  // zero rows stay zero
  Vector norm;
};

inline UnitRows unit_rows(const Matrix& m) {
  UnitRows u{Matrix::Zero(m.rows(), m.cols()), m.rowwise().norm()};
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (u.norm(i) > 0.0) u.unit.row(i) = m.row(i) / u.norm(i);
  }
  return u;
}

/// Pulls a gradient w.r.t. unit rows back to the raw rows:
/// dx = (du − (du·u)u)/‖x‖, and 0 for zero rows.
inline Matrix through_normalization(const UnitRows& u, const Matrix& d_unit) {
  Matrix out = Matrix::Zero(d_unit.rows(), d_unit.cols());
  for (Eigen::Index i = 0; i < d_unit.rows(); ++i) {
    if (u.norm(i) == 0.0) continue;
    const double proj = d_unit.row(i).dot(u.unit.row(i));
    out.row(i) = (d_unit.row(i) - proj * u.unit.row(i)) / u.norm(i);
  }
  return out;
}

inline double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

inline double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(const RowVector& a, const RowVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

/// Inter-view contrastive loss for one sign. For each ordered view pair
/// (k, k′), k ≠ k′:
///   −(1/I) Σ_i log[ exp(sim(z_ik, z_ik′)/τ) / Σ_{j≠i} exp(sim(z_ik, z_jk′)/τ) ]
/// averaged over the pairs. Rows are nodes of the batch.
inline LossValue inter_view_loss(std::span<const Matrix> views, const LossConfig& cfg) {
  if (views.size() < 2) throw InterfaceError("inter-view loss needs at least 2 views");
  const auto batch = views[0].rows();
  if (batch < 2) throw InterfaceError("inter-view loss needs at least 2 nodes in the batch");
  for (const auto& v : views) {
    if (v.rows() != batch || v.cols() != views[0].cols()) {
      throw DimensionError("inter-view loss: views must share one shape");
    }
  }
  const double tau = cfg.tau;
  const auto m = views.size();
  const double pairs = static_cast<double>(m * (m - 1));
  const double inv_i = 1.0 / static_cast<double>(batch);

  std::vector<detail::UnitRows> unit;
  for (const auto& v : views) unit.push_back(detail::unit_rows(v));
  std::vector<Matrix> d_unit(m, Matrix::Zero(batch, views[0].cols()));

  double total = 0.0;
  std::vector<double> logits(static_cast<std::size_t>(batch));
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t kp = 0; kp < m; ++kp) {
      if (k == kp) continue;
      const Matrix sim = unit[k].unit * unit[kp].unit.transpose();
      Matrix d_sim = Matrix::Zero(batch, batch);
      double pair_loss = 0.0;
      for (Eigen::Index i = 0; i < batch; ++i) {
        std::size_t cnt = 0;
        for (Eigen::Index j = 0; j < batch; ++j) {
          if (j == i && !cfg.include_positive_in_denominator) continue;
          logits[cnt++] = sim(i, j) / tau;
        }
        const double lse = detail::log_sum_exp(logits.data(), cnt);
        pair_loss += -sim(i, i) / tau + lse;
        d_sim(i, i) -= inv_i / tau;
        for (Eigen::Index j = 0; j < batch; ++j) {
          if (j == i && !cfg.include_positive_in_denominator) continue;
          d_sim(i, j) += inv_i / tau * std::exp(sim(i, j) / tau - lse);
        }
      }
      total += pair_loss * inv_i;
      d_unit[k] += d_sim * unit[kp].unit / pairs;
      d_unit[kp] += d_sim.transpose() * unit[k].unit / pairs;
    }
  }
  LossValue out;
  out.value = total / pairs;
  for (std::size_t k = 0; k < m; ++k) out.grads.push_back(detail::through_normalization(unit[k], d_unit[k]));
  return out;
}

/// Intra-view contrastive loss:
///   −(1/I) Σ_i log[ Σ_m exp(sim(z_i, z⁺_im)/τ) / Σ_m exp(sim(z_i, z⁻_im)/τ) ]
/// Gradients are ordered [fused, positive..., negative...].
inline LossValue intra_view_loss(const Matrix& fused, std::span<const Matrix> positive,
                                 std::span<const Matrix> negative, const LossConfig& cfg) {
  if (positive.empty() || positive.size() != negative.size()) {
    throw InterfaceError("intra-view loss needs matching non-empty positive and negative views");
  }
  const auto batch = fused.rows();
  if (batch < 1) throw InterfaceError("intra-view loss needs a non-empty batch");
  for (auto views : {positive, negative}) {
    for (const auto& v : views) {
      if (v.rows() != batch || v.cols() != fused.cols()) {
        throw DimensionError("intra-view loss: shape mismatch with fused embeddings");
      }
    }
  }
  const double tau = cfg.tau;
  const auto m = positive.size();
  const double inv_i = 1.0 / static_cast<double>(batch);

  const auto uz = detail::unit_rows(fused);
  std::vector<detail::UnitRows> up, un;
  for (std::size_t k = 0; k < m; ++k) {
    up.push_back(detail::unit_rows(positive[k]));
    un.push_back(detail::unit_rows(negative[k]));
  }
  Matrix dz = Matrix::Zero(batch, fused.cols());
  std::vector<Matrix> dp(m, Matrix::Zero(batch, fused.cols()));
  std::vector<Matrix> dn(m, Matrix::Zero(batch, fused.cols()));

  double total = 0.0;
  std::vector<double> sp(m), sn(m);
  for (Eigen::Index i = 0; i < batch; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      sp[k] = uz.unit.row(i).dot(up[k].unit.row(i)) / tau;
      sn[k] = uz.unit.row(i).dot(un[k].unit.row(i)) / tau;
    }
    const double lse_p = detail::log_sum_exp(sp.data(), m);
    const double lse_n = detail::log_sum_exp(sn.data(), m);
    total += -(lse_p - lse_n);
    for (std::size_t k = 0; k < m; ++k) {
      const double gp = -inv_i / tau * std::exp(sp[k] - lse_p);
      const double gn = inv_i / tau * std::exp(sn[k] - lse_n);
      dz.row(i) += gp * up[k].unit.row(i) + gn * un[k].unit.row(i);
      dp[k].row(i) += gp * uz.unit.row(i);
      dn[k].row(i) += gn * uz.unit.row(i);
    }
  }
  LossValue out;
  out.value = total * inv_i;
  out.grads.push_back(detail::through_normalization(uz, dz));
  for (std::size_t k = 0; k < m; ++k) out.grads.push_back(detail::through_normalization(up[k], dp[k]));
  for (std::size_t k = 0; k < m; ++k) out.grads.push_back(detail::through_normalization(un[k], dn[k]));
  return out;
}

inline double contrastive_loss(double inter, double intra, double alpha) {
  return (1.0 - alpha) * inter + alpha * intra;
}

inline double total_loss(double label, double contrastive, double lambda_cl) {
  return label + lambda_cl * contrastive;
}

/// Class order of every 3-wide score: down, none, up. Label l ∈ {−1, 0, +1}
/// sits at column l + 1.
enum class OutputSquash {
  kNormalizedSigmoid,  // sigmoid per logit, rescaled to sum 1
  kSoftmax,
};

inline OutputSquash parse_squash(const std::string& s) {
  if (s == "sigmoid") return OutputSquash::kNormalizedSigmoid;
  if (s == "softmax") return OutputSquash::kSoftmax;
  throw ConfigError("unknown output squash '" + s + "' (expected sigmoid|softmax)");
}

inline const char* to_string(OutputSquash s) {
  return s == OutputSquash::kSoftmax ? "softmax" : "sigmoid";
}

struct SignScore {
  std::array<double, 3> probs{};  // P_down, P_none, P_up

  double p_down() const { return probs[0]; }
  double p_none() const { return probs[1]; }
  double p_up() const { return probs[2]; }

  /// −1, 0 or +1; first maximum wins.
  int predicted_label() const {
    std::size_t best = 0;
    for (std::size_t c = 1; c < 3; ++c) {
      if (probs[c] > probs[best]) best = c;
    }
    return static_cast<int>(best) - 1;
  }
};

inline Matrix sign_probabilities(const Matrix& logits, OutputSquash squash) {
  if (logits.cols() != 3) throw DimensionError("sign logits must have 3 columns");
  Matrix p(logits.rows(), 3);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    if (squash == OutputSquash::kSoftmax) {
      const double mx = logits.row(r).maxCoeff();
      p.row(r) = (logits.row(r).array() - mx).exp().matrix();
    } else {
      for (Eigen::Index c = 0; c < 3; ++c) p(r, c) = detail::stable_sigmoid(logits(r, c));
    }
    const double s = p.row(r).sum();
    if (!(s > 0.0)) throw NumericalError("degenerate sign scores");
    p.row(r) /= s;
  }
  return p;
}

inline SignScore to_sign_score(const Matrix& probs, Eigen::Index row) {
  return {{probs(row, 0), probs(row, 1), probs(row, 2)}};
}

inline std::size_t label_column(int label) {
  if (label < -1 || label > 1) throw InterfaceError("labels must be -1, 0 or +1");
  return static_cast<std::size_t>(label + 1);
}

constexpr double kLogFloor = 1e-12;

/// Mean cross-entropy −log ŷ_true of already-normalized predictions, with the
/// probability clamped at 1e−12.
inline double cross_entropy(const Matrix& probs, std::span<const int> labels) {
  if (static_cast<std::size_t>(probs.rows()) != labels.size() || labels.empty()) {
    throw DimensionError("cross entropy: one label per row required");
  }
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double p = probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(label_column(labels[r])));
    total -= std::log(std::max(p, kLogFloor));
  }
  return total / static_cast<double>(labels.size());
}

/// Cross-entropy of the squashed logits; gradient w.r.t. the logits.
inline LossValue label_loss(const Matrix& logits, std::span<const int> labels, OutputSquash squash) {
  const Matrix probs = sign_probabilities(logits, squash);
  LossValue out;
  out.value = cross_entropy(probs, labels);
  const double inv_b = 1.0 / static_cast<double>(labels.size());
  Matrix d = Matrix::Zero(logits.rows(), 3);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const auto y = static_cast<Eigen::Index>(label_column(labels[r]));
    if (probs(row, y) < kLogFloor) continue;  // clamped: flat
    if (squash == OutputSquash::kSoftmax) {
      d.row(row) = probs.row(row) * inv_b;
      d(row, y) -= inv_b;
      continue;
    }
    double s_total = 0.0;
    std::array<double, 3> s{};
    for (Eigen::Index c = 0; c < 3; ++c) {
      s[c] = detail::stable_sigmoid(logits(row, c));
      s_total += s[c];
    }
    for (Eigen::Index c = 0; c < 3; ++c) {
      const double dlog_total = s[c] * (1.0 - s[c]) / s_total;
      const double dlog_true = c == y ? 1.0 - s[c] : 0.0;
      d(row, c) = -(dlog_true - dlog_total) * inv_b;
    }
  }
  out.grads.push_back(std::move(d));
  return out;
}

/// (1/N) Σ_i ‖pred_i − target_i‖².
inline LossValue mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse: shape mismatch");
  }
  if (pred.rows() == 0) throw InterfaceError("mse over an empty set");
  const double inv_n = 1.0 / static_cast<double>(pred.rows());
  const Matrix diff = pred - target;
  return {diff.squaredNorm() * inv_n, {2.0 * inv_n * diff}};
}

namespace ad {

inline Var inter_view_loss(std::span<const Var> views, const LossConfig& cfg) {
  std::vector<Matrix> values;
  for (const auto& v : views) values.push_back(v.value());
  auto res = csgdn::inter_view_loss(values, cfg);
  std::vector<Var> inputs(views.begin(), views.end());
  auto grads = std::make_shared<std::vector<Matrix>>(std::move(res.grads));
  return views[0].tape()->record(Matrix::Constant(1, 1, res.value), views,
                                 [inputs, grads](Tape& t, const Matrix& g) {
                                   for (std::size_t k = 0; k < inputs.size(); ++k) {
                                     t.accumulate(inputs[k], g(0, 0) * (*grads)[k]);
                                   }
                                 });
}

inline Var intra_view_loss(Var fused, std::span<const Var> positive, std::span<const Var> negative,
                           const LossConfig& cfg) {
  std::vector<Matrix> pv, nv;
  for (const auto& v : positive) pv.push_back(v.value());
  for (const auto& v : negative) nv.push_back(v.value());
  auto res = csgdn::intra_view_loss(fused.value(), pv, nv, cfg);
  std::vector<Var> inputs{fused};
  inputs.insert(inputs.end(), positive.begin(), positive.end());
  inputs.insert(inputs.end(), negative.begin(), negative.end());
  auto grads = std::make_shared<std::vector<Matrix>>(std::move(res.grads));
  return fused.tape()->record(Matrix::Constant(1, 1, res.value), inputs,
                              [inputs, grads](Tape& t, const Matrix& g) {
                                for (std::size_t k = 0; k < inputs.size(); ++k) {
                                  t.accumulate(inputs[k], g(0, 0) * (*grads)[k]);
                                }
                              });
}

inline Var label_loss(Var logits, std::vector<int> labels, OutputSquash squash) {
  auto res = csgdn::label_loss(logits.value(), labels, squash);
  auto grad = std::make_shared<Matrix>(std::move(res.grads[0]));
  return logits.tape()->record(Matrix::Constant(1, 1, res.value), {logits},
                               [logits, grad](Tape& t, const Matrix& g) {
                                 t.accumulate(logits, g(0, 0) * *grad);
                               });
}

inline Var mse_loss(Var pred, const Matrix& target) {
  auto res = csgdn::mse_loss(pred.value(), target);
  auto grad = std::make_shared<Matrix>(std::move(res.grads[0]));
  return pred.tape()->record(Matrix::Constant(1, 1, res.value), {pred},
                             [pred, grad](Tape& t, const Matrix& g) { t.accumulate(pred, g(0, 0) * *grad); });
}

}  // namespace ad

}  // namespace csgdn
