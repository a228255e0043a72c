#pragma once

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "csgdn/common.hpp"

namespace csgdn {

/// Mann–Whitney AUC with tied scores sharing their mean rank. Empty when one
/// class is absent.
inline std::optional<double> auc_midrank(std::span<const double> scores,
                                         std::span<const bool> positive) {
  if (scores.size() != positive.size()) throw DimensionError("auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

/// 3x3 counts indexed [truth][prediction] by label + 1 (down, none, up).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 3>, 3> counts{};

  void add(int truth, int predicted) {
    counts.at(static_cast<std::size_t>(truth + 1)).at(static_cast<std::size_t>(predicted + 1)) += 1;
  }

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& row : counts) for (auto c : row) t += c;
    return t;
  }

  std::size_t tp(int label) const {
    const auto c = static_cast<std::size_t>(label + 1);
    return counts[c][c];
  }
  std::size_t fp(int label) const {
    const auto c = static_cast<std::size_t>(label + 1);
    std::size_t s = 0;
    for (std::size_t r = 0; r < 3; ++r) if (r != c) s += counts[r][c];
    return s;
  }
  std::size_t fn(int label) const {
    const auto c = static_cast<std::size_t>(label + 1);
    std::size_t s = 0;
    for (std::size_t p = 0; p < 3; ++p) if (p != c) s += counts[c][p];
    return s;
  }

  /// Labels that occur in the ground truth.
  std::vector<int> present_labels() const {
    std::vector<int> out;
    for (int l = -1; l <= 1; ++l) {
      const auto& row = counts[static_cast<std::size_t>(l + 1)];
      if (row[0] + row[1] + row[2] > 0) out.push_back(l);
    }
    return out;
  }
};

inline double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

inline double class_f1(const ConfusionMatrix& cm, int label) {
  return f1_from_counts(cm.tp(label), cm.fp(label), cm.fn(label));
}

/// F1 of the up-regulation class.
inline double binary_f1(const ConfusionMatrix& cm) { return class_f1(cm, 1); }

inline double micro_f1(const ConfusionMatrix& cm, std::span<const int> labels) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (int l : labels) {
    tp += cm.tp(l);
    fp += cm.fp(l);
    fn += cm.fn(l);
  }
  return f1_from_counts(tp, fp, fn);
}

inline double macro_f1(const ConfusionMatrix& cm, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  double s = 0.0;
  for (int l : labels) s += class_f1(cm, l);
  return s / static_cast<double>(labels.size());
}

}  // namespace csgdn
