#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace {

using namespace csgdn;
using csgdn::testing::numeric_gradient;
using csgdn::testing::random_matrix;
using csgdn::testing::relative_error;

LossConfig tau(double t) {
  LossConfig cfg;
  cfg.tau = t;
  return cfg;
}

std::vector<Matrix> random_views(std::size_t m, Eigen::Index batch, Eigen::Index d, Rng& rng) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < m; ++k) out.push_back(random_matrix(batch, d, rng));
  return out;
}

// Independent scalar evaluation straight from the formula, view pairs and
// all, with no shared code path.
double inter_reference(const std::vector<Matrix>& views, double t) {
  auto cos = [](const RowVector& a, const RowVector& b) { return a.dot(b) / (a.norm() * b.norm()); };
  double total = 0.0;
  int pairs = 0;
  const auto n = views[0].rows();
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (std::size_t kp = 0; kp < views.size(); ++kp) {
      if (k == kp) continue;
      ++pairs;
      double s = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double denom = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j != i) denom += std::exp(cos(views[k].row(i), views[kp].row(j)) / t);
        }
        s += -std::log(std::exp(cos(views[k].row(i), views[kp].row(i)) / t) / denom);
      }
      total += s / static_cast<double>(n);
    }
  }
  return total / pairs;
}

TEST(InterView, OrthogonalNodesIdenticalViews) {
  const Matrix z = Matrix::Identity(2, 3);
  const std::vector<Matrix> views{z, z};
  EXPECT_NEAR(inter_view_loss(views, tau(0.05)).value, -20.0, 1e-12);
}

TEST(InterView, AllIdenticalGivesLogOfBatchMinusOne) {
  for (Eigen::Index batch : {2, 3, 5, 8}) {
    const Matrix z = Matrix::Constant(batch, 4, 0.3);
    const std::vector<Matrix> views{z, z, z, z};
    EXPECT_NEAR(inter_view_loss(views, tau(0.05)).value, std::log(static_cast<double>(batch - 1)), 1e-12);
  }
}

TEST(InterView, MatchesDirectFormula) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto views = random_views(2 + t % 3, 5, 4, rng);
    EXPECT_NEAR(inter_view_loss(views, tau(0.3)).value, inter_reference(views, 0.3), 1e-10);
  }
}

TEST(InterView, GradientsMatchFiniteDifferences) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    auto views = random_views(t % 2 ? 4 : 2, 4, 6, rng);
    auto cfg = tau(t % 3 ? 0.5 : 0.2);
    cfg.include_positive_in_denominator = t % 4 == 0;
    const auto analytic = inter_view_loss(views, cfg);
    for (std::size_t k = 0; k < views.size(); ++k) {
      const Matrix numeric = numeric_gradient(
          [&](const Matrix& p) {
            auto probe = views;
            probe[k] = p;
            return inter_view_loss(probe, cfg).value;
          },
          views[k]);
      EXPECT_LE(relative_error(analytic.grads[k], numeric), 1e-4) << "instance " << t << " view " << k;
    }
  }
}

TEST(InterView, LossFallsAsThePositivePairAligns) {
  // Node i lives on e_i in view 0 and on cosθ·e_i + sinθ·f_i in view 1, so
  // only the positive-pair similarity moves with θ; cross-node terms stay 0.
  const Eigen::Index batch = 4;
  double previous = std::numeric_limits<double>::infinity();
  for (double theta = 1.5; theta >= 0.0; theta -= 0.25) {
    Matrix v0 = Matrix::Zero(batch, 2 * batch), v1 = Matrix::Zero(batch, 2 * batch);
    for (Eigen::Index i = 0; i < batch; ++i) {
      v0(i, i) = 1.0;
      v1(i, i) = std::cos(theta);
      v1(i, batch + i) = std::sin(theta);
    }
    const double loss = inter_view_loss(std::vector<Matrix>{v0, v1}, tau(0.5)).value;
    EXPECT_NEAR(loss, -std::cos(theta) / 0.5 + std::log(3.0), 1e-12);
    EXPECT_LT(loss, previous);
    previous = loss;
  }
}

TEST(InterView, DegenerateBatchIsAnInterfaceError) {
  const std::vector<Matrix> views{Matrix::Ones(1, 3), Matrix::Ones(1, 3)};
  EXPECT_THROW(inter_view_loss(views, tau(0.05)), InterfaceError);
  const std::vector<Matrix> one{Matrix::Ones(3, 3)};
  EXPECT_THROW(inter_view_loss(one, tau(0.05)), InterfaceError);
}

TEST(InterView, ZeroRowsHaveZeroSimilarityAndGradient) {
  Rng rng(4);
  auto views = random_views(2, 3, 4, rng);
  views[0].row(1).setZero();
  const auto res = inter_view_loss(views, tau(0.5));
  EXPECT_TRUE(std::isfinite(res.value));
  EXPECT_EQ(res.grads[0].row(1), RowVector::Zero(4));
}

TEST(IntraView, EqualSimilaritiesGiveZero) {
  Rng rng(5);
  const Matrix z = random_matrix(4, 3, rng);
  const auto pos = random_views(4, 4, 3, rng);
  EXPECT_NEAR(intra_view_loss(z, pos, pos, tau(0.05)).value, 0.0, 1e-12);
}

TEST(IntraView, OppositeExtremesGiveMinusForty) {
  const Matrix z = (Matrix(2, 2) << 1, 0, 0, 1).finished();
  const std::vector<Matrix> pos(4, z), neg(4, Matrix(-z));
  EXPECT_NEAR(intra_view_loss(z, pos, neg, tau(0.05)).value, -40.0, 1e-12);
}

TEST(IntraView, SwappingSignsNegates) {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const Matrix z = random_matrix(5, 3, rng);
    const auto pos = random_views(4, 5, 3, rng), neg = random_views(4, 5, 3, rng);
    EXPECT_NEAR(intra_view_loss(z, pos, neg, tau(0.2)).value, -intra_view_loss(z, neg, pos, tau(0.2)).value,
                1e-12);
  }
}

TEST(IntraView, GradientsMatchFiniteDifferences) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const Matrix z = random_matrix(3 + t % 4, 5, rng);
    const auto pos = random_views(4, z.rows(), 5, rng), neg = random_views(4, z.rows(), 5, rng);
    const auto cfg = tau(t % 2 ? 0.5 : 0.25);
    const auto analytic = intra_view_loss(z, pos, neg, cfg);
    auto eval = [&](std::size_t slot, const Matrix& p) {
      Matrix zz = z;
      auto pp = pos, nn = neg;
      if (slot == 0) zz = p;
      else if (slot <= 4) pp[slot - 1] = p;
      else nn[slot - 5] = p;
      return intra_view_loss(zz, pp, nn, cfg).value;
    };
    for (std::size_t slot = 0; slot < 9; ++slot) {
      const Matrix& x = slot == 0 ? z : slot <= 4 ? pos[slot - 1] : neg[slot - 5];
      const Matrix numeric = numeric_gradient([&](const Matrix& p) { return eval(slot, p); }, x);
      EXPECT_LE(relative_error(analytic.grads[slot], numeric), 1e-4) << "instance " << t << " slot " << slot;
    }
  }
}

TEST(Combined, Endpoints) {
  EXPECT_EQ(contrastive_loss(1.25, -3.5, 0.0), 1.25);
  EXPECT_EQ(contrastive_loss(1.25, -3.5, 1.0), -3.5);
  EXPECT_NEAR(contrastive_loss(1.0, 2.0, 0.8), 1.8, 1e-15);
  EXPECT_EQ(LossConfig{}.alpha, 0.8);
}

TEST(Total, WeightAndLinearity) {
  EXPECT_EQ(total_loss(0.7, 123.0, 0.0), 0.7);
  EXPECT_EQ(LossConfig{}.lambda_cl, 0.01);
  EXPECT_NEAR(total_loss(0.5, 2.0, 0.01) + total_loss(0.25, -1.0, 0.01), total_loss(0.75, 1.0, 0.01), 1e-15);
}

TEST(LossConfig, InvalidValuesAreRejected) {
  LossConfig cfg;
  cfg.tau = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = LossConfig{};
  cfg.alpha = 1.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = LossConfig{};
  cfg.lambda_cl = -0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(SignScores, SaturatedDownLogit) {
  const Matrix logits = (Matrix(1, 3) << 40, -40, -40).finished();
  const auto s = to_sign_score(sign_probabilities(logits, OutputSquash::kNormalizedSigmoid), 0);
  EXPECT_NEAR(s.p_down(), 1.0, 1e-12);
  EXPECT_EQ(s.predicted_label(), -1);
}

TEST(SignScores, ZeroLogitsAreUniform) {
  for (auto squash : {OutputSquash::kNormalizedSigmoid, OutputSquash::kSoftmax}) {
    const Matrix p = sign_probabilities(Matrix::Zero(2, 3), squash);
    EXPECT_LE((p.array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);
  }
}

TEST(SignScores, PublishedRowIsDown) {
  const SignScore s{{0.672, 0.033, 0.294}};
  EXPECT_EQ(s.predicted_label(), -1);
}

TEST(LabelLoss, PerfectOneHotIsZero) {
  const Matrix logits = (Matrix(3, 3) << 1000, -1000, -1000, -1000, 1000, -1000, -1000, -1000, 1000).finished();
  const std::vector<int> labels{-1, 0, 1};
  EXPECT_EQ(label_loss(logits, labels, OutputSquash::kNormalizedSigmoid).value, 0.0);
  EXPECT_EQ(label_loss(logits, labels, OutputSquash::kSoftmax).value, 0.0);
}

TEST(LabelLoss, UniformIsLogThree) {
  const std::vector<int> labels{-1, 0, 1, 1};
  EXPECT_NEAR(label_loss(Matrix::Zero(4, 3), labels, OutputSquash::kNormalizedSigmoid).value, std::log(3.0),
              1e-12);
  EXPECT_NEAR(std::log(3.0), 1.0986, 1e-4);
}

TEST(LabelLoss, NonNegativeAndFloored) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const Matrix logits = random_matrix(6, 3, rng, 5.0);
    std::vector<int> labels;
    for (int r = 0; r < 6; ++r) labels.push_back(static_cast<int>(rng() % 3) - 1);
    EXPECT_GT(label_loss(logits, labels, OutputSquash::kNormalizedSigmoid).value, 0.0);
  }
  const Matrix wrong = (Matrix(1, 3) << 1000, -1000, -1000).finished();
  EXPECT_NEAR(label_loss(wrong, std::vector<int>{1}, OutputSquash::kNormalizedSigmoid).value, -std::log(1e-12),
              1e-9);
}

TEST(LabelLoss, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  for (auto squash : {OutputSquash::kNormalizedSigmoid, OutputSquash::kSoftmax}) {
    for (int t = 0; t < 20; ++t) {
      const Matrix logits = random_matrix(5, 3, rng, 3.0);
      std::vector<int> labels;
      for (int r = 0; r < 5; ++r) labels.push_back(static_cast<int>(rng() % 3) - 1);
      const auto analytic = label_loss(logits, labels, squash);
      const Matrix numeric =
          numeric_gradient([&](const Matrix& p) { return label_loss(p, labels, squash).value; }, logits);
      EXPECT_LE(relative_error(analytic.grads[0], numeric), 1e-4);
    }
  }
}

TEST(LabelLoss, BadLabelIsAnInterfaceError) {
  EXPECT_THROW(label_loss(Matrix::Zero(1, 3), std::vector<int>{2}, OutputSquash::kSoftmax), InterfaceError);
}

TEST(Mse, GradientsMatchFiniteDifferences) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const Matrix pred = random_matrix(4, 3, rng), target = random_matrix(4, 3, rng);
    const auto analytic = mse_loss(pred, target);
    const Matrix numeric = numeric_gradient([&](const Matrix& p) { return mse_loss(p, target).value; }, pred);
    EXPECT_LE(relative_error(analytic.grads[0], numeric), 1e-4);
  }
}

TEST(Losses, RepeatedEvaluationIsBitIdentical) {
  Rng rng(11);
  const auto views = random_views(4, 6, 5, rng);
  const Matrix z = random_matrix(6, 5, rng);
  const std::vector<Matrix> pos(views.begin(), views.end());
  const auto neg = random_views(4, 6, 5, rng);
  EXPECT_EQ(inter_view_loss(views, tau(0.05)).value, inter_view_loss(views, tau(0.05)).value);
  EXPECT_EQ(intra_view_loss(z, pos, neg, tau(0.05)).grads[0], intra_view_loss(z, pos, neg, tau(0.05)).grads[0]);
}

}  // namespace
