#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "csgdn/common.hpp"
#include "csgdn/graph.hpp"

namespace csgdn {

struct DiffusionConfig {
  double c = 0.15;          // restart probability
  double beta_bal = 0.5;    // negative surfer over a negative edge turns positive
  double gamma_bal = 0.5;   // negative surfer over a positive edge stays negative
  double epsilon = 1e-9;    // L1 residual tolerance
  int max_iters = 1000;

  void validate() const {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("restart probability c must be in (0, 1]");
    if (!(beta_bal >= 0.0 && beta_bal <= 1.0)) throw ConfigError("beta must be in [0, 1]");
    if (!(gamma_bal >= 0.0 && gamma_bal <= 1.0)) throw ConfigError("gamma must be in [0, 1]");
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iters <= 0) throw ConfigError("max_iters must be positive");
  }
};

struct SeedScores {
  Vector r_plus;
  Vector r_minus;
  std::size_t seed = 0;
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<double> residuals;  // one per iteration
};

/// Called after every sweep with the current iterate and its residual.
using IterationObserver =
    std::function<void(int iteration, const Vector& r_plus, const Vector& r_minus, double residual)>;

/// Transposed blocks of the signed transition operator, built once per graph.
struct SrwrOperator {
  SparseMatrix pos_t;  // Ã⁺ᵀ
  SparseMatrix neg_t;  // Ã⁻ᵀ

  explicit SrwrOperator(const NormalizedAdjacency& a)
      : pos_t(a.positive.transpose()), neg_t(a.negative.transpose()) {}

  Eigen::Index size() const { return pos_t.rows(); }
};

/// Power iteration for one seed:
///   r⁺ ← (1−c)(Ã⁺ᵀr⁺ + βÃ⁻ᵀr⁻ + (1−γ)Ã⁺ᵀr⁻) + c·q
///   r⁻ ← (1−c)(Ã⁻ᵀr⁺ + γÃ⁺ᵀr⁻ + (1−β)Ã⁻ᵀr⁻)
/// starting from r⁺ = q, r⁻ = 0, until the L1 change drops below ε.
/// After the first sweep the step d = r_t − r_{t−1} is propagated directly
/// (d ← (1−c)Bd, r ← r + d), so the residual ‖d‖₁ is computed without
/// cancellation and its decay is exact up to relative rounding.
inline SeedScores srwr_single_seed(const SrwrOperator& op, std::size_t seed,
                                   const DiffusionConfig& cfg,
                                   const IterationObserver& observer = {}) {
  cfg.validate();
  const auto n = op.size();
  if (seed >= static_cast<std::size_t>(n)) throw DimensionError("seed node out of range");
  const auto s = static_cast<Eigen::Index>(seed);
  const double walk = 1.0 - cfg.c;

  SeedScores out;
  out.seed = seed;
  Vector rp = Vector::Zero(n);
  Vector rn = Vector::Zero(n);
  rp(s) = 1.0;

  Vector pos_p(n), neg_p(n), pos_n(n), neg_n(n), dp(n), dn(n);
  auto apply = [&](const Vector& xp, const Vector& xn, Vector& yp, Vector& yn) {
    pos_p.noalias() = op.pos_t * xp;
    neg_p.noalias() = op.neg_t * xp;
    pos_n.noalias() = op.pos_t * xn;
    neg_n.noalias() = op.neg_t * xn;
    yp = walk * (pos_p + cfg.beta_bal * neg_n + (1.0 - cfg.gamma_bal) * pos_n);
    yn = walk * (neg_p + cfg.gamma_bal * pos_n + (1.0 - cfg.beta_bal) * neg_n);
  };

  for (int it = 1; it <= cfg.max_iters; ++it) {
    if (it == 1) {
      apply(rp, rn, dp, dn);
      dp(s) += cfg.c;
      dp -= rp;
      dn -= rn;
    } else {
      Vector prev_p = dp, prev_n = dn;
      apply(prev_p, prev_n, dp, dn);
    }
    rp += dp;
    rn += dn;
    const double delta = dp.lpNorm<1>() + dn.lpNorm<1>();
    if (!std::isfinite(delta) || !rp.allFinite() || !rn.allFinite()) {
      throw NumericalError("non-finite score at iteration " + std::to_string(it) + " for seed " +
                           std::to_string(seed));
    }
    out.residuals.push_back(delta);
    out.iterations = it;
    out.final_residual = delta;
    if (observer) observer(it, rp, rn, delta);
    if (delta < cfg.epsilon) {
      out.r_plus = std::move(rp);
      out.r_minus = std::move(rn);
      return out;
    }
  }
  throw ConvergenceError("seed " + std::to_string(seed) + " did not converge in " +
                             std::to_string(cfg.max_iters) + " iterations (residual " +
                             std::to_string(out.final_residual) + ")",
                         out.final_residual, out.iterations);
}

inline SeedScores srwr_single_seed(const NormalizedAdjacency& a, std::size_t seed,
                                   const DiffusionConfig& cfg,
                                   const IterationObserver& observer = {}) {
  return srwr_single_seed(SrwrOperator(a), seed, cfg, observer);
}

/// Direct solve of the fixed point: (I − (1−c)B)[r⁺; r⁻] = c[q; 0] with
///   B = [ Ã⁺ᵀ   βÃ⁻ᵀ + (1−γ)Ã⁺ᵀ ]
///       [ Ã⁻ᵀ   γÃ⁺ᵀ + (1−β)Ã⁻ᵀ ]
/// Dense LU, factorized once and reused across seeds.
class SrwrDirectSolver {
 public:
  SrwrDirectSolver(const NormalizedAdjacency& a, const DiffusionConfig& cfg) : c_(cfg.c) {
    cfg.validate();
    n_ = a.size();
    const Matrix pt = Matrix(a.positive).transpose();
    const Matrix nt = Matrix(a.negative).transpose();
    Matrix b(2 * n_, 2 * n_);
    b.topLeftCorner(n_, n_) = pt;
    b.topRightCorner(n_, n_) = cfg.beta_bal * nt + (1.0 - cfg.gamma_bal) * pt;
    b.bottomLeftCorner(n_, n_) = nt;
    b.bottomRightCorner(n_, n_) = cfg.gamma_bal * pt + (1.0 - cfg.beta_bal) * nt;
    Matrix system = Matrix::Identity(2 * n_, 2 * n_) - (1.0 - cfg.c) * b;
    lu_.compute(system);
    if (!(std::abs(lu_.determinant()) > 0.0)) throw NumericalError("singular SRWR system");
  }

  SeedScores solve(std::size_t seed) const {
    if (seed >= static_cast<std::size_t>(n_)) throw DimensionError("seed node out of range");
    Vector rhs = Vector::Zero(2 * n_);
    rhs(static_cast<Eigen::Index>(seed)) = c_;
    const Vector r = lu_.solve(rhs);
    if (!r.allFinite()) throw NumericalError("non-finite direct solution");
    SeedScores out;
    out.seed = seed;
    out.r_plus = r.head(n_);
    out.r_minus = r.tail(n_);
    return out;
  }

 private:
  double c_;
  Eigen::Index n_ = 0;
  Eigen::PartialPivLU<Matrix> lu_;
};

inline SeedScores srwr_linear_solve_oracle(const NormalizedAdjacency& a, std::size_t seed,
                                           const DiffusionConfig& cfg) {
  if (cfg.c == 1.0) {
    cfg.validate();
    SeedScores out;
    out.seed = seed;
    out.r_plus = Vector::Zero(a.size());
    out.r_minus = Vector::Zero(a.size());
    out.r_plus(static_cast<Eigen::Index>(seed)) = 1.0;
    return out;
  }
  return SrwrDirectSolver(a, cfg).solve(seed);
}

struct DiffusionResult {
  Matrix r_p;               // row i: positive scores from seed i
  Matrix r_n;               // row i: negative scores from seed i
  Matrix diffusion_matrix;  // max(r_p, r_pᵀ) − max(r_n, r_nᵀ)
  std::vector<std::size_t> dangling;
  int max_iterations = 0;
};

inline Matrix symmetric_difference_of_max(const Matrix& rp, const Matrix& rn) {
  const auto n = rp.rows();
  Matrix out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out(i, j) = std::max(rp(i, j), rp(j, i)) - std::max(rn(i, j), rn(j, i));
    }
  }
  return out;
}

/// Runs every node as a seed. Seeds are split across `threads` workers;
/// rows are written by seed index so the result is thread-count independent.
inline DiffusionResult srwr_all_seeds(
    const NormalizedAdjacency& a, const DiffusionConfig& cfg, int threads = 1,
    const std::function<std::string(std::size_t)>& seed_name = {}) {
  cfg.validate();
  const SrwrOperator op(a);
  const auto n = op.size();
  DiffusionResult out;
  out.dangling = a.dangling;
  out.r_p.resize(n, n);
  out.r_n.resize(n, n);

  std::atomic<Eigen::Index> next{0};
  std::atomic<int> max_iters{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const auto seed = next.fetch_add(1);
      if (seed >= n) return;
      try {
        auto scores = srwr_single_seed(op, static_cast<std::size_t>(seed), cfg);
        out.r_p.row(seed) = scores.r_plus.transpose();
        out.r_n.row(seed) = scores.r_minus.transpose();
        int seen = max_iters.load();
        while (scores.iterations > seen && !max_iters.compare_exchange_weak(seen, scores.iterations)) {
        }
      } catch (const Error& e) {
        const std::string tag =
            "seed '" + (seed_name ? seed_name(static_cast<std::size_t>(seed)) : std::to_string(seed)) +
            "': " + e.what();
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          if (auto* conv = dynamic_cast<const ConvergenceError*>(&e)) {
            failure = std::make_exception_ptr(ConvergenceError(tag, conv->residual, conv->iterations));
          } else {
            failure = std::make_exception_ptr(Error(e.category(), tag));
          }
        }
        next.store(n);
        return;
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<Eigen::Index>(n, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  out.max_iterations = max_iters.load();
  out.diffusion_matrix = symmetric_difference_of_max(out.r_p, out.r_n);
  return out;
}

inline DiffusionResult srwr_all_seeds(const SignedBipartiteGraph& g, const DiffusionConfig& cfg,
                                      int threads = 1) {
  return srwr_all_seeds(semi_row_normalize(adjacency(g), DanglingPolicy::kZeroRow), cfg, threads,
                        [&g](std::size_t i) { return g.node(i).label; });
}

/// How a real-valued diffusion matrix becomes a discrete signed graph.
struct DensifyPolicy {
  enum class Kind { kTopK, kThreshold };
  Kind kind = Kind::kTopK;
  int k = 10;
  double threshold = 0.0;
  bool retain_original = true;

  static DensifyPolicy top_k(int k, bool retain = true) {
    return {Kind::kTopK, k, 0.0, retain};
  }
  static DensifyPolicy at_threshold(double t, bool retain = true) {
    return {Kind::kThreshold, 0, t, retain};
  }

  void validate() const {
    if (kind == Kind::kTopK && k <= 0) throw ConfigError("top-k densify needs k > 0");
    if (kind == Kind::kThreshold && !(threshold >= 0.0)) {
      throw ConfigError("densify threshold must be >= 0");
    }
  }

  /// "topk:K" or "threshold:T".
  static DensifyPolicy parse(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("densify policy '" + spec + "' lacks ':'");
    const auto name = spec.substr(0, colon);
    const auto arg = spec.substr(colon + 1);
    double v = 0.0;
    if (!text::parse_double(arg, v)) throw ConfigError("bad densify argument '" + arg + "'");
    DensifyPolicy p;
    if (name == "topk") {
      if (v != std::floor(v)) throw ConfigError("top-k needs an integer");
      p = top_k(static_cast<int>(v));
    } else if (name == "threshold") {
      p = at_threshold(v);
    } else {
      throw ConfigError("unknown densify policy '" + name + "'");
    }
    p.validate();
    return p;
  }

  std::string to_string() const {
    return kind == Kind::kTopK ? "topk:" + std::to_string(k) : "threshold:" + text::format_exact(threshold);
  }
};

/// Gene–phenotype block of the diffusion matrix as a signed graph: entry s
/// becomes an edge with sign(s) and weight |s|. Zero entries never produce
/// edges. Retained original edges keep their own sign.
inline SignedBipartiteGraph densify(const DiffusionResult& result,
                                    const SignedBipartiteGraph& original,
                                    const DensifyPolicy& policy) {
  policy.validate();
  const auto& s = result.diffusion_matrix;
  if (static_cast<std::size_t>(s.rows()) != original.num_nodes()) {
    throw DimensionError("diffusion matrix does not match graph size");
  }
  const std::size_t n = original.num_genes();
  const std::size_t m = original.num_phenotypes();
  SignedBipartiteGraph out = original.empty_copy();

  auto score = [&](std::size_t g, std::size_t p) {
    return s(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(n + p));
  };
  auto sign_of = [](double v) { return v > 0 ? Sign::kPositive : Sign::kNegative; };

  if (policy.retain_original) {
    for (const auto& e : original.sorted_edges()) {
      const double v = score(e.gene, e.phenotype);
      out.add_edge(e.gene, e.phenotype, e.sign, v != 0.0 ? std::abs(v) : 1.0);
    }
  }
  std::vector<std::size_t> order(m);
  for (std::size_t g = 0; g < n; ++g) {
    if (policy.kind == DensifyPolicy::Kind::kThreshold) {
      for (std::size_t p = 0; p < m; ++p) {
        const double v = score(g, p);
        if (v != 0.0 && std::abs(v) > policy.threshold && !out.edge_sign(g, p)) {
          out.add_edge(g, p, sign_of(v), std::abs(v));
        }
      }
      continue;
    }
    for (std::size_t p = 0; p < m; ++p) order[p] = p;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(score(g, a)) > std::abs(score(g, b));
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(policy.k), m);
    for (std::size_t r = 0; r < take; ++r) {
      const std::size_t p = order[r];
      const double v = score(g, p);
      if (v == 0.0) break;
      if (!out.edge_sign(g, p)) out.add_edge(g, p, sign_of(v), std::abs(v));
    }
  }
  return out.with_edges(out.sorted_edges());
}

}  // namespace csgdn
