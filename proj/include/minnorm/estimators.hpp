#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "minnorm/types.hpp"

namespace minnorm {

/// Relative singular-value cutoff used for every pseudoinverse in the library.
inline constexpr double kPinvRelativeCutoff = 1e-10;

/// Thin SVD of a stacked design X = U S V^T, reusable across many responses.
///
/// The min-norm solve truncates singular values below
/// kPinvRelativeCutoff * s_max; the ridge solve uses every singular value.
class PooledFactorization {
 public:
  explicit PooledFactorization(const Matrix& stacked_design);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }
  const Vector& singular_values() const { return s_; }
  const Matrix& right_vectors() const { return V_; }

  /// X^+ y.
  CoefVector min_norm(const Vector& y) const;
  /// (X^T X + n lambda I)^{-1} X^T y with n = rows().
  CoefVector ridge(const Vector& y, double lambda) const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  Index rank_ = 0;
  Matrix U_;
  Vector s_;
  Matrix V_;
};

CoefVector fit_pooled_min_norm(const DatasetPair& data);

/// Min-norm solution of the constraints w_k y^(k) = w_k X^(k) b. Mathematically
/// identical to fit_pooled_min_norm for any positive weights.
CoefVector fit_weighted_pooled(const DatasetPair& data, double w1, double w2);

CoefVector fit_pooled_ridge(const DatasetPair& data, double lambda);

struct GradientDescentResult {
  CoefVector beta;
  std::size_t iterations = 0;
  bool converged = false;  // gradient fell below tolerance before the cap
};

/// Largest admissible step: the iteration contracts iff eta < 2 / lambda_max(X^T X).
double gradient_descent_step_bound(const DatasetPair& data);

/// beta_{t+1} = beta_t + eta * sum_k X^(k)T (y^(k) - X^(k) beta_t), beta_0 = 0.
/// Stops after `iterations` steps or once ||X^T(y - X beta)|| <= tol * ||X^T y||.
GradientDescentResult fit_gradient_descent(const DatasetPair& data, double eta,
                                           std::size_t iterations, double tol = 1e-12);

/// Exact noise-averaged risk E[||beta_hat - beta2||^2_{Sigma2} | X] split into
/// variance and the three bias terms. lambda = 0 selects the min-norm
/// interpolator, lambda > 0 the pooled ridge estimator.
RiskBreakdown empirical_risk_conditional(const DatasetPair& data, const PopulationSpec& pop,
                                         double lambda = 0);

struct MonteCarloRisk {
  double mean = 0;
  double standard_error = 0;
  std::size_t reps = 0;
};

struct MonteCarloOptions {
  std::size_t reps = 50;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = INTERP_RISK_THREADS / hardware
};

/// Redraws Gaussian noise `reps` times on the fixed design in `data` (its
/// responses are ignored), refits, and averages the target risk.
MonteCarloRisk empirical_risk_monte_carlo(const DatasetPair& data, const PopulationSpec& pop,
                                          double lambda, const MonteCarloOptions& options);

/// Noise vector with i.i.d. N(0, sigma_sq) entries from a dedicated seed.
Vector draw_noise(Index n, double sigma_sq, std::uint64_t seed);

/// Substream tags for per-replicate noise; source and target noise are drawn
/// independently so a target-only refit can reuse the target draws.
inline constexpr std::uint64_t kSourceNoiseTag = 0x5151;
inline constexpr std::uint64_t kTargetNoiseTag = 0x7272;

/// Summary of per-replicate losses; standard error uses the n-1 sample variance.
MonteCarloRisk summarize_losses(const std::vector<double>& losses);

}  // namespace minnorm
