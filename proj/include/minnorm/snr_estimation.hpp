#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "minnorm/model_shift.hpp"
#include "minnorm/types.hpp"

namespace minnorm {

struct LassoConfig {
  double lambda_L = 1.0;
  double tol = 1e-8;  // on the largest coordinate change in a sweep
  std::size_t max_sweeps = 10000;
  bool monitor_objective = false;  // record the objective after each sweep

  void validate() const;
};

struct LassoResult {
  CoefVector beta;
  std::size_t sweeps = 0;
  bool converged = false;
  std::optional<std::string> warning;  // set when max_sweeps ran out
  std::vector<double> objective_trace;  // filled only with monitor_objective
};

/// Minimizes (1/(2n))||y - X b||^2 + (lambda_L / sqrt(n)) ||b||_1 by cyclic
/// coordinate descent, n = rows of X.
LassoResult lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& cfg = {});

double lasso_objective(const Matrix& X, const Vector& y, const CoefVector& b, double lambda_L);

struct KktReport {
  bool passed = false;
  double worst_inactive = 0;  // max over b_j = 0 of |g_j| - penalty, clipped at 0
  double worst_active = 0;    // max over b_j != 0 of |g_j - penalty * sign(b_j)|
};

/// Subgradient check with g = X^T (y - X b) / n and penalty lambda_L / sqrt(n).
/// Both worst-case gaps must be at most slack.
KktReport lasso_kkt(const Matrix& X, const Vector& y, const CoefVector& b, double lambda_L,
                    double slack);

struct DebiasedFit {
  CoefVector beta_L;
  CoefVector beta_d;
  double tau_sq = 0;
  Index support_size = 0;
};

/// beta_d = beta_L + X^T r / (n - s), tau^2 = ||r||^2 / (n - s)^2, r = y - X beta_L,
/// s = ||beta_L||_0. Throws EstimateUndefinedError when s >= n.
DebiasedFit debias(const Matrix& X, const Vector& y, const CoefVector& beta_L);

struct ClampFlags {
  bool source_signal = false;
  bool target_signal = false;
  bool noise = false;
  bool shift = false;

  bool any() const { return source_signal || target_signal || noise || shift; }
};

struct SnrReport {
  double snr_hat = 0;
  double ssr_hat = 0;
  double beta_norm_hats[2] = {0, 0};  // source, target
  double sigma_sq_hat = 0;
  double shift_norm_hat = 0;
  ClampFlags clamped;
  // Raw (pre-clamp) values of the four estimated quantities.
  double raw_source_signal = 0, raw_target_signal = 0, raw_noise = 0, raw_shift = 0;
  DebiasedFit fits[2];
  bool lasso_converged[2] = {false, false};
  std::vector<std::string> warnings;
};

struct SnrOptions {
  LassoConfig lasso;
  bool centered_variance = false;  // use the centered variance of y2
};

/// Throws EstimateUndefinedError if the target signal or noise estimate is 0
/// after clamping.
SnrReport estimate_snr_ssr(const DatasetPair& data, const SnrOptions& opts = {});

struct DataDrivenDecision {
  SnrReport report;
  TransferDecision decision;
  OptimalTargetSize target_size;
};

DataDrivenDecision decide_from_data(const DatasetPair& data, const SnrOptions& opts = {});

}  // namespace minnorm
