#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minnorm/types.hpp"

namespace minnorm {

/// Parameter bundle shared by the model-shift formulas.
struct ShiftSummary {
  Index n1 = 0;
  Index n2 = 0;
  Index p = 0;
  double sigma_sq = 1;
  double beta2_norm_sq = 0;
  double shift_norm_sq = 0;
  double cross_term = 0;  // beta_tilde^T beta2

  Index n() const { return n1 + n2; }
  double gamma() const { return static_cast<double>(p) / static_cast<double>(n()); }
  double gamma1() const { return static_cast<double>(p) / static_cast<double>(n1); }
  double gamma2() const { return static_cast<double>(p) / static_cast<double>(n2); }
  double snr() const { return beta2_norm_sq / sigma_sq; }
  double ssr() const { return shift_norm_sq / beta2_norm_sq; }

  /// Throws InputError on negative counts/norms or a cross term outside Cauchy-Schwarz.
  void validate() const;

  /// ||beta2||^2 = SNR * sigma^2, ||beta_tilde||^2 = SSR * ||beta2||^2, cross term 0.
  static ShiftSummary from_ratios(Index n1, Index n2, Index p, double snr, double ssr,
                                  double sigma_sq = 1);
  /// Realized norms of a population.
  static ShiftSummary from_population(Index n1, Index n2, const CoefVector& beta1,
                                      const CoefVector& beta2, double sigma_sq);
};

RiskBreakdown theory_min_norm_model_shift(const ShiftSummary& s);

double theory_target_only_isotropic(Index n2, Index p, double sigma_sq, double beta2_norm_sq);

struct SourceBlock {
  Index n = 0;
  double shift_norm_sq = 0;
};

RiskBreakdown theory_multi_source(const std::vector<SourceBlock>& sources, Index n_target,
                                  Index p, double sigma_sq, double beta_target_norm_sq);

enum class Recommendation { pool, target_only };
enum class SnrRegime { low_snr, high_snr };

std::string to_string(Recommendation r);
std::string to_string(SnrRegime r);

struct TransferDecision {
  Recommendation recommendation = Recommendation::target_only;
  SnrRegime regime = SnrRegime::low_snr;
  double snr_threshold = 0;
  std::optional<double> rho;  // present only in the high-SNR regime
};

TransferDecision decide_transfer(double snr, double ssr, Index n1, Index n2, Index p);

struct OptimalTargetSize {
  Index n2_grid_opt = 0;
  double grid_risk = 0;
  double n2_printed_formula = 0;
  double n2_stationary_formula = 0;
  double printed_formula_risk = 0;       // at the nearest admissible integer
  double stationary_formula_risk = 0;  // likewise
};

/// Grid minimizer over n2 in [0, p - n1 - 1] of the interpolator risk, plus the
/// two closed-form candidates. Risk is in units of sigma^2 = 1.
OptimalTargetSize optimal_target_size(double snr, double ssr, Index n1, Index p);

/// Multi-line human-readable comparison of the grid optimum and both formulas.
std::string optimal_target_size_report(const OptimalTargetSize& r, double snr, double ssr,
                                       Index n1, Index p);

struct RidgeLimitQuantities {
  double m = 0;
  double m_prime = 0;
  double f1 = 0;
  double f2 = 0;
  double f3 = 0;
  double alpha = 0;
  double s = 0;
};

/// Marchenko-Pastur Stieltjes transform at z = -lambda for aspect ratio gamma = p/n:
/// positive root of gamma*lambda*m^2 + (1 - gamma + lambda)*m - 1 = 0.
double mp_stieltjes(double gamma, double lambda);
/// dm/dz at z = -lambda by implicit differentiation.
double mp_stieltjes_derivative(double gamma, double lambda);

std::pair<RiskBreakdown, RidgeLimitQuantities> theory_ridge_model_shift(const ShiftSummary& s,
                                                                        double lambda);

}  // namespace minnorm
