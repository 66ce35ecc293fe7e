#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "minnorm/types.hpp"

namespace minnorm {

struct SpectrumAtom {
  double lam1 = 1;  // eigenvalue of Sigma1
  double lam2 = 1;  // eigenvalue of Sigma2
  double weight = 1;
};

/// Joint empirical spectrum of a simultaneously diagonalizable (Sigma1, Sigma2).
struct JointSpectrum {
  std::vector<SpectrumAtom> atoms;

  /// Weights > 0 summing to 1 within 1e-12, eigenvalues positive and finite.
  /// A positive tau additionally enforces eigenvalues in [tau, 1/tau].
  void validate(double tau = 0) const;

  static JointSpectrum isotropic();
  /// {(kappa, 1), (1/kappa, 1)} with equal weights.
  static JointSpectrum reciprocal_pair(double kappa);
};

/// Same atoms weighted by the squared projections of beta2 onto the shared
/// eigenvectors, normalized to sum to 1.
struct SignalSpectrum {
  std::vector<SpectrumAtom> atoms;

  /// Weights >= 0 summing to 1 within 1e-12.
  void validate() const;

  /// Signal spread evenly over the atoms of H (weights copied from H).
  static SignalSpectrum aligned_with(const JointSpectrum& H);
  /// From diagonal covariances and beta2 in the shared eigenbasis.
  static SignalSpectrum from_coefficients(const Vector& lam1, const Vector& lam2,
                                          const CoefVector& beta2);
};

/// JointSpectrum of diagonal covariances (one atom per coordinate).
JointSpectrum joint_spectrum_from_diagonals(const Vector& lam1, const Vector& lam2);

struct SolverSettings {
  double tol = 1e-12;
  std::size_t max_iter = 200;
  double bracket_hi_growth = 2;

  void validate() const;
};

/// (a1..a4), (b1..b4) of the interpolator (lambda = 0) or ridge system.
struct CovariateSolution {
  std::array<double, 4> a{};
  std::array<double, 4> b{};
  double lambda = 0;
  double residual_norm = 0;  // max absolute residual over all eight equations
};

/// Residuals of the four variance and four bias equations at a candidate
/// solution, in equation order. lambda = 0 selects the interpolator system.
std::array<double, 8> covariate_residuals(const JointSpectrum& H, Index n1, Index n2, Index p,
                                          const CovariateSolution& sol);

/// Variance system of the interpolator limit; b is filled with the shared
/// first two unknowns only.
CovariateSolution solve_interpolator_system(const JointSpectrum& H, Index n1, Index n2,
                                            Index p, const SolverSettings& cfg = {});

/// Bias system of the interpolator limit, solved independently of the variance system.
std::array<double, 4> solve_bias_system(const JointSpectrum& H, Index n1, Index n2, Index p,
                                        const SolverSettings& cfg = {});

/// Full certified interpolator solution (both systems).
CovariateSolution solve_covariate_interpolator(const JointSpectrum& H, Index n1, Index n2,
                                               Index p, const SolverSettings& cfg = {});

/// Interpolator risk under covariate shift; b2 = b3 = 0 since beta1 = beta2.
RiskBreakdown risk_covariate_shift(const JointSpectrum& H, const SignalSpectrum& G, Index n1,
                                   Index n2, Index p, double sigma_sq, double beta2_norm_sq,
                                   const SolverSettings& cfg = {});

/// Same, reusing an already solved system.
RiskBreakdown risk_from_solution(const JointSpectrum& H, const SignalSpectrum& G, Index n1,
                                 Index n2, Index p, double sigma_sq, double beta2_norm_sq,
                                 const CovariateSolution& sol);

std::pair<RiskBreakdown, CovariateSolution> solve_ridge_covariate(
    const JointSpectrum& H, const SignalSpectrum& G, Index n1, Index n2, Index p,
    double sigma_sq, double beta2_norm_sq, double lambda, const SolverSettings& cfg = {});

struct TargetOnlyAnisotropic {
  double risk = 0;
  double c0 = 0;
  double gamma_star = 0;  // p / n2
};

/// Target-only interpolator risk with anisotropic Sigma2. Uses the lam2
/// marginals of H and G. The fixed point solved is
///   1 - 1/gamma* = sum_w 1 / (1 + c0 gamma* lam2).
TargetOnlyAnisotropic theory_target_only_anisotropic(const JointSpectrum& H,
                                                     const SignalSpectrum& G, Index n2, Index p,
                                                     double sigma_sq, double beta2_norm_sq,
                                                     const SolverSettings& cfg = {});

/// Residual of the c0 fixed point (exposed for independent checks).
double target_only_fixed_point_residual(const JointSpectrum& H, Index n2, Index p, double c0);

struct HeterogeneityRow {
  double kappa = 1;
  double risk = 0;
  double diff_to_identity = 0;
};

enum class KappaTrend { decreasing, increasing, invariant, mixed };
std::string to_string(KappaTrend t);

struct HeterogeneityProfile {
  std::vector<HeterogeneityRow> rows;
  KappaTrend observed = KappaTrend::mixed;
  KappaTrend predicted = KappaTrend::mixed;  // from where n1 sits relative to p/2 and p - n2
};

/// Risk along kappa with Sigma2 = I and Sigma1 on the reciprocal pair M(kappa).
HeterogeneityProfile heterogeneity_profile(const std::vector<double>& kappa_grid, Index n1,
                                           Index n2, Index p, double sigma_sq,
                                           double beta2_norm_sq, const SolverSettings& cfg = {},
                                           double invariance_tol = 1e-8);

}  // namespace minnorm
