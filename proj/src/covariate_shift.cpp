#include "minnorm/covariate_shift.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "minnorm/errors.hpp"

namespace minnorm {

namespace {

constexpr double kDeterminantGuard = 1e-14;

void check_dims(Index n1, Index n2, Index p, bool interpolator) {
  if (n1 < 0 || n2 < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  if (n1 + n2 == 0) throw InputError("at least one of n1, n2 must be positive");
  if (interpolator && p <= n1 + n2)
    throw DomainError("interpolator theory undefined at/below threshold (p = " +
                      std::to_string(p) + ", n = " + std::to_string(n1 + n2) + ")");
}

// Root of f on [lo, hi] with f(lo) and f(hi) of opposite sign; hi grows
// geometrically until the sign changes.
double bisect(const std::function<double(double)>& f, double lo, double hi,
              const SolverSettings& cfg, bool expand, const char* what) {
  double flo = f(lo);
  if (flo == 0) return lo;
  double fhi = f(hi);
  std::size_t grow = 0;
  while (std::signbit(flo) == std::signbit(fhi) && fhi != 0) {
    if (!expand || ++grow > cfg.max_iter)
      throw SolverError(std::string("no sign change bracketing ") + what);
    lo = hi;
    flo = fhi;
    hi *= cfg.bracket_hi_growth;
    fhi = f(hi);
  }
  if (fhi == 0) return hi;
  // Runs to full double resolution; the cap only guards pathological input.
  for (std::size_t it = 0; it < 4 * cfg.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::array<double, 2> solve2(const double M[2][2], const double rhs[2], const char* what) {
  const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  const double scale = std::max({std::abs(M[0][0] * M[1][1]), std::abs(M[0][1] * M[1][0]),
                                 std::numeric_limits<double>::min()});
  if (!std::isfinite(det) || std::abs(det) <= kDeterminantGuard * scale)
    throw SolverError(std::string("singular 2x2 system for ") + what);
  return {(rhs[0] * M[1][1] - M[0][1] * rhs[1]) / det,
          (M[0][0] * rhs[1] - M[1][0] * rhs[0]) / det};
}

struct Moments {
  double l1 = 0, l2 = 0, l1l2 = 0, l2l2 = 0;  // sums of w * (.) / D^2
};

// lambda = 0 is the interpolator limit, where the denominator offset is 1.
Moments moments(const JointSpectrum& H, double a1, double a2, double lambda) {
  Moments m;
  for (const auto& at : H.atoms) {
    const double D = a1 * at.lam1 + a2 * at.lam2 + (lambda == 0 ? 1.0 : lambda);
    const double w = at.weight / (D * D);
    m.l1 += w * at.lam1;
    m.l2 += w * at.lam2;
    m.l1l2 += w * at.lam1 * at.lam2;
    m.l2l2 += w * at.lam2 * at.lam2;
  }
  return m;
}

double ratio(Index a, Index b) { return static_cast<double>(a) / static_cast<double>(b); }

// First two unknowns, shared by the variance and bias systems.
std::array<double, 2> solve_leading_pair(const JointSpectrum& H, Index n1, Index n2, Index p,
                                         double lambda, const SolverSettings& cfg) {
  const Index n = n1 + n2;
  const double g = ratio(p, n), frac1 = ratio(n1, n);

  if (lambda == 0) {
    auto inner = [&](double a2) {
      if (n1 == 0) return 0.0;
      auto f = [&](double a1) {
        double s = 0;
        for (const auto& at : H.atoms)
          s += at.weight * a1 * at.lam1 / (a1 * at.lam1 + a2 * at.lam2 + 1);
        return frac1 - g * s;
      };
      return bisect(f, 0.0, 1.0, cfg, true, "a1");
    };
    auto outer = [&](double a2) {
      const double a1 = inner(a2);
      double s = 0;
      for (const auto& at : H.atoms) {
        const double u = a1 * at.lam1 + a2 * at.lam2;
        s += at.weight * u / (u + 1);
      }
      return 1 - g * s;
    };
    const double a2 = n2 == 0 ? 0.0 : bisect(outer, 0.0, 1.0, cfg, true, "a2");
    return {inner(a2), a2};
  }

  auto inner = [&](double a2) {
    if (n1 == 0) return 0.0;
    auto f = [&](double a1) {
      double s = 0;
      for (const auto& at : H.atoms)
        s += at.weight * a1 * at.lam1 / (a1 * at.lam1 + a2 * at.lam2 + lambda);
      return a1 - frac1 + g * s;
    };
    return bisect(f, 0.0, frac1, cfg, false, "a1");
  };
  auto outer = [&](double a2) {
    const double a1 = inner(a2);
    double s = 0;
    for (const auto& at : H.atoms) {
      const double u = a1 * at.lam1 + a2 * at.lam2;
      s += at.weight * u / (u + lambda);
    }
    return a1 + a2 - 1 + g * s;
  };
  const double a2 = n2 == 0 ? 0.0 : bisect(outer, 0.0, 1.0, cfg, false, "a2");
  return {inner(a2), a2};
}

std::array<double, 2> trailing_variance(const JointSpectrum& H, Index n1, Index n2, Index p,
                                        double a1, double a2, double lambda) {
  const double g = ratio(p, n1 + n2);
  const Moments m = moments(H, a1, a2, lambda);
  if (lambda == 0) {
    const double M[2][2] = {{g * m.l1, g * m.l2}, {g * (m.l1 + m.l1l2 * a2), -g * m.l1l2 * a1}};
    const double rhs[2] = {-(a1 + a2), -a1};
    return solve2(M, rhs, "(a3, a4)");
  }
  const double M[2][2] = {{1 + g * lambda * m.l1, 1 + g * lambda * m.l2},
                          {1 + g * (lambda * m.l1 + m.l1l2 * a2), -g * m.l1l2 * a1}};
  const double rhs[2] = {g * (m.l1 * a1 + m.l2 * a2), g * m.l1 * a1};
  return solve2(M, rhs, "(a3, a4)");
}

std::array<double, 2> trailing_bias(const JointSpectrum& H, Index n1, Index n2, Index p,
                                    double b1, double b2, double lambda) {
  const double g = ratio(p, n1 + n2);
  const Moments m = moments(H, b1, b2, lambda);
  if (lambda == 0) {
    const double M[2][2] = {{m.l1, m.l2}, {m.l1 + m.l1l2 * b2, -m.l1l2 * b1}};
    const double rhs[2] = {b1 * m.l1l2 + b2 * m.l2l2, b1 * m.l1l2};
    return solve2(M, rhs, "(b3, b4)");
  }
  const double M[2][2] = {{1 + g * lambda * m.l1, 1 + g * lambda * m.l2},
                          {1 + g * (lambda * m.l1 + m.l1l2 * b2), -g * m.l1l2 * b1}};
  const double rhs[2] = {g * lambda * (b1 * m.l1l2 + b2 * m.l2l2), g * lambda * b1 * m.l1l2};
  return solve2(M, rhs, "(b3, b4)");
}

// Residuals of one four-equation block together with the magnitude of the
// terms in each equation, which sets the scale for certification.
struct BlockResidual {
  std::array<double, 4> r{};
  std::array<double, 4> scale{};
};

BlockResidual block_residual(const JointSpectrum& H, Index n1, Index n2, Index p,
                             const std::array<double, 4>& x, double lambda, bool bias) {
  const double g = ratio(p, n1 + n2), frac1 = ratio(n1, n1 + n2);
  const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3];
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0, t3 = 0, t4 = 0;
  for (const auto& at : H.atoms) {
    const double l1 = at.lam1, l2 = at.lam2, w = at.weight;
    const double u = x1 * l1 + x2 * l2;
    const double D = u + (lambda == 0 ? 1.0 : lambda);
    const double D2 = D * D;
    s1 += w * u / D;
    s2 += w * x1 * l1 / D;
    double e3, e4, m3, m4;
    const double cross = l1 * l2 * (x3 * x2 - x4 * x1);
    const double mcross = l1 * l2 * (std::abs(x3 * x2) + std::abs(x4 * x1));
    if (lambda == 0 && !bias) {
      e3 = x3 * l1 + x4 * l2;
      e4 = x3 * l1 + cross;
      m3 = std::abs(x3 * l1) + std::abs(x4 * l2);
      m4 = std::abs(x3 * l1) + mcross;
    } else if (lambda == 0) {
      e3 = l1 * (x3 - x1 * l2) + l2 * (x4 - x2 * l2);
      e4 = l1 * (x3 - x1 * l2) + cross;
      m3 = l1 * (std::abs(x3) + std::abs(x1) * l2) + l2 * (std::abs(x4) + std::abs(x2) * l2);
      m4 = l1 * (std::abs(x3) + std::abs(x1) * l2) + mcross;
    } else if (!bias) {
      e3 = l1 * (x3 * lambda - x1) + l2 * (x4 * lambda - x2);
      e4 = l1 * (x3 * lambda - x1) + cross;
      m3 = l1 * (std::abs(x3) * lambda + std::abs(x1)) + l2 * (std::abs(x4) * lambda + std::abs(x2));
      m4 = l1 * (std::abs(x3) * lambda + std::abs(x1)) + mcross;
    } else {
      e3 = l1 * lambda * (x3 - x1 * l2) + l2 * lambda * (x4 - x2 * l2);
      e4 = l1 * lambda * (x3 - x1 * l2) + cross;
      m3 = lambda * (l1 * (std::abs(x3) + std::abs(x1) * l2) + l2 * (std::abs(x4) + std::abs(x2) * l2));
      m4 = l1 * lambda * (std::abs(x3) + std::abs(x1) * l2) + mcross;
    }
    s3 += w * e3 / D2;
    s4 += w * e4 / D2;
    t3 += w * m3 / D2;
    t4 += w * m4 / D2;
  }
  BlockResidual out;
  if (lambda == 0) {
    out.r[0] = 1 - g * s1;
    out.r[1] = frac1 - g * s2;
    if (!bias) {
      out.r[2] = x1 + x2 + g * s3;
      out.r[3] = x1 + g * s4;
      out.scale = {1 + g * s1, frac1 + g * s2, std::abs(x1) + std::abs(x2) + g * t3,
                   std::abs(x1) + g * t4};
    } else {
      out.r[2] = s3;
      out.r[3] = s4;
      out.scale = {1 + g * s1, frac1 + g * s2, t3, t4};
    }
  } else {
    out.r[0] = x1 + x2 - 1 + g * s1;
    out.r[1] = x1 - frac1 + g * s2;
    out.r[2] = x3 + x4 + g * s3;
    out.r[3] = x3 + g * s4;
    out.scale = {std::abs(x1) + std::abs(x2) + 1 + g * s1, std::abs(x1) + frac1 + g * s2,
                 std::abs(x3) + std::abs(x4) + g * t3, std::abs(x3) + g * t4};
  }
  return out;
}

void certify(const JointSpectrum& H, Index n1, Index n2, Index p, CovariateSolution& sol,
             const SolverSettings& cfg) {
  const BlockResidual va = block_residual(H, n1, n2, p, sol.a, sol.lambda, false);
  const BlockResidual vb = block_residual(H, n1, n2, p, sol.b, sol.lambda, true);
  double worst_abs = 0, worst_rel = 0;
  for (int i = 0; i < 4; ++i) {
    for (const BlockResidual* blk : {&va, &vb}) {
      const double r = std::abs(blk->r[i]);
      if (!std::isfinite(r)) throw SolverError("non-finite residual in covariate system");
      worst_abs = std::max(worst_abs, r);
      worst_rel = std::max(worst_rel, r / std::max(1.0, blk->scale[i]));
    }
  }
  sol.residual_norm = worst_abs;
  if (worst_rel > cfg.tol)
    throw SolverError("covariate system relative residual " + std::to_string(worst_rel * 1e12) + "e-12" +
                      " exceeds tolerance");
  if ((n1 > 0 && !(sol.a[0] > 0)) || (n2 > 0 && !(sol.a[1] > 0)))
    throw SolverError("covariate solution lost positivity");
}

}  // namespace

void JointSpectrum::validate(double tau) const {
  if (atoms.empty()) throw InputError("spectrum has no atoms");
  double total = 0;
  for (const auto& at : atoms) {
    if (!(at.weight > 0) || !std::isfinite(at.weight))
      throw InputError("spectrum weights must be positive");
    if (!(at.lam1 > 0) || !(at.lam2 > 0) || !std::isfinite(at.lam1) || !std::isfinite(at.lam2))
      throw InputError("spectrum eigenvalues must be positive and finite");
    if (tau > 0 && (std::min(at.lam1, at.lam2) < tau || std::max(at.lam1, at.lam2) > 1 / tau))
      throw InputError("spectrum eigenvalue outside [tau, 1/tau]");
    total += at.weight;
  }
  if (std::abs(total - 1) > 1e-12) throw InputError("spectrum weights must sum to 1");
}

JointSpectrum JointSpectrum::isotropic() { return {{{1, 1, 1}}}; }

JointSpectrum JointSpectrum::reciprocal_pair(double kappa) {
  if (!(kappa > 0)) throw InputError("kappa must be positive");
  return {{{kappa, 1, 0.5}, {1 / kappa, 1, 0.5}}};
}

void SignalSpectrum::validate() const {
  if (atoms.empty()) throw InputError("signal spectrum has no atoms");
  double total = 0;
  for (const auto& at : atoms) {
    if (!(at.weight >= 0) || !std::isfinite(at.weight))
      throw InputError("signal weights must be nonnegative");
    if (!(at.lam1 > 0) || !(at.lam2 > 0)) throw InputError("signal eigenvalues must be positive");
    total += at.weight;
  }
  if (std::abs(total - 1) > 1e-12) throw InputError("signal weights must sum to 1");
}

SignalSpectrum SignalSpectrum::aligned_with(const JointSpectrum& H) { return {H.atoms}; }

SignalSpectrum SignalSpectrum::from_coefficients(const Vector& lam1, const Vector& lam2,
                                                 const CoefVector& beta2) {
  if (lam1.size() != lam2.size() || lam1.size() != beta2.size())
    throw InputError("eigenvalue and coefficient vectors differ in length");
  const double norm = beta2.squaredNorm();
  if (!(norm > 0)) throw InputError("signal spectrum undefined for a zero signal");
  SignalSpectrum G;
  G.atoms.reserve(lam1.size());
  for (Index i = 0; i < lam1.size(); ++i)
    G.atoms.push_back({lam1(i), lam2(i), beta2(i) * beta2(i) / norm});
  return G;
}

JointSpectrum joint_spectrum_from_diagonals(const Vector& lam1, const Vector& lam2) {
  if (lam1.size() != lam2.size() || lam1.size() == 0)
    throw InputError("eigenvalue vectors must be nonempty and of equal length");
  JointSpectrum H;
  const double w = 1.0 / static_cast<double>(lam1.size());
  for (Index i = 0; i < lam1.size(); ++i) H.atoms.push_back({lam1(i), lam2(i), w});
  return H;
}

void SolverSettings::validate() const {
  if (!(tol > 0)) throw InputError("solver tolerance must be positive");
  if (max_iter < 1) throw InputError("solver iteration cap must be at least 1");
  if (!(bracket_hi_growth > 1)) throw InputError("bracket growth factor must exceed 1");
}

std::array<double, 8> covariate_residuals(const JointSpectrum& H, Index n1, Index n2, Index p,
                                          const CovariateSolution& sol) {
  const BlockResidual va = block_residual(H, n1, n2, p, sol.a, sol.lambda, false);
  const BlockResidual vb = block_residual(H, n1, n2, p, sol.b, sol.lambda, true);
  return {va.r[0], va.r[1], va.r[2], va.r[3], vb.r[0], vb.r[1], vb.r[2], vb.r[3]};
}

CovariateSolution solve_interpolator_system(const JointSpectrum& H, Index n1, Index n2,
                                            Index p, const SolverSettings& cfg) {
  cfg.validate();
  H.validate();
  check_dims(n1, n2, p, true);
  const auto lead = solve_leading_pair(H, n1, n2, p, 0, cfg);
  const auto tail = trailing_variance(H, n1, n2, p, lead[0], lead[1], 0);
  CovariateSolution sol;
  sol.a = {lead[0], lead[1], tail[0], tail[1]};
  sol.b = {lead[0], lead[1], 0, 0};
  const BlockResidual va = block_residual(H, n1, n2, p, sol.a, 0, false);
  double worst = 0;
  for (int i = 0; i < 4; ++i) {
    worst = std::max(worst, std::abs(va.r[i]));
    if (std::abs(va.r[i]) > cfg.tol * std::max(1.0, va.scale[i]))
      throw SolverError("variance system residual " + std::to_string(va.r[i]) + " in equation " + std::to_string(i + 1) + " exceeds tolerance");
  }
  sol.residual_norm = worst;
  return sol;
}

std::array<double, 4> solve_bias_system(const JointSpectrum& H, Index n1, Index n2, Index p,
                                        const SolverSettings& cfg) {
  cfg.validate();
  H.validate();
  check_dims(n1, n2, p, true);
  const auto lead = solve_leading_pair(H, n1, n2, p, 0, cfg);
  const auto tail = trailing_bias(H, n1, n2, p, lead[0], lead[1], 0);
  const std::array<double, 4> b{lead[0], lead[1], tail[0], tail[1]};
  const BlockResidual vb = block_residual(H, n1, n2, p, b, 0, true);
  for (int i = 0; i < 4; ++i)
    if (std::abs(vb.r[i]) > cfg.tol * std::max(1.0, vb.scale[i]))
      throw SolverError("bias system residual exceeds tolerance");
  return b;
}

CovariateSolution solve_covariate_interpolator(const JointSpectrum& H, Index n1, Index n2,
                                               Index p, const SolverSettings& cfg) {
  CovariateSolution sol = solve_interpolator_system(H, n1, n2, p, cfg);
  sol.b = solve_bias_system(H, n1, n2, p, cfg);
  certify(H, n1, n2, p, sol, cfg);
  return sol;
}

RiskBreakdown risk_from_solution(const JointSpectrum& H, const SignalSpectrum& G, Index n1,
                                 Index n2, Index p, double sigma_sq, double beta2_norm_sq,
                                 const CovariateSolution& sol) {
  const double g = ratio(p, n1 + n2);
  const double lam = sol.lambda;
  const auto& a = sol.a;
  const auto& b = sol.b;
  RiskBreakdown r;
  double v = 0;
  for (const auto& at : H.atoms) {
    const double D = a[0] * at.lam1 + a[1] * at.lam2 + (lam == 0 ? 1.0 : lam);
    const double num =
        lam == 0 ? -at.lam2 * (a[2] * at.lam1 + a[3] * at.lam2)
                 : at.lam1 * at.lam2 * (a[0] - a[2] * lam) + at.lam2 * at.lam2 * (a[1] - a[3] * lam);
    v += at.weight * num / (D * D);
  }
  r.variance = sigma_sq * g * v;
  double bias = 0;
  for (const auto& at : G.atoms) {
    const double D = b[0] * at.lam1 + b[1] * at.lam2 + (lam == 0 ? 1.0 : lam);
    const double num = lam == 0 ? b[2] * at.lam1 + (b[3] + 1) * at.lam2
                                : b[2] * lam * at.lam1 + (b[3] + lam) * lam * at.lam2;
    bias += at.weight * num / (D * D);
  }
  r.b1 = beta2_norm_sq * bias;
  return r;
}

RiskBreakdown risk_covariate_shift(const JointSpectrum& H, const SignalSpectrum& G, Index n1,
                                   Index n2, Index p, double sigma_sq, double beta2_norm_sq,
                                   const SolverSettings& cfg) {
  G.validate();
  if (!(sigma_sq >= 0) || !(beta2_norm_sq >= 0))
    throw InputError("variances and squared norms must be nonnegative");
  const CovariateSolution sol = solve_covariate_interpolator(H, n1, n2, p, cfg);
  return risk_from_solution(H, G, n1, n2, p, sigma_sq, beta2_norm_sq, sol);
}

std::pair<RiskBreakdown, CovariateSolution> solve_ridge_covariate(
    const JointSpectrum& H, const SignalSpectrum& G, Index n1, Index n2, Index p,
    double sigma_sq, double beta2_norm_sq, double lambda, const SolverSettings& cfg) {
  if (!(lambda > 0)) throw InputError("ridge penalty must be positive");
  cfg.validate();
  H.validate();
  G.validate();
  check_dims(n1, n2, p, false);
  if (!(sigma_sq >= 0) || !(beta2_norm_sq >= 0))
    throw InputError("variances and squared norms must be nonnegative");

  CovariateSolution sol;
  sol.lambda = lambda;
  const auto lead = solve_leading_pair(H, n1, n2, p, lambda, cfg);
  const auto at = trailing_variance(H, n1, n2, p, lead[0], lead[1], lambda);
  // The bias block shares its first two equations; re-solving keeps the two
  // routes independent.
  const auto lead_b = solve_leading_pair(H, n1, n2, p, lambda, cfg);
  const auto bt = trailing_bias(H, n1, n2, p, lead_b[0], lead_b[1], lambda);
  sol.a = {lead[0], lead[1], at[0], at[1]};
  sol.b = {lead_b[0], lead_b[1], bt[0], bt[1]};
  certify(H, n1, n2, p, sol, cfg);
  return {risk_from_solution(H, G, n1, n2, p, sigma_sq, beta2_norm_sq, sol), sol};
}

double target_only_fixed_point_residual(const JointSpectrum& H, Index n2, Index p, double c0) {
  const double gs = ratio(p, n2);
  double s = 0;
  for (const auto& at : H.atoms) s += at.weight / (1 + c0 * gs * at.lam2);
  return s - (1 - 1 / gs);
}

TargetOnlyAnisotropic theory_target_only_anisotropic(const JointSpectrum& H,
                                                     const SignalSpectrum& G, Index n2, Index p,
                                                     double sigma_sq, double beta2_norm_sq,
                                                     const SolverSettings& cfg) {
  cfg.validate();
  H.validate();
  G.validate();
  if (n2 < 1 || p < 1) throw InputError("target-only theory needs n2 >= 1 and p >= 1");
  if (p <= n2)
    throw DomainError("interpolator theory undefined at/below threshold (p = " +
                      std::to_string(p) + ", n2 = " + std::to_string(n2) + ")");
  TargetOnlyAnisotropic out;
  out.gamma_star = ratio(p, n2);
  const double gs = out.gamma_star;
  out.c0 = bisect([&](double c) { return target_only_fixed_point_residual(H, n2, p, c); }, 0.0,
                  1.0, cfg, true, "c0");

  double num = 0, den = 0;
  for (const auto& at : H.atoms) {
    const double d = (1 + out.c0 * gs * at.lam2) * (1 + out.c0 * gs * at.lam2);
    num += at.weight * at.lam2 * at.lam2 / d;
    den += at.weight * at.lam2 / d;
  }
  const double rat = num / den;
  double gsum = 0;
  for (const auto& at : G.atoms) {
    const double d = (1 + out.c0 * gs * at.lam2) * (1 + out.c0 * gs * at.lam2);
    gsum += at.weight * at.lam2 / d;
  }
  out.risk = beta2_norm_sq * (1 + gs * out.c0 * rat) * gsum + sigma_sq * gs * out.c0 * rat;
  return out;
}

std::string to_string(KappaTrend t) {
  switch (t) {
    case KappaTrend::decreasing: return "decreasing";
    case KappaTrend::increasing: return "increasing";
    case KappaTrend::invariant: return "invariant";
    case KappaTrend::mixed: return "mixed";
  }
  return "mixed";
}

HeterogeneityProfile heterogeneity_profile(const std::vector<double>& kappa_grid, Index n1,
                                           Index n2, Index p, double sigma_sq,
                                           double beta2_norm_sq, const SolverSettings& cfg,
                                           double invariance_tol) {
  if (kappa_grid.empty()) throw InputError("kappa grid is empty");
  for (double k : kappa_grid)
    if (!(k >= 1)) throw InputError("kappa values must be >= 1");

  HeterogeneityProfile prof;
  const JointSpectrum iso = JointSpectrum::reciprocal_pair(1.0);
  const double base = risk_covariate_shift(iso, SignalSpectrum::aligned_with(iso), n1, n2, p,
                                           sigma_sq, beta2_norm_sq, cfg)
                          .total();
  for (double k : kappa_grid) {
    const JointSpectrum H = JointSpectrum::reciprocal_pair(k);
    const double r =
        risk_covariate_shift(H, SignalSpectrum::aligned_with(H), n1, n2, p, sigma_sq,
                             beta2_norm_sq, cfg)
            .total();
    prof.rows.push_back({k, r, r - base});
  }

  bool up = true, down = true, flat = true;
  for (std::size_t i = 1; i < prof.rows.size(); ++i) {
    const double d = prof.rows[i].risk - prof.rows[i - 1].risk;
    if (std::abs(d) > invariance_tol) flat = false;
    if (!(d > 0)) up = false;
    if (!(d < 0)) down = false;
  }
  if (flat) prof.observed = KappaTrend::invariant;
  else if (down) prof.observed = KappaTrend::decreasing;
  else if (up) prof.observed = KappaTrend::increasing;

  const double half = 0.5 * static_cast<double>(p);
  const double m1 = static_cast<double>(n1);
  if (2 * n1 == p) prof.predicted = KappaTrend::invariant;
  else if (m1 < half) prof.predicted = KappaTrend::decreasing;
  else prof.predicted = KappaTrend::increasing;
  return prof;
}

}  // namespace minnorm
