#include "minnorm/model_shift.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <locale>
#include <sstream>

#include "minnorm/errors.hpp"

namespace minnorm {

namespace {

void require_overparametrized(Index p, Index n) {
  if (p <= n)
    throw DomainError("interpolator theory undefined at/below threshold (p = " +
                      std::to_string(p) + ", n = " + std::to_string(n) + ")");
}

// Positive root of a x^2 + b x - 1 = 0 with a > 0. The roots multiply to -1/a,
// so exactly one is positive.
double positive_root(double a, double b) {
  if (!(a > 0)) throw SolverError("quadratic leading coefficient must be positive");
  const double disc = std::sqrt(b * b + 4 * a);
  const double r = b >= 0 ? 2.0 / (b + disc) : (disc - b) / (2 * a);
  const double other = -1.0 / (a * r);
  if (!(r > 0) || !(other < 0)) throw SolverError("quadratic has no unique positive root");
  return r;
}

// Interpolator risk with sigma^2 = 1, ||beta2||^2 = snr, ||beta_tilde||^2 = snr*ssr,
// as a function of a real-valued target size.
double risk_in_n2(double snr, double ssr, double n1, double n2, double p) {
  const double n = n1 + n2;
  return n / (p - n) + snr * (p - n) / p + snr * ssr * n1 * (p - n1) / (p * (p - n));
}

}  // namespace

void ShiftSummary::validate() const {
  if (n1 < 0 || n2 < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  if (!(sigma_sq >= 0) || !(beta2_norm_sq >= 0) || !(shift_norm_sq >= 0))
    throw InputError("variances and squared norms must be nonnegative");
  const double cs = std::sqrt(beta2_norm_sq * shift_norm_sq);
  if (std::abs(cross_term) > cs * (1 + 1e-12) + 1e-300)
    throw InputError("cross term violates Cauchy-Schwarz");
}

ShiftSummary ShiftSummary::from_ratios(Index n1, Index n2, Index p, double snr, double ssr,
                                       double sigma_sq) {
  ShiftSummary s;
  s.n1 = n1;
  s.n2 = n2;
  s.p = p;
  s.sigma_sq = sigma_sq;
  s.beta2_norm_sq = snr * sigma_sq;
  s.shift_norm_sq = ssr * s.beta2_norm_sq;
  return s;
}

ShiftSummary ShiftSummary::from_population(Index n1, Index n2, const CoefVector& beta1,
                                           const CoefVector& beta2, double sigma_sq) {
  ShiftSummary s;
  s.n1 = n1;
  s.n2 = n2;
  s.p = beta2.size();
  s.sigma_sq = sigma_sq;
  const CoefVector shift = beta1 - beta2;
  s.beta2_norm_sq = beta2.squaredNorm();
  s.shift_norm_sq = shift.squaredNorm();
  s.cross_term = shift.dot(beta2);
  return s;
}

RiskBreakdown theory_min_norm_model_shift(const ShiftSummary& s) {
  s.validate();
  require_overparametrized(s.p, s.n());
  const double p = static_cast<double>(s.p);
  const double n = static_cast<double>(s.n());
  const double n1 = static_cast<double>(s.n1);
  RiskBreakdown r;
  r.variance = s.sigma_sq * n / (p - n);
  r.b1 = s.beta2_norm_sq * (p - n) / p;
  r.b2 = s.shift_norm_sq * n1 * (p - n1) / (p * (p - n));
  r.b3 = 0;
  return r;
}

double theory_target_only_isotropic(Index n2, Index p, double sigma_sq, double beta2_norm_sq) {
  if (n2 < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  require_overparametrized(p, n2);
  const double pp = static_cast<double>(p), m = static_cast<double>(n2);
  return (pp - m) / pp * beta2_norm_sq + m / (pp - m) * sigma_sq;
}

RiskBreakdown theory_multi_source(const std::vector<SourceBlock>& sources, Index n_target,
                                  Index p, double sigma_sq, double beta_target_norm_sq) {
  if (n_target < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  Index n = n_target;
  for (const auto& src : sources) {
    if (src.n < 0 || !(src.shift_norm_sq >= 0)) throw InputError("invalid source block");
    n += src.n;
  }
  require_overparametrized(p, n);
  const double pp = static_cast<double>(p), nn = static_cast<double>(n);
  const double nt = static_cast<double>(n_target);
  RiskBreakdown r;
  r.variance = sigma_sq * nn / (pp - nn);
  r.b1 = beta_target_norm_sq * (pp - nn) / pp;
  for (const auto& src : sources) {
    const double nk = static_cast<double>(src.n);
    r.b2 += nk * (pp - nk) / (pp * (pp - nk - nt)) * src.shift_norm_sq;
  }
  return r;
}

std::string to_string(Recommendation r) {
  return r == Recommendation::pool ? "pool" : "target_only";
}

std::string to_string(SnrRegime r) { return r == SnrRegime::low_snr ? "low_snr" : "high_snr"; }

TransferDecision decide_transfer(double snr, double ssr, Index n1, Index n2, Index p) {
  if (n1 < 0 || n2 < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  if (!(snr >= 0) || !(ssr >= 0)) throw InputError("SNR and SSR must be nonnegative");
  require_overparametrized(p, n1 + n2);
  const double pp = static_cast<double>(p);
  const double nn = static_cast<double>(n1 + n2);
  const double m1 = static_cast<double>(n1), m2 = static_cast<double>(n2);

  TransferDecision d;
  d.snr_threshold = pp * pp / ((pp - nn) * (pp - m2));
  if (snr <= d.snr_threshold) {
    d.regime = SnrRegime::low_snr;
    d.recommendation = Recommendation::target_only;
    return d;
  }
  d.regime = SnrRegime::high_snr;
  d.rho = (pp - nn) / (pp - m1) - pp * pp / ((pp - m1) * (pp - m2) * snr);
  d.recommendation = ssr < *d.rho ? Recommendation::pool : Recommendation::target_only;
  return d;
}

OptimalTargetSize optimal_target_size(double snr, double ssr, Index n1, Index p) {
  if (n1 < 0 || p < 1) throw InputError("sample sizes must be >= 0 and p >= 1");
  if (!(snr >= 0) || !(ssr >= 0)) throw InputError("SNR and SSR must be nonnegative");
  require_overparametrized(p, n1);
  const double pp = static_cast<double>(p), m1 = static_cast<double>(n1);

  OptimalTargetSize out;
  out.grid_risk = std::numeric_limits<double>::infinity();
  for (Index n2 = 0; n2 <= p - n1 - 1; ++n2) {
    const double r = risk_in_n2(snr, ssr, m1, static_cast<double>(n2), pp);
    if (r < out.grid_risk) {
      out.grid_risk = r;
      out.n2_grid_opt = n2;
    }
  }

  const double inv_snr = snr > 0 ? pp * pp / snr : std::numeric_limits<double>::infinity();
  out.n2_printed_formula = std::max(0.0, pp - m1 - std::sqrt(inv_snr + m1 * ssr));
  out.n2_stationary_formula = std::max(0.0, pp - m1 - std::sqrt(inv_snr + m1 * (pp - m1) * ssr));

  auto risk_at = [&](double n2) {
    const double k = std::clamp(std::round(n2), 0.0, pp - m1 - 1);
    return risk_in_n2(snr, ssr, m1, k, pp);
  };
  out.printed_formula_risk = risk_at(out.n2_printed_formula);
  out.stationary_formula_risk = risk_at(out.n2_stationary_formula);
  return out;
}

std::string optimal_target_size_report(const OptimalTargetSize& r, double snr, double ssr,
                                       Index n1, Index p) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::fixed << std::setprecision(4);
  os << "optimal n2 at p=" << p << " n1=" << n1 << " SNR=" << snr << " SSR=" << ssr << "\n";
  os << "  grid search:        n2=" << r.n2_grid_opt << " risk=" << r.grid_risk << "\n";
  os << "  printed formula:    n2=" << r.n2_printed_formula << " risk=" << r.printed_formula_risk
     << "\n";
  os << "  stationary formula: n2=" << r.n2_stationary_formula
     << " risk=" << r.stationary_formula_risk << "\n";
  const double gap_printed = r.n2_printed_formula - static_cast<double>(r.n2_grid_opt);
  const double gap_stat = r.n2_stationary_formula - static_cast<double>(r.n2_grid_opt);
  os << "  offset from grid:   printed " << gap_printed << ", stationary " << gap_stat << "\n";
  return os.str();
}

double mp_stieltjes(double gamma, double lambda) {
  if (!(gamma > 0) || !(lambda > 0)) throw InputError("gamma and lambda must be positive");
  return positive_root(gamma * lambda, 1 - gamma + lambda);
}

double mp_stieltjes_derivative(double gamma, double lambda) {
  const double m = mp_stieltjes(gamma, lambda);
  // 2*gamma*lambda*m + 1 - gamma + lambda simplifies to (1 + gamma*lambda*m^2)/m on the root.
  return m * m * (1 + gamma * m) / (1 + gamma * lambda * m * m);
}

std::pair<RiskBreakdown, RidgeLimitQuantities> theory_ridge_model_shift(const ShiftSummary& s,
                                                                        double lambda) {
  if (!(lambda > 0)) throw InputError("ridge penalty must be positive");
  s.validate();
  if (s.n1 <= 0 || s.n2 <= 0) throw InputError("ridge model-shift theory needs n1 > 0 and n2 > 0");

  RidgeLimitQuantities q;
  const double g = s.gamma(), g1 = s.gamma1();
  q.m = mp_stieltjes(g, lambda);
  q.m_prime = mp_stieltjes_derivative(g, lambda);
  q.alpha = static_cast<double>(s.n2) / static_cast<double>(s.n1);
  q.s = lambda * (1 + q.alpha);
  q.f1 = positive_root(q.s * g1, 1 + q.alpha - g1 + q.s);
  const double t = 1 + g1 * q.f1;
  q.f2 = q.f1 * q.f1 * t * t / (t * t - g1 * q.f1 * q.f1);
  q.f3 = q.alpha / t + q.s;
  const double den = 1 - g1 * q.f2 * (q.f3 - q.s) / t;
  if (!(std::abs(den) > 0)) throw SolverError("degenerate ridge bias denominator");

  RiskBreakdown r;
  r.variance = s.sigma_sq * g * (q.m - lambda * q.m_prime);
  r.b1 = lambda * lambda * s.beta2_norm_sq * q.m_prime;
  r.b2 = s.shift_norm_sq * (1 - 2 * q.f1 * q.f3 + q.f2 * q.f3 * q.f3) / den;
  r.b3 = -2 * q.s * (q.f1 - q.f3 * q.f2) / den * s.cross_term;
  return {r, q};
}

}  // namespace minnorm
