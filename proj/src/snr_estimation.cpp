#include "minnorm/snr_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <locale>
#include <sstream>

#include "minnorm/errors.hpp"

namespace minnorm {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// Slack allowed in the KKT check at a converged solution.
double kkt_slack(const LassoConfig& cfg) { return 10 * cfg.tol; }

std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

void LassoConfig::validate() const {
  if (!(lambda_L > 0)) throw InputError("lambda_L must be positive");
  if (!(tol > 0)) throw InputError("Lasso tolerance must be positive");
  if (max_sweeps < 1) throw InputError("Lasso sweep cap must be at least 1");
}

double lasso_objective(const Matrix& X, const Vector& y, const CoefVector& b, double lambda_L) {
  const double n = static_cast<double>(X.rows());
  return (y - X * b).squaredNorm() / (2 * n) + lambda_L / std::sqrt(n) * b.lpNorm<1>();
}

KktReport lasso_kkt(const Matrix& X, const Vector& y, const CoefVector& b, double lambda_L,
                    double slack) {
  const double n = static_cast<double>(X.rows());
  const double pen = lambda_L / std::sqrt(n);
  const Vector g = X.transpose() * (y - X * b) / n;
  KktReport rep;
  for (Index j = 0; j < b.size(); ++j) {
    if (b(j) == 0) {
      rep.worst_inactive = std::max(rep.worst_inactive, std::abs(g(j)) - pen);
    } else {
      const double target = b(j) > 0 ? pen : -pen;
      rep.worst_active = std::max(rep.worst_active, std::abs(g(j) - target));
    }
  }
  rep.passed = rep.worst_inactive <= slack && rep.worst_active <= slack;
  return rep;
}

LassoResult lasso_fit(const Matrix& X, const Vector& y, const LassoConfig& cfg) {
  cfg.validate();
  if (X.rows() < 1) throw InputError("Lasso needs at least one sample");
  if (y.size() != X.rows()) throw InputError("response length does not match design rows");

  const Index n = X.rows(), p = X.cols();
  const double nn = static_cast<double>(n);
  const double pen = cfg.lambda_L / std::sqrt(nn);
  const Vector col_sq = X.colwise().squaredNorm().transpose() / nn;

  LassoResult out;
  out.beta = CoefVector::Zero(p);
  Vector r = y;
  double last_obj = cfg.monitor_objective ? lasso_objective(X, y, out.beta, cfg.lambda_L) : 0;

  for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double max_change = 0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0) continue;
      const double old = out.beta(j);
      const double z = X.col(j).dot(r) / nn + col_sq(j) * old;
      const double updated = soft_threshold(z, pen) / col_sq(j);
      const double delta = updated - old;
      if (delta != 0) {
        r.noalias() -= delta * X.col(j);
        out.beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.sweeps = sweep + 1;
    if (cfg.monitor_objective) {
      const double obj = lasso_objective(X, y, out.beta, cfg.lambda_L);
      out.objective_trace.push_back(obj);
      if (obj > last_obj * (1 + 1e-12) + 1e-15)
        throw SolverError("Lasso objective increased during coordinate descent");
      last_obj = obj;
    }
    // Small steps alone can stall short of optimality on correlated designs,
    // so stopping also requires the subgradient conditions.
    if (max_change <= cfg.tol &&
        lasso_kkt(X, y, out.beta, cfg.lambda_L, kkt_slack(cfg)).passed) {
      out.converged = true;
      return out;
    }
  }
  out.warning = "Lasso coordinate descent hit max_sweeps=" + std::to_string(cfg.max_sweeps) +
                " before converging";
  return out;
}

DebiasedFit debias(const Matrix& X, const Vector& y, const CoefVector& beta_L) {
  if (y.size() != X.rows() || beta_L.size() != X.cols())
    throw InputError("debias: dimension mismatch");
  DebiasedFit fit;
  fit.beta_L = beta_L;
  fit.support_size = (beta_L.array() != 0).count();
  const Index dof = X.rows() - fit.support_size;
  if (dof <= 0)
    throw EstimateUndefinedError("Lasso support size " + std::to_string(fit.support_size) +
                                     " is not below the sample size " + std::to_string(X.rows()),
                                 "increase lambda_L");
  const Vector r = y - X * beta_L;
  const double d = static_cast<double>(dof);
  fit.beta_d = beta_L + X.transpose() * r / d;
  fit.tau_sq = r.squaredNorm() / (d * d);
  return fit;
}

SnrReport estimate_snr_ssr(const DatasetPair& data, const SnrOptions& opts) {
  data.validate();
  if (data.n1() < 1 || data.n2() < 1)
    throw InputError("SNR/SSR estimation needs nonempty source and target data");
  opts.lasso.validate();

  SnrReport rep;
  const Matrix* Xs[2] = {&data.X1, &data.X2};
  const Vector* ys[2] = {&data.y1, &data.y2};
  for (int k = 0; k < 2; ++k) {
    LassoResult lr = lasso_fit(*Xs[k], *ys[k], opts.lasso);
    rep.lasso_converged[k] = lr.converged;
    if (lr.warning) rep.warnings.push_back((k == 0 ? "source: " : "target: ") + *lr.warning);
    rep.fits[k] = debias(*Xs[k], *ys[k], lr.beta);
  }

  const double p = static_cast<double>(data.p());
  const DebiasedFit& f1 = rep.fits[0];
  const DebiasedFit& f2 = rep.fits[1];
  rep.raw_source_signal = f1.beta_d.squaredNorm() - p * f1.tau_sq;
  rep.raw_target_signal = f2.beta_d.squaredNorm() - p * f2.tau_sq;

  double var_y2 = data.y2.squaredNorm() / static_cast<double>(data.n2());
  if (opts.centered_variance) {
    const double mean = data.y2.mean();
    var_y2 -= mean * mean;
  }
  const double s2 = std::max(0.0, rep.raw_target_signal);
  rep.raw_noise = var_y2 - s2;
  rep.raw_shift = (f1.beta_d - f2.beta_d).squaredNorm() - p * (f1.tau_sq + f2.tau_sq);

  rep.clamped.source_signal = rep.raw_source_signal < 0;
  rep.clamped.target_signal = rep.raw_target_signal < 0;
  rep.clamped.noise = rep.raw_noise < 0;
  rep.clamped.shift = rep.raw_shift < 0;
  rep.beta_norm_hats[0] = std::max(0.0, rep.raw_source_signal);
  rep.beta_norm_hats[1] = s2;
  rep.sigma_sq_hat = std::max(0.0, rep.raw_noise);
  rep.shift_norm_hat = std::max(0.0, rep.raw_shift);

  if (!(s2 > 0) || !(rep.sigma_sq_hat > 0)) {
    std::ostringstream diag;
    diag << "raw target signal=" << fmt(rep.raw_target_signal)
         << " raw noise=" << fmt(rep.raw_noise) << " Var(y2)=" << fmt(var_y2)
         << " clamped(target_signal=" << rep.clamped.target_signal
         << ", noise=" << rep.clamped.noise << ")";
    throw EstimateUndefinedError(
        !(s2 > 0) ? "estimated target signal is zero; SNR and SSR undefined"
                  : "estimated noise variance is zero; SNR undefined",
        diag.str());
  }
  rep.snr_hat = s2 / rep.sigma_sq_hat;
  rep.ssr_hat = rep.shift_norm_hat / s2;
  return rep;
}

DataDrivenDecision decide_from_data(const DatasetPair& data, const SnrOptions& opts) {
  DataDrivenDecision out;
  out.report = estimate_snr_ssr(data, opts);
  out.decision =
      decide_transfer(out.report.snr_hat, out.report.ssr_hat, data.n1(), data.n2(), data.p());
  out.target_size =
      optimal_target_size(out.report.snr_hat, out.report.ssr_hat, data.n1(), data.p());
  return out;
}

}  // namespace minnorm
