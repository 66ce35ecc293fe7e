#include "minnorm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "minnorm/errors.hpp"
#include "minnorm/parallel.hpp"

namespace minnorm {

void DatasetPair::validate() const {
  if (X1.rows() > 0 && X2.rows() > 0 && X1.cols() != X2.cols())
    throw InputError("source and target designs have different column counts (" +
                     std::to_string(X1.cols()) + " vs " + std::to_string(X2.cols()) + ")");
  if (y1.size() != X1.rows())
    throw InputError("source response length does not match source design rows");
  if (y2.size() != X2.rows())
    throw InputError("target response length does not match target design rows");
  if (p() < 1) throw InputError("design must have at least one column");
}

Matrix DatasetPair::stacked_design() const {
  Matrix X(n(), p());
  if (n1() > 0) X.topRows(n1()) = X1;
  if (n2() > 0) X.bottomRows(n2()) = X2;
  return X;
}

Vector DatasetPair::stacked_response() const {
  Vector y(n());
  y << y1, y2;
  return y;
}

PopulationSpec PopulationSpec::isotropic(CoefVector beta1, CoefVector beta2, double sigma_sq) {
  PopulationSpec pop;
  const Index p = beta2.size();
  pop.beta1 = std::move(beta1);
  pop.beta2 = std::move(beta2);
  pop.sigma2 = Matrix::Identity(p, p);
  pop.sigma_sq = sigma_sq;
  return pop;
}

void PopulationSpec::validate() const {
  if (beta1.size() != beta2.size()) throw InputError("beta1 and beta2 differ in length");
  if (sigma2.rows() != beta2.size() || sigma2.cols() != beta2.size())
    throw InputError("Sigma2 must be p x p");
  if (!(sigma_sq >= 0)) throw InputError("noise variance must be nonnegative");
}

void PopulationSpec::validate_against(const DatasetPair& data) const {
  validate();
  if (beta2.size() != data.p()) throw InputError("population dimension does not match data");
}

PooledFactorization::PooledFactorization(const Matrix& X) : rows_(X.rows()), cols_(X.cols()) {
  if (rows_ == 0) {
    V_.resize(cols_, 0);
    U_.resize(0, 0);
    return;
  }
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  U_ = svd.matrixU();
  s_ = svd.singularValues();
  V_ = svd.matrixV();
  const double cutoff = s_.size() > 0 ? kPinvRelativeCutoff * s_(0) : 0.0;
  rank_ = 0;
  while (rank_ < s_.size() && s_(rank_) > cutoff) ++rank_;
}

CoefVector PooledFactorization::min_norm(const Vector& y) const {
  if (y.size() != rows_) throw InputError("response length does not match design rows");
  if (rank_ == 0) return CoefVector::Zero(cols_);
  Vector coeffs = U_.leftCols(rank_).transpose() * y;
  coeffs.array() /= s_.head(rank_).array();
  return V_.leftCols(rank_) * coeffs;
}

CoefVector PooledFactorization::ridge(const Vector& y, double lambda) const {
  if (!(lambda > 0)) throw InputError("ridge penalty must be positive");
  if (y.size() != rows_) throw InputError("response length does not match design rows");
  if (rows_ == 0) return CoefVector::Zero(cols_);
  const double nl = static_cast<double>(rows_) * lambda;
  Vector coeffs = U_.transpose() * y;
  coeffs.array() *= s_.array() / (s_.array().square() + nl);
  return V_ * coeffs;
}

CoefVector fit_pooled_min_norm(const DatasetPair& data) {
  data.validate();
  return PooledFactorization(data.stacked_design()).min_norm(data.stacked_response());
}

CoefVector fit_weighted_pooled(const DatasetPair& data, double w1, double w2) {
  data.validate();
  if (!(w1 > 0) || !(w2 > 0)) throw InputError("fusion weights must be positive");
  // sqrt(w_k) row scaling turns the weighted Gram into A^T A with A = D X.
  const double r1 = std::sqrt(w1), r2 = std::sqrt(w2);
  Matrix A = data.stacked_design();
  Vector c = data.stacked_response();
  A.topRows(data.n1()) *= r1;
  c.head(data.n1()) *= r1;
  A.bottomRows(data.n2()) *= r2;
  c.tail(data.n2()) *= r2;
  return PooledFactorization(A).min_norm(c);
}

CoefVector fit_pooled_ridge(const DatasetPair& data, double lambda) {
  data.validate();
  if (!(lambda > 0)) throw InputError("ridge penalty must be positive");
  return PooledFactorization(data.stacked_design()).ridge(data.stacked_response(), lambda);
}

double gradient_descent_step_bound(const DatasetPair& data) {
  data.validate();
  if (data.n() == 0) return std::numeric_limits<double>::infinity();
  Eigen::BDCSVD<Matrix> svd(data.stacked_design());
  const double top = svd.singularValues()(0);
  if (top == 0) return std::numeric_limits<double>::infinity();
  return 2.0 / (top * top);
}

GradientDescentResult fit_gradient_descent(const DatasetPair& data, double eta,
                                           std::size_t iterations, double tol) {
  data.validate();
  if (!(eta > 0)) throw InputError("gradient descent step size must be positive");
  const double bound = gradient_descent_step_bound(data);
  if (!(eta < bound))
    throw InputError("step size " + std::to_string(eta) + " violates the stability bound " +
                     std::to_string(bound));

  GradientDescentResult out;
  out.beta = CoefVector::Zero(data.p());
  if (data.n() == 0) {
    out.converged = true;
    return out;
  }

  auto gradient = [&](const CoefVector& b) {
    Vector g = Vector::Zero(data.p());
    if (data.n1() > 0) g += data.X1.transpose() * (data.y1 - data.X1 * b);
    if (data.n2() > 0) g += data.X2.transpose() * (data.y2 - data.X2 * b);
    return g;
  };

  Vector g = gradient(out.beta);
  const double g0 = g.norm();
  if (g0 == 0) {
    out.converged = true;
    return out;
  }
  const double scale = std::max({data.y1.norm(), data.y2.norm(), eta * g0});
  const double blowup = 1e6 * scale;

  for (std::size_t t = 0; t < iterations; ++t) {
    if (g.norm() <= tol * g0) {
      out.converged = true;
      return out;
    }
    out.beta += eta * g;
    out.iterations = t + 1;
    if (!out.beta.allFinite() || out.beta.norm() > blowup)
      throw SolverError("gradient descent diverged after " + std::to_string(t + 1) +
                        " iterations");
    g = gradient(out.beta);
  }
  out.converged = g.norm() <= tol * g0;
  return out;
}

namespace {

double quad(const Vector& a, const Matrix& S, const Vector& b) { return a.dot(S * b); }

}  // namespace

RiskBreakdown empirical_risk_conditional(const DatasetPair& data, const PopulationSpec& pop,
                                         double lambda) {
  data.validate();
  pop.validate_against(data);
  if (lambda < 0) throw InputError("penalty must be nonnegative");

  const PooledFactorization fac(data.stacked_design());
  const double n = static_cast<double>(data.n());
  const Matrix& S2 = pop.sigma2;
  const Index p = data.p();
  const CoefVector shift = pop.shift();
  // X1^T X1 beta_tilde; zero when the source block is empty.
  Vector source_pull = Vector::Zero(p);
  if (data.n1() > 0) source_pull = data.X1.transpose() * (data.X1 * shift);

  RiskBreakdown risk;
  if (data.n() == 0) {
    risk.b1 = quad(pop.beta2, S2, pop.beta2);
    return risk;
  }

  if (lambda == 0) {
    const Index r = fac.rank();
    const auto V = fac.right_vectors().leftCols(r);
    const Vector s = fac.singular_values().head(r);
    const Matrix S2V = S2 * V;
    // sigma^2/n Tr(Sigma_hat^+ Sigma2) = sigma^2 sum_i v_i^T Sigma2 v_i / s_i^2
    const Vector diag = (V.transpose() * S2V).diagonal();
    risk.variance = pop.sigma_sq * (diag.array() / s.array().square()).sum();

    // (I - P) beta2 with P the projector onto the row space.
    const Vector resid = pop.beta2 - V * (V.transpose() * pop.beta2);
    // Sigma_hat^+ (X1^T X1 / n) beta_tilde
    Vector u = V.transpose() * source_pull;
    u.array() /= s.array().square();
    const Vector pulled = V * u;

    risk.b1 = quad(resid, S2, resid);
    risk.b2 = quad(pulled, S2, pulled);
    // resid is orthogonal to range(V) and pulled lies in it, so only the
    // (Sigma2 - I) part of the cross term survives.
    const Vector cross = S2 * pulled - pulled;
    risk.b3 = -2.0 * resid.dot(cross);
    return risk;
  }

  const auto& V = fac.right_vectors();
  const Vector d = fac.singular_values().array().square() / n;
  auto apply_resolvent = [&](const Vector& x) -> Vector {
    const Vector c = V.transpose() * x;
    Vector out = (x - V * c) / lambda;
    out += V * (c.array() / (d.array() + lambda)).matrix();
    return out;
  };

  const Vector diag = (V.transpose() * (S2 * V)).diagonal();
  risk.variance =
      pop.sigma_sq / n * (d.array() / (d.array() + lambda).square() * diag.array()).sum();
  const Vector q = apply_resolvent(pop.beta2);
  const Vector w = apply_resolvent(source_pull / n);
  risk.b1 = lambda * lambda * quad(q, S2, q);
  risk.b2 = quad(w, S2, w);
  risk.b3 = -2.0 * lambda * quad(q, S2, w);
  return risk;
}

Vector draw_noise(Index n, double sigma_sq, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double sd = std::sqrt(sigma_sq);
  Vector e(n);
  for (Index i = 0; i < n; ++i) e(i) = sd * z(rng);
  return e;
}

MonteCarloRisk summarize_losses(const std::vector<double>& losses) {
  MonteCarloRisk out;
  out.reps = losses.size();
  if (losses.empty()) return out;
  double sum = 0;
  for (double l : losses) sum += l;
  out.mean = sum / static_cast<double>(losses.size());
  if (losses.size() > 1) {
    double ss = 0;
    for (double l : losses) ss += (l - out.mean) * (l - out.mean);
    const double var = ss / static_cast<double>(losses.size() - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(losses.size()));
  }
  return out;
}

MonteCarloRisk empirical_risk_monte_carlo(const DatasetPair& data, const PopulationSpec& pop,
                                          double lambda, const MonteCarloOptions& options) {
  if (options.reps == 0) throw InputError("Monte-Carlo replicate count must be at least 1");
  if (data.X1.rows() > 0 && data.X2.rows() > 0 && data.X1.cols() != data.X2.cols())
    throw InputError("source and target designs have different column counts");
  pop.validate();
  if (pop.p() != data.p()) throw InputError("population dimension does not match data");
  if (lambda < 0) throw InputError("penalty must be nonnegative");

  const PooledFactorization fac(data.stacked_design());
  Vector mean(data.n());
  if (data.n1() > 0) mean.head(data.n1()) = data.X1 * pop.beta1;
  if (data.n2() > 0) mean.tail(data.n2()) = data.X2 * pop.beta2;

  std::vector<double> losses(options.reps);
  parallel_for(options.reps, resolve_thread_count(options.threads), [&](std::size_t r) {
    Vector y = mean;
    y.head(data.n1()) += draw_noise(data.n1(), pop.sigma_sq,
                                    substream_seed(options.seed, kSourceNoiseTag, r));
    y.tail(data.n2()) += draw_noise(data.n2(), pop.sigma_sq,
                                    substream_seed(options.seed, kTargetNoiseTag, r));
    const CoefVector fit = lambda == 0 ? fac.min_norm(y) : fac.ridge(y, lambda);
    const Vector err = fit - pop.beta2;
    losses[r] = err.dot(pop.sigma2 * err);
  });
  return summarize_losses(losses);
}

}  // namespace minnorm
