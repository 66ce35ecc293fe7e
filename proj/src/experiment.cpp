#include "minnorm/experiment.hpp"

#include <cmath>
#include <random>

#include "minnorm/covariate_shift.hpp"
#include "minnorm/csv.hpp"
#include "minnorm/errors.hpp"
#include "minnorm/estimators.hpp"
#include "minnorm/model_shift.hpp"
#include "minnorm/parallel.hpp"

namespace minnorm {

namespace {

Vector gaussian_vector(Index n, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = sd * z(rng);
  return v;
}

// Rows i.i.d. N(0, diag(cov_diag)), filled row by row.
Matrix gaussian_design(Index rows, const Vector& cov_diag, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Vector sd = cov_diag.array().sqrt();
  Matrix X(rows, cov_diag.size());
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < X.cols(); ++j) X(i, j) = sd(j) * z(rng);
  return X;
}

void fill_theory(const ExperimentConfig& cfg, const PopulationSpec& pop, ResultRow& row) {
  const Index n = row.n1 + cfg.n2;
  if (cfg.design == Design::model_shift) {
    if (row.overparametrized)
      row.theory = theory_min_norm_model_shift(
          ShiftSummary::from_population(row.n1, cfg.n2, pop.beta1, pop.beta2, cfg.sigma_sq));
    if (cfg.p > cfg.n2)
      row.target_only_theory =
          theory_target_only_isotropic(cfg.n2, cfg.p, cfg.sigma_sq, row.beta2_norm_sq);
    return;
  }

  const JointSpectrum H = JointSpectrum::reciprocal_pair(cfg.kappa);
  const Index half = cfg.p / 2;
  double head = 0;
  if (row.beta2_norm_sq > 0) head = pop.beta2.head(half).squaredNorm() / row.beta2_norm_sq;
  else head = 0.5;
  SignalSpectrum G;
  G.atoms = {{cfg.kappa, 1, head}, {1 / cfg.kappa, 1, 1 - head}};
  if (row.overparametrized && n > 0)
    row.theory = risk_covariate_shift(H, G, row.n1, cfg.n2, cfg.p, cfg.sigma_sq,
                                      row.beta2_norm_sq);
  if (cfg.p > cfg.n2 && cfg.n2 > 0)
    row.target_only_theory =
        theory_target_only_anisotropic(H, G, cfg.n2, cfg.p, cfg.sigma_sq, row.beta2_norm_sq)
            .risk;
  else if (cfg.n2 == 0)
    row.target_only_theory = row.beta2_norm_sq;
}

ResultRow run_point(const ExperimentConfig& cfg, Index n1) {
  ResultRow row;
  row.n1 = n1;
  row.overparametrized = cfg.p > n1 + cfg.n2;
  try {
    auto [data, pop] = generate_instance(cfg, n1, cfg.seed);
    row.beta2_norm_sq = pop.beta2.squaredNorm();
    row.shift_norm_sq = pop.shift().squaredNorm();

    const PooledFactorization pooled(data.stacked_design());
    const PooledFactorization target(data.X2);
    const Vector mean1 = data.X1 * pop.beta1;
    const Vector mean2 = data.X2 * pop.beta2;
    const std::uint64_t ms = noise_seed(cfg.seed, n1);

    std::vector<double> pooled_loss(cfg.reps), target_loss(cfg.reps);
    Vector y(data.n());
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      const Vector e1 = draw_noise(data.n1(), cfg.sigma_sq, substream_seed(ms, kSourceNoiseTag, r));
      const Vector e2 = draw_noise(data.n2(), cfg.sigma_sq, substream_seed(ms, kTargetNoiseTag, r));
      y.head(data.n1()) = mean1 + e1;
      y.tail(data.n2()) = mean2 + e2;
      const Vector err = pooled.min_norm(y) - pop.beta2;
      pooled_loss[r] = err.dot(pop.sigma2 * err);
      const Vector err2 = target.min_norm(mean2 + e2) - pop.beta2;
      target_loss[r] = err2.dot(pop.sigma2 * err2);
    }
    const MonteCarloRisk mc = summarize_losses(pooled_loss);
    const MonteCarloRisk mc2 = summarize_losses(target_loss);
    row.emp_risk = mc.mean;
    row.emp_se = mc.standard_error;
    row.target_only_emp_risk = mc2.mean;
    row.target_only_emp_se = mc2.standard_error;
    row.conditional_risk = empirical_risk_conditional(data, pop).total();

    fill_theory(cfg, pop, row);
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

}  // namespace

std::string to_string(Design d) {
  return d == Design::model_shift ? "model_shift" : "covariate_shift";
}

Design parse_design(const std::string& s) {
  if (s == "model_shift" || s == "model-shift") return Design::model_shift;
  if (s == "covariate_shift" || s == "covariate-shift") return Design::covariate_shift;
  throw InputError("unknown design '" + s + "' (expected model_shift or covariate_shift)");
}

void ExperimentConfig::validate() const {
  if (p < 1) throw InputError("p must be at least 1");
  if (n2 < 0) throw InputError("n2 must be nonnegative");
  if (n1_grid.empty()) throw InputError("n1 grid is empty");
  for (Index n1 : n1_grid)
    if (n1 < 0) throw InputError("n1 grid entries must be nonnegative");
  if (reps < 1) throw InputError("reps must be at least 1");
  if (!(snr >= 0) || !(ssr >= 0)) throw InputError("snr and ssr must be nonnegative");
  if (!(sigma_sq >= 0)) throw InputError("sigma_sq must be nonnegative");
  if (!(kappa >= 1)) throw InputError("kappa must be >= 1");
  if (design == Design::covariate_shift && p % 2 != 0)
    throw InputError("covariate-shift design pairs reciprocal eigenvalues and needs even p");
}

Vector source_covariance_diagonal(const ExperimentConfig& cfg) {
  Vector d = Vector::Ones(cfg.p);
  if (cfg.design == Design::covariate_shift) {
    const Index half = cfg.p / 2;
    d.head(half).setConstant(cfg.kappa);
    d.tail(cfg.p - half).setConstant(1 / cfg.kappa);
  }
  return d;
}

std::uint64_t noise_seed(std::uint64_t master, Index n1) {
  return substream_seed(master, kNoiseTag, static_cast<std::uint64_t>(n1));
}

std::pair<DatasetPair, PopulationSpec> generate_instance(const ExperimentConfig& cfg, Index n1,
                                                         std::uint64_t seed) {
  cfg.validate();
  if (n1 < 0) throw InputError("n1 must be nonnegative");
  const double p = static_cast<double>(cfg.p);
  const bool raw = cfg.design == Design::covariate_shift && cfg.raw_fig2_scaling;
  const double beta_var = cfg.snr * cfg.sigma_sq / (raw ? 1.0 : p);

  PopulationSpec pop;
  pop.sigma_sq = cfg.sigma_sq;
  pop.sigma2 = Matrix::Identity(cfg.p, cfg.p);
  pop.beta2 = gaussian_vector(cfg.p, std::sqrt(beta_var), substream_seed(seed, kBetaTag, 0));
  if (cfg.design == Design::model_shift && cfg.ssr > 0) {
    const double shift_sd = std::sqrt(cfg.snr * cfg.ssr * cfg.sigma_sq / p);
    pop.beta1 = pop.beta2 + gaussian_vector(cfg.p, shift_sd, substream_seed(seed, kShiftTag, 0));
  } else {
    pop.beta1 = pop.beta2;
  }

  DatasetPair data;
  data.X2 = gaussian_design(cfg.n2, Vector::Ones(cfg.p), substream_seed(seed, kTargetDesignTag, 0));
  data.X1 = gaussian_design(n1, source_covariance_diagonal(cfg),
                            substream_seed(seed, kSourceDesignTag, static_cast<std::uint64_t>(n1)));
  data.y1 = data.X1 * pop.beta1;
  data.y2 = data.X2 * pop.beta2;
  return {std::move(data), std::move(pop)};
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ResultRow> rows(cfg.n1_grid.size());
  parallel_for(rows.size(), resolve_thread_count(cfg.threads),
               [&](std::size_t i) { rows[i] = run_point(cfg, cfg.n1_grid[i]); });
  return rows;
}

const std::string& results_csv_header() {
  static const std::string header =
      "design,p,n1,n2,snr,ssr,kappa,sigma_sq,reps,seed,regime,emp_risk,emp_se,theory_risk,"
      "theory_var,theory_b1,theory_b2,theory_b3,target_only_theory,failed";
  return header;
}

void write_results_csv(std::ostream& os, const ExperimentConfig& cfg,
                       const std::vector<ResultRow>& rows) {
  os << results_csv_header() << '\n';
  for (const auto& row : rows) {
    os << to_string(cfg.design) << ',' << cfg.p << ',' << row.n1 << ',' << cfg.n2 << ','
       << format_number(cfg.snr) << ',' << format_number(cfg.ssr) << ','
       << format_number(cfg.kappa) << ',' << format_number(cfg.sigma_sq) << ',' << cfg.reps
       << ',' << cfg.seed << ',' << (row.overparametrized ? "over" : "under") << ',';
    if (row.failed) {
      os << ",,,,,,,,1\n";
      continue;
    }
    os << format_number(row.emp_risk) << ',' << format_number(row.emp_se) << ',';
    if (row.theory) {
      os << format_number(row.theory->total()) << ',' << format_number(row.theory->variance)
         << ',' << format_number(row.theory->b1) << ',' << format_number(row.theory->b2) << ','
         << format_number(row.theory->b3) << ',';
    } else {
      os << ",,,,,";
    }
    os << opt_number(row.target_only_theory) << ",0\n";
  }
}

}  // namespace minnorm
