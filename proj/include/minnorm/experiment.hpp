#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "minnorm/types.hpp"

namespace minnorm {

enum class Design { model_shift, covariate_shift };

std::string to_string(Design d);
/// Accepts model_shift / model-shift and covariate_shift / covariate-shift.
Design parse_design(const std::string& s);

struct ExperimentConfig {
  Design design = Design::model_shift;
  Index p = 600;
  Index n2 = 100;
  std::vector<Index> n1_grid;
  double snr = 5;
  double ssr = 0.2;       // model shift only
  double kappa = 1;       // covariate shift only
  double sigma_sq = 1;
  std::size_t reps = 50;
  std::uint64_t seed = 0;
  bool raw_fig2_scaling = false;  // covariate shift: beta2 entries N(0, SNR sigma^2), no 1/p
  unsigned threads = 0;           // 0 = INTERP_RISK_THREADS / hardware

  void validate() const;
};

/// Substream tags. X2 and beta are shared by every grid point; X1 and the
/// noise are keyed by n1.
inline constexpr std::uint64_t kBetaTag = 0xB2;
inline constexpr std::uint64_t kShiftTag = 0xB1;
inline constexpr std::uint64_t kTargetDesignTag = 0xD2;
inline constexpr std::uint64_t kSourceDesignTag = 0xD1;
inline constexpr std::uint64_t kNoiseTag = 0xE0;

/// Diagonal of Sigma1: identity for model shift, kappa on the first p/2
/// coordinates and 1/kappa on the rest for covariate shift.
Vector source_covariance_diagonal(const ExperimentConfig& cfg);

/// Designs and signals for one grid point; responses are noiseless X beta.
std::pair<DatasetPair, PopulationSpec> generate_instance(const ExperimentConfig& cfg, Index n1,
                                                         std::uint64_t seed);

/// Master seed of the noise replicates at a grid point.
std::uint64_t noise_seed(std::uint64_t master, Index n1);

struct ResultRow {
  Index n1 = 0;
  bool overparametrized = false;  // p > n1 + n2
  double emp_risk = 0;
  double emp_se = 0;
  double target_only_emp_risk = 0;  // same target noise draws, target data only
  double target_only_emp_se = 0;
  double conditional_risk = 0;      // exact noise average on the realized design
  std::optional<RiskBreakdown> theory;
  std::optional<double> target_only_theory;
  double beta2_norm_sq = 0;  // realized
  double shift_norm_sq = 0;  // realized
  bool failed = false;
  std::string error;
};

/// One row per n1 in grid order. Grid points run in parallel; each row is a
/// pure function of (cfg, n1).
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

/// The fixed CSV header (no trailing newline).
const std::string& results_csv_header();

void write_results_csv(std::ostream& os, const ExperimentConfig& cfg,
                       const std::vector<ResultRow>& rows);

}  // namespace minnorm
