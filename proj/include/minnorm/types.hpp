#pragma once

#include <Eigen/Dense>
#include <cstddef>

namespace minnorm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CoefVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Source (block 1) and target (block 2) samples. Either block may be empty.
struct DatasetPair {
  Matrix X1;
  Vector y1;
  Matrix X2;
  Vector y2;

  Index p() const { return X1.rows() > 0 ? X1.cols() : X2.cols(); }
  Index n1() const { return X1.rows(); }
  Index n2() const { return X2.rows(); }
  Index n() const { return n1() + n2(); }

  /// Throws InputError unless column counts agree and response lengths match.
  void validate() const;

  Matrix stacked_design() const;
  Vector stacked_response() const;
};

/// Population quantities that define the target risk.
struct PopulationSpec {
  CoefVector beta1;
  CoefVector beta2;
  Matrix sigma2;        // target covariance, symmetric positive definite
  double sigma_sq = 1;  // noise variance

  static PopulationSpec isotropic(CoefVector beta1, CoefVector beta2, double sigma_sq);

  Index p() const { return beta2.size(); }
  CoefVector shift() const { return beta1 - beta2; }
  void validate() const;
  void validate_against(const DatasetPair& data) const;
};

/// Variance plus the three bias pieces of the target prediction risk.
struct RiskBreakdown {
  double variance = 0;
  double b1 = 0;
  double b2 = 0;
  double b3 = 0;

  double bias() const { return b1 + b2 + b3; }
  double total() const { return variance + b1 + b2 + b3; }
};

}  // namespace minnorm
