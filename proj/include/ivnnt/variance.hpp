#ifndef IVNNT_VARIANCE_HPP
#define IVNNT_VARIANCE_HPP

#include <array>
#include <limits>

#include <Eigen/Dense>

#include "ivnnt/domain.hpp"
#include "ivnnt/estimator.hpp"

namespace ivnnt {

constexpr double kExclusionConditionNumber = 1e12;

struct SandwichResult {
  Eigen::MatrixXd covariance;  // 13x13, NaN rows/cols for inactive components
  double bread_condition_number = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 13> se{};  // NaN where inactive
  std::array<IndexInterval, 13> ci{};  // NaN bounds where inactive
};

// bread A = -(1/n) sum_i dQ_i/dtheta^T at theta_hat, by central finite
// differences with per-coordinate step max(1e-6, 1e-6*|theta_k|).
// Throws NonFiniteEntryError when a perturbed evaluation leaves the domain.
Eigen::MatrixXd bread_matrix(const ObservationSet& data, const ThetaVector& theta,
                             ModelSpec spec);
Eigen::MatrixXd bread_matrix(const ObservationSet& data, const ThetaVector& theta,
                             ModelSpec spec, const std::array<bool, 13>& active);

// meat B = (1/n) sum_i Q_i Q_i^T at theta_hat; positive semi-definite
Eigen::MatrixXd meat_matrix(const ObservationSet& data, const ThetaVector& theta,
                            ModelSpec spec);
Eigen::MatrixXd meat_matrix(const ObservationSet& data, const ThetaVector& theta,
                            ModelSpec spec, const std::array<bool, 13>& active);

// covariance = n^{-1} A^{-1} B A^{-T} with Wald CIs at the given level.
// Throws ExcludedError when the bread condition number reaches 1e12;
// the caller records the exclusion rather than aborting a study.
SandwichResult sandwich(const ObservationSet& data, const ThetaVector& theta, ModelSpec spec,
                        double level);
SandwichResult sandwich(const ObservationSet& data, const ThetaVector& theta, ModelSpec spec,
                        double level, const std::array<bool, 13>& active);

}  // namespace ivnnt

#endif
