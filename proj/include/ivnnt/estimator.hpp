#ifndef IVNNT_ESTIMATOR_HPP
#define IVNNT_ESTIMATOR_HPP

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ivnnt/domain.hpp"

namespace ivnnt {

struct AssociationFit {
  std::array<double, 4> beta{};
  double pi_z = 0;
};

// saturated association fit: beta reproduces the four (z,a) outcome cell
// means exactly on the link scale, pi_z is the sample mean of Z.
// Throws SeparationError when a cell mean is exactly 0 or 1.
AssociationFit fit_association(const ObservationSet& data, ModelSpec spec);

// counterfactual mean predictor
//   h = xi^{-1}( xi(E[I | z, a_obs; beta]) - a*psi1*a_obs + (1-a)*psi0*(1-a_obs) )
double counterfactual_mean_h(int a, int z, int a_obs, const std::array<double, 4>& beta,
                             std::pair<double, double> psi, ModelSpec spec);

struct PsiSolve {
  double root = 0;
  SolveStatus status = SolveStatus::no_solution;
  bool multiple_roots = false;
  std::vector<double> all_roots;          // every bracketed root, ascending
  std::pair<double, double> bracket{0, 0};  // refined interval of the chosen root
};

// root of the instrument-weighted estimating equation
//   sum_i (Z_i - pi_z) * h(a; Z_i, A_i, beta, psi) = 0
// located by a 4000-point sign scan on [-20, 20] plus bisection/secant
// refinement; no sign change is the NoSolution outcome, never fatal here.
PsiSolve solve_psi(int a, const ObservationSet& data, const std::array<double, 4>& beta,
                   double pi_z, ModelSpec spec);

struct Benefits {
  double pb0 = 0, pb1 = 0, pb = 0;
};

// plug-in groupwise and marginal exposure benefits at fitted (beta, psi)
Benefits plugin_benefits(const ObservationSet& data, const std::array<double, 4>& beta,
                         std::pair<double, double> psi, ModelSpec spec);

struct GEstimationResult {
  ThetaVector theta_hat;    // NaN entries where the component is unavailable
  double q_residual_norm = 0;  // norm of the mean estimating function over solved components
  SolveStatus psi0_status = SolveStatus::not_attempted;
  SolveStatus psi1_status = SolveStatus::not_attempted;
  bool psi0_multiple_roots = false, psi1_multiple_roots = false;
  std::pair<double, double> psi0_bracket{0, 0}, psi1_bracket{0, 0};
};

// full sequential pipeline: association scores -> pi_z -> psi0, psi1 ->
// plug-in benefits -> indices. Partial results are retained: EIN may be
// reported while NNE is unavailable.
GEstimationResult g_estimate(const ObservationSet& data, ModelSpec spec);

// stacked per-record estimating function, all 13 components.
// Throws NonFiniteThetaError when the g-block is evaluated at an infinite index.
Eigen::Matrix<double, 13, 1> evaluate_Q(const ObservationRecord& record,
                                        const ThetaVector& theta, ModelSpec spec);

// restricted variant: components switched off by the mask are returned as zero
Eigen::Matrix<double, 13, 1> evaluate_Q_masked(const ObservationRecord& record,
                                               const ThetaVector& theta, ModelSpec spec,
                                               const std::array<bool, 13>& active);

// component mask of theta entries resolved by a fit (statuses + finiteness)
std::array<bool, 13> active_components(const GEstimationResult& fit);

// mean of evaluate_Q over the dataset, restricted to masked components
// (inactive components are returned as zero); exact cell aggregation
Eigen::Matrix<double, 13, 1> mean_estimating_function(const ObservationSet& data,
                                                      const ThetaVector& theta,
                                                      ModelSpec spec,
                                                      const std::array<bool, 13>& active);

enum class BaselineMode { crude, adjust_for_instrument };

struct NaiveEstimates {
  double ein = 0, nne = 0, nnt = 0;  // +inf when the benefit estimate is <= 0
};

// estimators that ignore unmeasured confounding: crude outcome-mean contrast,
// or Z-standardized contrasts treating the instrument as if it were a
// sufficient measured confounder
NaiveEstimates naive_estimates(const ObservationSet& data, BaselineMode mode);

}  // namespace ivnnt

#endif
