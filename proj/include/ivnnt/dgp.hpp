#ifndef IVNNT_DGP_HPP
#define IVNNT_DGP_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "ivnnt/domain.hpp"

namespace ivnnt {

// simulation design: causal parameters, instrument/exposure models, and the
// marginal targets the association coefficients must satisfy
struct DgpConfig {
  ModelSpec spec;
  double psi0 = 0, psi1 = 0;
  double pi_z = 0.5;
  double gamma0 = 0, gamma1 = 0;  // exposure model A|Z ~ Ber(expit(g0 + g1 Z))
  double target_exposure = 0.5;   // P(A=1)
  double target_outcome = 0.5;    // P(I=1)
  double target_pb = 0;           // marginal exposure benefit E[p_b]

  // gamma0 solved from (gamma1, pi_z, target_exposure)
  static DgpConfig with_derived_gamma0(ModelSpec spec, double psi0, double psi1, double pi_z,
                                       double gamma1, double target_exposure,
                                       double target_outcome, double target_pb);

  void check() const;  // throws ConfigError on invariant violations

  double p_exposure_given_z(int z) const;  // expit(gamma0 + gamma1 z)
  double p_z(int z) const { return z == 1 ? pi_z : 1.0 - pi_z; }
};

// scalar root of  pi_z*expit(g0+g1) + (1-pi_z)*expit(g0) = target, by bisection
double derive_gamma0(double gamma1, double pi_z, double target_exposure);

// solved association coefficients with the analytically implied true benefits
struct DgpTruth {
  std::array<double, 4> beta{};
  double pb0_true = 0, pb1_true = 0, pb_true = 0;
  double nne_true = 0, ein_true = 0, nnt_true = 0;  // may be +inf
  int root_multiplicity = 1;  // distinct beta solutions found for the config
};

struct MultipleSolutionsError : Error {
  std::vector<DgpTruth> roots;  // ascending by max-norm of beta
  explicit MultipleSolutionsError(std::vector<DgpTruth> r)
      : Error("DGP constraint system has " + std::to_string(r.size()) +
              " distinct solutions; caller must select explicitly"),
        roots(std::move(r)) {}
};

// every distinct solution of the four-equation compatibility system
// {valid-IV for I0, valid-IV for I1, marginal outcome, marginal benefit},
// sorted by max-norm of beta ascending; empty when none exists
std::vector<DgpTruth> solve_beta_all(const DgpConfig& config);

// unique solution, or NoSolutionError / MultipleSolutionsError (which carries
// all roots so the caller can select explicitly)
DgpTruth solve_beta(const DgpConfig& config);

// benefits and indices implied by an explicit beta under the config's
// instrument/exposure models (no constraint solving)
DgpTruth truth_from_beta(const DgpConfig& config, const std::array<double, 4>& beta);

// residual of the four constraint equations at beta, max-norm
double constraint_residual(const DgpConfig& config, const std::array<double, 4>& beta);

// synthetic dataset: Z ~ Ber(pi_z), A|Z ~ Ber(expit(g0+g1 Z)),
// I|A,Z ~ Ber(xi^{-1}(beta' x)); deterministic for a fixed seed
ObservationSet generate(const DgpTruth& truth, const DgpConfig& config, std::size_t n,
                        std::uint64_t seed);

// canonical 13-vector of true values for coverage evaluation
ThetaVector true_theta(const DgpTruth& truth, const DgpConfig& config);

}  // namespace ivnnt

#endif
