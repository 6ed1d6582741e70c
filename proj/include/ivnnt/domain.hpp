#ifndef IVNNT_DOMAIN_HPP
#define IVNNT_DOMAIN_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ivnnt/errors.hpp"
#include "ivnnt/linkmath.hpp"

namespace ivnnt {

// one study subject: binary instrument z, binary exposure a, binary outcome i
struct ObservationRecord {
  std::uint8_t z, a, i;
};

// unvalidated input triple, as parsed from user data
struct RawObservation {
  double z, a, i;
};

// per-(z,a) cell counts and outcome sums; the association model is saturated
// in Z x A, so every estimator in this library works off these eight numbers
struct CellCounts {
  std::array<std::array<std::int64_t, 2>, 2> n{};     // n[z][a]
  std::array<std::array<std::int64_t, 2>, 2> ones{};  // sum of I in cell
  std::int64_t total = 0;

  std::int64_t count(int z, int a) const { return n[z][a]; }
  double outcome_mean(int z, int a) const {
    return static_cast<double>(ones[z][a]) / static_cast<double>(n[z][a]);
  }
  std::int64_t count_z(int z) const { return n[z][0] + n[z][1]; }
  std::int64_t count_a(int a) const { return n[0][a] + n[1][a]; }
};

// validated instrument/exposure/outcome triples with precomputed cell table
class ObservationSet {
 public:
  // full validation: binary values, non-empty dataset, and all four (z,a)
  // cells populated (the saturated association model is unidentifiable
  // otherwise); every violation is collected into the thrown error
  static ObservationSet validate(const std::vector<RawObservation>& raw);

  // binary-checked construction without the cell-coverage requirement;
  // intended for internal use and for exercising single operations
  static ObservationSet from_records_unchecked(std::vector<ObservationRecord> records);

  std::size_t size() const { return records_.size(); }
  std::span<const ObservationRecord> records() const { return records_; }
  const CellCounts& cells() const { return cells_; }

 private:
  ObservationSet() = default;
  std::vector<ObservationRecord> records_;
  CellCounts cells_;
};

// canonical 13-parameter stack; the flattening order below is shared by the
// estimating-function stack and the sandwich Jacobian and must never change
struct ThetaVector {
  std::array<double, 4> beta{};  // association coefficients
  double pi_z = 0;               // instrument marginal probability
  double psi0 = 0, psi1 = 0;     // causal parameters
  double pb0 = 0, pb1 = 0, pb = 0;  // groupwise and marginal benefits
  double nne = 0, ein = 0, nnt = 0; // efficacy indices (may be +inf)

  static constexpr std::size_t dim = 13;
};

// component positions in the canonical flattening
enum ThetaIndex : int {
  kBeta0 = 0, kBeta1, kBeta2, kBeta3,
  kPiZ = 4,
  kPsi0 = 5, kPsi1 = 6,
  kPb0 = 7, kPb1 = 8, kPb = 9,
  kNne = 10, kEin = 11, kNnt = 12,
};

std::array<double, ThetaVector::dim> theta_pack(const ThetaVector& t);
ThetaVector theta_unpack(std::span<const double> v);  // throws LengthMismatchError

struct ModelSpec {
  LinkKind link = LinkKind::logit;
};

enum class SolveStatus { solved, no_solution, not_attempted };

struct IndexInterval {
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
};

// full single-dataset result: point estimates, sandwich covariance, index CIs
// and diagnostics; partial results are normal (an index whose psi equation
// had no solution is simply reported unavailable)
struct EstimateReport {
  ThetaVector theta_hat;
  Eigen::MatrixXd covariance;  // 13x13, NaN rows/cols for unavailable components
  double ci_level = 0.95;
  std::optional<IndexInterval> nne_ci, ein_ci, nnt_ci;

  struct Diagnostics {
    double bread_condition_number = std::numeric_limits<double>::quiet_NaN();
    double instrument_wald = std::numeric_limits<double>::quiet_NaN();
    SolveStatus psi0_status = SolveStatus::not_attempted;
    SolveStatus psi1_status = SolveStatus::not_attempted;
    bool psi0_multiple_roots = false, psi1_multiple_roots = false;
    bool excluded = false;  // condition number >= 1e12
    bool nne_ci_noninformative = false;  // upper limit > 1000
    bool ein_ci_noninformative = false;
    bool nnt_ci_noninformative = false;
  } diagnostics;
};

}  // namespace ivnnt

#endif
