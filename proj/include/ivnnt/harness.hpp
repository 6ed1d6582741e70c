#ifndef IVNNT_HARNESS_HPP
#define IVNNT_HARNESS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ivnnt/dgp.hpp"
#include "ivnnt/domain.hpp"
#include "ivnnt/estimator.hpp"

namespace ivnnt {

enum class EfficacyIndex : int { ein = 0, nne = 1, nnt = 2 };
inline const char* index_name(EfficacyIndex k) {
  switch (k) {
    case EfficacyIndex::ein: return "EIN";
    case EfficacyIndex::nne: return "NNE";
    case EfficacyIndex::nnt: return "NNT";
  }
  return "?";
}

struct StudyConfig {
  DgpConfig dgp;
  std::vector<std::size_t> sample_sizes;
  std::size_t replications = 1;
  double ci_level = 0.95;
  BaselineMode baseline_mode = BaselineMode::adjust_for_instrument;
  std::uint64_t master_seed = 0;
  int dgp_root_index = 0;  // explicit selection when the DGP system has several roots
  unsigned threads = 0;    // 0: hardware concurrency

  void check() const;
};

enum class RepIndexStatus { ok, infinite, no_solution, excluded };
inline const char* status_name(RepIndexStatus s) {
  switch (s) {
    case RepIndexStatus::ok: return "ok";
    case RepIndexStatus::infinite: return "infinite";
    case RepIndexStatus::no_solution: return "nosolution";
    case RepIndexStatus::excluded: return "excluded";
  }
  return "?";
}

// long-format raw record for boxplot emission: one row per
// replication x sample size x index x method
struct ReplicationRow {
  std::uint32_t replication;
  std::size_t n;
  EfficacyIndex index;
  int method;  // 0 = iv, 1 = baseline
  double estimate;
  double ci_lower, ci_upper;  // NaN when unavailable (always for baseline)
  RepIndexStatus status;
};

struct IndexSummary {
  double truth = 0;
  double coverage = 0;            // over replications with an evaluable CI
  double se_mc = 0;               // SD of finite point estimates across replications
  double se_sandwich_mean = 0;    // mean sandwich SE over evaluable replications
  double avg_bias = 0;            // mean |estimate - truth| over finite estimates
  double pct_inf_ci = 0;          // CI upper limit > 1000, over evaluable
  double pct_excluded = 0;        // bread exclusions, over all replications
  double pct_nosolution = 0;
  double pct_infinite = 0;        // infinite point estimates, over all replications
  std::int64_t m_total = 0, n_ci_evaluated = 0, n_covered = 0;
  std::int64_t n_excluded = 0, n_nosolution = 0, n_infinite = 0, n_inf_ci = 0;
};

struct SampleSizeSummary {
  std::size_t n = 0;
  double mean_instrument_wald = 0;
  std::array<IndexSummary, 3> index;  // EIN, NNE, NNT
};

struct StudySummary {
  DgpTruth truth;
  int dgp_root_index = 0;
  std::vector<SampleSizeSummary> sizes;
  std::vector<ReplicationRow> raw;
};

// replicated generate -> estimate -> sandwich -> baseline cycles with
// per-replication seed streams; deterministic given master_seed regardless
// of thread count. Per-replication failures are counted, never fatal.
StudySummary run_study(const StudyConfig& config);
StudySummary run_study(const StudyConfig& config, const DgpTruth& truth);

// Wald statistic of the instrument coefficient in the saturated logistic
// exposure model; throws SeparationError when a Z cell has all-0/all-1 exposure
double instrument_strength(const ObservationSet& data);

// single-dataset pipeline shared by the study runner and the estimate command:
// g_estimate + active-set sandwich with exclusion handling + diagnostics
EstimateReport full_estimate(const ObservationSet& data, ModelSpec spec, double ci_level);

}  // namespace ivnnt

#endif
