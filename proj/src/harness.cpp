#include "ivnnt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ivnnt/rng.hpp"
#include "ivnnt/variance.hpp"

namespace ivnnt {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNonInformativeUpper = 1000.0;

double index_value(const ThetaVector& t, EfficacyIndex k) {
  switch (k) {
    case EfficacyIndex::ein: return t.ein;
    case EfficacyIndex::nne: return t.nne;
    case EfficacyIndex::nnt: return t.nnt;
  }
  return kNan;
}

double truth_value(const DgpTruth& t, EfficacyIndex k) {
  switch (k) {
    case EfficacyIndex::ein: return t.ein_true;
    case EfficacyIndex::nne: return t.nne_true;
    case EfficacyIndex::nnt: return t.nnt_true;
  }
  return kNan;
}

int theta_slot(EfficacyIndex k) {
  switch (k) {
    case EfficacyIndex::ein: return kEin;
    case EfficacyIndex::nne: return kNne;
    case EfficacyIndex::nnt: return kNnt;
  }
  return -1;
}

double baseline_value(const NaiveEstimates& b, EfficacyIndex k) {
  switch (k) {
    case EfficacyIndex::ein: return b.ein;
    case EfficacyIndex::nne: return b.nne;
    case EfficacyIndex::nnt: return b.nnt;
  }
  return kNan;
}

struct RepOutcome {
  // per index: estimate, ci, status
  std::array<double, 3> estimate{kNan, kNan, kNan};
  std::array<double, 3> ci_lower{kNan, kNan, kNan};
  std::array<double, 3> ci_upper{kNan, kNan, kNan};
  std::array<double, 3> sandwich_se{kNan, kNan, kNan};
  std::array<RepIndexStatus, 3> status{RepIndexStatus::no_solution,
                                       RepIndexStatus::no_solution,
                                       RepIndexStatus::no_solution};
  std::array<double, 3> baseline{kNan, kNan, kNan};
  double wald = kNan;
};

RepOutcome run_one(const DgpTruth& truth, const DgpConfig& dgp, std::size_t n,
                   std::uint64_t seed, double ci_level, BaselineMode baseline_mode) {
  RepOutcome out;
  const ObservationSet data = generate(truth, dgp, n, seed);

  try {
    out.wald = instrument_strength(data);
  } catch (const SeparationError&) {
  }

  try {
    const NaiveEstimates nb = naive_estimates(data, baseline_mode);
    for (int k = 0; k < 3; ++k)
      out.baseline[k] = baseline_value(nb, static_cast<EfficacyIndex>(k));
  } catch (const Error&) {
  }

  EstimateReport rep;
  try {
    rep = full_estimate(data, dgp.spec, ci_level);
  } catch (const Error&) {
    // association model unidentifiable (separation / empty cell)
    return out;
  }

  for (int k = 0; k < 3; ++k) {
    const auto idx = static_cast<EfficacyIndex>(k);
    const double est = index_value(rep.theta_hat, idx);
    out.estimate[k] = est;
    const SolveStatus psi_status =
        idx == EfficacyIndex::ein ? rep.diagnostics.psi1_status
        : idx == EfficacyIndex::nne
            ? rep.diagnostics.psi0_status
            : (rep.diagnostics.psi0_status == SolveStatus::solved &&
                       rep.diagnostics.psi1_status == SolveStatus::solved
                   ? SolveStatus::solved
                   : SolveStatus::no_solution);
    if (psi_status != SolveStatus::solved) {
      out.status[k] = RepIndexStatus::no_solution;
      continue;
    }
    if (!std::isfinite(est)) {
      out.status[k] = RepIndexStatus::infinite;
      continue;
    }
    if (rep.diagnostics.excluded) {
      out.status[k] = RepIndexStatus::excluded;
      continue;
    }
    const auto& ci = idx == EfficacyIndex::ein ? rep.ein_ci
                     : idx == EfficacyIndex::nne ? rep.nne_ci
                                                 : rep.nnt_ci;
    if (!ci.has_value()) {
      out.status[k] = RepIndexStatus::excluded;
      continue;
    }
    out.status[k] = RepIndexStatus::ok;
    out.ci_lower[k] = ci->lower;
    out.ci_upper[k] = ci->upper;
    const int slot = theta_slot(idx);
    const double var = rep.covariance(slot, slot);
    out.sandwich_se[k] = var >= 0 ? std::sqrt(var) : kNan;
  }
  return out;
}

}  // namespace

void StudyConfig::check() const {
  dgp.check();
  if (replications < 1) throw ConfigError("study: replications must be >= 1");
  if (sample_sizes.empty()) throw ConfigError("study: sample_sizes must be non-empty");
  for (auto n : sample_sizes)
    if (n < 1) throw ConfigError("study: sample sizes must be >= 1");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("study: ci_level must lie in (0,1)");
  if (dgp_root_index < 0) throw ConfigError("study: dgp_root_index must be >= 0");
}

double instrument_strength(const ObservationSet& data) {
  const auto& cells = data.cells();
  double gamma[2], var = 0;
  for (int z = 0; z < 2; ++z) {
    const auto nz = cells.count_z(z);
    if (nz == 0) throw SeparationError("instrument_strength: no records with Z=" + std::to_string(z));
    const double p = static_cast<double>(cells.n[z][1]) / static_cast<double>(nz);
    if (p <= 0.0 || p >= 1.0) {
      SeparationError err("instrument_strength: degenerate exposure in Z=" + std::to_string(z) +
                          " cell");
      err.cells.emplace_back(z, -1);
      throw err;
    }
    gamma[z] = logit(p);
    // observed information of the two-cell binomial likelihood
    var += 1.0 / (static_cast<double>(nz) * p * (1.0 - p));
  }
  return (gamma[1] - gamma[0]) / std::sqrt(var);
}

EstimateReport full_estimate(const ObservationSet& data, ModelSpec spec, double ci_level) {
  EstimateReport rep;
  rep.ci_level = ci_level;
  rep.covariance = Eigen::MatrixXd::Constant(13, 13, kNan);

  try {
    rep.diagnostics.instrument_wald = instrument_strength(data);
  } catch (const SeparationError&) {
  }

  const GEstimationResult fit = g_estimate(data, spec);
  rep.theta_hat = fit.theta_hat;
  rep.diagnostics.psi0_status = fit.psi0_status;
  rep.diagnostics.psi1_status = fit.psi1_status;
  rep.diagnostics.psi0_multiple_roots = fit.psi0_multiple_roots;
  rep.diagnostics.psi1_multiple_roots = fit.psi1_multiple_roots;

  std::array<bool, 13> active = active_components(fit);
  // the sandwich needs at least one resolved causal block
  bool any = false;
  for (int k = kPsi0; k < 13; ++k) any = any || active[k];
  if (!any) return rep;

  // a g-row whose finite-difference step leaves the domain is deactivated and
  // the sandwich retried; exclusion by condition number is terminal
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      const SandwichResult sw = sandwich(data, fit.theta_hat, spec, ci_level, active);
      rep.covariance = sw.covariance;
      rep.diagnostics.bread_condition_number = sw.bread_condition_number;
      if (active[kNne]) rep.nne_ci = sw.ci[kNne];
      if (active[kEin]) rep.ein_ci = sw.ci[kEin];
      if (active[kNnt]) rep.nnt_ci = sw.ci[kNnt];
      rep.diagnostics.nne_ci_noninformative =
          rep.nne_ci && rep.nne_ci->upper > kNonInformativeUpper;
      rep.diagnostics.ein_ci_noninformative =
          rep.ein_ci && rep.ein_ci->upper > kNonInformativeUpper;
      rep.diagnostics.nnt_ci_noninformative =
          rep.nnt_ci && rep.nnt_ci->upper > kNonInformativeUpper;
      return rep;
    } catch (const ExcludedError& e) {
      rep.diagnostics.excluded = true;
      rep.diagnostics.bread_condition_number = e.condition_number;
      return rep;
    } catch (const NonFiniteEntryError& e) {
      if (e.component >= kNne && e.component <= kNnt) {
        active[e.component] = false;
        continue;
      }
      rep.diagnostics.excluded = true;
      return rep;
    }
  }
  rep.diagnostics.excluded = true;
  return rep;
}

StudySummary run_study(const StudyConfig& config) {
  config.check();
  auto roots = solve_beta_all(config.dgp);
  if (roots.empty()) throw NoSolutionError("run_study: DGP constraint system has no solution");
  if (config.dgp_root_index >= static_cast<int>(roots.size()))
    throw ConfigError("run_study: dgp_root_index out of range (multiplicity " +
                      std::to_string(roots.size()) + ")");
  return run_study(config, roots[static_cast<std::size_t>(config.dgp_root_index)]);
}

StudySummary run_study(const StudyConfig& config, const DgpTruth& truth) {
  config.check();
  StudySummary summary;
  summary.truth = truth;
  summary.dgp_root_index = config.dgp_root_index;

  const std::size_t m = config.replications;
  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  if (threads == 0) threads = 1;
  threads = std::min<unsigned>(threads, static_cast<unsigned>(m));

  for (std::size_t slot = 0; slot < config.sample_sizes.size(); ++slot) {
    const std::size_t n = config.sample_sizes[slot];
    std::vector<RepOutcome> outcomes(m);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= m) return;
        const std::uint64_t seed = derive_stream_seed(config.master_seed, slot, r);
        outcomes[r] = run_one(truth, config.dgp, n, seed, config.ci_level,
                              config.baseline_mode);
      }
    };
    if (threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }

    // aggregation in replication order, independent of scheduling
    SampleSizeSummary ss;
    ss.n = n;
    double wald_sum = 0;
    std::int64_t wald_count = 0;
    for (std::size_t r = 0; r < m; ++r) {
      if (std::isfinite(outcomes[r].wald)) {
        wald_sum += outcomes[r].wald;
        ++wald_count;
      }
    }
    ss.mean_instrument_wald = wald_count > 0 ? wald_sum / static_cast<double>(wald_count) : kNan;

    for (int k = 0; k < 3; ++k) {
      const auto idx = static_cast<EfficacyIndex>(k);
      IndexSummary& is = ss.index[static_cast<std::size_t>(k)];
      is.truth = truth_value(truth, idx);
      is.m_total = static_cast<std::int64_t>(m);
      double est_sum = 0, est_sq = 0, bias_sum = 0, se_sum = 0;
      std::int64_t n_finite = 0;
      for (std::size_t r = 0; r < m; ++r) {
        const RepOutcome& o = outcomes[r];
        switch (o.status[k]) {
          case RepIndexStatus::no_solution: ++is.n_nosolution; break;
          case RepIndexStatus::infinite: ++is.n_infinite; break;
          case RepIndexStatus::excluded: ++is.n_excluded; break;
          case RepIndexStatus::ok: break;
        }
        const double est = o.estimate[k];
        if (std::isfinite(est)) {
          ++n_finite;
          est_sum += est;
          est_sq += est * est;
          bias_sum += std::fabs(est - is.truth);
        }
        if (o.status[k] == RepIndexStatus::ok) {
          ++is.n_ci_evaluated;
          se_sum += o.sandwich_se[k];
          if (o.ci_upper[k] > kNonInformativeUpper) ++is.n_inf_ci;
          if (o.ci_lower[k] <= is.truth && is.truth <= o.ci_upper[k]) ++is.n_covered;
        }
      }
      const auto dm = static_cast<double>(m);
      is.coverage = is.n_ci_evaluated > 0
                        ? static_cast<double>(is.n_covered) / static_cast<double>(is.n_ci_evaluated)
                        : kNan;
      if (n_finite > 1) {
        const double mean = est_sum / static_cast<double>(n_finite);
        const double ss2 = (est_sq - static_cast<double>(n_finite) * mean * mean) /
                           static_cast<double>(n_finite - 1);
        is.se_mc = ss2 > 0 ? std::sqrt(ss2) : 0.0;
      } else {
        is.se_mc = kNan;
      }
      is.avg_bias = n_finite > 0 ? bias_sum / static_cast<double>(n_finite) : kNan;
      is.se_sandwich_mean =
          is.n_ci_evaluated > 0 ? se_sum / static_cast<double>(is.n_ci_evaluated) : kNan;
      is.pct_inf_ci = is.n_ci_evaluated > 0
                          ? static_cast<double>(is.n_inf_ci) / static_cast<double>(is.n_ci_evaluated)
                          : 0.0;
      is.pct_excluded = static_cast<double>(is.n_excluded) / dm;
      is.pct_nosolution = static_cast<double>(is.n_nosolution) / dm;
      is.pct_infinite = static_cast<double>(is.n_infinite) / dm;
    }
    summary.sizes.push_back(ss);

    for (std::size_t r = 0; r < m; ++r) {
      const RepOutcome& o = outcomes[r];
      for (int k = 0; k < 3; ++k) {
        const auto idx = static_cast<EfficacyIndex>(k);
        summary.raw.push_back({static_cast<std::uint32_t>(r), n, idx, 0, o.estimate[k],
                               o.ci_lower[k], o.ci_upper[k], o.status[k]});
        summary.raw.push_back({static_cast<std::uint32_t>(r), n, idx, 1, o.baseline[k], kNan,
                               kNan,
                               std::isfinite(o.baseline[k]) ? RepIndexStatus::ok
                                                            : RepIndexStatus::infinite});
      }
    }
  }
  return summary;
}

}  // namespace ivnnt
