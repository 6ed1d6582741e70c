#include "ivnnt/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ivnnt {

namespace {

using nlohmann::ordered_json;

std::string status_str(SolveStatus s) {
  switch (s) {
    case SolveStatus::solved: return "Solved";
    case SolveStatus::no_solution: return "NoSolution";
    case SolveStatus::not_attempted: return "NotAttempted";
  }
  return "?";
}

// JSON has no literal for infinities; extended-real values are emitted as
// strings so nothing is silently lost
ordered_json jnum(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json truth_fields(const DgpTruth& t) {
  ordered_json j;
  j["beta"] = {jnum(t.beta[0]), jnum(t.beta[1]), jnum(t.beta[2]), jnum(t.beta[3])};
  j["pb0_true"] = jnum(t.pb0_true);
  j["pb1_true"] = jnum(t.pb1_true);
  j["pb_true"] = jnum(t.pb_true);
  j["nne_true"] = jnum(t.nne_true);
  j["ein_true"] = jnum(t.ein_true);
  j["nnt_true"] = jnum(t.nnt_true);
  return j;
}

ordered_json interval_json(const std::optional<IndexInterval>& ci) {
  if (!ci) return nullptr;
  return ordered_json::array({jnum(ci->lower), jnum(ci->upper)});
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string truth_json(const std::vector<DgpTruth>& roots, int selected, const DgpConfig& config) {
  ordered_json j;
  j["link"] = config.spec.link == LinkKind::logit ? "logit" : "probit";
  j["gamma0"] = jnum(config.gamma0);
  j["gamma1"] = jnum(config.gamma1);
  j["pi_z"] = jnum(config.pi_z);
  j["psi0"] = jnum(config.psi0);
  j["psi1"] = jnum(config.psi1);
  j["root_multiplicity"] = static_cast<int>(roots.size());
  j["selected_root"] = selected;
  const auto& t = roots[static_cast<std::size_t>(selected)];
  j.update(truth_fields(t));
  if (roots.size() > 1) {
    j["roots"] = ordered_json::array();
    for (const auto& r : roots) j["roots"].push_back(truth_fields(r));
  }
  return j.dump(2) + "\n";
}

std::string estimate_report_json(const EstimateReport& rep, const IngestReport* ingest_report) {
  ordered_json j;
  const auto& t = rep.theta_hat;
  j["beta"] = {jnum(t.beta[0]), jnum(t.beta[1]), jnum(t.beta[2]), jnum(t.beta[3])};
  j["pi_z"] = jnum(t.pi_z);
  j["psi0"] = jnum(t.psi0);
  j["psi1"] = jnum(t.psi1);
  j["pb0"] = jnum(t.pb0);
  j["pb1"] = jnum(t.pb1);
  j["pb"] = jnum(t.pb);
  j["nne"] = jnum(t.nne);
  j["ein"] = jnum(t.ein);
  j["nnt"] = jnum(t.nnt);
  j["ci_level"] = rep.ci_level;
  j["nne_ci"] = interval_json(rep.nne_ci);
  j["ein_ci"] = interval_json(rep.ein_ci);
  j["nnt_ci"] = interval_json(rep.nnt_ci);
  ordered_json d;
  d["psi0_status"] = status_str(rep.diagnostics.psi0_status);
  d["psi1_status"] = status_str(rep.diagnostics.psi1_status);
  d["psi0_multiple_roots"] = rep.diagnostics.psi0_multiple_roots;
  d["psi1_multiple_roots"] = rep.diagnostics.psi1_multiple_roots;
  d["bread_condition_number"] = jnum(rep.diagnostics.bread_condition_number);
  d["instrument_wald"] = jnum(rep.diagnostics.instrument_wald);
  d["excluded"] = rep.diagnostics.excluded;
  d["nne_ci_noninformative"] = rep.diagnostics.nne_ci_noninformative;
  d["ein_ci_noninformative"] = rep.diagnostics.ein_ci_noninformative;
  d["nnt_ci_noninformative"] = rep.diagnostics.nnt_ci_noninformative;
  j["diagnostics"] = std::move(d);
  if (ingest_report) {
    ordered_json r;
    r["n_read"] = ingest_report->n_read;
    r["n_dropped"] = ingest_report->n_dropped;
    r["dropped"] = ordered_json::array();
    for (const auto& row : ingest_report->dropped) {
      r["dropped"].push_back({{"line", row.line}, {"column", row.column}, {"value", row.value}});
    }
    j["ingestion"] = std::move(r);
  }
  return j.dump(2) + "\n";
}

std::string summary_csv(const StudySummary& s) {
  std::ostringstream out;
  out << "n,index,truth,coverage,se_mc,se_sandwich_mean,avg_bias,pct_inf_ci,pct_excluded,"
         "pct_nosolution,pct_infinite,mean_instrument_wald,m,n_ci_evaluated,n_covered,"
         "n_excluded,n_nosolution,n_infinite,n_inf_ci\n";
  for (const auto& ss : s.sizes) {
    for (int k = 0; k < 3; ++k) {
      const auto& is = ss.index[static_cast<std::size_t>(k)];
      out << ss.n << ',' << index_name(static_cast<EfficacyIndex>(k)) << ','
          << format_double(is.truth) << ',' << format_double(is.coverage) << ','
          << format_double(is.se_mc) << ',' << format_double(is.se_sandwich_mean) << ','
          << format_double(is.avg_bias) << ',' << format_double(is.pct_inf_ci) << ','
          << format_double(is.pct_excluded) << ',' << format_double(is.pct_nosolution) << ','
          << format_double(is.pct_infinite) << ','
          << format_double(ss.mean_instrument_wald) << ',' << is.m_total << ','
          << is.n_ci_evaluated << ',' << is.n_covered << ',' << is.n_excluded << ','
          << is.n_nosolution << ',' << is.n_infinite << ',' << is.n_inf_ci << '\n';
    }
  }
  return out.str();
}

std::string summary_json(const StudySummary& s, const StudyConfig& config) {
  ordered_json j;
  j["dgp"] = {
      {"link", config.dgp.spec.link == LinkKind::logit ? "logit" : "probit"},
      {"psi0", config.dgp.psi0},
      {"psi1", config.dgp.psi1},
      {"pi_z", config.dgp.pi_z},
      {"gamma0", config.dgp.gamma0},
      {"gamma1", config.dgp.gamma1},
      {"target_exposure", config.dgp.target_exposure},
      {"target_outcome", config.dgp.target_outcome},
      {"target_pb", config.dgp.target_pb},
  };
  j["replications"] = config.replications;
  j["ci_level"] = config.ci_level;
  j["baseline_mode"] =
      config.baseline_mode == BaselineMode::crude ? "crude" : "adjust_for_instrument";
  j["master_seed"] = config.master_seed;
  j["dgp_root_index"] = s.dgp_root_index;
  j["truth"] = truth_fields(s.truth);
  j["truth"]["root_multiplicity"] = s.truth.root_multiplicity;
  j["sizes"] = ordered_json::array();
  for (const auto& ss : s.sizes) {
    ordered_json je;
    je["n"] = ss.n;
    je["mean_instrument_wald"] = jnum(ss.mean_instrument_wald);
    for (int k = 0; k < 3; ++k) {
      const auto& is = ss.index[static_cast<std::size_t>(k)];
      ordered_json ji;
      ji["truth"] = jnum(is.truth);
      ji["coverage"] = jnum(is.coverage);
      ji["se_mc"] = jnum(is.se_mc);
      ji["se_sandwich_mean"] = jnum(is.se_sandwich_mean);
      ji["avg_bias"] = jnum(is.avg_bias);
      ji["pct_inf_ci"] = jnum(is.pct_inf_ci);
      ji["pct_excluded"] = jnum(is.pct_excluded);
      ji["pct_nosolution"] = jnum(is.pct_nosolution);
      ji["pct_infinite"] = jnum(is.pct_infinite);
      ji["m"] = is.m_total;
      ji["n_ci_evaluated"] = is.n_ci_evaluated;
      ji["n_covered"] = is.n_covered;
      ji["n_excluded"] = is.n_excluded;
      ji["n_nosolution"] = is.n_nosolution;
      ji["n_infinite"] = is.n_infinite;
      ji["n_inf_ci"] = is.n_inf_ci;
      je[index_name(static_cast<EfficacyIndex>(k))] = std::move(ji);
    }
    j["sizes"].push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

std::string estimates_csv(const StudySummary& s) {
  std::ostringstream out;
  out << "replication,n,index,method,estimate,ci_lower,ci_upper,status\n";
  for (const auto& r : s.raw) {
    out << r.replication << ',' << r.n << ',' << index_name(r.index) << ','
        << (r.method == 0 ? "iv" : "baseline") << ',' << format_double(r.estimate) << ','
        << (std::isnan(r.ci_lower) ? "" : format_double(r.ci_lower)) << ','
        << (std::isnan(r.ci_upper) ? "" : format_double(r.ci_upper)) << ','
        << status_name(r.status) << '\n';
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  out << content;
  if (!out) throw IoError("error while writing file: " + path);
}

}  // namespace ivnnt
