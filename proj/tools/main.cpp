#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ivnnt/config.hpp"
#include "ivnnt/report.hpp"
#include "ivnnt/svg.hpp"
#include "ivnnt/variance.hpp"

namespace {

using namespace ivnnt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> link;
  std::optional<std::string> data;
  int root = -1;  // -1: unset
};

void apply_link_override(ToolConfig& cfg, const CommonOpts& opts) {
  if (!opts.link) return;
  const LinkKind k = parse_link(*opts.link);
  cfg.model.link = k;
  if (cfg.dgp) cfg.dgp->spec.link = k;
  if (cfg.study) cfg.study->dgp.spec.link = k;
}

int cmd_truths(const CommonOpts& opts) {
  ToolConfig cfg = load_config(opts.config_path);
  apply_link_override(cfg, opts);
  if (!cfg.dgp) throw ConfigError("truths: config has no dgp section");

  std::vector<DgpTruth> roots;
  try {
    roots = solve_beta_all(*cfg.dgp);
  } catch (const NoSolutionError& e) {
    std::cerr << "infeasible DGP: " << e.what() << "\n";
    return kExitInfeasible;
  }
  if (roots.empty()) {
    std::cerr << "infeasible DGP: no association coefficients satisfy the constraints\n";
    return kExitInfeasible;
  }
  int selected = opts.root >= 0 ? opts.root : 0;
  if (selected >= static_cast<int>(roots.size())) {
    std::cerr << "--root " << selected << " out of range: multiplicity is " << roots.size()
              << "\n";
    return kExitUsage;
  }
  std::cout << truth_json(roots, selected, *cfg.dgp);
  return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
  ToolConfig cfg = load_config(opts.config_path);
  apply_link_override(cfg, opts);
  if (!cfg.study) throw ConfigError("simulate: config has no study section");
  StudyConfig study = *cfg.study;
  if (opts.seed) study.master_seed = *opts.seed;
  if (opts.root >= 0) study.dgp_root_index = opts.root;

  StudySummary summary;
  try {
    summary = run_study(study);
  } catch (const NoSolutionError& e) {
    std::cerr << "infeasible DGP: " << e.what() << "\n";
    return kExitInfeasible;
  }

  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);
  write_file((out / "summary.csv").string(), summary_csv(summary));
  write_file((out / "summary.json").string(), summary_json(summary, study));
  write_file((out / "estimates.csv").string(), estimates_csv(summary));

  for (int k = 0; k < 3; ++k) {
    const auto idx = static_cast<EfficacyIndex>(k);
    std::vector<BoxGroup> groups;
    for (const auto n : study.sample_sizes) {
      for (int method = 0; method < 2; ++method) {
        BoxGroup g;
        g.n = n;
        g.method = method;
        for (const auto& row : summary.raw)
          if (row.n == n && row.index == idx && row.method == method)
            g.estimates.push_back(row.estimate);
        groups.push_back(std::move(g));
      }
    }
    double truth = k == 0   ? summary.truth.ein_true
                   : k == 1 ? summary.truth.nne_true
                            : summary.truth.nnt_true;
    const std::string name = index_name(idx);
    const std::string svg = boxplot_svg(name + " estimates by sample size", name, truth, groups);
    std::string file = "boxplot_" + name + ".svg";
    for (auto& c : file) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    write_file((out / file).string(), svg);
  }
  std::cout << "wrote summary.csv, summary.json, estimates.csv and 3 boxplots to " << opts.out_dir
            << "\n";
  return kExitOk;
}

int cmd_estimate(const CommonOpts& opts) {
  ToolConfig cfg = load_config(opts.config_path);
  apply_link_override(cfg, opts);
  if (!cfg.estimate) throw ConfigError("estimate: config has no estimate section");
  IngestSpec spec = *cfg.estimate;
  if (opts.data) spec.path = *opts.data;

  const IngestResult ingested = ingest(spec);
  const EstimateReport rep = full_estimate(ingested.data, cfg.model, 0.95);
  std::cout << estimate_report_json(rep, &ingested.report);
  return kExitOk;  // partial estimates are success
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"instrumental-variable estimation of the EIN, NNE and NNT efficacy indices"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub, bool need_out) {
    sub->add_option("--config", opts.config_path, "JSON config file")->required();
    if (need_out) sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "master seed override");
    sub->add_option("--link", opts.link, "link override: logit | probit");
    sub->add_option("--root", opts.root, "DGP root selection when several exist");
  };

  CLI::App* truths = app.add_subcommand("truths", "solve the DGP constraint system and print true values");
  add_common(truths, false);
  CLI::App* simulate = app.add_subcommand("simulate", "run the Monte Carlo study and write reports");
  add_common(simulate, true);
  CLI::App* estimate = app.add_subcommand("estimate", "estimate indices from a CSV dataset");
  add_common(estimate, false);
  estimate->add_option("--data", opts.data, "data CSV path override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (truths->parsed()) return cmd_truths(opts);
    if (simulate->parsed()) return cmd_simulate(opts);
    if (estimate->parsed()) return cmd_estimate(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
