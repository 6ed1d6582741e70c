#include "ivnnt/config.hpp"

#include <fstream>

#include <json.hpp>

namespace ivnnt {

namespace {

using nlohmann::json;

double require_number(const json& j, const std::string& section, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number())
    throw ConfigError("config: " + section + "." + key + " must be a number");
  return j[key].get<double>();
}

Threshold parse_threshold(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("value") || !j.contains("direction"))
    throw ConfigError("config: " + where + " must have {value, direction}");
  Threshold t;
  t.value = j["value"].get<double>();
  const std::string d = j["direction"].get<std::string>();
  if (d == "ge_is_exposed")
    t.direction = ThresholdDirection::ge_is_exposed;
  else if (d == "le_is_exposed")
    t.direction = ThresholdDirection::le_is_exposed;
  else
    throw ConfigError("config: " + where + ".direction must be ge_is_exposed or le_is_exposed");
  return t;
}

}  // namespace

LinkKind parse_link(const std::string& s) {
  if (s == "logit") return LinkKind::logit;
  if (s == "probit") return LinkKind::probit;
  throw ConfigError("config: link must be \"logit\" or \"probit\", got \"" + s + "\"");
}

BaselineMode parse_baseline_mode(const std::string& s) {
  if (s == "crude") return BaselineMode::crude;
  if (s == "adjust_for_instrument") return BaselineMode::adjust_for_instrument;
  throw ConfigError("config: baseline_mode must be \"crude\" or \"adjust_for_instrument\"");
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON in " + path + ": " + e.what());
  }

  ToolConfig cfg;
  if (j.contains("model")) {
    if (!j["model"].contains("link")) throw ConfigError("config: model.link is required");
    cfg.model.link = parse_link(j["model"]["link"].get<std::string>());
  }

  if (j.contains("dgp")) {
    const json& d = j["dgp"];
    cfg.dgp = DgpConfig::with_derived_gamma0(
        cfg.model, require_number(d, "dgp", "psi0"), require_number(d, "dgp", "psi1"),
        require_number(d, "dgp", "pi_z"), require_number(d, "dgp", "gamma1"),
        require_number(d, "dgp", "target_exposure"), require_number(d, "dgp", "target_outcome"),
        require_number(d, "dgp", "target_pb"));
  }

  if (j.contains("study")) {
    if (!cfg.dgp) throw ConfigError("config: study section requires a dgp section");
    const json& s = j["study"];
    StudyConfig sc;
    sc.dgp = *cfg.dgp;
    if (!s.contains("sample_sizes") || !s["sample_sizes"].is_array())
      throw ConfigError("config: study.sample_sizes must be an array");
    for (const auto& v : s["sample_sizes"]) sc.sample_sizes.push_back(v.get<std::size_t>());
    sc.replications = static_cast<std::size_t>(require_number(s, "study", "replications"));
    sc.ci_level = s.contains("ci_level") ? s["ci_level"].get<double>() : 0.95;
    sc.baseline_mode = s.contains("baseline_mode")
                           ? parse_baseline_mode(s["baseline_mode"].get<std::string>())
                           : BaselineMode::adjust_for_instrument;
    if (!s.contains("master_seed")) throw ConfigError("config: study.master_seed is required");
    sc.master_seed = s["master_seed"].get<std::uint64_t>();
    if (s.contains("dgp_root_index")) sc.dgp_root_index = s["dgp_root_index"].get<int>();
    if (s.contains("threads")) sc.threads = s["threads"].get<unsigned>();
    cfg.study = std::move(sc);
  }

  if (j.contains("estimate")) {
    const json& e = j["estimate"];
    IngestSpec is;
    if (!e.contains("data")) throw ConfigError("config: estimate.data path is required");
    is.path = e["data"].get<std::string>();
    auto col = [&](const char* key) {
      if (!e.contains(key)) throw ConfigError(std::string("config: estimate.") + key + " is required");
      return e[key].get<std::string>();
    };
    is.outcome_column = col("outcome_column");
    is.exposure_column = col("exposure_column");
    is.instrument_column = col("instrument_column");
    if (e.contains("exposure_threshold"))
      is.exposure_threshold = parse_threshold(e["exposure_threshold"], "estimate.exposure_threshold");
    if (e.contains("outcome_threshold"))
      is.outcome_threshold = parse_threshold(e["outcome_threshold"], "estimate.outcome_threshold");
    if (e.contains("header")) is.header = e["header"].get<bool>();
    cfg.estimate = std::move(is);
  }

  return cfg;
}

}  // namespace ivnnt
