#ifndef IVNNT_CONFIG_HPP
#define IVNNT_CONFIG_HPP

#include <optional>
#include <string>

#include "ivnnt/harness.hpp"
#include "ivnnt/ingest.hpp"

namespace ivnnt {

// parsed top-level JSON config; sections are optional because each command
// needs a different subset
struct ToolConfig {
  ModelSpec model;
  std::optional<DgpConfig> dgp;
  std::optional<StudyConfig> study;  // study.dgp filled from the dgp section
  std::optional<IngestSpec> estimate;
};

ToolConfig load_config(const std::string& path);  // throws ConfigError / IoError

LinkKind parse_link(const std::string& s);
BaselineMode parse_baseline_mode(const std::string& s);

}  // namespace ivnnt

#endif
