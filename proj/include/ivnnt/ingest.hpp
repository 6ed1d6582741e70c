#ifndef IVNNT_INGEST_HPP
#define IVNNT_INGEST_HPP

#include <optional>
#include <string>
#include <vector>

#include "ivnnt/domain.hpp"

namespace ivnnt {

enum class ThresholdDirection { ge_is_exposed, le_is_exposed };

struct Threshold {
  double value = 0;
  ThresholdDirection direction = ThresholdDirection::ge_is_exposed;
};

struct IngestSpec {
  std::string path;
  std::string outcome_column, exposure_column, instrument_column;
  std::optional<Threshold> exposure_threshold;  // absent: column must already be binary
  std::optional<Threshold> outcome_threshold;
  bool header = true;  // without a header, columns are referenced by 0-based index
};

struct DroppedRow {
  std::size_t line;  // 1-based file line
  std::string column;
  std::string value;
};

struct IngestReport {
  std::size_t n_read = 0;     // data rows seen
  std::size_t n_dropped = 0;  // rows removed for unparseable values
  std::vector<DroppedRow> dropped;
};

struct IngestResult {
  ObservationSet data;
  IngestReport report;
};

// reads the CSV, applies thresholds, maps to records and validates.
// Rows with unparseable numeric values are dropped and listed in the report;
// validation errors (non-binary values, empty cells) pass through.
IngestResult ingest(const IngestSpec& spec);

}  // namespace ivnnt

#endif
