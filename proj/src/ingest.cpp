#include "ivnnt/ingest.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ivnnt {

namespace {

// minimal RFC-4180 field splitter: quoted fields, doubled-quote escapes
std::vector<std::string> split_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw CsvParseError("unterminated quoted field", lineno);
  out.push_back(std::move(field));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return errno == 0 && end == t.c_str() + t.size();
}

double apply_threshold(double v, const Threshold& t) {
  const bool exposed =
      t.direction == ThresholdDirection::ge_is_exposed ? v >= t.value : v <= t.value;
  return exposed ? 1.0 : 0.0;
}

std::size_t resolve_column(const std::vector<std::string>& names, const std::string& wanted,
                           bool header) {
  if (header) {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (trim(names[k]) == wanted) return k;
    throw MissingColumnError(wanted);
  }
  // headerless files address columns by 0-based index
  try {
    const std::size_t k = std::stoul(wanted);
    if (k >= names.size()) throw MissingColumnError(wanted);
    return k;
  } catch (const std::logic_error&) {
    throw MissingColumnError(wanted);
  }
}

}  // namespace

IngestResult ingest(const IngestSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw IoError("cannot open data file: " + spec.path);

  std::string line;
  std::size_t lineno = 0;

  std::vector<std::string> first_row;
  if (!std::getline(in, line)) throw IoError("empty data file: " + spec.path);
  ++lineno;
  first_row = split_csv_line(line, lineno);

  std::size_t col_i, col_a, col_z;
  if (spec.header) {
    col_i = resolve_column(first_row, spec.outcome_column, true);
    col_a = resolve_column(first_row, spec.exposure_column, true);
    col_z = resolve_column(first_row, spec.instrument_column, true);
  } else {
    col_i = resolve_column(first_row, spec.outcome_column, false);
    col_a = resolve_column(first_row, spec.exposure_column, false);
    col_z = resolve_column(first_row, spec.instrument_column, false);
  }

  IngestReport report;
  std::vector<RawObservation> raw;

  auto consume_row = [&](const std::vector<std::string>& row, std::size_t ln) {
    ++report.n_read;
    const std::size_t needed = std::max({col_i, col_a, col_z});
    if (row.size() <= needed) {
      report.dropped.push_back({ln, "<row>", "short row"});
      ++report.n_dropped;
      return;
    }
    double z, a, i;
    if (!parse_double(row[col_z], z)) {
      report.dropped.push_back({ln, spec.instrument_column, trim(row[col_z])});
      ++report.n_dropped;
      return;
    }
    if (!parse_double(row[col_a], a)) {
      report.dropped.push_back({ln, spec.exposure_column, trim(row[col_a])});
      ++report.n_dropped;
      return;
    }
    if (!parse_double(row[col_i], i)) {
      report.dropped.push_back({ln, spec.outcome_column, trim(row[col_i])});
      ++report.n_dropped;
      return;
    }
    if (spec.exposure_threshold) a = apply_threshold(a, *spec.exposure_threshold);
    if (spec.outcome_threshold) i = apply_threshold(i, *spec.outcome_threshold);
    raw.push_back({z, a, i});
  };

  if (!spec.header) consume_row(first_row, lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    consume_row(split_csv_line(line, lineno), lineno);
  }

  return IngestResult{ObservationSet::validate(raw), std::move(report)};
}

}  // namespace ivnnt
