#ifndef IVNNT_REPORT_HPP
#define IVNNT_REPORT_HPP

#include <string>

#include "ivnnt/dgp.hpp"
#include "ivnnt/harness.hpp"
#include "ivnnt/ingest.hpp"

namespace ivnnt {

// locale-independent numeric formatting (dot decimal separator, >= 10
// significant digits); non-finite values rendered as inf/-inf/nan
std::string format_double(double v);

// DgpTruth as JSON; when several roots exist, all of them are listed and the
// selected one fills the primary fields
std::string truth_json(const std::vector<DgpTruth>& roots, int selected, const DgpConfig& config);

std::string estimate_report_json(const EstimateReport& rep, const IngestReport* ingest_report);

std::string summary_csv(const StudySummary& s);
std::string summary_json(const StudySummary& s, const StudyConfig& config);
std::string estimates_csv(const StudySummary& s);

void write_file(const std::string& path, const std::string& content);

}  // namespace ivnnt

#endif
