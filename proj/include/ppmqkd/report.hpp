#pragma once

#include "ppmqkd/keyrate.hpp"

#include <string>
#include <vector>

namespace ppmqkd {

/// Frozen CSV header; changing it is a schema version bump.
extern const char* const kReportCsvHeader;

/// Serializes reports with 9-significant-digit numeric formatting.
std::string reports_to_csv(const std::vector<KeyRateReport>& reports);
void write_reports_csv(const std::string& path, const std::vector<KeyRateReport>& reports);

/// JSON run summary: row count, config hash, code version, per-point errors.
std::string reports_summary_json(const std::vector<KeyRateReport>& reports,
                                 const std::string& config_hash);
void write_summary_json(const std::string& path, const std::vector<KeyRateReport>& reports,
                        const std::string& config_hash);

/// Parses CSV produced by reports_to_csv (header checked); used for
/// round-trip tests and downstream tooling.
std::vector<KeyRateReport> parse_reports_csv(const std::string& text);

} // namespace ppmqkd
