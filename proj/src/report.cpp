#include "ppmqkd/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppmqkd {

const char* const kReportCsvHeader =
    "N,distance_km,Q_mu,Q1_low,chi_E,chi1_up,I_AB,pie,key_rate_bps,photon_rate_hz,seed,mode,error";

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

std::string reports_to_csv(const std::vector<KeyRateReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("reports_to_csv: empty report list");
    std::ostringstream os;
    os << kReportCsvHeader << "\n";
    for (const auto& r : reports) {
        std::string err = r.error;
        for (char& c : err)
            if (c == ',' || c == '\n') c = ';';
        os << r.n_bins << ',' << fmt9(r.distance_km) << ',' << fmt9(r.q_mu) << ','
           << fmt9(r.q1_low) << ',' << fmt9(r.chi_e) << ',' << fmt9(r.chi1_up) << ','
           << fmt9(r.i_ab) << ',' << fmt9(r.pie) << ',' << fmt9(r.key_rate_bps) << ','
           << fmt9(r.photon_rate_hz) << ',' << r.seed << ',' << r.mode << ',' << err << "\n";
    }
    return os.str();
}

void write_reports_csv(const std::string& path, const std::vector<KeyRateReport>& reports) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << reports_to_csv(reports);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string reports_summary_json(const std::vector<KeyRateReport>& reports,
                                 const std::string& config_hash) {
    if (reports.empty()) throw std::invalid_argument("reports_summary_json: empty report list");
    nlohmann::json j;
    j["version"] = kVersion;
    j["config_hash"] = config_hash;
    j["rows"] = reports.size();
    std::size_t failures = 0;
    for (const auto& r : reports)
        if (!r.error.empty()) ++failures;
    j["point_failures"] = failures;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : reports) {
        rows.push_back({{"N", r.n_bins},
                        {"distance_km", r.distance_km},
                        {"key_rate_bps", r.key_rate_bps},
                        {"pie", r.pie},
                        {"chi_E", r.chi_e},
                        {"error", r.error}});
    }
    j["points"] = rows;
    return j.dump(2);
}

void write_summary_json(const std::string& path, const std::vector<KeyRateReport>& reports,
                        const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << reports_summary_json(reports, config_hash);
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<KeyRateReport> parse_reports_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kReportCsvHeader)
        throw std::runtime_error("parse_reports_csv: unexpected header");
    std::vector<KeyRateReport> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 13) throw std::runtime_error("parse_reports_csv: bad field count");
        KeyRateReport r;
        r.n_bins = std::stoi(f[0]);
        r.distance_km = std::stod(f[1]);
        r.q_mu = std::stod(f[2]);
        r.q1_low = std::stod(f[3]);
        r.chi_e = std::stod(f[4]);
        r.chi1_up = std::stod(f[5]);
        r.i_ab = std::stod(f[6]);
        r.pie = std::stod(f[7]);
        r.key_rate_bps = std::stod(f[8]);
        r.photon_rate_hz = std::stod(f[9]);
        r.seed = std::stoull(f[10]);
        r.mode = f[11];
        r.error = f[12];
        out.push_back(r);
    }
    return out;
}

} // namespace ppmqkd
