#pragma once

#include "ppmqkd/keyrate.hpp"

#include <string>
#include <vector>

namespace ppmqkd {

/// Config loading failure carrying every violated invariant, not just the
/// first one.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const { return messages_; }

private:
    static std::string join(const std::vector<std::string>& m);
    std::vector<std::string> messages_;
};

/// Full run description: every module's parameters plus run control. Field
/// defaults reproduce the reference experiment (794 ps bins, 1.26 GHz gating,
/// 18% detectors, 7:3 source ratio, mu = 0.5, nu_bin = 0.005, the 1e-10
/// post-processing epsilons, eps_PE = 1e-5 with m = 100, eps_decoy = 1e-6).
struct RunConfig {
    PointInputs point;
    std::string scenario = "custom";
    std::vector<double> distances_km;  ///< custom-scenario sweep axis (empty: single point)
    std::string out_prefix = "ppmqkd_out";

    /// Parses, applies defaults, and validates; throws ConfigError listing
    /// all violations.
    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::string& path);

    std::string to_json_text() const;
    /// FNV-1a hash of the canonical serialized form, as 16 hex digits.
    std::string config_hash() const;
};

} // namespace ppmqkd
